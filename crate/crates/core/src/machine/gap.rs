//! Gap functions of nondeterministic machines by exhaustive branch counting.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{Configuration, MachineError, Ntm, StateId, SymbolId};

/// Branch counts of an NTM run; `gap = accept_count - reject_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapResult {
    pub accept_count: BigInt,
    pub reject_count: BigInt,
    pub gap: BigInt,
    pub branch_count: BigInt,
    /// Step budget `T(n)` used for the run.
    pub depth: usize,
    /// Every branch halted at exactly `depth` and every visited row had the
    /// full fan-out.
    pub uniform: bool,
    /// First branch (in label order) that halted early, with its halting step.
    pub short_branch: Option<(String, usize)>,
}

impl GapResult {
    fn new(depth: usize) -> Self {
        GapResult {
            accept_count: BigInt::zero(),
            reject_count: BigInt::zero(),
            gap: BigInt::zero(),
            branch_count: BigInt::zero(),
            depth,
            uniform: true,
            short_branch: None,
        }
    }

    fn finish(mut self) -> Self {
        self.gap = &self.accept_count - &self.reject_count;
        self.branch_count = &self.accept_count + &self.reject_count;
        self
    }

    /// Turns a non-uniform halting pattern into an error.
    pub fn ensure_uniform_length(&self) -> Result<(), MachineError> {
        match &self.short_branch {
            Some((branch, halted_at)) => Err(MachineError::NonUniformLength {
                branch: branch.clone(),
                halted_at: *halted_at,
                depth: self.depth,
            }),
            None => Ok(()),
        }
    }
}

struct Table {
    symbols: usize,
    rows: Vec<Vec<(StateId, SymbolId, i64)>>,
    fanout: usize,
}

impl Table {
    fn new(machine: &Ntm) -> Self {
        let symbols = machine.alphabet().len();
        let mut rows = alloc::vec![Vec::new(); machine.states().len() * symbols];
        for (&(q, a), _) in machine.rows() {
            rows[q * symbols + a] = machine
                .labelled_row(q, a)
                .into_iter()
                .map(|r| (r.next, r.write, r.movement.delta()))
                .collect();
        }
        Table {
            symbols,
            rows,
            fanout: machine.fanout(),
        }
    }
}

struct Walk<'a> {
    machine: &'a Ntm,
    table: Table,
    budget: usize,
    tape: Vec<SymbolId>,
    labels: Vec<usize>,
    accept: u64,
    reject: u64,
    result: GapResult,
}

impl Walk<'_> {
    fn branch_name(&self) -> String {
        let mut out = String::from("[");
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&alloc::format!("{}", l + 1));
        }
        out.push(']');
        out
    }

    fn visit(&mut self, state: StateId, head: usize, steps: usize) -> Result<(), MachineError> {
        if self.machine.is_halting(state) {
            if state == self.machine.accept() {
                self.accept += 1;
            } else {
                self.reject += 1;
            }
            if steps != self.budget {
                self.result.uniform = false;
                if self.result.short_branch.is_none() {
                    self.result.short_branch = Some((self.branch_name(), steps));
                }
            }
            return Ok(());
        }
        let cell = head as i64 - self.budget as i64;
        if steps >= self.budget {
            return Err(MachineError::Timeout {
                steps: self.budget,
                branch: self.branch_name() + &self.machine.describe(state, cell),
            });
        }
        let read = self.tape[head];
        let index = state * self.table.symbols + read;
        let fanout = self.table.rows[index].len();
        if fanout == 0 {
            return Err(MachineError::MissingTransition {
                state: self.machine.states()[state].clone(),
                symbol: self.machine.alphabet()[read].clone(),
            });
        }
        if fanout != self.table.fanout {
            self.result.uniform = false;
        }
        for i in 0..fanout {
            let (next, write, delta) = self.table.rows[index][i];
            let target = head as i64 + delta;
            if target < 0 || target as usize >= self.tape.len() {
                return Err(MachineError::WindowOverflow {
                    window: self.budget,
                    branch: self.branch_name() + &self.machine.describe(state, cell),
                });
            }
            self.tape[head] = write;
            self.labels.push(i);
            self.visit(next, target as usize, steps + 1)?;
            self.labels.pop();
            self.tape[head] = read;
        }
        Ok(())
    }
}

/// Counts accepting and rejecting branches by depth-first enumeration.
///
/// Branches may halt before the budget; that is reported through
/// [`GapResult::uniform`] rather than as an error. A branch still running
/// after `T(n)` steps is a timeout.
pub fn run_ntm_gap(machine: &Ntm, input: &[SymbolId]) -> Result<GapResult, MachineError> {
    let budget = machine.time_bound().steps_for(input.len())?;
    let mut tape = alloc::vec![machine.blank(); 2 * budget + 1];
    // cells past `budget` are out of reach within `T(n)` steps
    for (i, &s) in input.iter().enumerate().take(budget + 1) {
        tape[budget + i] = s;
    }
    let mut walk = Walk {
        machine,
        table: Table::new(machine),
        budget,
        tape,
        labels: Vec::new(),
        accept: 0,
        reject: 0,
        result: GapResult::new(budget),
    };
    walk.visit(machine.initial(), budget, 0)?;
    let mut result = walk.result;
    result.accept_count = BigInt::from(walk.accept);
    result.reject_count = BigInt::from(walk.reject);
    Ok(result.finish())
}

/// Same counts, computed by evolving merged configurations with integer
/// multiplicities. Much faster when many branches reconverge.
pub fn run_ntm_gap_frontier(machine: &Ntm, input: &[SymbolId]) -> Result<GapResult, MachineError> {
    let budget = machine.time_bound().steps_for(input.len())?;
    let fanout = machine.fanout();
    let mut result = GapResult::new(budget);
    let mut frontier: BTreeMap<Configuration, BigInt> = BTreeMap::new();
    frontier.insert(Configuration::initial(machine, input), BigInt::one());
    for _ in 0..budget {
        let mut next: BTreeMap<Configuration, BigInt> = BTreeMap::new();
        let mut moved = false;
        for (config, count) in frontier {
            if machine.is_halting(config.state) {
                *next.entry(config).or_default() += count;
                continue;
            }
            moved = true;
            let symbol = config.tape.read(config.head, machine.blank());
            let row = machine.row(config.state, symbol);
            if row.is_empty() {
                return Err(MachineError::MissingTransition {
                    state: machine.states()[config.state].clone(),
                    symbol: machine.alphabet()[symbol].clone(),
                });
            }
            if row.len() != fanout {
                result.uniform = false;
            }
            for rule in row {
                let head = config.head + rule.movement.delta();
                if head.unsigned_abs() as usize > budget {
                    return Err(MachineError::WindowOverflow {
                        window: budget,
                        branch: machine.describe(config.state, config.head),
                    });
                }
                let mut tape = config.tape.clone();
                tape.write(config.head, rule.write, machine.blank());
                let successor = Configuration {
                    head,
                    state: rule.next,
                    tape,
                    steps_taken: config.steps_taken + 1,
                };
                *next.entry(successor).or_default() += &count;
            }
        }
        frontier = next;
        if !moved {
            break;
        }
    }
    for (config, count) in frontier {
        if !machine.is_halting(config.state) {
            return Err(MachineError::Timeout {
                steps: budget,
                branch: machine.describe(config.state, config.head),
            });
        }
        if config.steps_taken != budget {
            result.uniform = false;
            if result.short_branch.is_none() {
                result.short_branch = Some((
                    machine.describe(config.state, config.head),
                    config.steps_taken,
                ));
            }
        }
        if config.state == machine.accept() {
            result.accept_count += count;
        } else {
            result.reject_count += count;
        }
    }
    Ok(result.finish())
}
