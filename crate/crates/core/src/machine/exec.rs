//! Exact execution of affine machines: branch enumeration and frontier evolution.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use super::{AffTm, Machine, MachineError, StateId, SymbolId};
use crate::rational::{frac, Rational};

/// Tape contents; cells not present hold the blank symbol.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tape {
    cells: BTreeMap<i64, SymbolId>,
}

impl Tape {
    pub fn with_input(input: &[SymbolId], blank: SymbolId) -> Self {
        let mut tape = Tape::default();
        for (i, &s) in input.iter().enumerate() {
            tape.write(i as i64, s, blank);
        }
        tape
    }

    pub fn read(&self, cell: i64, blank: SymbolId) -> SymbolId {
        self.cells.get(&cell).copied().unwrap_or(blank)
    }

    pub fn write(&mut self, cell: i64, symbol: SymbolId, blank: SymbolId) {
        if symbol == blank {
            self.cells.remove(&cell);
        } else {
            self.cells.insert(cell, symbol);
        }
    }

    /// Non-blank cells in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, SymbolId)> + '_ {
        self.cells.iter().map(|(&c, &s)| (c, s))
    }
}

/// A machine configuration. Ordering is structural so configurations can key
/// a sparse map.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub head: i64,
    pub state: StateId,
    pub tape: Tape,
    pub steps_taken: usize,
}

impl Configuration {
    pub fn initial<A: Clone>(machine: &Machine<A>, input: &[SymbolId]) -> Self {
        Configuration {
            head: 0,
            state: machine.initial(),
            tape: Tape::with_input(input, machine.blank()),
            steps_taken: 0,
        }
    }
}

/// Sparse affine combination of configurations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WeightedConfigSet {
    entries: BTreeMap<Configuration, Rational>,
}

impl WeightedConfigSet {
    pub fn singleton(config: Configuration) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(config, frac(1, 1));
        WeightedConfigSet { entries }
    }

    /// Adds `weight` to the entry for `config`, dropping it if it cancels to 0.
    pub fn add(&mut self, config: Configuration, weight: Rational) {
        if weight.is_zero() {
            return;
        }
        match self.entries.entry(config) {
            alloc::collections::btree_map::Entry::Vacant(v) => {
                v.insert(weight);
            }
            alloc::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += weight;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn total_weight(&self) -> Rational {
        self.entries.values().fold(Rational::zero(), |acc, w| acc + w)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Configuration, &Rational)> {
        self.entries.iter()
    }

    pub fn weight_of(&self, config: &Configuration) -> Option<&Rational> {
        self.entries.get(config)
    }
}

/// One synchronous step: every non-halted configuration is replaced by its
/// weighted successors; halted ones pass through untouched. `window` is the
/// half-width `t` of the admissible head range `[-t, t]`.
pub fn step_frontier(
    machine: &AffTm,
    frontier: &WeightedConfigSet,
    window: usize,
) -> Result<WeightedConfigSet, MachineError> {
    let mut next = WeightedConfigSet::default();
    for (config, weight) in frontier.iter() {
        if machine.is_halting(config.state) {
            next.add(config.clone(), weight.clone());
            continue;
        }
        let symbol = config.tape.read(config.head, machine.blank());
        let row = machine.row(config.state, symbol);
        if row.is_empty() {
            return Err(MachineError::MissingTransition {
                state: machine.states()[config.state].clone(),
                symbol: machine.alphabet()[symbol].clone(),
            });
        }
        for rule in row {
            let head = config.head + rule.movement.delta();
            if head.unsigned_abs() as usize > window {
                return Err(MachineError::WindowOverflow {
                    window,
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
            next.add(successor, weight * &rule.annotation);
        }
    }
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// Depth-first walk over every branch, multiplying weights along the way.
    Enumerate,
    /// Synchronous evolution of the merged configuration frontier.
    Frontier,
}

/// Outcome of an affine run.
///
/// In enumerate mode the signed decompositions and `branch_count` are per
/// branch; in frontier mode they are over the merged final configurations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub accept_weight: Rational,
    pub reject_weight: Rational,
    pub accept_positive: Rational,
    pub accept_negative: Rational,
    pub reject_positive: Rational,
    pub reject_negative: Rational,
    pub branch_count: usize,
    pub max_steps: usize,
}

impl RunResult {
    fn empty() -> Self {
        RunResult {
            accept_weight: Rational::zero(),
            reject_weight: Rational::zero(),
            accept_positive: Rational::zero(),
            accept_negative: Rational::zero(),
            reject_positive: Rational::zero(),
            reject_negative: Rational::zero(),
            branch_count: 0,
            max_steps: 0,
        }
    }

    fn record(&mut self, accepted: bool, weight: &Rational, steps: usize) {
        self.branch_count += 1;
        self.max_steps = self.max_steps.max(steps);
        let (total, pos, neg) = if accepted {
            (
                &mut self.accept_weight,
                &mut self.accept_positive,
                &mut self.accept_negative,
            )
        } else {
            (
                &mut self.reject_weight,
                &mut self.reject_positive,
                &mut self.reject_negative,
            )
        };
        *total += weight;
        if weight.is_negative() {
            *neg += weight.abs();
        } else {
            *pos += weight;
        }
    }
}

/// Runs a valid affine machine on `input`, returning exact acceptance and
/// rejection weights.
pub fn run_afftm(
    machine: &AffTm,
    input: &[SymbolId],
    mode: RunMode,
) -> Result<RunResult, MachineError> {
    machine.ensure_valid()?;
    let budget = machine.time_bound().steps_for(input.len())?;
    let start = Configuration::initial(machine, input);
    match mode {
        RunMode::Enumerate => {
            let mut result = RunResult::empty();
            enumerate(machine, start, Rational::from_integer(1.into()), budget, &mut result)?;
            Ok(result)
        }
        RunMode::Frontier => {
            let mut frontier = WeightedConfigSet::singleton(start);
            let mut steps = 0;
            while steps < budget && frontier.iter().any(|(c, _)| !machine.is_halting(c.state)) {
                frontier = step_frontier(machine, &frontier, budget)?;
                steps += 1;
            }
            let mut result = RunResult::empty();
            for (config, weight) in frontier.iter() {
                if !machine.is_halting(config.state) {
                    return Err(MachineError::Timeout {
                        steps: budget,
                        branch: machine.describe(config.state, config.head),
                    });
                }
                result.record(config.state == machine.accept(), weight, config.steps_taken);
            }
            result.max_steps = steps;
            Ok(result)
        }
    }
}

fn enumerate(
    machine: &AffTm,
    config: Configuration,
    weight: Rational,
    budget: usize,
    result: &mut RunResult,
) -> Result<(), MachineError> {
    if machine.is_halting(config.state) {
        result.record(config.state == machine.accept(), &weight, config.steps_taken);
        return Ok(());
    }
    if config.steps_taken >= budget {
        return Err(MachineError::Timeout {
            steps: budget,
            branch: machine.describe(config.state, config.head),
        });
    }
    let symbol = config.tape.read(config.head, machine.blank());
    for rule in machine.row(config.state, symbol) {
        let head = config.head + rule.movement.delta();
        if head.unsigned_abs() as usize > budget {
            return Err(MachineError::WindowOverflow {
                window: budget,
                branch: machine.describe(config.state, config.head),
            });
        }
        let mut tape = config.tape.clone();
        tape.write(config.head, rule.write, machine.blank());
        let child = Configuration {
            head,
            state: rule.next,
            tape,
            steps_taken: config.steps_taken + 1,
        };
        enumerate(machine, child, &weight * &rule.annotation, budget, result)?;
    }
    Ok(())
}

/// All strings over `symbols` of length `0..=max_len`, shortest first, then
/// lexicographic in symbol order.
pub fn enumerate_inputs(symbols: &[SymbolId], max_len: usize) -> Vec<Vec<SymbolId>> {
    let mut out = alloc::vec![Vec::new()];
    let mut layer = alloc::vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for prefix in &layer {
            for &s in symbols {
                let mut word: Vec<SymbolId> = prefix.clone();
                word.push(s);
                next.push(word);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProperReport {
    /// `0 <= alpha <= 1` on every tested input.
    pub proper: bool,
    /// `alpha` in `[0, 1/3]` or `[2/3, 1]` on every tested input.
    pub bounded_error: bool,
    pub improper_witness: Option<Vec<SymbolId>>,
    pub unbounded_witness: Option<Vec<SymbolId>>,
    pub evaluated: Vec<(Vec<SymbolId>, Rational)>,
}

/// Exhaustive desk-scale check of properness and bounded error on all inputs
/// of length at most `max_len`.
pub fn check_proper(machine: &AffTm, max_len: usize) -> Result<ProperReport, MachineError> {
    let zero = Rational::zero();
    let one = frac(1, 1);
    let third = frac(1, 3);
    let two_thirds = frac(2, 3);
    let mut report = ProperReport {
        proper: true,
        bounded_error: true,
        improper_witness: None,
        unbounded_witness: None,
        evaluated: Vec::new(),
    };
    for input in enumerate_inputs(&machine.input_symbols(), max_len) {
        let alpha = run_afftm(machine, &input, RunMode::Frontier)?.accept_weight;
        let proper = alpha >= zero && alpha <= one;
        let bounded = proper && (alpha <= third || alpha >= two_thirds);
        if !proper && report.improper_witness.is_none() {
            report.proper = false;
            report.improper_witness = Some(input.clone());
        }
        if !bounded && report.unbounded_witness.is_none() {
            report.bounded_error = false;
            report.unbounded_witness = Some(input.clone());
        }
        report.evaluated.push((input, alpha));
    }
    Ok(report)
}
