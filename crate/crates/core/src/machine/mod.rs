//! Nondeterministic and affine Turing machines.
//!
//! A [`Machine`] is generic over the annotation carried by each transition:
//! [`Ntm`] uses branch labels, [`AffTm`] uses exact rational weights.
//! Accept and reject states are halting and absorbing: they carry no explicit
//! transitions and behave as a weight-1 stay-put self loop.

mod exec;
mod gap;
mod uniformize;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use sha2::{Digest, Sha256};

use crate::rational::{common_denominator, format_fraction, Rational};

pub use exec::{
    check_proper, enumerate_inputs, run_afftm, step_frontier, Configuration, ProperReport, RunMode,
    RunResult, Tape, WeightedConfigSet,
};
pub use gap::{run_ntm_gap, run_ntm_gap_frontier, GapResult};
pub use uniformize::{is_uniform, uniformize_ntm, Uniformized};

pub type StateId = usize;
pub type SymbolId = usize;
pub type Label = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    Left,
    Stay,
    Right,
}

impl Move {
    pub fn delta(self) -> i64 {
        match self {
            Move::Left => -1,
            Move::Stay => 0,
            Move::Right => 1,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Move::Left => "L",
            Move::Stay => "S",
            Move::Right => "R",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "L" => Some(Move::Left),
            "S" => Some(Move::Stay),
            "R" => Some(Move::Right),
            _ => None,
        }
    }
}

/// One transition out of a `(state, symbol)` row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule<A> {
    pub next: StateId,
    pub write: SymbolId,
    pub movement: Move,
    pub annotation: A,
}

/// Explicit step budget per input length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimeBound {
    Constant(usize),
    /// Entry `n` is the budget for inputs of length `n`.
    PerLength(Vec<usize>),
    /// `constant + slope * n`.
    Affine { constant: usize, slope: usize },
}

impl TimeBound {
    pub fn steps_for(&self, input_len: usize) -> Result<usize, MachineError> {
        match self {
            TimeBound::Constant(t) => Ok(*t),
            TimeBound::PerLength(table) => table
                .get(input_len)
                .copied()
                .ok_or(MachineError::NoBudget { input_len }),
            TimeBound::Affine { constant, slope } => Ok(constant + slope * input_len),
        }
    }

    /// Largest budget over all lengths, when it exists.
    pub fn max_steps(&self) -> Option<usize> {
        match self {
            TimeBound::Constant(t) => Some(*t),
            TimeBound::PerLength(table) => table.iter().copied().max(),
            TimeBound::Affine { slope: 0, constant } => Some(*constant),
            TimeBound::Affine { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MachineError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("accept and reject must be distinct states")]
    AcceptEqualsReject,
    #[error("halting state `{0}` must not have outgoing transitions")]
    HaltingHasRules(String),
    #[error("no step budget for inputs of length {input_len}")]
    NoBudget { input_len: usize },
    #[error("head left the window [-{window}, {window}] on branch {branch}")]
    WindowOverflow { window: usize, branch: String },
    #[error("branch {branch} has not halted after {steps} steps")]
    Timeout { steps: usize, branch: String },
    #[error("no transition for state `{state}` reading `{symbol}`")]
    MissingTransition { state: String, symbol: String },
    #[error("branch {branch} halted at step {halted_at}, not at the uniform depth {depth}")]
    NonUniformLength {
        branch: String,
        halted_at: usize,
        depth: usize,
    },
    #[error("machine is invalid: {0}")]
    Invalid(String),
    #[error("label {label} is repeated or out of range in row ({state}, {symbol})")]
    BadLabel {
        state: String,
        symbol: String,
        label: Label,
    },
    #[error("unbounded step budget: {0}")]
    Unbounded(String),
}

/// A Turing machine over a finite alphabet with one accept and one reject state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Machine<A> {
    alphabet: Vec<String>,
    blank: SymbolId,
    states: Vec<String>,
    initial: StateId,
    accept: StateId,
    reject: StateId,
    time_bound: TimeBound,
    rules: BTreeMap<(StateId, SymbolId), Vec<Rule<A>>>,
    /// Free-form metadata; compiled machines record their construction here.
    pub provenance: BTreeMap<String, String>,
}

pub type Ntm = Machine<Label>;
pub type AffTm = Machine<Rational>;

impl<A: Clone> Machine<A> {
    pub fn new(
        alphabet: &[&str],
        blank: &str,
        states: &[&str],
        initial: &str,
        accept: &str,
        reject: &str,
        time_bound: TimeBound,
    ) -> Result<Self, MachineError> {
        Self::from_names(
            alphabet.iter().map(|s| s.to_string()).collect(),
            blank,
            states.iter().map(|s| s.to_string()).collect(),
            initial,
            accept,
            reject,
            time_bound,
        )
    }

    pub fn from_names(
        alphabet: Vec<String>,
        blank: &str,
        states: Vec<String>,
        initial: &str,
        accept: &str,
        reject: &str,
        time_bound: TimeBound,
    ) -> Result<Self, MachineError> {
        check_unique(&alphabet)?;
        check_unique(&states)?;
        let find_state = |name: &str| {
            states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| MachineError::UnknownState(name.into()))
        };
        let blank = alphabet
            .iter()
            .position(|s| s == blank)
            .ok_or_else(|| MachineError::UnknownSymbol(blank.into()))?;
        let initial = find_state(initial)?;
        let accept = find_state(accept)?;
        let reject = find_state(reject)?;
        if accept == reject {
            return Err(MachineError::AcceptEqualsReject);
        }
        Ok(Machine {
            alphabet,
            blank,
            states,
            initial,
            accept,
            reject,
            time_bound,
            rules: BTreeMap::new(),
            provenance: BTreeMap::new(),
        })
    }

    /// Adds a transition by names.
    pub fn add_rule(
        &mut self,
        from: &str,
        read: &str,
        to: &str,
        write: &str,
        movement: Move,
        annotation: A,
    ) -> Result<(), MachineError> {
        let from = self.state_id(from)?;
        let read = self.symbol_id(read)?;
        let next = self.state_id(to)?;
        let write = self.symbol_id(write)?;
        self.push_rule(
            from,
            read,
            Rule {
                next,
                write,
                movement,
                annotation,
            },
        )
    }

    pub fn push_rule(
        &mut self,
        from: StateId,
        read: SymbolId,
        rule: Rule<A>,
    ) -> Result<(), MachineError> {
        if from >= self.states.len() || rule.next >= self.states.len() {
            return Err(MachineError::UnknownState(format!("#{}", from.max(rule.next))));
        }
        if read >= self.alphabet.len() || rule.write >= self.alphabet.len() {
            return Err(MachineError::UnknownSymbol(format!("#{}", read.max(rule.write))));
        }
        if self.is_halting(from) {
            return Err(MachineError::HaltingHasRules(self.states[from].clone()));
        }
        self.rules.entry((from, read)).or_default().push(rule);
        Ok(())
    }

    pub fn state_id(&self, name: &str) -> Result<StateId, MachineError> {
        self.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| MachineError::UnknownState(name.into()))
    }

    pub fn symbol_id(&self, name: &str) -> Result<SymbolId, MachineError> {
        self.alphabet
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| MachineError::UnknownSymbol(name.into()))
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn blank(&self) -> SymbolId {
        self.blank
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn accept(&self) -> StateId {
        self.accept
    }

    pub fn reject(&self) -> StateId {
        self.reject
    }

    pub fn time_bound(&self) -> &TimeBound {
        &self.time_bound
    }

    pub fn set_time_bound(&mut self, bound: TimeBound) {
        self.time_bound = bound;
    }

    pub fn is_halting(&self, state: StateId) -> bool {
        state == self.accept || state == self.reject
    }

    pub fn row(&self, state: StateId, symbol: SymbolId) -> &[Rule<A>] {
        self.rules
            .get(&(state, symbol))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn row_mut(&mut self, state: StateId, symbol: SymbolId) -> Option<&mut Vec<Rule<A>>> {
        self.rules.get_mut(&(state, symbol))
    }

    pub fn rows(&self) -> impl Iterator<Item = (&(StateId, SymbolId), &Vec<Rule<A>>)> {
        self.rules.iter()
    }

    pub fn transition_count(&self) -> usize {
        self.rules.values().map(Vec::len).sum()
    }

    /// Input alphabet: every symbol except the blank.
    pub fn input_symbols(&self) -> Vec<SymbolId> {
        (0..self.alphabet.len()).filter(|&s| s != self.blank).collect()
    }

    /// Maps an input string to symbols, one character per symbol.
    pub fn parse_input(&self, input: &str) -> Result<Vec<SymbolId>, MachineError> {
        let mut buf = [0u8; 4];
        input
            .chars()
            .map(|c| self.symbol_id(c.encode_utf8(&mut buf)))
            .collect()
    }

    pub fn render_input(&self, input: &[SymbolId]) -> String {
        input.iter().map(|&s| self.alphabet[s].as_str()).collect()
    }

    /// Largest row size, counting halting states as a single self loop.
    pub fn max_fanout(&self) -> usize {
        self.rules.values().map(Vec::len).max().unwrap_or(0).max(1)
    }

    pub(crate) fn describe(&self, state: StateId, head: i64) -> String {
        format!("(state {}, head {})", self.states[state], head)
    }

    fn canonical_text(&self, annotation: impl Fn(&A) -> String) -> String {
        let mut out = String::new();
        let _ = write!(out, "alphabet:{:?};blank:{};", self.alphabet, self.blank);
        let _ = write!(
            out,
            "states:{:?};initial:{};accept:{};reject:{};bound:{:?};",
            self.states, self.initial, self.accept, self.reject, self.time_bound
        );
        for ((q, a), row) in &self.rules {
            for rule in row {
                let _ = write!(
                    out,
                    "{q},{a}->{},{},{},{};",
                    rule.next,
                    rule.write,
                    rule.movement.code(),
                    annotation(&rule.annotation)
                );
            }
        }
        out
    }
}

fn check_unique(names: &[String]) -> Result<(), MachineError> {
    for (i, name) in names.iter().enumerate() {
        if names[..i].contains(name) {
            return Err(MachineError::DuplicateName(name.clone()));
        }
    }
    Ok(())
}

pub fn sha256_hex(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    let mut out = String::with_capacity(64);
    for byte in digest.iter() {
        let _ = write!(out, "{byte:02x}");
    }
    out
}

impl Ntm {
    /// Stable content hash (hex SHA-256 of a canonical rendering).
    pub fn fingerprint(&self) -> String {
        sha256_hex(&(String::from("ntm|") + &self.canonical_text(|l| l.to_string())))
    }

    /// Fan-out N: the common row size when uniform, otherwise the maximum.
    pub fn fanout(&self) -> usize {
        self.max_fanout()
    }

    /// Checks that every present row has exactly `N` transitions labelled `1..=N`.
    pub fn check_label_uniformity(&self) -> Result<usize, MachineError> {
        let n = self.fanout();
        for (&(q, a), row) in &self.rules {
            let mut seen = alloc::vec![false; n];
            if row.len() != n {
                return Err(MachineError::Invalid(format!(
                    "row ({}, {}) has {} transitions, expected fan-out {n}",
                    self.states[q],
                    self.alphabet[a],
                    row.len()
                )));
            }
            for rule in row {
                let label = rule.annotation;
                if label == 0 || label as usize > n || seen[label as usize - 1] {
                    return Err(MachineError::BadLabel {
                        state: self.states[q].clone(),
                        symbol: self.alphabet[a].clone(),
                        label,
                    });
                }
                seen[label as usize - 1] = true;
            }
        }
        Ok(n)
    }

    /// Row sorted by label.
    pub fn labelled_row(&self, state: StateId, symbol: SymbolId) -> Vec<&Rule<Label>> {
        let mut row: Vec<_> = self.row(state, symbol).iter().collect();
        row.sort_by_key(|r| r.annotation);
        row
    }
}

/// One problem found by [`validate_afftm`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A non-halting row whose weights do not sum to exactly 1.
    RowSum {
        state: String,
        symbol: String,
        sum: Rational,
    },
    /// Recorded common denominator differs from the one implied by the weights.
    DenominatorMismatch { recorded: String, actual: BigInt },
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Violation::RowSum { state, symbol, sum } => {
                write!(f, "sum = {} at ({state}, {symbol})", format_fraction(sum))
            }
            Violation::DenominatorMismatch { recorded, actual } => {
                write!(f, "recorded common denominator {recorded} but weights need {actual}")
            }
        }
    }
}

pub const PROVENANCE_DENOMINATOR: &str = "common_denominator";

/// Checks affinity of every non-halting row. An empty report means valid.
///
/// Halting states are absorbing by construction ([`Machine::push_rule`]
/// refuses rules out of them), so only row sums and the recorded common
/// denominator remain to be checked.
pub fn validate_afftm(machine: &AffTm) -> Vec<Violation> {
    let mut report = Vec::new();
    for q in 0..machine.states.len() {
        if machine.is_halting(q) {
            continue;
        }
        for a in 0..machine.alphabet.len() {
            let sum: Rational = machine
                .row(q, a)
                .iter()
                .map(|r| &r.annotation)
                .fold(Rational::zero(), |acc, w| acc + w);
            if !sum.is_one() {
                report.push(Violation::RowSum {
                    state: machine.states[q].clone(),
                    symbol: machine.alphabet[a].clone(),
                    sum,
                });
            }
        }
    }
    if let Some(recorded) = machine.provenance.get(PROVENANCE_DENOMINATOR) {
        let actual = machine.common_denominator();
        if recorded != &actual.to_string() {
            report.push(Violation::DenominatorMismatch {
                recorded: recorded.clone(),
                actual,
            });
        }
    }
    report
}

impl AffTm {
    pub fn fingerprint(&self) -> String {
        sha256_hex(&(String::from("afftm|") + &self.canonical_text(format_fraction)))
    }

    /// The integer `M`: least common denominator of all transition weights.
    pub fn common_denominator(&self) -> BigInt {
        common_denominator(self.rules.values().flatten().map(|r| &r.annotation))
    }

    pub fn ensure_valid(&self) -> Result<(), MachineError> {
        let report = validate_afftm(self);
        if report.is_empty() {
            Ok(())
        } else {
            let text: Vec<String> = report.iter().map(|v| v.to_string()).collect();
            Err(MachineError::Invalid(text.join("; ")))
        }
    }

    /// Row with the implicit absorbing self loop for halting states.
    pub(crate) fn effective_row(&self, state: StateId, symbol: SymbolId) -> Vec<Rule<Rational>> {
        if self.is_halting(state) {
            alloc::vec![Rule {
                next: state,
                write: symbol,
                movement: Move::Stay,
                annotation: Rational::one(),
            }]
        } else {
            self.row(state, symbol).to_vec()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn two_row(weights: &[Rational]) -> AffTm {
        let mut m = AffTm::new(&["_"], "_", &["q", "A", "R"], "q", "A", "R", TimeBound::Constant(1))
            .unwrap();
        for (i, w) in weights.iter().enumerate() {
            let to = if i % 2 == 0 { "A" } else { "R" };
            m.add_rule("q", "_", to, "_", Move::Stay, w.clone()).unwrap();
        }
        m
    }

    #[test]
    fn affine_rows_with_negative_weights_are_valid() {
        assert!(validate_afftm(&two_row(&[int(2), int(-1)])).is_empty());
        assert!(validate_afftm(&two_row(&[frac(1, 2), frac(1, 2)])).is_empty());
    }

    #[test]
    fn non_affine_row_is_reported_with_its_sum() {
        let report = validate_afftm(&two_row(&[int(2), int(-2)]));
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].to_string(), "sum = 0/1 at (q, _)");
    }

    #[test]
    fn missing_row_counts_as_zero_sum() {
        let m = two_row(&[]);
        assert_eq!(validate_afftm(&m).len(), 1);
    }

    #[test]
    fn halting_states_refuse_rules() {
        let mut m = two_row(&[int(1)]);
        let err = m.add_rule("A", "_", "R", "_", Move::Stay, int(1)).unwrap_err();
        assert_eq!(err, MachineError::HaltingHasRules("A".into()));
    }

    #[test]
    fn recorded_denominator_is_checked() {
        let mut m = two_row(&[frac(1, 2), frac(1, 2)]);
        m.provenance.insert(PROVENANCE_DENOMINATOR.into(), "2".into());
        assert!(validate_afftm(&m).is_empty());
        m.provenance.insert(PROVENANCE_DENOMINATOR.into(), "3".into());
        assert_eq!(validate_afftm(&m).len(), 1);
    }

    #[test]
    fn fingerprint_changes_with_weights() {
        let a = two_row(&[frac(1, 2), frac(1, 2)]);
        let b = two_row(&[int(2), int(-1)]);
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint(), a.clone().fingerprint());
    }
}
