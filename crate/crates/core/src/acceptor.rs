//! Acceptor functions over the outcomes of the final measurement.
//!
//! An input is accepted with probability `sum of P(z) over z with a(z) = 0`.
//! The flipped reading (`a(z) = 1` accepts) is available as an option.

use alloc::collections::BTreeMap;
use alloc::string::String;

use num_traits::Zero;

use crate::compiler::Outcome;
use crate::rational::{frac, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutcomeLabel {
    Accept,
    Reject,
    None,
}

impl OutcomeLabel {
    pub const ALL: [OutcomeLabel; 3] = [OutcomeLabel::Accept, OutcomeLabel::Reject, OutcomeLabel::None];

    pub fn code(self) -> &'static str {
        match self {
            OutcomeLabel::Accept => "acc",
            OutcomeLabel::Reject => "rej",
            OutcomeLabel::None => "none",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.code() == code)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AcceptorError {
    #[error("acceptor is not defined on outcome `{0}`")]
    Partial(&'static str),
    #[error("acceptor value {value} on `{outcome}` is not 0 or 1")]
    NotBinary { outcome: String, value: u8 },
    #[error("unknown outcome `{0}`")]
    UnknownOutcome(String),
    #[error("unknown acceptor rule `{0}`")]
    UnknownRule(String),
}

/// A truth table `a: {acc, rej, none} -> {0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Acceptor {
    table: BTreeMap<OutcomeLabel, u8>,
}

impl Acceptor {
    pub fn from_table(entries: impl IntoIterator<Item = (OutcomeLabel, u8)>) -> Result<Self, AcceptorError> {
        let table: BTreeMap<OutcomeLabel, u8> = entries.into_iter().collect();
        for (label, &value) in &table {
            if value > 1 {
                return Err(AcceptorError::NotBinary {
                    outcome: label.code().into(),
                    value,
                });
            }
        }
        if let Some(missing) = OutcomeLabel::ALL.into_iter().find(|l| !table.contains_key(l)) {
            return Err(AcceptorError::Partial(missing.code()));
        }
        Ok(Acceptor { table })
    }

    /// `a(acc) = 0`, `a(rej) = a(none) = 1`.
    pub fn standard() -> Self {
        Acceptor::from_table([
            (OutcomeLabel::Accept, 0),
            (OutcomeLabel::Reject, 1),
            (OutcomeLabel::None, 1),
        ])
        .expect("total")
    }

    pub fn constant(value: u8) -> Result<Self, AcceptorError> {
        Acceptor::from_table(OutcomeLabel::ALL.map(|l| (l, value)))
    }

    /// Named rules: `standard`, `zero`, `one`.
    pub fn named(rule: &str) -> Result<Self, AcceptorError> {
        match rule {
            "standard" => Ok(Acceptor::standard()),
            "zero" => Acceptor::constant(0),
            "one" => Acceptor::constant(1),
            other => Err(AcceptorError::UnknownRule(other.into())),
        }
    }

    pub fn value(&self, label: OutcomeLabel) -> u8 {
        self.table[&label]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
    /// Strictly between the 1/3 and 2/3 thresholds.
    Undecided,
}

impl Decision {
    pub fn from_probability(p: &Rational) -> Self {
        if *p >= frac(2, 3) {
            Decision::Accept
        } else if *p <= frac(1, 3) {
            Decision::Reject
        } else {
            Decision::Undecided
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Decision::Accept => "accept",
            Decision::Reject => "reject",
            Decision::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub probability: Rational,
    pub decision: Decision,
}

pub fn evaluate_acceptor(outcome: &Outcome, acceptor: &Acceptor, accept_on_one: bool) -> Verdict {
    let accepting = if accept_on_one { 1 } else { 0 };
    let weights = [
        (OutcomeLabel::Accept, &outcome.accept),
        (OutcomeLabel::Reject, &outcome.reject),
        (OutcomeLabel::None, &outcome.none),
    ];
    let probability = weights
        .iter()
        .filter(|(label, _)| acceptor.value(*label) == accepting)
        .fold(Rational::zero(), |acc, (_, w)| acc + *w);
    Verdict {
        decision: Decision::from_probability(&probability),
        probability,
    }
}
