//! CNF formulas and the demo machine whose gap counts satisfying assignments.
//!
//! A UNIQUE-SAT instance promises zero or one satisfying assignment; the
//! machine itself works on any formula, so `x1 | x2` simply has gap 3.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::machine::{MachineError, Move, Ntm, Rule, TimeBound};

/// Largest number of variables the demo machine accepts. The assignment is
/// held in finite control, so the state count is `2^(v+1) + 1`.
pub const MAX_VARIABLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SatError {
    #[error("literal {literal} refers to a variable outside 1..={vars}")]
    BadLiteral { literal: i32, vars: usize },
    #[error("{0} variables is over the limit of {MAX_VARIABLES}")]
    TooManyVariables(usize),
    #[error("cannot parse clause `{0}`")]
    Parse(String),
    #[error(transparent)]
    Machine(#[from] MachineError),
}

/// Conjunction of clauses; literal `k` is `x_k`, `-k` is its negation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf {
    pub vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl Cnf {
    pub fn new(vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self, SatError> {
        for &literal in clauses.iter().flatten() {
            if literal == 0 || literal.unsigned_abs() as usize > vars {
                return Err(SatError::BadLiteral { literal, vars });
            }
        }
        Ok(Cnf { vars, clauses })
    }

    /// Parses `"1 2 & -1"`: clauses separated by `&`, literals by spaces.
    pub fn parse(vars: usize, text: &str) -> Result<Self, SatError> {
        let clauses = text
            .split('&')
            .map(|clause| {
                clause
                    .split_whitespace()
                    .map(|lit| lit.parse::<i32>().map_err(|_| SatError::Parse(clause.trim().into())))
                    .collect::<Result<Vec<i32>, SatError>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Cnf::new(vars, clauses)
    }

    pub fn render(&self) -> String {
        let clauses: Vec<String> = self
            .clauses
            .iter()
            .map(|c| {
                let lits: Vec<String> = c.iter().map(|l| format!("{l}")).collect();
                lits.join(" ")
            })
            .collect();
        clauses.join(" & ")
    }

    /// Bit `i` of `assignment` (from the least significant) is `x_{i+1}`.
    pub fn satisfied_by(&self, assignment: u64) -> bool {
        self.clauses.iter().all(|clause| {
            clause.iter().any(|&lit| {
                let value = (assignment >> (lit.unsigned_abs() - 1)) & 1 == 1;
                value == (lit > 0)
            })
        })
    }

    pub fn count_satisfying(&self) -> u64 {
        (0..1u64 << self.vars).filter(|&a| self.satisfied_by(a)).count() as u64
    }
}

/// State after choosing the first `bits.len()` variables.
fn prefix_state(bits: &str) -> String {
    format!("x{bits}")
}

/// The machine guesses `x_1 .. x_v` one per step, then halts: satisfying
/// assignments go to `ACCEPT` on a single branch, the others split into an
/// `ACCEPT` and a `REJECT` branch that cancel in the gap. Budget `v + 1`.
pub fn build_unique_sat_ntm(formula: &Cnf) -> Result<Ntm, SatError> {
    let v = formula.vars;
    if v > MAX_VARIABLES {
        return Err(SatError::TooManyVariables(v));
    }
    let mut prefixes: Vec<String> = alloc::vec![String::new()];
    let mut level = alloc::vec![String::new()];
    for _ in 0..v {
        level = level
            .iter()
            .flat_map(|p| [format!("{p}0"), format!("{p}1")])
            .collect();
        prefixes.extend(level.iter().cloned());
    }
    let mut states: Vec<String> = prefixes.iter().map(|p| prefix_state(p)).collect();
    states.push("ACCEPT".into());
    states.push("REJECT".into());
    let mut m = Ntm::from_names(
        alloc::vec!["_".into()],
        "_",
        states,
        &prefix_state(""),
        "ACCEPT",
        "REJECT",
        TimeBound::Constant(v + 1),
    )?;
    let rule = |next: usize, label: u32| Rule {
        next,
        write: 0,
        movement: Move::Stay,
        annotation: label,
    };
    let accept = m.accept();
    let reject = m.reject();
    for p in &prefixes {
        let from = m.state_id(&prefix_state(p))?;
        if p.len() < v {
            for (label, bit) in [(1, '0'), (2, '1')] {
                let mut next = p.clone();
                next.push(bit);
                let to = m.state_id(&prefix_state(&next))?;
                m.push_rule(from, 0, rule(to, label))?;
            }
        } else {
            // x_1 is the first character
            let assignment = p
                .chars()
                .enumerate()
                .fold(0u64, |acc, (i, c)| acc | (((c == '1') as u64) << i));
            if formula.satisfied_by(assignment) {
                m.push_rule(from, 0, rule(accept, 1))?;
            } else {
                m.push_rule(from, 0, rule(accept, 1))?;
                m.push_rule(from, 0, rule(reject, 2))?;
            }
        }
    }
    m.provenance.insert("construction".into(), "unique-sat-demo".into());
    m.provenance.insert("formula".into(), formula.render());
    Ok(m)
}
