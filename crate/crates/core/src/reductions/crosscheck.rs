//! Exact cross-checks of the reduction identities on concrete inputs.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::One;

use super::gap_to_aff::FIRST_DAMPEN;
use super::{afftm_to_gap, gap_to_afftm, GapToAffSpec, ReductionError};
use crate::machine::{run_afftm, run_ntm_gap, run_ntm_gap_frontier, AffTm, Ntm, RunMode, SymbolId};
use crate::rational::{pow2, Rational};

#[derive(Debug, Clone, Copy)]
pub enum ReductionSource<'a> {
    Ntm(&'a Ntm),
    AffTm(&'a AffTm),
}

/// Test hook corrupting one weight of the machine handed to a construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    /// Adds 1 to the first weight and subtracts 1 from the second in one
    /// branching row (the first dampening row for compiled NTMs, the first
    /// branching row of an affine source). Row sums stay 1.
    ShiftBranchingRow,
}

#[derive(Debug, Clone)]
pub struct CrosscheckOptions {
    /// Dampening exponents tried for NTM sources.
    pub exponents: Vec<usize>,
    /// Also run NTM -> AffTM -> NTM when the final NTM is at most this deep.
    pub round_trip_depth: Option<usize>,
    pub mutation: Mutation,
}

impl Default for CrosscheckOptions {
    fn default() -> Self {
        CrosscheckOptions {
            exponents: alloc::vec![1, 2, 3],
            round_trip_depth: None,
            mutation: Mutation::None,
        }
    }
}

/// One identity instance: `lhs = rhs` must hold exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityCheck {
    pub identity: String,
    pub input: Vec<SymbolId>,
    pub parameters: BTreeMap<String, String>,
    pub lhs: Rational,
    pub rhs: Rational,
    pub holds: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CrosscheckReport {
    pub checks: Vec<IdentityCheck>,
    pub passed: bool,
    /// First input on which some identity failed.
    pub witness: Option<Vec<SymbolId>>,
    pub notes: Vec<String>,
}

impl CrosscheckReport {
    fn push(&mut self, check: IdentityCheck) {
        if !check.holds && self.witness.is_none() {
            self.witness = Some(check.input.clone());
        }
        self.checks.push(check);
    }
}

fn shift_first_branching_row(machine: &mut AffTm, preferred: Option<&str>) -> bool {
    let preferred = preferred.and_then(|name| machine.state_id(name).ok());
    let keys: Vec<(usize, usize)> = machine
        .rows()
        .filter(|(_, row)| row.len() >= 2)
        .map(|(&key, _)| key)
        .collect();
    let key = match preferred {
        Some(q) => keys.iter().copied().find(|&(s, _)| s == q),
        None => keys.first().copied(),
    };
    let Some((q, a)) = key else {
        return false;
    };
    let row = machine.row_mut(q, a).expect("row exists");
    row[0].annotation += Rational::one();
    row[1].annotation -= Rational::one();
    true
}

fn integer(value: &BigInt) -> Rational {
    Rational::from_integer(value.clone())
}

/// Verifies the reduction identities on every input.
///
/// NTM sources: `alpha(gap_to_afftm(N, p), x) = g(x) / 2^p` for each `p`, and
/// optionally the round trip `gap(afftm_to_gap(...)) = 4 M'^T' g(x) / 2^p`.
/// Affine sources: `gap(afftm_to_gap(M), x) = 4 M^T alpha(x)` and `h = 4 M^T`.
pub fn crosscheck_reductions(
    source: ReductionSource<'_>,
    inputs: &[Vec<SymbolId>],
    options: &CrosscheckOptions,
) -> Result<CrosscheckReport, ReductionError> {
    let mut report = CrosscheckReport {
        passed: true,
        ..CrosscheckReport::default()
    };
    if inputs.is_empty() {
        return Ok(report);
    }
    match source {
        ReductionSource::Ntm(ntm) => {
            for &p in &options.exponents {
                let mut compiled = gap_to_afftm(&GapToAffSpec::new(ntm, p))?;
                if options.mutation == Mutation::ShiftBranchingRow
                    && !shift_first_branching_row(&mut compiled, Some(FIRST_DAMPEN))
                {
                    report.notes.push(format!("p = {p}: no branching row to mutate"));
                }
                let scale = pow2(p);
                for input in inputs {
                    let gap = run_ntm_gap(ntm, input)?.gap;
                    let alpha = run_afftm(&compiled, input, RunMode::Frontier)?.accept_weight;
                    let expected = Rational::new(gap.clone(), scale.clone());
                    let mut parameters = BTreeMap::new();
                    parameters.insert("p".to_string(), p.to_string());
                    parameters.insert("g".to_string(), gap.to_string());
                    report.push(IdentityCheck {
                        identity: "alpha = g / 2^p".into(),
                        input: input.clone(),
                        parameters: parameters.clone(),
                        holds: alpha == expected,
                        lhs: alpha,
                        rhs: expected.clone(),
                    });
                    if let Some(cap) = options.round_trip_depth {
                        let back = afftm_to_gap(&compiled, input.len())?;
                        if back.spec.depth > cap {
                            report.notes.push(format!(
                                "p = {p}, |x| = {}: round trip skipped (depth {} > {cap})",
                                input.len(),
                                back.spec.depth
                            ));
                            continue;
                        }
                        let final_gap = run_ntm_gap_frontier(&back.ntm, input)?.gap;
                        let rhs = integer(&back.h) * &expected;
                        parameters.insert("M'".to_string(), back.spec.denominator.to_string());
                        parameters.insert("T'".to_string(), back.spec.budget.to_string());
                        parameters.insert("h".to_string(), back.h.to_string());
                        report.push(IdentityCheck {
                            identity: "gap' = 4 M'^T' g / 2^p".into(),
                            input: input.clone(),
                            parameters,
                            holds: integer(&final_gap) == rhs,
                            lhs: integer(&final_gap),
                            rhs,
                        });
                    }
                }
            }
        }
        ReductionSource::AffTm(machine) => {
            let mut fed = machine.clone();
            if options.mutation == Mutation::ShiftBranchingRow
                && !shift_first_branching_row(&mut fed, None)
            {
                report.notes.push("no branching row to mutate".into());
            }
            let mut built = BTreeMap::new();
            for input in inputs {
                let n = input.len();
                if let alloc::collections::btree_map::Entry::Vacant(slot) = built.entry(n) {
                    slot.insert(afftm_to_gap(&fed, n)?);
                }
                let construction = &built[&n];
                let alpha = run_afftm(machine, input, RunMode::Frontier)?.accept_weight;
                let gap = run_ntm_gap_frontier(&construction.ntm, input)?.gap;
                let t = machine.time_bound().steps_for(n)?;
                let h = BigInt::from(4) * machine.common_denominator().pow(t as u32);
                let mut parameters = BTreeMap::new();
                parameters.insert("M".to_string(), construction.spec.denominator.to_string());
                parameters.insert("T".to_string(), t.to_string());
                parameters.insert("m".to_string(), construction.spec.m.to_string());
                let rhs = integer(&h) * &alpha;
                report.push(IdentityCheck {
                    identity: "g = 4 M^T alpha".into(),
                    input: input.clone(),
                    parameters: parameters.clone(),
                    holds: integer(&gap) == rhs,
                    lhs: integer(&gap),
                    rhs,
                });
                report.push(IdentityCheck {
                    identity: "h = 4 M^T".into(),
                    input: input.clone(),
                    parameters,
                    holds: construction.h == h,
                    lhs: integer(&construction.h),
                    rhs: integer(&h),
                });
            }
        }
    }
    report.passed = report.checks.iter().all(|c| c.holds);
    Ok(report)
}
