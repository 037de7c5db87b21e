use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use super::noisy::{active_wires, mixing_matrix, nonnegative_under, restrict_to_wires};
use super::TheoryError;
use crate::circuit::SparseAffineVector;
use crate::rational::{pow2, Rational};

/// Widest set of active wires a single preparation may have.
pub const MAX_ACTIVE_WIRES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VeilResult {
    /// Largest dyadic `a / 2^precision` passing the propriety check.
    pub p: Rational,
    pub precision: u32,
    /// Exact verification at `p`: every noisy coefficient lies in `[0, 1]`.
    pub verified: bool,
    pub probes: usize,
    /// Index of a preparation that fails at the next dyadic above `p`.
    pub binding: Option<usize>,
    pub diagnostic: Option<String>,
}

/// True when every coefficient of `D(p)^{(x)k} s` lies in `[0, 1]`.
///
/// Constant wires contribute factors `(1 +- p)/2`, so the largest
/// coefficient is the largest active one times `((1+p)/2)^c`.
pub fn proper_at(state: &SparseAffineVector, p: &Rational) -> Result<bool, TheoryError> {
    let active = active_wires(state);
    if active.len() > MAX_ACTIVE_WIRES {
        return Err(TheoryError::TooWide(active.len()));
    }
    let m = mixing_matrix(p);
    if !nonnegative_under(state, &active, &m) {
        return Ok(false);
    }
    let restricted = restrict_to_wires(state, &active);
    let stats = super::noisy_statistics(&restricted, p)?;
    let largest = stats.values().max().cloned().unwrap_or_else(Rational::zero);
    let constant = state.width() - active.len();
    let factor = num_traits::pow(m[0][0].clone(), constant);
    Ok(largest * factor <= Rational::one() && stats.values().all(|v| !v.is_negative()))
}

/// Binary search over `p = a / 2^precision`, `a` in `0..=2^precision`, for
/// the largest `p` at which every preparation stays proper under the product
/// noisy measurement. Feasible sets are intervals `[0, p_max]` because
/// `D(pq) = D(p) D(q)`.
pub fn veil_search(
    preparations: &[SparseAffineVector],
    precision: u32,
) -> Result<VeilResult, TheoryError> {
    if preparations.is_empty() {
        return Err(TheoryError::NoPreparations);
    }
    let mut actives = Vec::with_capacity(preparations.len());
    for s in preparations {
        let active = active_wires(s);
        if active.len() > MAX_ACTIVE_WIRES {
            return Err(TheoryError::TooWide(active.len()));
        }
        actives.push(active);
    }
    let top = pow2(precision as usize);
    let mut probes = 0usize;
    let mut failing = |a: &num_bigint::BigInt| -> Option<usize> {
        probes += 1;
        let m = mixing_matrix(&Rational::new(a.clone(), top.clone()));
        preparations
            .iter()
            .zip(&actives)
            .position(|(s, active)| !nonnegative_under(s, active, &m))
    };
    let (mut lo, mut binding) = match failing(&top) {
        None => (top.clone(), None),
        Some(index) => {
            let mut lo = num_bigint::BigInt::zero();
            let mut hi = top.clone();
            let mut binding = index;
            while &hi - &lo > num_bigint::BigInt::one() {
                let mid: num_bigint::BigInt = (&lo + &hi) / 2;
                match failing(&mid) {
                    None => lo = mid,
                    Some(index) => {
                        hi = mid;
                        binding = index;
                    }
                }
            }
            (lo, Some(binding))
        }
    };
    let mut diagnostic = None;
    if lo.is_zero() {
        diagnostic = Some(format!(
            "no positive p passes at precision 2^-{precision}; preparation {} is improper",
            binding.unwrap_or(0)
        ));
    }
    let p = Rational::new(core::mem::take(&mut lo), top);
    let mut verified = true;
    for s in preparations {
        if !proper_at(s, &p)? {
            verified = false;
            binding = binding.or(Some(0));
        }
    }
    Ok(VeilResult {
        p,
        precision,
        verified,
        probes,
        binding,
        diagnostic,
    })
}
