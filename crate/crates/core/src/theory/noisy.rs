use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::TheoryError;
use crate::circuit::{Effect, SparseAffineVector};
use crate::rational::Rational;

/// Widest register measured or reconstructed in full.
pub const MAX_TOMOGRAPHY_WIDTH: usize = 20;

/// `D(p) = (1-p)/2 J + p I` and the two noisy effects `(0|D`, `(1|D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoisyMeasurement {
    pub p: Rational,
    pub d: [[Rational; 2]; 2],
    pub a0: Effect,
    pub a1: Effect,
}

pub fn mixing_matrix(p: &Rational) -> [[Rational; 2]; 2] {
    let half = Rational::new(1.into(), 2.into());
    let diagonal = (Rational::one() + p) * &half;
    let off = (Rational::one() - p) * &half;
    [[diagonal.clone(), off.clone()], [off, diagonal]]
}

/// `D(p)^{-1}`; eigenvalues of `D(p)` are 1 and `p`.
pub fn mixing_inverse(p: &Rational) -> Result<[[Rational; 2]; 2], TheoryError> {
    if p.is_zero() {
        return Err(TheoryError::Singular);
    }
    let d = mixing_matrix(p);
    let scale = p.recip();
    Ok([
        [&d[0][0] * &scale, -&d[0][1] * &scale],
        [-&d[1][0] * &scale, &d[1][1] * &scale],
    ])
}

pub fn mat_mul(a: &[[Rational; 2]; 2], b: &[[Rational; 2]; 2]) -> [[Rational; 2]; 2] {
    let cell = |i: usize, j: usize| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j];
    [[cell(0, 0), cell(0, 1)], [cell(1, 0), cell(1, 1)]]
}

pub fn noisy_effect_pair(p: &Rational) -> Result<NoisyMeasurement, TheoryError> {
    if !p.is_positive() || *p > Rational::one() {
        return Err(TheoryError::NoiseOutOfRange(crate::rational::format_fraction(p)));
    }
    let d = mixing_matrix(p);
    let a0 = Effect::new(1, [(0, d[0][0].clone()), (1, d[0][1].clone())]);
    let a1 = Effect::new(1, [(0, d[1][0].clone()), (1, d[1][1].clone())]);
    assert_eq!(a0.plus(&a1), Effect::deterministic(1));
    Ok(NoisyMeasurement { p: p.clone(), d, a0, a1 })
}

/// Integer form of a 2x2 rational matrix: `m = entries / scale`.
struct IntMatrix {
    entries: [[BigInt; 2]; 2],
    scale: BigInt,
}

impl IntMatrix {
    fn from_rational(m: &[[Rational; 2]; 2]) -> Self {
        let scale = crate::rational::common_denominator(m.iter().flatten());
        let lift = |r: &Rational| r.numer() * (&scale / r.denom());
        IntMatrix {
            entries: [
                [lift(&m[0][0]), lift(&m[0][1])],
                [lift(&m[1][0]), lift(&m[1][1])],
            ],
            scale,
        }
    }
}

/// Applies `m` to every wire of a dense `2^k` vector of integers in place.
fn transform_all_wires(values: &mut [BigInt], k: usize, m: &IntMatrix) {
    for wire in 0..k {
        let stride = 1usize << (k - 1 - wire);
        for base in 0..values.len() {
            if base & stride != 0 {
                continue;
            }
            let x0 = core::mem::take(&mut values[base]);
            let x1 = core::mem::take(&mut values[base | stride]);
            values[base] = &m.entries[0][0] * &x0 + &m.entries[0][1] * &x1;
            values[base | stride] = &m.entries[1][0] * &x0 + &m.entries[1][1] * &x1;
        }
    }
}

/// Dense integer lift of a sparse map: `(numerators, denominator)`.
fn lift_dense<'a>(
    k: usize,
    entries: impl Iterator<Item = (u128, &'a Rational)> + Clone,
) -> (Vec<BigInt>, BigInt) {
    let denominator = crate::rational::common_denominator(entries.clone().map(|(_, v)| v));
    let mut values = alloc::vec![BigInt::zero(); 1usize << k];
    for (bits, v) in entries {
        values[bits as usize] = v.numer() * (&denominator / v.denom());
    }
    (values, denominator)
}

fn apply_product(
    k: usize,
    entries: impl Iterator<Item = (u128, Rational)>,
    m: &[[Rational; 2]; 2],
) -> Result<BTreeMap<u128, Rational>, TheoryError> {
    if k > MAX_TOMOGRAPHY_WIDTH {
        return Err(TheoryError::TooWide(k));
    }
    let owned: Vec<(u128, Rational)> = entries.collect();
    if let Some((bits, _)) = owned.iter().find(|(b, _)| k < 128 && *b >> k != 0) {
        return Err(TheoryError::OutcomeOutOfRange(*bits));
    }
    let (mut values, denominator) = lift_dense(k, owned.iter().map(|(b, v)| (*b, v)));
    let int = IntMatrix::from_rational(m);
    transform_all_wires(&mut values, k, &int);
    let total = denominator * num_traits::pow(int.scale, k);
    Ok(values
        .into_iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(i, v)| (i as u128, Rational::new(v, total.clone())))
        .collect())
}

/// Outcome weights of the product noisy measurement: `D(p)^{(x)k} s`, one
/// entry per outcome string (zeros omitted).
pub fn noisy_statistics(
    state: &SparseAffineVector,
    p: &Rational,
) -> Result<BTreeMap<u128, Rational>, TheoryError> {
    apply_product(
        state.width(),
        state.entries().map(|(b, v)| (b, v.clone())),
        &mixing_matrix(p),
    )
}

/// Applies `(D(p)^{-1})^{(x)k}` to the outcome statistics.
pub fn tomography_reconstruct(
    stats: &BTreeMap<u128, Rational>,
    p: &Rational,
    k: usize,
) -> Result<SparseAffineVector, TheoryError> {
    let inverse = mixing_inverse(p)?;
    let values = apply_product(k, stats.iter().map(|(b, v)| (*b, v.clone())), &inverse)?;
    Ok(SparseAffineVector::from_entries(k, values))
}

/// Sign-exact check that every coefficient of `D(p)^{(x)k} s` is
/// non-negative, working only on the wires where the support varies.
/// Constant wires contribute a positive factor and never flip a sign.
pub(crate) fn nonnegative_under(
    state: &SparseAffineVector,
    active: &[usize],
    m: &[[Rational; 2]; 2],
) -> bool {
    let width = state.width();
    let k = active.len();
    let mut compressed: BTreeMap<u128, Rational> = BTreeMap::new();
    for (bits, v) in state.entries() {
        let local = active
            .iter()
            .fold(0u128, |acc, &w| (acc << 1) | ((bits >> (width - 1 - w)) & 1));
        *compressed.entry(local).or_insert_with(Rational::zero) += v;
    }
    let (mut values, _) = lift_dense(k, compressed.iter().map(|(b, v)| (*b, v)));
    transform_all_wires(&mut values, k, &IntMatrix::from_rational(m));
    values.iter().all(|v| !v.is_negative())
}

/// Wires on which the support strings of `state` disagree.
pub fn active_wires(state: &SparseAffineVector) -> Vec<usize> {
    let width = state.width();
    let mut entries = state.entries().map(|(b, _)| b);
    let Some(first) = entries.next() else {
        return Vec::new();
    };
    let diff = entries.fold(0u128, |acc, b| acc | (b ^ first));
    (0..width).filter(|w| (diff >> (width - 1 - w)) & 1 == 1).collect()
}

/// The state seen on `wires` alone, in the given order. Only meaningful
/// when the other wires are constant over the support.
pub fn restrict_to_wires(state: &SparseAffineVector, wires: &[usize]) -> SparseAffineVector {
    let width = state.width();
    SparseAffineVector::from_entries(
        wires.len(),
        state.entries().map(|(bits, v)| {
            let local = wires
                .iter()
                .fold(0u128, |acc, &w| (acc << 1) | ((bits >> (width - 1 - w)) & 1));
            (local, v.clone())
        }),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundTripMethod {
    /// Full outcome table on every wire.
    Full,
    /// Full table on the active wires; each constant wire checked alone.
    ActiveWires,
}

/// Checks `reconstruct(measure(s)) = s` exactly at `p`.
pub fn tomography_round_trip(
    state: &SparseAffineVector,
    p: &Rational,
) -> Result<(bool, RoundTripMethod), TheoryError> {
    let width = state.width();
    if width <= MAX_TOMOGRAPHY_WIDTH {
        let stats = noisy_statistics(state, p)?;
        return Ok((tomography_reconstruct(&stats, p, width)? == *state, RoundTripMethod::Full));
    }
    let active = active_wires(state);
    let restricted = restrict_to_wires(state, &active);
    let stats = noisy_statistics(&restricted, p)?;
    let mut holds = tomography_reconstruct(&stats, p, active.len())? == restricted;
    if let Some((bits, _)) = state.entries().next() {
        for w in (0..width).filter(|w| !active.contains(w)) {
            let wire = SparseAffineVector::basis(1, (bits >> (width - 1 - w)) & 1);
            let stats = noisy_statistics(&wire, p)?;
            holds &= tomography_reconstruct(&stats, p, 1)? == wire;
        }
    }
    Ok((holds, RoundTripMethod::ActiveWires))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    #[test]
    fn p_one_is_identity() {
        let m = noisy_effect_pair(&int(1)).unwrap();
        assert_eq!(m.a0, Effect::basis(1, 0));
        assert_eq!(m.a1, Effect::basis(1, 1));
    }

    #[test]
    fn third_matrix_and_inverse() {
        let d = mixing_matrix(&frac(1, 3));
        assert_eq!(d, [[frac(2, 3), frac(1, 3)], [frac(1, 3), frac(2, 3)]]);
        let inv = mixing_inverse(&frac(1, 3)).unwrap();
        assert_eq!(inv, [[int(2), int(-1)], [int(-1), int(2)]]);
        assert_eq!(mat_mul(&d, &inv), [[int(1), int(0)], [int(0), int(1)]]);
    }

    #[test]
    fn out_of_range_noise() {
        assert!(noisy_effect_pair(&int(0)).is_err());
        assert!(noisy_effect_pair(&frac(3, 2)).is_err());
        assert_eq!(mixing_inverse(&int(0)), Err(TheoryError::Singular));
    }

    #[test]
    fn skewed_wire_statistics() {
        let s = SparseAffineVector::from_entries(1, [(0, int(2)), (1, int(-1))]);
        let p = frac(1, 5);
        let stats = noisy_statistics(&s, &p).unwrap();
        assert_eq!(stats[&0], (int(1) + int(3) * &p) / int(2));
        assert_eq!(stats[&1], (int(1) - int(3) * &p) / int(2));
        assert_eq!(tomography_reconstruct(&stats, &p, 1).unwrap(), s);
    }

    #[test]
    fn basis_round_trip() {
        let s = SparseAffineVector::basis(2, 0b01);
        for p in [frac(1, 7), frac(1, 2), int(1)] {
            let stats = noisy_statistics(&s, &p).unwrap();
            assert_eq!(tomography_reconstruct(&stats, &p, 2).unwrap(), s);
        }
    }

    #[test]
    fn active_wire_check_matches_full_statistics() {
        let s = SparseAffineVector::from_entries(3, [(0b010, int(2)), (0b011, int(-1))]);
        assert_eq!(active_wires(&s), [2]);
        for p in [frac(1, 4), frac(1, 3), frac(1, 2)] {
            let full = noisy_statistics(&s, &p).unwrap().values().all(|v| !v.is_negative());
            assert_eq!(nonnegative_under(&s, &[2], &mixing_matrix(&p)), full);
        }
    }
}
