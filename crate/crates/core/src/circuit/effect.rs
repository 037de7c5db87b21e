use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use super::{CircuitError, SparseAffineVector};
use crate::rational::Rational;

/// Dual vector on `arity` wires. Missing strings have coefficient 0.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Effect {
    arity: usize,
    dual: BTreeMap<u64, Rational>,
}

/// Largest arity for which an effect is expanded into all of its strings.
const EXPANSION_LIMIT: usize = 20;

impl Effect {
    pub fn new(arity: usize, dual: impl IntoIterator<Item = (u64, Rational)>) -> Self {
        let mut map: BTreeMap<u64, Rational> = BTreeMap::new();
        for (bits, value) in dual {
            *map.entry(bits).or_insert_with(Rational::zero) += value;
        }
        map.retain(|_, v| !v.is_zero());
        Effect { arity, dual: map }
    }

    /// The deterministic effect `(u|`: coefficient 1 on every string.
    pub fn deterministic(arity: usize) -> Self {
        assert!(arity <= EXPANSION_LIMIT, "deterministic effect too wide");
        Effect::new(arity, (0..1u64 << arity).map(|b| (b, Rational::one())))
    }

    /// `(bits|`.
    pub fn basis(arity: usize, bits: u64) -> Self {
        Effect::new(arity, [(bits, Rational::one())])
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn value(&self, bits: u64) -> Rational {
        self.dual.get(&bits).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (u64, &Rational)> {
        self.dual.iter().map(|(&b, v)| (b, v))
    }

    pub fn is_zero(&self) -> bool {
        self.dual.is_empty()
    }

    pub fn combine(&self, a: &Rational, other: &Effect, b: &Rational) -> Effect {
        assert_eq!(self.arity, other.arity);
        Effect::new(
            self.arity,
            self.entries()
                .map(|(k, v)| (k, v * a))
                .chain(other.entries().map(|(k, v)| (k, v * b))),
        )
    }

    pub fn plus(&self, other: &Effect) -> Effect {
        self.combine(&Rational::one(), other, &Rational::one())
    }

    pub fn minus(&self, other: &Effect) -> Effect {
        self.combine(&Rational::one(), other, &-Rational::one())
    }
}

/// Result of contracting some wires of a state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contraction {
    /// State on the uncontracted wires, in their original order.
    pub state: SparseAffineVector,
    /// Set when every wire was contracted.
    pub scalar: Option<Rational>,
}

/// Contracts disjoint wire groups of `state` against the given effects.
/// Within a group, the first listed wire is the most significant bit of the
/// effect's local string.
pub fn contract(
    state: &SparseAffineVector,
    factors: &[(Effect, Vec<usize>)],
) -> Result<Contraction, CircuitError> {
    let width = state.width();
    let mut used = alloc::vec![false; width];
    for (effect, wires) in factors {
        if effect.arity() != wires.len() {
            return Err(CircuitError::EffectArity {
                expected: effect.arity(),
                given: wires.len(),
            });
        }
        for &w in wires {
            if w >= width {
                return Err(CircuitError::WireOutOfRange { wire: w, width });
            }
            if used[w] {
                return Err(CircuitError::Overlap(w));
            }
            used[w] = true;
        }
    }
    let remaining: Vec<usize> = (0..width).filter(|&w| !used[w]).collect();
    let bit = |bits: u128, wire: usize| ((bits >> (width - 1 - wire)) & 1) as u64;
    let mut out = SparseAffineVector::zero(remaining.len());
    'entries: for (bits, value) in state.entries() {
        let mut weight = value.clone();
        for (effect, wires) in factors {
            let local = wires.iter().fold(0u64, |acc, &w| (acc << 1) | bit(bits, w));
            let factor = effect.value(local);
            if factor.is_zero() {
                continue 'entries;
            }
            weight *= factor;
        }
        let rest = remaining
            .iter()
            .fold(0u128, |acc, &w| (acc << 1) | bit(bits, w) as u128);
        out.add(rest, weight);
    }
    let scalar = remaining.is_empty().then(|| out.coefficient(0));
    Ok(Contraction { state: out, scalar })
}

pub fn apply_effect(
    state: &SparseAffineVector,
    effect: &Effect,
    wires: &[usize],
) -> Result<Contraction, CircuitError> {
    contract(state, &[(effect.clone(), wires.to_vec())])
}

/// Tensor product of effects on disjoint wire groups of a `width`-wire
/// register. Wires in no group stay open.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductEffect {
    pub width: usize,
    pub factors: Vec<(Effect, Vec<usize>)>,
}

impl ProductEffect {
    /// `(u|` on every wire, one factor per wire.
    pub fn deterministic(width: usize) -> Self {
        ProductEffect {
            width,
            factors: (0..width)
                .map(|w| (Effect::deterministic(1), alloc::vec![w]))
                .collect(),
        }
    }

    pub fn covered(&self) -> Vec<usize> {
        let mut wires: Vec<usize> = self.factors.iter().flat_map(|(_, w)| w.iter().copied()).collect();
        wires.sort_unstable();
        wires
    }

    pub fn contract(&self, state: &SparseAffineVector) -> Result<Contraction, CircuitError> {
        if state.width() != self.width {
            return Err(CircuitError::EffectArity {
                expected: self.width,
                given: state.width(),
            });
        }
        contract(state, &self.factors)
    }
}

/// Rational combination of product effects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearEffect {
    pub width: usize,
    pub terms: Vec<(Rational, ProductEffect)>,
}

impl LinearEffect {
    pub fn single(product: ProductEffect) -> Self {
        LinearEffect {
            width: product.width,
            terms: alloc::vec![(Rational::one(), product)],
        }
    }

    pub fn combine(&self, a: &Rational, other: &LinearEffect, b: &Rational) -> LinearEffect {
        assert_eq!(self.width, other.width);
        let terms = self
            .terms
            .iter()
            .map(|(c, p)| (c * a, p.clone()))
            .chain(other.terms.iter().map(|(c, p)| (c * b, p.clone())))
            .collect();
        LinearEffect {
            width: self.width,
            terms,
        }
    }

    pub fn plus(&self, other: &LinearEffect) -> LinearEffect {
        self.combine(&Rational::one(), other, &Rational::one())
    }

    pub fn minus(&self, other: &LinearEffect) -> LinearEffect {
        self.combine(&Rational::one(), other, &-Rational::one())
    }

    /// Scalar on a state; every term must cover every wire.
    pub fn evaluate(&self, state: &SparseAffineVector) -> Result<Rational, CircuitError> {
        let mut total = Rational::zero();
        for (coefficient, product) in &self.terms {
            let result = product.contract(state)?;
            let scalar = result.scalar.ok_or_else(|| {
                let open: Vec<alloc::string::String> = (0..self.width)
                    .filter(|w| !product.covered().contains(w))
                    .map(|w| alloc::format!("{w}"))
                    .collect();
                CircuitError::Open(open.join(","))
            })?;
            total += coefficient * scalar;
        }
        Ok(total)
    }

    /// Exact test that the combination is the zero functional.
    ///
    /// Terms are rewritten over the coarsest partition refining every term's
    /// wire groups, then terms differing in at most one block are merged until
    /// none remain or no merge applies. Groups wider than 20 wires are refused.
    pub fn is_zero(&self) -> Result<bool, CircuitError> {
        if self.terms.is_empty() {
            return Ok(true);
        }
        let covered = self.terms[0].1.covered();
        if self.terms.iter().any(|(_, p)| p.covered() != covered) {
            return Ok(false);
        }
        let blocks = common_blocks(self.width, &self.terms);
        if let Some(big) = blocks.iter().find(|b| b.len() > EXPANSION_LIMIT) {
            return Err(CircuitError::TooWide(big.len()));
        }
        let mut terms: Vec<(Rational, Vec<Effect>)> = self
            .terms
            .iter()
            .map(|(c, p)| (c.clone(), blocks.iter().map(|b| restrict(p, b)).collect()))
            .collect();
        loop {
            terms.retain(|(c, fs)| !c.is_zero() && fs.iter().all(|f| !f.is_zero()));
            if terms.is_empty() {
                return Ok(true);
            }
            let mut merged = false;
            'search: for i in 0..terms.len() {
                for j in i + 1..terms.len() {
                    let differing: Vec<usize> = (0..blocks.len())
                        .filter(|&k| terms[i].1[k] != terms[j].1[k])
                        .collect();
                    match differing.as_slice() {
                        [] => {
                            let c = terms[j].0.clone();
                            terms[i].0 += c;
                        }
                        [k] => {
                            let k = *k;
                            let joined =
                                terms[i].1[k].combine(&terms[i].0, &terms[j].1[k], &terms[j].0);
                            terms[i].0 = Rational::one();
                            terms[i].1[k] = joined;
                        }
                        _ => continue,
                    }
                    terms.remove(j);
                    merged = true;
                    break 'search;
                }
            }
            if !merged {
                return Ok(false);
            }
        }
    }
}

fn common_blocks(width: usize, terms: &[(Rational, ProductEffect)]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..width).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        parent[x] = root;
        root
    }
    let mut covered = alloc::vec![false; width];
    for (_, product) in terms {
        for (_, wires) in &product.factors {
            for &w in wires {
                covered[w] = true;
                let a = find(&mut parent, wires[0]);
                let b = find(&mut parent, w);
                parent[b] = a;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for w in 0..width {
        if covered[w] {
            let root = find(&mut parent, w);
            groups.entry(root).or_default().push(w);
        }
    }
    let mut blocks: Vec<Vec<usize>> = groups.into_values().collect();
    blocks.sort();
    blocks
}

/// The product's factors inside `block`, tensored into one effect over the
/// block's wires in increasing order.
fn restrict(product: &ProductEffect, block: &[usize]) -> Effect {
    let inside: Vec<&(Effect, Vec<usize>)> = product
        .factors
        .iter()
        .filter(|(_, wires)| wires.iter().any(|w| block.contains(w)))
        .collect();
    let size = block.len();
    let position = |w: usize| block.iter().position(|&b| b == w).expect("wire in block");
    Effect::new(
        size,
        (0..1u64 << size).filter_map(|bits| {
            let mut value = Rational::one();
            for (effect, wires) in &inside {
                let local = wires.iter().fold(0u64, |acc, &w| {
                    (acc << 1) | ((bits >> (size - 1 - position(w))) & 1)
                });
                let f = effect.value(local);
                if f.is_zero() {
                    return None;
                }
                value *= f;
            }
            Some((bits, value))
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn skewed() -> SparseAffineVector {
        SparseAffineVector::from_entries(1, [(0, int(2)), (1, int(-1))])
    }

    #[test]
    fn deterministic_effect_reads_mass() {
        let r = apply_effect(&skewed(), &Effect::deterministic(1), &[0]).unwrap();
        assert_eq!(r.scalar, Some(int(1)));
    }

    #[test]
    fn basis_effect_reads_coefficient() {
        let r = apply_effect(&skewed(), &Effect::basis(1, 0), &[0]).unwrap();
        assert_eq!(r.scalar, Some(int(2)));
    }

    #[test]
    fn partial_contraction_keeps_other_wires() {
        let s = SparseAffineVector::from_entries(2, [(0b00, int(2)), (0b11, int(-1))]);
        let r = apply_effect(&s, &Effect::deterministic(1), &[0]).unwrap();
        assert_eq!(r.scalar, None);
        assert_eq!(r.state.coefficient(0), int(2));
        assert_eq!(r.state.coefficient(1), int(-1));
        assert_eq!(r.state.mass(), &int(1));
    }

    #[test]
    fn overlapping_groups_are_refused() {
        let s = SparseAffineVector::basis(2, 0);
        let factors = [
            (Effect::deterministic(1), alloc::vec![1]),
            (Effect::deterministic(2), alloc::vec![0, 1]),
        ];
        assert_eq!(contract(&s, &factors).unwrap_err(), CircuitError::Overlap(1));
    }

    #[test]
    fn outcome_effects_sum_to_deterministic() {
        let width = 3;
        let with_block = |e: Effect| ProductEffect {
            width,
            factors: alloc::vec![
                (Effect::deterministic(1), alloc::vec![0]),
                (e, alloc::vec![1, 2]),
            ],
        };
        let u = LinearEffect::single(ProductEffect::deterministic(width));
        let acc = LinearEffect::single(with_block(Effect::basis(2, 1)));
        let rej = LinearEffect::single(with_block(Effect::basis(2, 2)));
        let none = u.minus(&acc).minus(&rej);
        assert!(acc.plus(&rej).plus(&none).minus(&u).is_zero().unwrap());
        assert!(!acc.plus(&rej).minus(&u).is_zero().unwrap());
    }
}
