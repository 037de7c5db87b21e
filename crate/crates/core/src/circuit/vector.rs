use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use super::{bits_to_string, fraction_text, AffineGate, CircuitError, MAX_WIDTH};
use crate::rational::Rational;

/// Sparse rational combination of width-`k` basis strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseAffineVector {
    width: usize,
    entries: BTreeMap<u128, Rational>,
    mass: Rational,
}

impl SparseAffineVector {
    pub fn basis(width: usize, bits: u128) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(bits, Rational::one());
        SparseAffineVector {
            width,
            entries,
            mass: Rational::one(),
        }
    }

    pub fn zero(width: usize) -> Self {
        SparseAffineVector {
            width,
            entries: BTreeMap::new(),
            mass: Rational::zero(),
        }
    }

    /// Sums coefficients of repeated strings and drops zeros.
    pub fn from_entries(width: usize, entries: impl IntoIterator<Item = (u128, Rational)>) -> Self {
        let mut out = Self::zero(width);
        for (bits, value) in entries {
            out.add(bits, value);
        }
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn add(&mut self, bits: u128, value: Rational) {
        if value.is_zero() {
            return;
        }
        self.mass += &value;
        let slot = self.entries.entry(bits).or_insert_with(Rational::zero);
        *slot += value;
        if slot.is_zero() {
            self.entries.remove(&bits);
        }
    }

    pub fn coefficient(&self, bits: u128) -> Rational {
        self.entries.get(&bits).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (u128, &Rational)> {
        self.entries.iter().map(|(&b, v)| (b, v))
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// Tracked mass: the coefficient sum as propagated through operations.
    pub fn mass(&self) -> &Rational {
        &self.mass
    }

    pub fn coefficient_sum(&self) -> Rational {
        self.entries.values().fold(Rational::zero(), |acc, v| acc + v)
    }

    /// Confirms the tracked mass against a fresh coefficient sum.
    pub fn audit(&self) -> Result<(), CircuitError> {
        let actual = self.coefficient_sum();
        if actual == self.mass {
            Ok(())
        } else {
            Err(CircuitError::MassDrift {
                tracked: fraction_text(&self.mass),
                actual: fraction_text(&actual),
            })
        }
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        Self::from_entries(self.width, self.entries().map(|(b, v)| (b, v * factor)))
    }

    pub fn sum(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (b, v) in other.entries() {
            out.add(b, v.clone());
        }
        out
    }

    /// Dense coefficient list indexed by basis string.
    pub fn to_dense(&self) -> Vec<Rational> {
        let mut out = alloc::vec![Rational::zero(); 1usize << self.width];
        for (b, v) in self.entries() {
            out[b as usize] = v.clone();
        }
        out
    }

    pub fn from_dense(width: usize, values: &[Rational]) -> Self {
        Self::from_entries(
            width,
            values
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, v)| (i as u128, v.clone())),
        )
    }

    /// `(bits, coefficient)` pairs rendered as bit strings, for reports.
    pub fn render(&self) -> Vec<(alloc::string::String, Rational)> {
        self.entries()
            .map(|(b, v)| (bits_to_string(b, self.width), v.clone()))
            .collect()
    }

    /// Applies `gate` to wires `offset..offset + arity`, identity elsewhere.
    pub fn apply_gate(&self, gate: &AffineGate, offset: usize) -> Result<Self, CircuitError> {
        check_placement(gate, offset, self.width)?;
        let shift = self.width - offset - gate.arity();
        let mask: u128 = ((1u128 << gate.arity()) - 1) << shift;
        let mut out = Self::zero(self.width);
        for (bits, value) in self.entries() {
            let local = ((bits & mask) >> shift) as u64;
            let rest = bits & !mask;
            match gate.column(local) {
                Some(column) => {
                    for (row, weight) in column {
                        out.add(rest | ((*row as u128) << shift), value * weight);
                    }
                }
                None => out.add(bits, value.clone()),
            }
        }
        // mass is carried over, not recomputed: a drift shows up in `audit`
        out.mass = self.mass.clone();
        Ok(out)
    }
}

pub(crate) fn check_placement(
    gate: &AffineGate,
    offset: usize,
    width: usize,
) -> Result<(), CircuitError> {
    if width > MAX_WIDTH || offset + gate.arity() > width {
        return Err(CircuitError::OutOfBounds {
            gate: gate.name().into(),
            offset,
            arity: gate.arity(),
            width,
        });
    }
    Ok(())
}

/// Dense backend: applies `gate` to a full coefficient list of `2^width`
/// entries by walking every index.
pub fn dense_apply_gate(
    values: &[Rational],
    width: usize,
    gate: &AffineGate,
    offset: usize,
) -> Result<Vec<Rational>, CircuitError> {
    check_placement(gate, offset, width)?;
    let arity = gate.arity();
    let low = width - offset - arity;
    let mut out = alloc::vec![Rational::zero(); values.len()];
    for (index, value) in values.iter().enumerate() {
        if value.is_zero() {
            continue;
        }
        let local = (index >> low) & ((1usize << arity) - 1);
        let high = index >> (low + arity);
        let low_bits = index & ((1usize << low) - 1);
        let target = |row: usize| (((high << arity) | row) << low) | low_bits;
        match gate.column(local as u64) {
            Some(column) => {
                for (row, weight) in column {
                    out[target(*row as usize)] += value * weight;
                }
            }
            None => out[index] += value,
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::make_gate;
    use crate::rational::{frac, int};

    fn skew() -> AffineGate {
        make_gate(
            "skew",
            1,
            [(0, 0, int(2)), (0, 1, int(-1)), (1, 0, frac(1, 2)), (1, 1, frac(1, 2))],
            false,
        )
        .unwrap()
    }

    #[test]
    fn column_read_off() {
        let s = SparseAffineVector::basis(1, 0).apply_gate(&skew(), 0).unwrap();
        assert_eq!(s.coefficient(0), int(2));
        assert_eq!(s.coefficient(1), int(-1));
        assert_eq!(s.mass(), &int(1));
        s.audit().unwrap();
    }

    #[test]
    fn gate_at_offset_touches_only_its_wire() {
        let s = SparseAffineVector::basis(2, 0).apply_gate(&skew(), 1).unwrap();
        assert_eq!(s.coefficient(0b00), int(2));
        assert_eq!(s.coefficient(0b01), int(-1));
        assert_eq!(s.support_len(), 2);
    }

    #[test]
    fn dense_matches_sparse() {
        let s = SparseAffineVector::from_entries(3, [(0b010, int(3)), (0b111, int(-2))]);
        let sparse = s.apply_gate(&skew(), 1).unwrap();
        let dense = dense_apply_gate(&s.to_dense(), 3, &skew(), 1).unwrap();
        assert_eq!(SparseAffineVector::from_dense(3, &dense), sparse);
    }

    #[test]
    fn placement_out_of_bounds() {
        assert!(matches!(
            SparseAffineVector::basis(1, 0).apply_gate(&skew(), 1),
            Err(CircuitError::OutOfBounds { .. })
        ));
    }
}
