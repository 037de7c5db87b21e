use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use super::{bits_to_string, fraction_text, CircuitError};
use crate::rational::Rational;

/// A column-sum-one matrix on `arity` wires, stored by column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineGate {
    name: String,
    arity: usize,
    columns: BTreeMap<u64, Vec<(u64, Rational)>>,
    identity_elsewhere: bool,
}

/// Builds a gate from `(column, row, value)` triples, where `column` is the
/// input basis string and `row` the output one. Repeated triples add up.
///
/// With `identity_elsewhere`, columns not mentioned map their basis string to
/// itself; otherwise every one of the `2^arity` columns must be given.
pub fn make_gate(
    name: &str,
    arity: usize,
    entries: impl IntoIterator<Item = (u64, u64, Rational)>,
    identity_elsewhere: bool,
) -> Result<AffineGate, CircuitError> {
    if arity > 63 {
        return Err(CircuitError::TooWide(arity));
    }
    let limit = 1u64 << arity;
    let mut dense: BTreeMap<u64, BTreeMap<u64, Rational>> = BTreeMap::new();
    for (column, row, value) in entries {
        for bits in [column, row] {
            if bits >= limit {
                return Err(CircuitError::EntryOutOfRange {
                    gate: name.into(),
                    bits: alloc::format!("{bits:#b}"),
                    arity,
                });
            }
        }
        *dense
            .entry(column)
            .or_default()
            .entry(row)
            .or_insert_with(Rational::zero) += value;
    }
    let mut columns = BTreeMap::new();
    for (column, rows) in dense {
        let sum = rows.values().fold(Rational::zero(), |acc, v| acc + v);
        if !sum.is_one() {
            return Err(CircuitError::ColumnSum {
                gate: name.into(),
                column: bits_to_string(column as u128, arity),
                sum: fraction_text(&sum),
            });
        }
        let rows: Vec<(u64, Rational)> = rows.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        columns.insert(column, rows);
    }
    if !identity_elsewhere {
        if let Some(missing) = (0..limit).find(|c| !columns.contains_key(c)) {
            return Err(CircuitError::MissingColumn {
                gate: name.into(),
                column: bits_to_string(missing as u128, arity),
            });
        }
    }
    Ok(AffineGate {
        name: name.into(),
        arity,
        columns,
        identity_elsewhere,
    })
}

impl AffineGate {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn identity_elsewhere(&self) -> bool {
        self.identity_elsewhere
    }

    /// Explicit column for input `local`; `None` means the identity column.
    pub fn column(&self, local: u64) -> Option<&[(u64, Rational)]> {
        self.columns.get(&local).map(Vec::as_slice)
    }

    pub fn explicit_columns(&self) -> impl Iterator<Item = (u64, &[(u64, Rational)])> {
        self.columns.iter().map(|(&c, rows)| (c, rows.as_slice()))
    }

    pub fn column_sum(&self, local: u64) -> Rational {
        match self.column(local) {
            Some(rows) => rows.iter().fold(Rational::zero(), |acc, (_, v)| acc + v),
            None => Rational::one(),
        }
    }

    /// Exhaustive column-sum audit over all `2^arity` columns. Returns the
    /// first offending column.
    pub fn audit_columns(&self) -> Result<u64, CircuitError> {
        let limit = 1u64 << self.arity;
        for column in 0..limit {
            let sum = self.column_sum(column);
            if !sum.is_one() {
                return Err(CircuitError::ColumnSum {
                    gate: self.name.clone(),
                    column: bits_to_string(column as u128, self.arity),
                    sum: fraction_text(&sum),
                });
            }
        }
        Ok(limit)
    }

    /// Every matrix entry as `(column, row, value)`, identity columns excluded.
    pub fn triples(&self) -> Vec<(u64, u64, Rational)> {
        self.columns
            .iter()
            .flat_map(|(&c, rows)| rows.iter().map(move |(r, v)| (c, *r, v.clone())))
            .collect()
    }

    pub fn is_permutation_like(&self) -> bool {
        self.columns
            .values()
            .all(|rows| rows.len() == 1 && rows[0].1.is_one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    #[test]
    fn identity_is_valid() {
        let g = make_gate("id", 1, [(0, 0, int(1)), (1, 1, int(1))], false).unwrap();
        assert_eq!(g.audit_columns().unwrap(), 2);
        assert!(g.is_permutation_like());
    }

    #[test]
    fn bad_column_is_named() {
        // [[1,0],[1,1]]: column 0 is (1,1)
        let err = make_gate("bad", 1, [(0, 0, int(1)), (0, 1, int(1)), (1, 1, int(1))], false)
            .unwrap_err();
        assert_eq!(
            err,
            CircuitError::ColumnSum {
                gate: "bad".into(),
                column: "0".into(),
                sum: "2/1".into()
            }
        );
    }

    #[test]
    fn negative_entries_allowed() {
        let g = make_gate(
            "skew",
            1,
            [(0, 0, int(2)), (0, 1, int(-1)), (1, 0, frac(1, 2)), (1, 1, frac(1, 2))],
            false,
        )
        .unwrap();
        assert_eq!(g.column_sum(0), int(1));
        assert!(!g.is_permutation_like());
    }

    #[test]
    fn missing_column_needs_flag() {
        assert!(matches!(
            make_gate("half", 1, [(0, 0, int(1))], false),
            Err(CircuitError::MissingColumn { .. })
        ));
        let g = make_gate("half", 1, [(0, 0, int(1))], true).unwrap();
        assert!(g.column(1).is_none());
    }
}
