//! Affine circuits over a bitstring basis, with exact sparse and dense
//! evaluation.
//!
//! Basis strings of width `k` are stored in a `u128` with wire 0 as the most
//! significant bit, so `"01"` on two wires is the integer 1.

mod model;
mod effect;
mod gate;
mod vector;

use alloc::string::String;

use crate::rational::Rational;

pub use model::{Circuit, Placement, SimMode, Simulation, MAX_DENSE_WIDTH};
pub use effect::{apply_effect, contract, Contraction, Effect, LinearEffect, ProductEffect};
pub use gate::{make_gate, AffineGate};
pub use vector::{dense_apply_gate, SparseAffineVector};

/// Widest register a `u128` basis string can hold.
pub const MAX_WIDTH: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CircuitError {
    #[error("gate `{gate}`: column {column} sums to {sum}, not 1")]
    ColumnSum {
        gate: String,
        column: String,
        sum: String,
    },
    #[error("gate `{gate}`: column {column} is missing and identity_elsewhere is off")]
    MissingColumn { gate: String, column: String },
    #[error("gate `{gate}`: basis string {bits} does not fit {arity} wires")]
    EntryOutOfRange {
        gate: String,
        bits: String,
        arity: usize,
    },
    #[error("gate `{gate}` of arity {arity} at offset {offset} exceeds {width} wires")]
    OutOfBounds {
        gate: String,
        offset: usize,
        arity: usize,
        width: usize,
    },
    #[error("wire {wire} is out of range for width {width}")]
    WireOutOfRange { wire: usize, width: usize },
    #[error("wire {0} is contracted twice")]
    Overlap(usize),
    #[error("effect on {expected} wires given {given} wires")]
    EffectArity { expected: usize, given: usize },
    #[error("dense backend is limited to {limit} wires, circuit has {width}")]
    DenseTooWide { width: usize, limit: usize },
    #[error("register of {0} wires exceeds the supported maximum")]
    TooWide(usize),
    #[error("circuit is open: wires {0} carry no effect")]
    Open(String),
    #[error("tracked mass {tracked} differs from coefficient sum {actual}")]
    MassDrift { tracked: String, actual: String },
    #[error("malformed basis string `{0}`")]
    BadBits(String),
}

/// Renders the low `width` bits of `value`, wire 0 first.
pub fn bits_to_string(value: u128, width: usize) -> String {
    (0..width)
        .map(|i| {
            if (value >> (width - 1 - i)) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

pub fn parse_bits(text: &str) -> Result<(u128, usize), CircuitError> {
    if text.len() > MAX_WIDTH {
        return Err(CircuitError::TooWide(text.len()));
    }
    let mut value = 0u128;
    for c in text.chars() {
        value = (value << 1)
            | match c {
                '0' => 0,
                '1' => 1,
                _ => return Err(CircuitError::BadBits(text.into())),
            };
    }
    Ok((value, text.len()))
}

pub(crate) fn fraction_text(value: &Rational) -> String {
    crate::rational::format_fraction(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_strings_round_trip() {
        assert_eq!(bits_to_string(1, 2), "01");
        assert_eq!(parse_bits("0110").unwrap(), (6, 4));
        assert_eq!(bits_to_string(0, 0), "");
        assert!(parse_bits("012").is_err());
    }
}
