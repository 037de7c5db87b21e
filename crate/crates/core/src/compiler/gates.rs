use alloc::vec::Vec;

use num_traits::One;

use super::{Cell, CellCodec, CompileError};
use crate::circuit::{make_gate, AffineGate};
use crate::machine::{AffTm, Move};
use crate::rational::Rational;

fn blank_cell(a: usize) -> Cell {
    Cell { s: 0, q: None, a }
}

/// The transition gate on three cells. Columns whose middle cell holds the
/// head in phase 1 with both neighbours head-free expand into the weighted
/// successors (phase 2 at the destination); every other column is identity.
/// Halting states use their absorbing self loop.
pub fn build_g(machine: &AffTm, codec: &CellCodec) -> Result<AffineGate, CompileError> {
    machine.ensure_valid()?;
    let ell = codec.width();
    let join = |cells: [Cell; 3]| -> Result<u64, CompileError> {
        let mut word = 0u64;
        for cell in cells {
            word = (word << ell) | codec.encode(cell)?;
        }
        Ok(word)
    };
    let symbols = machine.alphabet().len();
    let mut entries: Vec<(u64, u64, Rational)> = Vec::new();
    for q in 0..machine.states().len() {
        for left in 0..symbols {
            for mid in 0..symbols {
                for right in 0..symbols {
                    let column = join([
                        blank_cell(left),
                        Cell { s: 1, q: Some(q), a: mid },
                        blank_cell(right),
                    ])?;
                    for rule in machine.effective_row(q, mid) {
                        let moved = Cell {
                            s: 2,
                            q: Some(rule.next),
                            a: 0,
                        };
                        let cells = match rule.movement {
                            Move::Left => [
                                Cell { a: left, ..moved },
                                blank_cell(rule.write),
                                blank_cell(right),
                            ],
                            Move::Stay => [
                                blank_cell(left),
                                Cell {
                                    a: rule.write,
                                    ..moved
                                },
                                blank_cell(right),
                            ],
                            Move::Right => [
                                blank_cell(left),
                                blank_cell(rule.write),
                                Cell { a: right, ..moved },
                            ],
                        };
                        entries.push((column, join(cells)?, rule.annotation.clone()));
                    }
                }
            }
        }
    }
    Ok(make_gate("G", 3 * ell, entries, true)?)
}

/// Flips the head phase `1 <-> 2` on one cell; `s = 0` and non-encoding
/// words are left alone.
pub fn build_i(codec: &CellCodec) -> Result<AffineGate, CompileError> {
    let mut entries = Vec::new();
    for q in 0..codec.states {
        for a in 0..codec.symbols {
            let one = codec.encode(Cell { s: 1, q: Some(q), a })?;
            let two = codec.encode(Cell { s: 2, q: Some(q), a })?;
            entries.push((one, two, Rational::one()));
            entries.push((two, one, Rational::one()));
        }
    }
    Ok(make_gate("I", codec.width(), entries, true)?)
}

/// Moves the head one cell left: `|0,-,a, 1,q,b) -> |1,q,b, 0,-,a)`, identity
/// on every other basis state.
pub fn build_s(codec: &CellCodec) -> Result<AffineGate, CompileError> {
    let ell = codec.width();
    let mut entries = Vec::new();
    for q in 0..codec.states {
        for a in 0..codec.symbols {
            for b in 0..codec.symbols {
                let empty = codec.encode(blank_cell(a))?;
                let head = codec.encode(Cell { s: 1, q: Some(q), a: b })?;
                entries.push(((empty << ell) | head, (head << ell) | empty, Rational::one()));
            }
        }
    }
    Ok(make_gate("S", 2 * ell, entries, true)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::SparseAffineVector;
    use crate::machine::TimeBound;
    use crate::rational::frac;

    fn coin() -> AffTm {
        let mut m = AffTm::new(&["_", "1"], "_", &["q", "A", "R"], "q", "A", "R", TimeBound::Constant(1))
            .unwrap();
        for s in ["_", "1"] {
            m.add_rule("q", s, "A", s, Move::Stay, frac(1, 2)).unwrap();
            m.add_rule("q", s, "R", s, Move::Stay, frac(1, 2)).unwrap();
        }
        m
    }

    #[test]
    fn all_columns_of_small_gates_sum_to_one() {
        let m = coin();
        let codec = CellCodec::for_machine(&m);
        assert_eq!(build_g(&m, &codec).unwrap().audit_columns().unwrap(), 1 << 15);
        assert_eq!(build_i(&codec).unwrap().audit_columns().unwrap(), 1 << 5);
        assert_eq!(build_s(&codec).unwrap().audit_columns().unwrap(), 1 << 10);
    }

    #[test]
    fn coin_column_has_two_halves() {
        let m = coin();
        let codec = CellCodec::for_machine(&m);
        let g = build_g(&m, &codec).unwrap();
        let mid = codec.encode(Cell { s: 1, q: Some(0), a: 0 }).unwrap();
        let column = g.column(mid << 5).unwrap();
        assert_eq!(column.len(), 2);
        assert!(column.iter().all(|(_, w)| *w == frac(1, 2)));
        let idle = codec.encode(Cell { s: 0, q: None, a: 1 }).unwrap();
        assert!(g.column(idle << 5).is_none());
    }

    #[test]
    fn i_is_an_involution() {
        let codec = CellCodec::new(3, 2);
        let i = build_i(&codec).unwrap();
        for word in 0..32u128 {
            let v = SparseAffineVector::basis(5, word);
            assert_eq!(v.apply_gate(&i, 0).unwrap().apply_gate(&i, 0).unwrap(), v);
        }
        let idle = codec.encode(Cell { s: 0, q: None, a: 1 }).unwrap();
        assert!(i.column(idle).is_none());
    }

    #[test]
    fn s_swaps_head_left() {
        let codec = CellCodec::new(3, 2);
        let s = build_s(&codec).unwrap();
        let empty = codec.encode(Cell { s: 0, q: None, a: 1 }).unwrap() as u128;
        let head = codec.encode(Cell { s: 1, q: Some(2), a: 0 }).unwrap() as u128;
        let out = SparseAffineVector::basis(10, (empty << 5) | head).apply_gate(&s, 0).unwrap();
        assert_eq!(out, SparseAffineVector::basis(10, (head << 5) | empty));
    }
}
