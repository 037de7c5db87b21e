use core::ops::Range;

use super::CompileError;
use crate::machine::{Machine, StateId, SymbolId};
use crate::rational::ceil_log2;

/// Contents of one tape cell: head phase `s`, state (absent iff `s = 0`) and symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub s: u8,
    pub q: Option<StateId>,
    pub a: SymbolId,
}

/// Bit layout of a cell word: `s` in two bits, then `q`, then `a`, each
/// big-endian. State code 0 is the empty state, state `i` has code `i + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellCodec {
    pub states: usize,
    pub symbols: usize,
    pub q_bits: usize,
    pub a_bits: usize,
}

impl CellCodec {
    pub fn new(states: usize, symbols: usize) -> Self {
        CellCodec {
            states,
            symbols,
            q_bits: ceil_log2(&(states as u64 + 1).into()),
            a_bits: ceil_log2(&(symbols as u64).into()),
        }
    }

    pub fn for_machine<A: Clone>(machine: &Machine<A>) -> Self {
        Self::new(machine.states().len(), machine.alphabet().len())
    }

    /// Bits per cell, `2 + ceil(log2(|Q|+1)) + ceil(log2 |Sigma|)`.
    pub fn width(&self) -> usize {
        2 + self.q_bits + self.a_bits
    }

    pub fn s_field(&self) -> Range<usize> {
        0..2
    }

    pub fn q_field(&self) -> Range<usize> {
        2..2 + self.q_bits
    }

    pub fn a_field(&self) -> Range<usize> {
        2 + self.q_bits..self.width()
    }

    pub fn state_code(&self, q: Option<StateId>) -> u64 {
        q.map_or(0, |q| q as u64 + 1)
    }

    pub fn encode(&self, cell: Cell) -> Result<u64, CompileError> {
        if cell.s > 2 || (cell.s == 0) != cell.q.is_none() {
            return Err(CompileError::InconsistentCell {
                s: cell.s,
                empty_state: cell.q.is_none(),
            });
        }
        if cell.q.is_some_and(|q| q >= self.states) || cell.a >= self.symbols {
            return Err(CompileError::InconsistentCell {
                s: cell.s,
                empty_state: cell.q.is_none(),
            });
        }
        Ok(((cell.s as u64) << (self.q_bits + self.a_bits))
            | (self.state_code(cell.q) << self.a_bits)
            | cell.a as u64)
    }

    pub fn decode(&self, word: u64) -> Result<Cell, CompileError> {
        let invalid = || CompileError::InvalidWord {
            word: crate::circuit::bits_to_string(word as u128, self.width()),
        };
        if word >> self.width() != 0 {
            return Err(invalid());
        }
        let s = (word >> (self.q_bits + self.a_bits)) as u8;
        let code = (word >> self.a_bits) & ((1 << self.q_bits) - 1);
        let a = (word & ((1 << self.a_bits) - 1)) as usize;
        if s == 3 || code as usize > self.states || a >= self.symbols || (s == 0) != (code == 0) {
            return Err(invalid());
        }
        let q = (code > 0).then(|| code as usize - 1);
        Ok(Cell { s, q, a })
    }
}
