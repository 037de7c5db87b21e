use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::vector::check_placement;
use super::{contract, dense_apply_gate, AffineGate, CircuitError, Effect, SparseAffineVector, MAX_WIDTH};
use crate::rational::Rational;

/// Widest register the dense backend accepts.
pub const MAX_DENSE_WIDTH: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub gate: Arc<AffineGate>,
    pub offset: usize,
}

impl Placement {
    pub fn wires(&self) -> core::ops::Range<usize> {
        self.offset..self.offset + self.gate.arity()
    }
}

/// Basis preparation, gates in order, then a product effect layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    pub wires: usize,
    pub prep: u128,
    pub gates: Vec<Placement>,
    pub effects: Vec<(Effect, Vec<usize>)>,
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    Sparse,
    Dense,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Simulation {
    /// State after the last gate, before any effect.
    pub state: SparseAffineVector,
    /// State left on the wires the effect layer does not touch.
    pub reduced: SparseAffineVector,
    /// Outcome scalar of a closed circuit.
    pub scalar: Option<Rational>,
}

impl Circuit {
    pub fn new(wires: usize, prep: u128) -> Self {
        Circuit {
            wires,
            prep,
            gates: Vec::new(),
            effects: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn push_gate(&mut self, gate: Arc<AffineGate>, offset: usize) -> Result<(), CircuitError> {
        check_placement(&gate, offset, self.wires)?;
        self.gates.push(Placement { gate, offset });
        Ok(())
    }

    /// Bounds of every placement and disjointness of the effect layer.
    pub fn validate(&self) -> Result<(), CircuitError> {
        if self.wires > MAX_WIDTH {
            return Err(CircuitError::TooWide(self.wires));
        }
        if self.wires < MAX_WIDTH && self.prep >> self.wires != 0 {
            return Err(CircuitError::BadBits(alloc::format!(
                "preparation does not fit {} wires",
                self.wires
            )));
        }
        for p in &self.gates {
            check_placement(&p.gate, p.offset, self.wires)?;
        }
        let mut used = alloc::vec![false; self.wires];
        for (effect, wires) in &self.effects {
            if effect.arity() != wires.len() {
                return Err(CircuitError::EffectArity {
                    expected: effect.arity(),
                    given: wires.len(),
                });
            }
            for &w in wires {
                if w >= self.wires {
                    return Err(CircuitError::WireOutOfRange {
                        wire: w,
                        width: self.wires,
                    });
                }
                if used[w] {
                    return Err(CircuitError::Overlap(w));
                }
                used[w] = true;
            }
        }
        Ok(())
    }

    pub fn open_wires(&self) -> Vec<usize> {
        let mut used = alloc::vec![false; self.wires];
        for (_, wires) in &self.effects {
            for &w in wires {
                if w < self.wires {
                    used[w] = true;
                }
            }
        }
        (0..self.wires).filter(|&w| !used[w]).collect()
    }

    pub fn is_closed(&self) -> bool {
        self.open_wires().is_empty()
    }

    /// Prepares and applies the gate list, auditing mass after each gate.
    pub fn run_gates(&self, mode: SimMode) -> Result<SparseAffineVector, CircuitError> {
        self.run_prefix(mode, self.gates.len())
    }

    /// Same as [`Circuit::run_gates`] but stops after `count` gates.
    pub fn run_prefix(&self, mode: SimMode, count: usize) -> Result<SparseAffineVector, CircuitError> {
        self.validate()?;
        let gates = &self.gates[..count.min(self.gates.len())];
        match mode {
            SimMode::Sparse => {
                let mut state = SparseAffineVector::basis(self.wires, self.prep);
                for p in gates {
                    state = state.apply_gate(&p.gate, p.offset)?;
                    state.audit()?;
                }
                Ok(state)
            }
            SimMode::Dense => {
                if self.wires > MAX_DENSE_WIDTH {
                    return Err(CircuitError::DenseTooWide {
                        width: self.wires,
                        limit: MAX_DENSE_WIDTH,
                    });
                }
                let mut values = SparseAffineVector::basis(self.wires, self.prep).to_dense();
                for p in gates {
                    values = dense_apply_gate(&values, self.wires, &p.gate, p.offset)?;
                }
                Ok(SparseAffineVector::from_dense(self.wires, &values))
            }
        }
    }

    /// Runs the gates, then the effect layer.
    pub fn simulate(&self, mode: SimMode) -> Result<Simulation, CircuitError> {
        let state = self.run_gates(mode)?;
        let contraction = contract(&state, &self.effects)?;
        Ok(Simulation {
            state,
            reduced: contraction.state,
            scalar: contraction.scalar,
        })
    }

    /// Outcome scalar; an error for open circuits.
    pub fn scalar(&self, mode: SimMode) -> Result<Rational, CircuitError> {
        let open = self.open_wires();
        if !open.is_empty() {
            let names: Vec<String> = open.iter().map(|w| alloc::format!("{w}")).collect();
            return Err(CircuitError::Open(names.join(",")));
        }
        Ok(self.simulate(mode)?.scalar.expect("closed circuit yields a scalar"))
    }
}
