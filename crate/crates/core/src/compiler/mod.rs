//! Compilation of an affine machine and an input length into the affine
//! circuit that simulates it: per-cell bit encoding, the gates `G`, `I`, `S`,
//! the step block `B` repeated `t` times, the `S` cascade and the final
//! deterministic effects.

mod codec;
mod gates;

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::ops::Range;

use num_traits::Zero;

use crate::circuit::{AffineGate, Circuit, CircuitError, Effect, SimMode, SparseAffineVector};
use crate::machine::{AffTm, Configuration, MachineError, SymbolId, WeightedConfigSet};
use crate::rational::Rational;

pub use codec::{Cell, CellCodec};
pub use gates::{build_g, build_i, build_s};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("cell with s = {s} and empty_state = {empty_state} is not encodable")]
    InconsistentCell { s: u8, empty_state: bool },
    #[error("word {word} does not encode a cell")]
    InvalidWord { word: String },
    #[error("input of length {n} does not fit the window of budget {t}")]
    InputTooLong { n: usize, t: usize },
    #[error("input has length {given}, circuit was compiled for {expected}")]
    LengthMismatch { expected: usize, given: usize },
    #[error("register of {0} wires is too wide")]
    TooWide(usize),
    #[error("configuration has head or tape outside the window")]
    OutsideWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GateKind {
    G,
    I,
    S,
}

impl GateKind {
    pub fn code(self) -> &'static str {
        match self {
            GateKind::G => "G",
            GateKind::I => "I",
            GateKind::S => "S",
        }
    }
}

/// One entry of the canonical gate list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateSlot {
    pub kind: GateKind,
    /// First wire.
    pub offset: usize,
    /// Number of wires.
    pub arity: usize,
    /// Index of the enclosing `B` block, `None` for the `S` cascade.
    pub block: Option<usize>,
}

impl GateSlot {
    pub fn wires(&self) -> Range<usize> {
        self.offset..self.offset + self.arity
    }
}

/// Wires of one cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellWires {
    pub cell: i64,
    pub wires: Range<usize>,
    pub s: Range<usize>,
    pub q: Range<usize>,
    pub a: Range<usize>,
}

/// Wire arithmetic of `M_n`: cells `-t..=t`, each `ell` wires wide, cell `-t`
/// first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompiledLayout {
    pub t: usize,
    pub n: usize,
    pub codec: CellCodec,
}

impl CompiledLayout {
    pub fn new(codec: CellCodec, t: usize, n: usize) -> Result<Self, CompileError> {
        let t = t.max(1);
        if n > t + 1 {
            return Err(CompileError::InputTooLong { n, t });
        }
        let layout = CompiledLayout { t, n, codec };
        if layout.wire_count() > crate::circuit::MAX_WIDTH {
            return Err(CompileError::TooWide(layout.wire_count()));
        }
        Ok(layout)
    }

    pub fn ell(&self) -> usize {
        self.codec.width()
    }

    pub fn cells(&self) -> usize {
        2 * self.t + 1
    }

    pub fn wire_count(&self) -> usize {
        self.cells() * self.ell()
    }

    /// First wire of tape cell `cell` (in `-t..=t`).
    pub fn cell_offset(&self, cell: i64) -> usize {
        (cell + self.t as i64) as usize * self.ell()
    }

    /// The q-field wires of cell `-t`, where the final state is read.
    pub fn state_field(&self) -> Range<usize> {
        self.codec.q_field()
    }

    pub fn wire_map(&self) -> Vec<CellWires> {
        let shift = |r: Range<usize>, base: usize| base + r.start..base + r.end;
        (-(self.t as i64)..=self.t as i64)
            .map(|cell| {
                let base = self.cell_offset(cell);
                CellWires {
                    cell,
                    wires: base..base + self.ell(),
                    s: shift(self.codec.s_field(), base),
                    q: shift(self.codec.q_field(), base),
                    a: shift(self.codec.a_field(), base),
                }
            })
            .collect()
    }

    /// Gates of one `B` block: `2t - 1` cascaded `G` then `2t + 1` parallel `I`.
    pub fn block(&self, index: usize) -> Vec<GateSlot> {
        let ell = self.ell();
        let mut out: Vec<GateSlot> = (0..2 * self.t - 1)
            .map(|j| GateSlot {
                kind: GateKind::G,
                offset: j * ell,
                arity: 3 * ell,
                block: Some(index),
            })
            .collect();
        out.extend((0..self.cells()).map(|j| GateSlot {
            kind: GateKind::I,
            offset: j * ell,
            arity: ell,
            block: Some(index),
        }));
        out
    }

    /// `2t` swaps, rightmost pair of cells first.
    pub fn s_cascade(&self) -> Vec<GateSlot> {
        let ell = self.ell();
        (0..2 * self.t)
            .rev()
            .map(|j| GateSlot {
                kind: GateKind::S,
                offset: j * ell,
                arity: 2 * ell,
                block: None,
            })
            .collect()
    }

    /// The canonical gate list of `M_n`.
    pub fn schedule(&self) -> Vec<GateSlot> {
        let mut out: Vec<GateSlot> = (0..self.t).flat_map(|b| self.block(b)).collect();
        out.extend(self.s_cascade());
        out
    }

    /// Encoding of the initial configuration: head on cell 0 in the initial
    /// state, input on cells `0..n`, blanks elsewhere.
    pub fn initial_configuration(
        &self,
        machine: &AffTm,
        input: &[SymbolId],
    ) -> Result<u128, CompileError> {
        if input.len() != self.n {
            return Err(CompileError::LengthMismatch {
                expected: self.n,
                given: input.len(),
            });
        }
        self.encode_configuration(machine, &Configuration::initial(machine, input))
    }

    /// Basis string of a configuration (the step counter is not encoded).
    pub fn encode_configuration(
        &self,
        machine: &AffTm,
        config: &Configuration,
    ) -> Result<u128, CompileError> {
        let t = self.t as i64;
        if config.head.abs() > t || config.tape.iter().any(|(c, _)| c.abs() > t) {
            return Err(CompileError::OutsideWindow);
        }
        let mut bits = 0u128;
        for cell in -t..=t {
            let word = if cell == config.head {
                self.codec.encode(Cell {
                    s: 1,
                    q: Some(config.state),
                    a: config.tape.read(cell, machine.blank()),
                })?
            } else {
                self.codec.encode(Cell {
                    s: 0,
                    q: None,
                    a: config.tape.read(cell, machine.blank()),
                })?
            };
            bits = (bits << self.ell()) | word as u128;
        }
        Ok(bits)
    }

    /// Sparse vector encoding an affine combination of configurations.
    pub fn encode_frontier(
        &self,
        machine: &AffTm,
        frontier: &WeightedConfigSet,
    ) -> Result<SparseAffineVector, CompileError> {
        let mut out = SparseAffineVector::zero(self.wire_count());
        for (config, weight) in frontier.iter() {
            out.add(self.encode_configuration(machine, config)?, weight.clone());
        }
        Ok(out)
    }

    /// Splits a basis string into decoded cells, cell `-t` first.
    pub fn decode(&self, bits: u128) -> Result<Vec<Cell>, CompileError> {
        let ell = self.ell();
        let mask = (1u128 << ell) - 1;
        (0..self.cells())
            .map(|j| {
                let shift = (self.cells() - 1 - j) * ell;
                self.codec.decode(((bits >> shift) & mask) as u64)
            })
            .collect()
    }
}

/// The compiled circuit `M_n` with its gates and layout.
#[derive(Debug, Clone)]
pub struct CompiledCircuit {
    /// Effect layer is `(u|` on every wire except the state field of cell `-t`.
    pub circuit: Circuit,
    pub layout: CompiledLayout,
    pub g: Arc<AffineGate>,
    pub i: Arc<AffineGate>,
    pub s: Arc<AffineGate>,
    pub accept_code: u64,
    pub reject_code: u64,
}

/// Outcome weights of the accept / reject / none measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub accept: Rational,
    pub reject: Rational,
    pub none: Rational,
}

/// Builds `M_n` for `machine`, with `t = max(1, T(n))`. The preparation is
/// the initial configuration on `n` blanks; use [`CompiledCircuit::with_input`].
pub fn compile(machine: &AffTm, n: usize) -> Result<CompiledCircuit, CompileError> {
    machine.ensure_valid()?;
    let t = machine.time_bound().steps_for(n)?;
    let codec = CellCodec::for_machine(machine);
    let layout = CompiledLayout::new(codec, t, n)?;
    let g = Arc::new(build_g(machine, &codec)?);
    let i = Arc::new(build_i(&codec)?);
    let s = Arc::new(build_s(&codec)?);
    let blanks = alloc::vec![machine.blank(); n];
    let mut circuit = Circuit::new(layout.wire_count(), layout.initial_configuration(machine, &blanks)?);
    for slot in layout.schedule() {
        let gate = match slot.kind {
            GateKind::G => &g,
            GateKind::I => &i,
            GateKind::S => &s,
        };
        circuit.push_gate(gate.clone(), slot.offset)?;
    }
    let keep = layout.state_field();
    for w in (0..layout.wire_count()).filter(|w| !keep.contains(w)) {
        circuit.effects.push((Effect::deterministic(1), alloc::vec![w]));
    }
    circuit.metadata = BTreeMap::from([
        ("machine_hash".to_string(), machine.fingerprint()),
        ("n".to_string(), n.to_string()),
        ("t".to_string(), layout.t.to_string()),
        ("ell".to_string(), layout.ell().to_string()),
    ]);
    Ok(CompiledCircuit {
        circuit,
        layout,
        g,
        i,
        s,
        accept_code: codec.state_code(Some(machine.accept())),
        reject_code: codec.state_code(Some(machine.reject())),
    })
}

impl CompiledCircuit {
    /// The circuit with its preparation set to the initial configuration on `input`.
    pub fn with_input(&self, machine: &AffTm, input: &[SymbolId]) -> Result<Circuit, CompileError> {
        let mut c = self.circuit.clone();
        c.prep = self.layout.initial_configuration(machine, input)?;
        Ok(c)
    }

    /// Reads `(w_A, w_R, none)` from the reduced state on the state field.
    pub fn outcome_of(&self, reduced: &SparseAffineVector) -> Outcome {
        let accept = reduced.coefficient(self.accept_code as u128);
        let reject = reduced.coefficient(self.reject_code as u128);
        let none = reduced.coefficient_sum() - &accept - &reject;
        Outcome {
            accept,
            reject,
            none,
        }
    }

    /// Simulates the circuit on `input` and returns the outcome weights.
    pub fn run(&self, machine: &AffTm, input: &[SymbolId], mode: SimMode) -> Result<Outcome, CompileError> {
        let sim = self.with_input(machine, input)?.simulate(mode)?;
        Ok(self.outcome_of(&sim.reduced))
    }

    /// Gate counts `(G, I, S)`.
    pub fn gate_counts(&self) -> (usize, usize, usize) {
        let count = |name: &str| {
            self.circuit
                .gates
                .iter()
                .filter(|p| p.gate.name() == name)
                .count()
        };
        (count("G"), count("I"), count("S"))
    }
}

impl Outcome {
    pub fn is_zero_none(&self) -> bool {
        self.none.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{run_afftm, step_frontier, Move, RunMode, TimeBound};
    use crate::rational::{frac, int};

    fn coin() -> AffTm {
        let mut m = AffTm::new(&["_", "1"], "_", &["q", "A", "R"], "q", "A", "R", TimeBound::Constant(1))
            .unwrap();
        for s in ["_", "1"] {
            m.add_rule("q", s, "A", s, Move::Stay, frac(1, 2)).unwrap();
            m.add_rule("q", s, "R", s, Move::Right, frac(1, 2)).unwrap();
        }
        m
    }

    #[test]
    fn layout_counts() {
        let c = compile(&coin(), 0).unwrap();
        assert_eq!(c.layout.ell(), 5);
        assert_eq!(c.layout.wire_count(), 15);
        assert_eq!(c.gate_counts(), (1, 3, 2));
        let wide = CompiledLayout::new(c.layout.codec, 3, 2).unwrap();
        let kinds: Vec<GateKind> = wide.schedule().iter().map(|s| s.kind).collect();
        assert_eq!(kinds.iter().filter(|k| **k == GateKind::G).count(), 3 * 5);
        assert_eq!(kinds.iter().filter(|k| **k == GateKind::I).count(), 3 * 7);
        assert_eq!(kinds.iter().filter(|k| **k == GateKind::S).count(), 6);
        assert_eq!(wide.s_cascade()[0].offset, 5 * 5);
    }

    #[test]
    fn initial_configuration_places_head_on_cell_zero() {
        let m = coin();
        let layout = CompiledLayout::new(CellCodec::for_machine(&m), 2, 1).unwrap();
        let cells = layout.decode(layout.initial_configuration(&m, &[1]).unwrap()).unwrap();
        assert_eq!(cells.len(), 5);
        assert_eq!(cells[2], Cell { s: 1, q: Some(0), a: 1 });
        for j in [0, 1, 3, 4] {
            assert_eq!(cells[j], Cell { s: 0, q: None, a: 0 });
        }
    }

    #[test]
    fn one_block_matches_one_frontier_step() {
        let m = coin();
        let layout = CompiledLayout::new(CellCodec::for_machine(&m), 2, 0).unwrap();
        let g = build_g(&m, &layout.codec).unwrap();
        let i = build_i(&layout.codec).unwrap();
        let mut frontier = WeightedConfigSet::singleton(Configuration::initial(&m, &[]));
        let mut state = layout.encode_frontier(&m, &frontier).unwrap();
        for _ in 0..2 {
            for slot in layout.block(0) {
                let gate = if slot.kind == GateKind::G { &g } else { &i };
                state = state.apply_gate(gate, slot.offset).unwrap();
            }
            frontier = step_frontier(&m, &frontier, 2).unwrap();
            assert_eq!(state, layout.encode_frontier(&m, &frontier).unwrap());
        }
    }

    #[test]
    fn fair_coin_circuit_gives_half_half() {
        let m = coin();
        let c = compile(&m, 0).unwrap();
        let out = c.run(&m, &[], SimMode::Sparse).unwrap();
        assert_eq!(out, Outcome { accept: frac(1, 2), reject: frac(1, 2), none: int(0) });
        let alpha = run_afftm(&m, &[], RunMode::Frontier).unwrap().accept_weight;
        assert_eq!(out.accept, alpha);
    }

    #[test]
    fn input_must_fit() {
        assert!(matches!(
            CompiledLayout::new(CellCodec::new(3, 2), 1, 3),
            Err(CompileError::InputTooLong { .. })
        ));
    }
}
