use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::TheoryError;
use crate::circuit::{contract, Effect, SparseAffineVector};
use crate::compiler::{CompiledCircuit, CompiledLayout, GateSlot};
use crate::machine::{AffTm, SymbolId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparationLimits {
    /// Largest number of preparations returned.
    pub max_preparations: usize,
    /// Also emit the marginals on each cell and on each single wire.
    pub marginals: bool,
}

impl Default for PreparationLimits {
    fn default() -> Self {
        PreparationLimits {
            max_preparations: 200,
            marginals: true,
        }
    }
}

/// How a preparation was obtained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparationDescriptor {
    pub input: Vec<SymbolId>,
    /// Indices into the canonical gate list, increasing.
    pub gates: Vec<usize>,
    /// Wires left open; the rest were contracted with `(u|`.
    pub kept: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preparation {
    pub descriptor: PreparationDescriptor,
    pub state: SparseAffineVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparationSet {
    pub items: Vec<Preparation>,
    pub truncated: bool,
    pub cap: usize,
}

impl PreparationSet {
    pub fn states(&self) -> Vec<SparseAffineVector> {
        self.items.iter().map(|p| p.state.clone()).collect()
    }
}

/// For each gate of `schedule`, the latest earlier gate on each of its wires.
pub fn gate_predecessors(schedule: &[GateSlot], wires: usize) -> Vec<Vec<usize>> {
    let mut last: Vec<Option<usize>> = alloc::vec![None; wires];
    schedule
        .iter()
        .enumerate()
        .map(|(index, slot)| {
            let mut preds: BTreeSet<usize> = BTreeSet::new();
            for w in slot.wires() {
                if let Some(prev) = last[w] {
                    preds.insert(prev);
                }
                last[w] = Some(index);
            }
            preds.into_iter().collect()
        })
        .collect()
}

/// Smallest downward-closed subset containing `seed`.
pub fn downward_closure(layout: &CompiledLayout, seed: &BTreeSet<usize>) -> BTreeSet<usize> {
    let preds = gate_predecessors(&layout.schedule(), layout.wire_count());
    let mut out = BTreeSet::new();
    let mut stack: Vec<usize> = seed.iter().copied().collect();
    while let Some(g) = stack.pop() {
        if g < preds.len() && out.insert(g) {
            stack.extend(preds[g].iter().copied());
        }
    }
    out
}

struct Enumerator<'a> {
    compiled: &'a CompiledCircuit,
    preds: Vec<Vec<usize>>,
    cap: usize,
    seen: BTreeSet<Vec<usize>>,
    out: Vec<(Vec<usize>, SparseAffineVector)>,
    truncated: bool,
}

impl Enumerator<'_> {
    fn push(&mut self, gates: Vec<usize>, state: SparseAffineVector) -> bool {
        if self.seen.contains(&gates) {
            return true;
        }
        if self.out.len() >= self.cap {
            self.truncated = true;
            return false;
        }
        self.seen.insert(gates.clone());
        self.out.push((gates, state));
        true
    }

    /// Depth-first over include/exclude decisions in gate order, include first.
    fn dfs(
        &mut self,
        index: usize,
        chosen: &mut Vec<usize>,
        included: &mut [bool],
        state: SparseAffineVector,
    ) -> Result<bool, TheoryError> {
        let gates = &self.compiled.circuit.gates;
        if index == gates.len() {
            return Ok(self.push(chosen.clone(), state));
        }
        if self.preds[index].iter().all(|&p| included[p]) {
            let placement = &gates[index];
            let next = state.apply_gate(&placement.gate, placement.offset)?;
            chosen.push(index);
            included[index] = true;
            let go_on = self.dfs(index + 1, chosen, included, next)?;
            chosen.pop();
            included[index] = false;
            if !go_on {
                return Ok(false);
            }
        }
        self.dfs(index + 1, chosen, included, state)
    }
}

/// Downward-closed gate subsets of the canonical list applied to the initial
/// configuration, for each input in `inputs`: first the prefixes, then the
/// remaining subsets depth first, then (optionally) the marginals of all of
/// them on each cell and on each wire. Stops at `limits.max_preparations`.
pub fn enumerate_preparations(
    machine: &AffTm,
    compiled: &CompiledCircuit,
    inputs: &[Vec<SymbolId>],
    limits: &PreparationLimits,
) -> Result<PreparationSet, TheoryError> {
    let layout = &compiled.layout;
    let width = layout.wire_count();
    let gates = &compiled.circuit.gates;
    let cap = limits.max_preparations;
    let mut items: Vec<Preparation> = Vec::new();
    let mut truncated = false;
    let all_wires: Vec<usize> = (0..width).collect();
    let mut full: Vec<Preparation> = Vec::new();
    for input in inputs {
        let prep = layout.initial_configuration(machine, input)?;
        let mut e = Enumerator {
            compiled,
            preds: gate_predecessors(&layout.schedule(), width),
            cap: cap.saturating_sub(full.len()),
            seen: BTreeSet::new(),
            out: Vec::new(),
            truncated: false,
        };
        let mut state = SparseAffineVector::basis(width, prep);
        let mut prefix_done = e.push(Vec::new(), state.clone());
        for (count, placement) in gates.iter().enumerate() {
            if !prefix_done {
                break;
            }
            state = state.apply_gate(&placement.gate, placement.offset)?;
            prefix_done = e.push((0..=count).collect(), state.clone());
        }
        if prefix_done {
            let mut included = alloc::vec![false; gates.len()];
            e.dfs(
                0,
                &mut Vec::new(),
                &mut included,
                SparseAffineVector::basis(width, prep),
            )?;
        }
        truncated |= e.truncated;
        full.extend(e.out.into_iter().map(|(gates, state)| Preparation {
            descriptor: PreparationDescriptor {
                input: input.clone(),
                gates,
                kept: all_wires.clone(),
            },
            state,
        }));
        if truncated {
            break;
        }
    }
    items.extend(full.iter().cloned());
    if limits.marginals && !truncated {
        let mut groups: Vec<Vec<usize>> = layout.wire_map().into_iter().map(|c| c.wires.collect()).collect();
        groups.extend((0..width).map(|w| alloc::vec![w]));
        'outer: for group in &groups {
            for base in &full {
                if items.len() >= cap {
                    truncated = true;
                    break 'outer;
                }
                items.push(marginal(base, group)?);
            }
        }
    }
    Ok(PreparationSet {
        items,
        truncated,
        cap,
    })
}

fn marginal(base: &Preparation, kept: &[usize]) -> Result<Preparation, TheoryError> {
    let width = base.state.width();
    let factors: Vec<(Effect, Vec<usize>)> = (0..width)
        .filter(|w| !kept.contains(w))
        .map(|w| (Effect::deterministic(1), alloc::vec![w]))
        .collect();
    let reduced = contract(&base.state, &factors)?;
    let mut descriptor = base.descriptor.clone();
    descriptor.kept = kept.to_vec();
    Ok(Preparation {
        descriptor,
        state: reduced.state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::compile;
    use crate::machine::{Move, TimeBound};
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
    fn coin_segments() {
        let m = coin();
        let c = compile(&m, 0).unwrap();
        let limits = PreparationLimits {
            max_preparations: 1000,
            marginals: false,
        };
        let set = enumerate_preparations(&m, &c, &[Vec::new()], &limits).unwrap();
        assert!(!set.truncated);
        let first = &set.items[0];
        assert!(first.descriptor.gates.is_empty());
        assert_eq!(first.state, SparseAffineVector::basis(15, c.circuit.prep));
        let one_g = &set.items[1];
        assert_eq!(one_g.descriptor.gates, [0]);
        assert_eq!(one_g.state.support_len(), 2);
        assert!(one_g.state.entries().all(|(_, v)| *v == frac(1, 2)));
        let last = set.items.iter().find(|p| p.descriptor.gates.len() == c.circuit.gates.len()).unwrap();
        assert_eq!(last.state, c.circuit.run_gates(crate::circuit::SimMode::Sparse).unwrap());
        // G, then any of the three I gates, then S(1,2) needs I1, I2 and S(0,1) needs everything
        assert_eq!(set.items.len(), 1 + 8 + 2 + 1);
        for p in &set.items {
            let closed = downward_closure(&c.layout, &p.descriptor.gates.iter().copied().collect());
            assert_eq!(closed.into_iter().collect::<Vec<_>>(), p.descriptor.gates);
        }
    }

    #[test]
    fn cap_sets_truncated() {
        let m = coin();
        let c = compile(&m, 0).unwrap();
        let limits = PreparationLimits {
            max_preparations: 5,
            marginals: true,
        };
        let set = enumerate_preparations(&m, &c, &[Vec::new()], &limits).unwrap();
        assert!(set.truncated);
        assert_eq!(set.items.len(), 5);
    }

    #[test]
    fn marginals_have_unit_mass() {
        let m = coin();
        let c = compile(&m, 0).unwrap();
        let set = enumerate_preparations(&m, &c, &[Vec::new()], &PreparationLimits::default()).unwrap();
        for p in &set.items {
            assert_eq!(p.state.width(), p.descriptor.kept.len());
            assert_eq!(p.state.coefficient_sum(), crate::rational::int(1));
        }
    }
}
