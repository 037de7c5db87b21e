use alloc::vec::Vec;

use num_traits::One;

use super::TheoryError;
use crate::circuit::{Effect, LinearEffect, ProductEffect, SparseAffineVector};
use crate::compiler::{CompiledCircuit, Outcome};
use crate::rational::Rational;

/// The three-outcome measurement on the full register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinalMeasurement {
    pub e_acc: LinearEffect,
    pub e_rej: LinearEffect,
    pub e_none: LinearEffect,
}

fn state_effect(compiled: &CompiledCircuit, code: u64) -> ProductEffect {
    let layout = &compiled.layout;
    let field = layout.state_field();
    let mut factors: Vec<(Effect, Vec<usize>)> = alloc::vec![(Effect::basis(field.len(), code), field.clone().collect())];
    factors.extend(
        (0..layout.wire_count())
            .filter(|w| !field.contains(w))
            .map(|w| (Effect::deterministic(1), alloc::vec![w])),
    );
    ProductEffect {
        width: layout.wire_count(),
        factors,
    }
}

/// `e_acc`, `e_rej` put `(A|`, `(R|` on the state field of cell `-t` and `(u|`
/// on every other wire; `e_none = u - e_acc - e_rej`.
pub fn final_measurement(compiled: &CompiledCircuit) -> FinalMeasurement {
    let width = compiled.layout.wire_count();
    let e_acc = LinearEffect::single(state_effect(compiled, compiled.accept_code));
    let e_rej = LinearEffect::single(state_effect(compiled, compiled.reject_code));
    let u = LinearEffect::single(ProductEffect::deterministic(width));
    let e_none = u.minus(&e_acc).minus(&e_rej);
    FinalMeasurement { e_acc, e_rej, e_none }
}

impl FinalMeasurement {
    pub fn effects(&self) -> [&LinearEffect; 3] {
        [&self.e_acc, &self.e_rej, &self.e_none]
    }

    pub fn width(&self) -> usize {
        self.e_acc.width
    }

    /// Outcome weights on a pre-measurement state.
    pub fn apply(&self, state: &SparseAffineVector) -> Result<Outcome, TheoryError> {
        Ok(Outcome {
            accept: self.e_acc.evaluate(state)?,
            reject: self.e_rej.evaluate(state)?,
            none: self.e_none.evaluate(state)?,
        })
    }

    /// `e_acc + e_rej + e_none - u` is the zero functional.
    pub fn sums_to_unit(&self) -> Result<bool, TheoryError> {
        let u = LinearEffect::single(ProductEffect::deterministic(self.width()));
        let total = self.e_acc.plus(&self.e_rej).plus(&self.e_none);
        Ok(total.combine(&Rational::one(), &u, &-Rational::one()).is_zero()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::SimMode;
    use crate::compiler::compile;
    use crate::machine::{AffTm, Move, TimeBound};
    use crate::rational::{frac, int};

    fn machine(p_accept: Rational) -> AffTm {
        let mut m = AffTm::new(&["_", "1"], "_", &["q", "A", "R"], "q", "A", "R", TimeBound::Constant(1))
            .unwrap();
        for s in ["_", "1"] {
            m.add_rule("q", s, "A", s, Move::Right, p_accept.clone()).unwrap();
            m.add_rule("q", s, "R", s, Move::Left, int(1) - &p_accept).unwrap();
        }
        m
    }

    #[test]
    fn coin_and_sure_accept() {
        for (p, expected) in [(frac(1, 2), (frac(1, 2), frac(1, 2))), (int(1), (int(1), int(0)))] {
            let m = machine(p);
            let c = compile(&m, 0).unwrap();
            let fm = final_measurement(&c);
            assert!(fm.sums_to_unit().unwrap());
            let out = fm.apply(&c.circuit.run_gates(SimMode::Sparse).unwrap()).unwrap();
            assert_eq!((out.accept, out.reject, out.none), (expected.0, expected.1, int(0)));
        }
    }

    #[test]
    fn dropping_none_breaks_the_sum() {
        let c = compile(&machine(frac(1, 2)), 0).unwrap();
        let mut fm = final_measurement(&c);
        fm.e_none = fm.e_rej.clone();
        assert!(!fm.sums_to_unit().unwrap());
    }
}
