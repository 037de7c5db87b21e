use std::sync::Arc;

use awpp_core::circuit::{make_gate, AffineGate, Circuit, SimMode, SparseAffineVector};
use awpp_core::compiler::compile;
use awpp_core::machine::{run_afftm, AffTm, Move, Rule, RunMode, TimeBound};
use awpp_core::rational::{frac, int, Rational};
use awpp_core::theory::{
    mixing_matrix, noisy_statistics, proper_at, tomography_reconstruct, veil_search,
};
use num_traits::{One, Zero};
use proptest::prelude::*;

/// Integer quarters summing to 4, one per entry.
fn quarter_weights(len: usize) -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::vec(-4i64..=6, len - 1).prop_map(move |mut v| {
        let rest: i64 = 4 - v.iter().sum::<i64>();
        v.push(rest);
        v.into_iter().map(|k| frac(k, 4)).collect()
    })
}

fn movement(code: u8) -> Move {
    [Move::Left, Move::Stay, Move::Right][code as usize % 3]
}

prop_compose! {
    /// `q0` may step to `q1` when `t = 2`; `q1` always halts, so every
    /// branch halts within the budget.
    fn small_afftm()(
        t in 1usize..=2,
        sizes in proptest::collection::vec(1usize..=3, 4),
    )(
        t in Just(t),
        weights in (
            quarter_weights(sizes[0]),
            quarter_weights(sizes[1]),
            quarter_weights(sizes[2]),
            quarter_weights(sizes[3]),
        ),
        shapes in proptest::collection::vec((0usize..3, 0usize..2, 0u8..3), sizes.iter().sum::<usize>()),
    ) -> AffTm {
        let mut m = AffTm::new(
            &["_", "1"], "_", &["q0", "q1", "A", "R"], "q0", "A", "R", TimeBound::Constant(t),
        )
        .unwrap();
        let (w0, w1, w2, w3) = weights;
        let rows = [(0usize, 0usize, w0), (0, 1, w1), (1, 0, w2), (1, 1, w3)];
        let mut shapes = shapes.into_iter();
        for (state, read, ws) in rows {
            for w in ws {
                let (pick, write, mv) = shapes.next().unwrap();
                let next = if state == 0 && t == 2 { [1, 2, 3][pick] } else { [2, 3, 2 + pick % 2][pick] };
                m.push_rule(state, read, Rule { next, write, movement: movement(mv), annotation: w }).unwrap();
            }
        }
        m
    }
}

/// Columns of `arity` wires with small integer entries summing to 1.
fn random_gate(arity: usize) -> impl Strategy<Value = AffineGate> {
    let columns = 1usize << arity;
    proptest::collection::vec(proptest::collection::vec(-2i64..=2, columns), columns).prop_map(move |raw| {
        let mut entries = Vec::new();
        for (col, values) in raw.into_iter().enumerate() {
            let sum: i64 = values.iter().sum();
            for (row, v) in values.into_iter().enumerate() {
                let v = if row == col { v + 1 - sum } else { v };
                entries.push((col as u64, row as u64, int(v)));
            }
        }
        make_gate("rand", arity, entries, false).unwrap()
    })
}

prop_compose! {
    fn random_circuit()(width in 1usize..=8)(
        width in Just(width),
        prep in 0u128..(1u128 << width),
        gates in proptest::collection::vec((1usize..=width.min(3)).prop_flat_map(move |a| (random_gate(a), 0..=width - a)), 1..5),
    ) -> Circuit {
        let mut c = Circuit::new(width, prep);
        for (g, offset) in gates {
            c.push_gate(Arc::new(g), offset).unwrap();
        }
        c
    }
}

fn random_state(width: usize) -> impl Strategy<Value = SparseAffineVector> {
    proptest::collection::vec((0u128..(1u128 << width), -3i64..=3), 1..5).prop_map(move |raw| {
        let mut s = SparseAffineVector::from_entries(width, raw.iter().map(|(b, v)| (*b, int(*v))));
        // shift the first string so the coefficients sum to 1
        let fix = Rational::one() - s.coefficient_sum();
        s.add(raw[0].0, fix);
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn compiled_circuit_matches_machine(m in small_afftm(), x in proptest::collection::vec(0usize..2, 0..=2)) {
        let t = m.time_bound().steps_for(x.len()).unwrap();
        prop_assume!(x.len() <= t + 1);
        let alpha = run_afftm(&m, &x, RunMode::Frontier).unwrap();
        let c = compile(&m, x.len()).unwrap();
        let out = c.run(&m, &x, SimMode::Sparse).unwrap();
        prop_assert_eq!(out.accept, alpha.accept_weight);
        prop_assert_eq!(out.reject, alpha.reject_weight);
        prop_assert!(out.none.is_zero());
    }

    #[test]
    fn enumerate_and_frontier_agree(m in small_afftm(), x in proptest::collection::vec(0usize..2, 0..=3)) {
        let a = run_afftm(&m, &x, RunMode::Enumerate).unwrap();
        let b = run_afftm(&m, &x, RunMode::Frontier).unwrap();
        prop_assert_eq!(&a.accept_weight, &b.accept_weight);
        prop_assert_eq!(a.accept_weight + a.reject_weight, int(1));
    }

    #[test]
    fn sparse_and_dense_agree(c in random_circuit()) {
        let sparse = c.run_gates(SimMode::Sparse).unwrap();
        let dense = c.run_gates(SimMode::Dense).unwrap();
        prop_assert_eq!(&sparse, &dense);
        prop_assert_eq!(sparse.coefficient_sum(), int(1));
    }

    #[test]
    fn tomography_round_trip(s in random_state(4), num in 1i64..=16) {
        let p = frac(num, 16);
        let stats = noisy_statistics(&s, &p).unwrap();
        prop_assert_eq!(stats.values().fold(Rational::zero(), |a, v| a + v), int(1));
        prop_assert_eq!(tomography_reconstruct(&stats, &p, 4).unwrap(), s);
    }

    #[test]
    fn veil_is_monotone(s in random_state(3), num in 1i64..=7) {
        let r = veil_search(std::slice::from_ref(&s), 12).unwrap();
        prop_assert!(r.verified);
        let below = &r.p * frac(num, 8);
        prop_assert!(proper_at(&s, &below).unwrap());
        // D(p q) = D(p) D(q)
        let (a, b) = (mixing_matrix(&frac(1, 3)), mixing_matrix(&frac(num, 8)));
        prop_assert_eq!(awpp_core::theory::mat_mul(&a, &b), mixing_matrix(&(frac(1, 3) * frac(num, 8))));
    }
}
