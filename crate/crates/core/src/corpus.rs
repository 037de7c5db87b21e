//! The bundled machines and demo formulas.

use alloc::string::String;
use alloc::vec::Vec;

use crate::machine::{AffTm, Move, Ntm, TimeBound};
use crate::rational::{frac, int};
use crate::sat::Cnf;

const BITS: [&str; 2] = ["_", "1"];

fn three_state(t: usize) -> AffTm {
    AffTm::new(&BITS, "_", &["q", "A", "R"], "q", "A", "R", TimeBound::Constant(t)).expect("names")
}

/// Accepts with weight 1/2 on every input.
pub fn fair_coin() -> AffTm {
    let mut m = three_state(1);
    for s in BITS {
        m.add_rule("q", s, "A", s, Move::Stay, frac(1, 2)).unwrap();
        m.add_rule("q", s, "R", s, Move::Stay, frac(1, 2)).unwrap();
    }
    m
}

pub fn always_accept() -> AffTm {
    let mut m = three_state(1);
    for s in BITS {
        m.add_rule("q", s, "A", s, Move::Stay, int(1)).unwrap();
    }
    m
}

pub fn always_reject() -> AffTm {
    let mut m = three_state(1);
    for s in BITS {
        m.add_rule("q", s, "R", s, Move::Stay, int(1)).unwrap();
    }
    m
}

/// Root weights 2 and -1; the -1 child splits 5 and -4; every leaf is a
/// fair coin. Intermediate weights are far outside `[0, 1]` but `alpha = 1/2`.
pub fn branch_weights() -> AffTm {
    let mut m = AffTm::new(
        &BITS,
        "_",
        &["q0", "coin", "q2", "A", "R"],
        "q0",
        "A",
        "R",
        TimeBound::Constant(3),
    )
    .unwrap();
    for s in BITS {
        m.add_rule("q0", s, "coin", s, Move::Stay, int(2)).unwrap();
        m.add_rule("q0", s, "q2", s, Move::Stay, int(-1)).unwrap();
        m.add_rule("q2", s, "coin", "1", Move::Right, int(5)).unwrap();
        m.add_rule("q2", s, "coin", "_", Move::Left, int(-4)).unwrap();
        m.add_rule("coin", s, "A", s, Move::Stay, frac(1, 2)).unwrap();
        m.add_rule("coin", s, "R", s, Move::Stay, frac(1, 2)).unwrap();
    }
    m
}

/// Two rejecting branches of opposite sign cancel exactly: accepts with
/// weight 1 when the input starts with `1`, 1/2 otherwise.
pub fn cancellation() -> AffTm {
    let mut m = three_state(2);
    m.add_rule("q", "_", "q", "1", Move::Stay, frac(1, 2)).unwrap();
    m.add_rule("q", "_", "R", "_", Move::Stay, frac(1, 2)).unwrap();
    m.add_rule("q", "1", "A", "1", Move::Stay, int(1)).unwrap();
    m.add_rule("q", "1", "R", "1", Move::Right, frac(1, 4)).unwrap();
    m.add_rule("q", "1", "R", "_", Move::Left, frac(-1, 4)).unwrap();
    m
}

/// Gap 2 when the input starts with `1`, 0 otherwise. Fan-out 2, depth 1.
pub fn first_bit_ntm() -> Ntm {
    let mut m = Ntm::new(&BITS, "_", &["q", "A", "R"], "q", "A", "R", TimeBound::Constant(1)).unwrap();
    m.add_rule("q", "_", "A", "_", Move::Stay, 1).unwrap();
    m.add_rule("q", "_", "R", "_", Move::Stay, 2).unwrap();
    m.add_rule("q", "1", "A", "1", Move::Stay, 1).unwrap();
    m.add_rule("q", "1", "A", "1", Move::Stay, 2).unwrap();
    m
}

/// Reads two cells. Fan-out 2, every branch halts at step 2.
pub fn two_cell_ntm() -> Ntm {
    let mut m = Ntm::new(
        &BITS,
        "_",
        &["q0", "qa", "qb", "A", "R"],
        "q0",
        "A",
        "R",
        TimeBound::Constant(2),
    )
    .unwrap();
    m.add_rule("q0", "1", "qa", "1", Move::Right, 1).unwrap();
    m.add_rule("q0", "1", "qb", "1", Move::Right, 2).unwrap();
    m.add_rule("q0", "_", "qb", "_", Move::Right, 1).unwrap();
    m.add_rule("q0", "_", "qb", "1", Move::Right, 2).unwrap();
    for s in BITS {
        m.add_rule("qa", s, "A", s, Move::Stay, 1).unwrap();
        m.add_rule("qa", s, "A", s, Move::Left, 2).unwrap();
        m.add_rule("qb", s, "R", s, Move::Stay, 2).unwrap();
    }
    m.add_rule("qb", "1", "A", "1", Move::Stay, 1).unwrap();
    m.add_rule("qb", "_", "R", "_", Move::Left, 1).unwrap();
    m
}

pub fn afftms() -> Vec<(&'static str, AffTm)> {
    alloc::vec![
        ("fair-coin", fair_coin()),
        ("always-accept", always_accept()),
        ("always-reject", always_reject()),
        ("branch-weights", branch_weights()),
        ("cancellation", cancellation()),
    ]
}

pub fn ntms() -> Vec<(&'static str, Ntm)> {
    alloc::vec![("first-bit", first_bit_ntm()), ("two-cell", two_cell_ntm())]
}

/// `x1 & x2`, `x1 & !x1`, `x1 | x2`.
pub fn demo_formulas() -> Vec<(&'static str, Cnf)> {
    alloc::vec![
        ("and", Cnf::parse(2, "1 & 2").unwrap()),
        ("contradiction", Cnf::parse(1, "1 & -1").unwrap()),
        ("or", Cnf::parse(2, "1 2").unwrap()),
    ]
}

/// Names of every bundled item, machines first.
pub fn names() -> Vec<String> {
    let mut out: Vec<String> = afftms().into_iter().map(|(n, _)| n.into()).collect();
    out.extend(ntms().into_iter().map(|(n, _)| String::from(n)));
    out.extend(demo_formulas().into_iter().map(|(n, _)| String::from(n)));
    out
}
