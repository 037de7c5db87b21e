//! Recorded-weight construction: an affine machine becomes an NTM whose gap
//! is `4 M^T alpha`.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, Zero};

use super::ReductionError;
use crate::machine::{AffTm, Label, Move, Ntm, Rule, StateId, TimeBound};
use crate::rational::{ceil_log2, Rational};

/// Parameters derived from the source machine; `m` is always recomputed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffToGapSpec {
    pub denominator: BigInt,
    pub budget: usize,
    pub input_length: usize,
    /// Smallest `m > 0` with `2^m >= M^T` and `2^m >= (|u| M)^T` for every weight `u`.
    pub m: usize,
    /// Same bound read with integer numerators `|U|` in place of `|u| M`.
    pub m_integer_reading: usize,
    /// Binary micro-steps used per simulated transition.
    pub micro_steps: usize,
    /// Common branch length of the constructed NTM.
    pub depth: usize,
}

#[derive(Debug, Clone)]
pub struct AffToGap {
    pub ntm: Ntm,
    /// Scaling `h = 4 M^T`.
    pub h: BigInt,
    pub spec: AffToGapSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    /// Simulating step `k` with recorded weight `omega`; `prefix` holds the
    /// micro-step bits chosen so far for the current row.
    Sim {
        q: StateId,
        omega: BigInt,
        k: usize,
        prefix: Vec<bool>,
    },
    /// Comparing `C` with `|omega|`; `bits` bits of `C` remain, and their
    /// prefix so far equals that of `mag`.
    Equal { mag: BigInt, sign: i8, bits: usize },
    /// `C < |omega|` already decided.
    Below { sign: i8, bits: usize },
    /// `C >= |omega|` already decided.
    Above { bits: usize },
    Accept,
    Reject,
}

impl Node {
    fn name(&self, source: &AffTm) -> String {
        let sign = |s: i8| if s < 0 { '-' } else { '+' };
        match self {
            Node::Sim {
                q,
                omega,
                k,
                prefix,
            } => {
                let bits: String = prefix.iter().map(|&b| if b { '1' } else { '0' }).collect();
                format!("sim[{}]w{omega}k{k}b{bits}", source.states()[*q])
            }
            Node::Equal { mag, sign: s, bits } => format!("eq{}{mag}c{bits}", sign(*s)),
            Node::Below { sign: s, bits } => format!("below{}c{bits}", sign(*s)),
            Node::Above { bits } => format!("above c{bits}"),
            Node::Accept => "ACCEPT".into(),
            Node::Reject => "REJECT".into(),
        }
    }
}

/// Constructs the NTM for inputs of length `n`.
///
/// Each simulated transition with weight `u = U / M` takes `d` binary
/// micro-steps (`2^d >=` largest row size); leaves beyond the row size record
/// weight 0 and so contribute nothing. Halting states behave as a self loop
/// of weight 1, i.e. `U = M`, so every simulated branch runs exactly `T`
/// steps. Then `a`, the bits of `C` (most significant first) and `b` are
/// sampled. The recorded weight is kept in the finite control.
pub fn afftm_to_gap(source: &AffTm, n: usize) -> Result<AffToGap, ReductionError> {
    source.ensure_valid()?;
    let t = source.time_bound().steps_for(n)?;
    let denominator = source.common_denominator();
    let numerator = |w: &Rational| -> BigInt { w.numer() * (&denominator / w.denom()) };

    let mut largest = denominator.clone();
    let mut largest_scaled = Rational::from_integer(denominator.clone());
    let mut row_max = 1;
    for (_, row) in source.rows() {
        row_max = row_max.max(row.len());
        for rule in row {
            largest = largest.max(numerator(&rule.annotation).abs());
            largest_scaled =
                largest_scaled.max(rule.annotation.abs() * Rational::from_integer(denominator.clone()));
        }
    }
    // (|u| M)^T as printed
    let bound_printed = largest_scaled.pow(t as i32).ceil().to_integer();
    let m = ceil_log2(&denominator.pow(t as u32)).max(ceil_log2(&bound_printed)).max(1);
    let m_integer_reading = ceil_log2(&largest.pow(t as u32)).max(1);
    let micro_steps = ceil_log2(&BigInt::from(row_max)).max(1);
    let depth = t * micro_steps + m + 2;
    let two_m = BigInt::one() << m;

    let comparator = |omega: BigInt| -> Node {
        let sign = if omega.is_negative() { -1 } else { 1 };
        let mag = omega.abs();
        if mag.is_zero() {
            Node::Above { bits: m }
        } else if mag >= two_m {
            Node::Below { sign, bits: m }
        } else {
            Node::Equal { mag, sign, bits: m }
        }
    };

    let successors = |node: &Node, read: usize| -> Vec<(Node, Option<(usize, Move)>)> {
        match node {
            Node::Sim { q, omega, k, .. } if *k == t => {
                let flipped = if *q == source.reject() {
                    -omega.clone()
                } else if source.is_halting(*q) {
                    omega.clone()
                } else {
                    // still running at the budget: null
                    BigInt::zero()
                };
                let kept = if source.is_halting(*q) {
                    omega.clone()
                } else {
                    BigInt::zero()
                };
                alloc::vec![(comparator(kept), None), (comparator(flipped), None)]
            }
            Node::Sim {
                q,
                omega,
                k,
                prefix,
            } => {
                let mut out = Vec::new();
                for bit in [false, true] {
                    let mut next = prefix.clone();
                    next.push(bit);
                    if next.len() < micro_steps {
                        out.push((
                            Node::Sim {
                                q: *q,
                                omega: omega.clone(),
                                k: *k,
                                prefix: next,
                            },
                            None,
                        ));
                        continue;
                    }
                    let index = next.iter().fold(0usize, |acc, &b| acc * 2 + b as usize);
                    let row = source.effective_row(*q, read);
                    match row.get(index) {
                        Some(rule) => out.push((
                            Node::Sim {
                                q: rule.next,
                                omega: omega * numerator(&rule.annotation),
                                k: k + 1,
                                prefix: Vec::new(),
                            },
                            Some((rule.write, rule.movement)),
                        )),
                        None => out.push((
                            Node::Sim {
                                q: *q,
                                omega: BigInt::zero(),
                                k: k + 1,
                                prefix: Vec::new(),
                            },
                            None,
                        )),
                    }
                }
                out
            }
            Node::Equal { mag, sign, bits } => {
                let bit = mag.bit((*bits - 1) as u64);
                let rest = bits - 1;
                let equal = if rest == 0 {
                    Node::Above { bits: 0 }
                } else {
                    Node::Equal {
                        mag: mag.clone(),
                        sign: *sign,
                        bits: rest,
                    }
                };
                let (zero, one) = if bit {
                    (Node::Below { sign: *sign, bits: rest }, equal)
                } else {
                    (equal, Node::Above { bits: rest })
                };
                alloc::vec![(zero, None), (one, None)]
            }
            Node::Below { sign, bits } if *bits > 0 => {
                let next = Node::Below {
                    sign: *sign,
                    bits: bits - 1,
                };
                alloc::vec![(next.clone(), None), (next, None)]
            }
            Node::Above { bits } if *bits > 0 => {
                let next = Node::Above { bits: bits - 1 };
                alloc::vec![(next.clone(), None), (next, None)]
            }
            Node::Below { sign, .. } => {
                let target = if *sign < 0 { Node::Reject } else { Node::Accept };
                alloc::vec![(target.clone(), None), (target, None)]
            }
            Node::Above { .. } => alloc::vec![(Node::Reject, None), (Node::Accept, None)],
            Node::Accept | Node::Reject => Vec::new(),
        }
    };

    let start = Node::Sim {
        q: source.initial(),
        omega: BigInt::one(),
        k: 0,
        prefix: Vec::new(),
    };
    let symbols = source.alphabet().len();
    let mut ids: BTreeMap<Node, usize> = BTreeMap::new();
    let mut order: Vec<Node> = Vec::new();
    let mut edges: Vec<(usize, usize, Label, Node, Option<(usize, Move)>)> = Vec::new();
    let mut queue = VecDeque::new();
    for node in [start.clone(), Node::Accept, Node::Reject] {
        ids.insert(node.clone(), order.len());
        order.push(node.clone());
        queue.push_back(node);
    }
    while let Some(node) = queue.pop_front() {
        let from = ids[&node];
        for read in 0..symbols {
            for (i, (next, action)) in successors(&node, read).into_iter().enumerate() {
                if !ids.contains_key(&next) {
                    ids.insert(next.clone(), order.len());
                    order.push(next.clone());
                    queue.push_back(next.clone());
                }
                edges.push((from, read, i as Label + 1, next, action));
            }
        }
        if order.len() > 2_000_000 {
            return Err(ReductionError::TooLarge(format!(
                "more than {} control states",
                order.len()
            )));
        }
    }

    let names: Vec<String> = order.iter().map(|n| n.name(source)).collect();
    let mut ntm = Ntm::from_names(
        source.alphabet().to_vec(),
        &source.alphabet()[source.blank()],
        names,
        &start.name(source),
        "ACCEPT",
        "REJECT",
        TimeBound::Constant(depth),
    )?;
    for (from, read, label, next, action) in edges {
        let (write, movement) = action.unwrap_or((read, Move::Stay));
        ntm.push_rule(
            from,
            read,
            Rule {
                next: ids[&next],
                write,
                movement,
                annotation: label,
            },
        )?;
    }

    let h = BigInt::from(4) * denominator.pow(t as u32);
    ntm.provenance = BTreeMap::from([
        ("construction".to_string(), "afftm_to_gap".to_string()),
        ("source_hash".to_string(), source.fingerprint()),
        ("input_length".to_string(), n.to_string()),
        ("M".to_string(), denominator.to_string()),
        ("T".to_string(), t.to_string()),
        ("m".to_string(), m.to_string()),
        ("m_integer_numerators".to_string(), m_integer_reading.to_string()),
        ("h".to_string(), h.to_string()),
    ]);
    debug_assert_eq!(h.sign(), Sign::Plus);
    Ok(AffToGap {
        ntm,
        h,
        spec: AffToGapSpec {
            denominator,
            budget: t,
            input_length: n,
            m,
            m_integer_reading,
            micro_steps,
            depth,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{run_afftm, run_ntm_gap, run_ntm_gap_frontier, RunMode};
    use crate::rational::{frac, int};

    fn two_way(w1: Rational, w2: Rational) -> AffTm {
        let mut m = AffTm::new(&["_"], "_", &["q", "A", "R"], "q", "A", "R", TimeBound::Constant(1))
            .unwrap();
        m.add_rule("q", "_", "A", "_", Move::Stay, w1).unwrap();
        m.add_rule("q", "_", "R", "_", Move::Stay, w2).unwrap();
        m
    }

    fn ratio(machine: &AffTm) -> (BigInt, BigInt) {
        let built = afftm_to_gap(machine, 0).unwrap();
        let g = run_ntm_gap(&built.ntm, &[]).unwrap();
        assert!(g.uniform);
        assert_eq!(g.depth, built.spec.depth);
        assert_eq!(g.branch_count, BigInt::one() << built.spec.depth);
        assert_eq!(run_ntm_gap_frontier(&built.ntm, &[]).unwrap().gap, g.gap);
        let alpha = run_afftm(machine, &[], RunMode::Enumerate).unwrap().accept_weight;
        assert_eq!(
            Rational::from_integer(g.gap.clone()),
            alpha * Rational::from_integer(built.h.clone())
        );
        (g.gap, built.h)
    }

    #[test]
    fn fair_coin_gives_half() {
        let coin = two_way(frac(1, 2), frac(1, 2));
        let built = afftm_to_gap(&coin, 0).unwrap();
        assert_eq!(built.spec.m, 1);
        assert_eq!(ratio(&coin), (BigInt::from(4), BigInt::from(8)));
    }

    #[test]
    fn always_accept_gives_one() {
        let mut m = AffTm::new(&["_"], "_", &["q", "A", "R"], "q", "A", "R", TimeBound::Constant(1))
            .unwrap();
        m.add_rule("q", "_", "A", "_", Move::Stay, int(1)).unwrap();
        let (g, h) = ratio(&m);
        assert_eq!(g, h);
    }

    #[test]
    fn improper_machine_gives_ratio_two() {
        let (g, h) = ratio(&two_way(int(2), int(-1)));
        assert_eq!(g, BigInt::from(8));
        assert_eq!(h, BigInt::from(4));
    }

    #[test]
    fn both_readings_of_m_coincide() {
        let built = afftm_to_gap(&two_way(frac(5, 4), frac(-1, 4)), 0).unwrap();
        assert_eq!(built.spec.m, built.spec.m_integer_reading);
        assert_eq!(built.spec.m, 3);
    }
}
