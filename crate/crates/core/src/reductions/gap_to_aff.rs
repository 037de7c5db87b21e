//! Dampening construction: an NTM with gap `g` becomes an affine machine with
//! acceptance weight `g / 2^p`.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_traits::One;

use super::ReductionError;
use crate::machine::{AffTm, Move, Ntm, Rule, StateId, TimeBound};
use crate::rational::{frac, int, Rational};

/// Parameters of the construction. `source` must be label-uniform with a
/// constant step budget `T`.
#[derive(Debug, Clone, Copy)]
pub struct GapToAffSpec<'a> {
    pub source: &'a Ntm,
    pub dampening_exponent: usize,
}

impl<'a> GapToAffSpec<'a> {
    pub fn new(source: &'a Ntm, dampening_exponent: usize) -> Self {
        GapToAffSpec {
            source,
            dampening_exponent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    /// Writing `beta`; the labels chosen so far are all nonzero.
    Choose { k: usize, prefix: Vec<u32> },
    /// A zero has been chosen; the rest of `beta` is written, then reject.
    Dead { k: usize },
    Sim { q: StateId, k: usize, beta: Vec<u32> },
    Dampen { i: usize, ok: bool },
    Accept,
    Reject,
}

impl Node {
    fn name(&self, source: &Ntm) -> String {
        let word = |v: &[u32]| v.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(".");
        match self {
            Node::Choose { k, prefix } => format!("choose{k}[{}]", word(prefix)),
            Node::Dead { k } => format!("dead{k}"),
            Node::Sim { q, k, beta } => {
                format!("sim[{}]{k}[{}]", source.states()[*q], word(beta))
            }
            Node::Dampen { i, ok } => format!("dampen{i}{}", if *ok { "+" } else { "-" }),
            Node::Accept => "ACCEPT".into(),
            Node::Reject => "REJECT".into(),
        }
    }
}

struct Edge {
    next: Node,
    write: Option<usize>,
    movement: Move,
    weight: Rational,
}

fn stay(next: Node, weight: Rational) -> Edge {
    Edge {
        next,
        write: None,
        movement: Move::Stay,
        weight,
    }
}

/// Builds the affine machine. Phase 1 writes `beta` in `{0..N}^T` with weights
/// `+1` (nonzero) and `1-N` (zero); branches holding a zero reject. The
/// remaining branches replay the NTM branch indexed by `beta`. A rejecting
/// simulation splits into dampen `-1` / reject `+2`, an accepting one moves
/// to dampen with `+1`. Dampening samples `p` bits at `1/2` each and accepts
/// only on all ones.
///
/// `beta` lives in the finite control. A simulated branch that halts after
/// `k < T` steps is kept only when `beta[k..]` is all ones, so every NTM
/// branch is counted once even if lengths differ.
pub fn gap_to_afftm(spec: &GapToAffSpec<'_>) -> Result<AffTm, ReductionError> {
    let source = spec.source;
    let p = spec.dampening_exponent;
    if p == 0 {
        return Err(ReductionError::BadExponent);
    }
    let fanout = source
        .check_label_uniformity()
        .map_err(|e| ReductionError::NotUniform(e.to_string()))?;
    let t = match source.time_bound() {
        TimeBound::Constant(t) => *t,
        other => {
            return Err(ReductionError::NotUniform(format!(
                "a constant step budget is required, found {other:?}"
            )))
        }
    };
    let symbols = source.alphabet().len();
    let n_weight = int(1 - fanout as i64);
    let half = frac(1, 2);

    let successors = |node: &Node, read: usize| -> Vec<Edge> {
        match node {
            Node::Choose { k, prefix } if *k < t => {
                let mut out = Vec::new();
                for label in 1..=fanout as u32 {
                    let mut next = prefix.clone();
                    next.push(label);
                    let next = if k + 1 == t {
                        Node::Sim {
                            q: source.initial(),
                            k: 0,
                            beta: next,
                        }
                    } else {
                        Node::Choose {
                            k: k + 1,
                            prefix: next,
                        }
                    };
                    out.push(stay(next, Rational::one()));
                }
                out.push(stay(Node::Dead { k: k + 1 }, n_weight.clone()));
                out
            }
            Node::Choose { .. } => alloc::vec![stay(Node::Reject, Rational::one())],
            Node::Dead { k } if *k < t => {
                let mut out: Vec<Edge> = (0..fanout)
                    .map(|_| stay(Node::Dead { k: k + 1 }, Rational::one()))
                    .collect();
                out.push(stay(Node::Dead { k: k + 1 }, n_weight.clone()));
                out
            }
            Node::Dead { .. } => alloc::vec![stay(Node::Reject, Rational::one())],
            Node::Sim { q, k, beta } => {
                if source.is_halting(*q) {
                    if beta[*k..].iter().any(|&l| l != 1) {
                        return alloc::vec![stay(Node::Reject, Rational::one())];
                    }
                    let dampen = Node::Dampen { i: 0, ok: true };
                    return if *q == source.accept() {
                        alloc::vec![stay(dampen, Rational::one())]
                    } else {
                        alloc::vec![stay(dampen, int(-1)), stay(Node::Reject, int(2))]
                    };
                }
                if *k == t {
                    return alloc::vec![stay(Node::Reject, Rational::one())];
                }
                match source
                    .row(*q, read)
                    .iter()
                    .find(|r| r.annotation == beta[*k])
                {
                    Some(rule) => alloc::vec![Edge {
                        next: Node::Sim {
                            q: rule.next,
                            k: k + 1,
                            beta: beta.clone(),
                        },
                        write: Some(rule.write),
                        movement: rule.movement,
                        weight: Rational::one(),
                    }],
                    None => alloc::vec![stay(Node::Reject, Rational::one())],
                }
            }
            Node::Dampen { i, ok } if *i < p => alloc::vec![
                stay(Node::Dampen { i: i + 1, ok: *ok }, half.clone()),
                stay(Node::Dampen { i: i + 1, ok: false }, half.clone()),
            ],
            Node::Dampen { ok, .. } => {
                let target = if *ok { Node::Accept } else { Node::Reject };
                alloc::vec![stay(target, Rational::one())]
            }
            Node::Accept | Node::Reject => Vec::new(),
        }
    };

    let start = if t == 0 {
        Node::Sim {
            q: source.initial(),
            k: 0,
            beta: Vec::new(),
        }
    } else {
        Node::Choose {
            k: 0,
            prefix: Vec::new(),
        }
    };
    let mut ids: BTreeMap<Node, usize> = BTreeMap::new();
    let mut order: Vec<Node> = Vec::new();
    let mut edges: Vec<(usize, usize, Edge)> = Vec::new();
    let mut queue = VecDeque::new();
    for node in [start.clone(), Node::Accept, Node::Reject] {
        ids.insert(node.clone(), order.len());
        order.push(node.clone());
        queue.push_back(node);
    }
    while let Some(node) = queue.pop_front() {
        let from = ids[&node];
        for read in 0..symbols {
            for edge in successors(&node, read) {
                if !ids.contains_key(&edge.next) {
                    ids.insert(edge.next.clone(), order.len());
                    order.push(edge.next.clone());
                    queue.push_back(edge.next.clone());
                }
                edges.push((from, read, edge));
            }
        }
    }

    let names: Vec<String> = order.iter().map(|n| n.name(source)).collect();
    let mut machine = AffTm::from_names(
        source.alphabet().to_vec(),
        &source.alphabet()[source.blank()],
        names,
        &start.name(source),
        "ACCEPT",
        "REJECT",
        TimeBound::Constant(2 * t + p + 2),
    )?;
    for (from, read, edge) in edges {
        machine.push_rule(
            from,
            read,
            Rule {
                next: ids[&edge.next],
                write: edge.write.unwrap_or(read),
                movement: edge.movement,
                annotation: edge.weight,
            },
        )?;
    }
    machine.provenance = BTreeMap::from([
        ("construction".to_string(), "gap_to_afftm".to_string()),
        ("source_hash".to_string(), source.fingerprint()),
        ("dampening_exponent".to_string(), p.to_string()),
        ("source_budget".to_string(), t.to_string()),
        ("source_fanout".to_string(), fanout.to_string()),
    ]);
    Ok(machine)
}

/// Name of the first dampening state, used by the mutation hook.
pub(crate) const FIRST_DAMPEN: &str = "dampen0+";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{run_afftm, validate_afftm, RunMode};

    fn one_step(first: &str, second: &str) -> Ntm {
        let mut m = Ntm::new(&["_"], "_", &["q", "A", "R"], "q", "A", "R", TimeBound::Constant(1))
            .unwrap();
        m.add_rule("q", "_", first, "_", Move::Stay, 1).unwrap();
        m.add_rule("q", "_", second, "_", Move::Stay, 2).unwrap();
        m
    }

    fn alpha(ntm: &Ntm, p: usize) -> Rational {
        let aff = gap_to_afftm(&GapToAffSpec::new(ntm, p)).unwrap();
        assert!(validate_afftm(&aff).is_empty());
        let a = run_afftm(&aff, &[], RunMode::Enumerate).unwrap();
        let b = run_afftm(&aff, &[], RunMode::Frontier).unwrap();
        assert_eq!(a.accept_weight, b.accept_weight);
        a.accept_weight
    }

    #[test]
    fn both_accepting_with_two_bits_gives_one_half() {
        assert_eq!(alpha(&one_step("A", "A"), 2), frac(1, 2));
    }

    #[test]
    fn all_rejecting_gives_negative_weight() {
        for p in 1..4 {
            assert_eq!(alpha(&one_step("R", "R"), p), frac(-2, 1 << p));
        }
    }

    #[test]
    fn balanced_machine_gives_zero() {
        assert_eq!(alpha(&one_step("A", "R"), 1), int(0));
    }

    #[test]
    fn zero_exponent_is_refused() {
        assert_eq!(
            gap_to_afftm(&GapToAffSpec::new(&one_step("A", "R"), 0)).unwrap_err(),
            ReductionError::BadExponent
        );
    }

    #[test]
    fn provenance_is_recorded() {
        let m = one_step("A", "R");
        let aff = gap_to_afftm(&GapToAffSpec::new(&m, 3)).unwrap();
        assert_eq!(aff.provenance["dampening_exponent"], "3");
        assert_eq!(aff.provenance["source_hash"], m.fingerprint());
        assert!(aff.state_id(FIRST_DAMPEN).is_ok());
    }
}
