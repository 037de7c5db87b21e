//! Padding an NTM to constant fan-out and a common branch length.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{enumerate_inputs, run_ntm_gap, Label, MachineError, Move, Ntm, Rule, StateId, TimeBound};

#[derive(Debug, Clone)]
pub struct Uniformized {
    pub machine: Ntm,
    /// Positive factor with `gap(output) = multiplier * gap(source)`.
    pub multiplier: u64,
    /// Common branch length of the output for every input length.
    pub depth: usize,
    pub identity: bool,
}

/// Label-uniform, and every branch on every probed input halts at exactly
/// `T(n)`.
pub fn is_uniform(machine: &Ntm, probe_max_len: usize) -> Result<bool, MachineError> {
    if machine.check_label_uniformity().is_err() {
        return Ok(false);
    }
    for input in enumerate_inputs(&machine.input_symbols(), probe_max_len) {
        if !run_ntm_gap(machine, &input)?.uniform {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Returns a machine with constant even fan-out `N'` whose branches all halt
/// at step `T_max + 1`, where `T_max` is the largest budget of the source.
///
/// The source is simulated with a step counter in the finite control. Labels
/// beyond a row's original size lead to a null track whose branches split
/// evenly between accept and reject at the end. A branch that halted early
/// keeps one label alive and sends the rest to the null track; at the final
/// step all `N'` labels take its outcome. Hence the multiplier is `N'`.
///
/// Returns the source unchanged when it is already uniform on every probed
/// input (lengths up to `probe_max_len`). Timeouts on probed inputs are errors.
pub fn uniformize_ntm(machine: &Ntm, probe_max_len: usize) -> Result<Uniformized, MachineError> {
    if is_uniform(machine, probe_max_len)? {
        let depth = machine.time_bound().max_steps().unwrap_or(0);
        return Ok(Uniformized {
            machine: machine.clone(),
            multiplier: 1,
            depth,
            identity: true,
        });
    }
    let t_max = machine.time_bound().max_steps().ok_or_else(|| {
        MachineError::Unbounded(String::from("uniformization needs a bounded step budget"))
    })?;
    let fanout = machine.max_fanout().max(2);
    let fanout = fanout + fanout % 2;

    let sim = |q: StateId, k: usize| format!("{}#{k}", machine.states()[q]);
    let held = |q: StateId, k: usize| format!("{}#hold{k}", machine.states()[q]);
    let null = |k: usize| format!("null#{k}");
    let accept_name = machine.states()[machine.accept()].clone();
    let reject_name = machine.states()[machine.reject()].clone();

    let mut names: Vec<String> = Vec::new();
    for q in 0..machine.states().len() {
        if !machine.is_halting(q) {
            for k in 0..=t_max {
                names.push(sim(q, k));
            }
        }
    }
    for k in 0..=t_max {
        names.push(held(machine.accept(), k));
        names.push(held(machine.reject(), k));
        names.push(null(k));
    }
    names.push(accept_name.clone());
    names.push(reject_name.clone());

    let entry = |q: StateId, k: usize| {
        if machine.is_halting(q) {
            held(q, k)
        } else {
            sim(q, k)
        }
    };
    let mut out = Ntm::from_names(
        machine.alphabet().to_vec(),
        &machine.alphabet()[machine.blank()],
        names,
        &entry(machine.initial(), 0),
        &accept_name,
        &reject_name,
        TimeBound::Constant(t_max + 1),
    )?;
    let id = |out: &Ntm, name: &str| out.state_id(name);

    let symbols = machine.alphabet().len();
    for a in 0..symbols {
        let stay = |next: StateId, label: Label| Rule {
            next,
            write: a,
            movement: Move::Stay,
            annotation: label,
        };
        for k in 0..=t_max {
            if k < t_max {
                let null_next = id(&out, &null(k + 1))?;
                for q in 0..machine.states().len() {
                    if machine.is_halting(q) {
                        continue;
                    }
                    let from = id(&out, &sim(q, k))?;
                    let row = machine.labelled_row(q, a);
                    let mut label: Label = 1;
                    for rule in row.iter().take(fanout) {
                        let next = id(&out, &entry(rule.next, k + 1))?;
                        out.push_rule(
                            from,
                            a,
                            Rule {
                                next,
                                write: rule.write,
                                movement: rule.movement,
                                annotation: label,
                            },
                        )?;
                        label += 1;
                    }
                    while (label as usize) <= fanout {
                        out.push_rule(from, a, stay(null_next, label))?;
                        label += 1;
                    }
                }
                for outcome in [machine.accept(), machine.reject()] {
                    let from = id(&out, &held(outcome, k))?;
                    out.push_rule(from, a, stay(id(&out, &held(outcome, k + 1))?, 1))?;
                    for label in 2..=fanout as Label {
                        out.push_rule(from, a, stay(null_next, label))?;
                    }
                }
                let from = id(&out, &null(k))?;
                for label in 1..=fanout as Label {
                    out.push_rule(from, a, stay(null_next, label))?;
                }
            } else {
                // final decision step
                let accept = out.accept();
                let reject = out.reject();
                for q in 0..machine.states().len() {
                    if machine.is_halting(q) {
                        continue;
                    }
                    // still running at the budget: treated as null
                    let from = id(&out, &sim(q, k))?;
                    for label in 1..=fanout as Label {
                        let next = if (label as usize) <= fanout / 2 { accept } else { reject };
                        out.push_rule(from, a, stay(next, label))?;
                    }
                }
                for (outcome, target) in [(machine.accept(), accept), (machine.reject(), reject)] {
                    let from = id(&out, &held(outcome, k))?;
                    for label in 1..=fanout as Label {
                        out.push_rule(from, a, stay(target, label))?;
                    }
                }
                let from = id(&out, &null(k))?;
                for label in 1..=fanout as Label {
                    let next = if (label as usize) <= fanout / 2 { accept } else { reject };
                    out.push_rule(from, a, stay(next, label))?;
                }
            }
        }
    }
    out.provenance = machine.provenance.clone();
    out.provenance
        .insert("uniformized_from".into(), machine.fingerprint());
    out.provenance
        .insert("gap_multiplier".into(), format!("{fanout}"));
    Ok(Uniformized {
        machine: out,
        multiplier: fanout as u64,
        depth: t_max + 1,
        identity: false,
    })
}
