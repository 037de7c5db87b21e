use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::One;

use super::{
    enumerate_preparations, final_measurement, mixing_matrix, veil_search, PreparationLimits,
    PreparationSet, TheoryError, VeilResult,
};
use crate::circuit::{Effect, LinearEffect, ProductEffect};
use crate::compiler::{compile, CompiledCircuit};
use crate::machine::{enumerate_inputs, sha256_hex, AffTm, SymbolId};
use crate::rational::{format_fraction, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SystemKind {
    /// One wire.
    Wire,
    /// One tape cell, `ell` wires.
    Cell,
    /// The whole register, `(2t+1) ell` wires.
    Register,
}

impl SystemKind {
    pub fn code(self) -> &'static str {
        match self {
            SystemKind::Wire => "wire",
            SystemKind::Cell => "cell",
            SystemKind::Register => "register",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemType {
    pub machine_id: String,
    pub n: usize,
    pub kind: SystemKind,
    pub width: usize,
}

/// A measurement of the catalogue: effects on one system type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogueMeasurement {
    pub name: String,
    pub system: SystemKind,
    pub effects: Vec<LinearEffect>,
}

impl CatalogueMeasurement {
    pub fn width(&self) -> usize {
        self.effects.first().map_or(0, |e| e.width)
    }

    pub fn digest(&self) -> String {
        let mut text = format!("{}:{}\n", self.name, self.system.code());
        for effect in &self.effects {
            text.push_str(&render_linear(effect));
            text.push('\n');
        }
        sha256_hex(&text)
    }
}

fn render_linear(effect: &LinearEffect) -> String {
    let mut out = format!("w{}", effect.width);
    for (c, product) in &effect.terms {
        out.push_str(&format!(" + {} *", format_fraction(c)));
        for (factor, wires) in &product.factors {
            let entries: Vec<String> = factor
                .entries()
                .map(|(b, v)| format!("{b}={}", format_fraction(v)))
                .collect();
            out.push_str(&format!(" {wires:?}[{}]", entries.join(",")));
        }
    }
    out
}

fn on_wires(width: usize, factors: Vec<(Effect, Vec<usize>)>) -> LinearEffect {
    LinearEffect::single(ProductEffect { width, factors })
}

fn deterministic(width: usize) -> LinearEffect {
    LinearEffect::single(ProductEffect::deterministic(width))
}

/// Product of the noisy pair on every wire: `2^width` effects.
fn noisy_product(width: usize, p: &Rational) -> Vec<LinearEffect> {
    let d = mixing_matrix(p);
    let pair = [
        Effect::new(1, [(0, d[0][0].clone()), (1, d[0][1].clone())]),
        Effect::new(1, [(0, d[1][0].clone()), (1, d[1][1].clone())]),
    ];
    (0..1u64 << width)
        .map(|outcome| {
            on_wires(
                width,
                (0..width)
                    .map(|w| {
                        let bit = ((outcome >> (width - 1 - w)) & 1) as usize;
                        (pair[bit].clone(), alloc::vec![w])
                    })
                    .collect(),
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoryOptions {
    pub limits: PreparationLimits,
    /// Bits of the dyadic veil search.
    pub precision: u32,
    /// Inputs whose preparations are enumerated; all inputs of length `n`
    /// when `None`.
    pub inputs: Option<Vec<Vec<SymbolId>>>,
}

impl Default for TheoryOptions {
    fn default() -> Self {
        TheoryOptions {
            limits: PreparationLimits::default(),
            precision: 20,
            inputs: None,
        }
    }
}

/// The theory for one `(machine, n)`.
#[derive(Debug, Clone)]
pub struct TheoryInstance {
    pub machine_id: String,
    pub n: usize,
    pub t: usize,
    pub ell: usize,
    pub systems: Vec<SystemType>,
    pub compiled: CompiledCircuit,
    pub preparations: PreparationSet,
    pub veil: VeilResult,
    pub measurements: Vec<CatalogueMeasurement>,
    /// Preparations are never renormalized on noisy outcomes.
    pub conditioning: &'static str,
}

pub fn assemble_instance(
    machine: &AffTm,
    n: usize,
    options: &TheoryOptions,
) -> Result<TheoryInstance, TheoryError> {
    let compiled = compile(machine, n)?;
    let layout = compiled.layout;
    let inputs = match &options.inputs {
        Some(list) => list.clone(),
        None => enumerate_inputs(&machine.input_symbols(), n)
            .into_iter()
            .filter(|x| x.len() == n)
            .collect(),
    };
    let preparations = enumerate_preparations(machine, &compiled, &inputs, &options.limits)?;
    let veil = veil_search(&preparations.states(), options.precision)?;
    let machine_id = machine.fingerprint();
    let ell = layout.ell();
    let width = layout.wire_count();
    let systems = [(SystemKind::Wire, 1), (SystemKind::Cell, ell), (SystemKind::Register, width)]
        .into_iter()
        .map(|(kind, width)| SystemType {
            machine_id: machine_id.clone(),
            n,
            kind,
            width,
        })
        .collect();
    let fm = final_measurement(&compiled);
    let measurements = alloc::vec![
        CatalogueMeasurement {
            name: "u".into(),
            system: SystemKind::Wire,
            effects: alloc::vec![deterministic(1)],
        },
        CatalogueMeasurement {
            name: "noisy".into(),
            system: SystemKind::Wire,
            effects: noisy_product(1, &veil.p),
        },
        CatalogueMeasurement {
            name: "u".into(),
            system: SystemKind::Cell,
            effects: alloc::vec![deterministic(ell)],
        },
        CatalogueMeasurement {
            name: "noisy".into(),
            system: SystemKind::Cell,
            effects: noisy_product(ell, &veil.p),
        },
        CatalogueMeasurement {
            name: "u".into(),
            system: SystemKind::Register,
            effects: alloc::vec![deterministic(width)],
        },
        CatalogueMeasurement {
            name: "accept-reject-none".into(),
            system: SystemKind::Register,
            effects: alloc::vec![fm.e_acc, fm.e_rej, fm.e_none],
        },
    ];
    Ok(TheoryInstance {
        machine_id,
        n,
        t: layout.t,
        ell,
        systems,
        compiled,
        preparations,
        veil,
        measurements,
        conditioning: "marginals by (u| only; no renormalization on noisy outcomes",
    })
}

impl TheoryInstance {
    pub fn p_nu(&self) -> &Rational {
        &self.veil.p
    }

    /// `name/system -> sha256` of each catalogued measurement.
    pub fn catalogue_digests(&self) -> BTreeMap<String, String> {
        self.measurements
            .iter()
            .map(|m| (format!("{}/{}", m.name, m.system.code()), m.digest()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalityCheck {
    pub name: String,
    pub holds: bool,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalityReport {
    pub checks: Vec<CausalityCheck>,
    pub passed: bool,
}

/// Every catalogued measurement sums to `(u|` on its system, and `(u|` gives
/// 1 on every enumerated preparation.
pub fn check_causality(instance: &TheoryInstance) -> Result<CausalityReport, TheoryError> {
    let mut checks = Vec::new();
    for m in &instance.measurements {
        let width = m.width();
        let mut total = LinearEffect {
            width,
            terms: Vec::new(),
        };
        for e in &m.effects {
            if e.width != width {
                return Err(TheoryError::AssignmentLength {
                    expected: width,
                    given: e.width,
                });
            }
            total = total.plus(e);
        }
        let holds = total
            .combine(&Rational::one(), &deterministic(width), &-Rational::one())
            .is_zero()?;
        checks.push(CausalityCheck {
            name: format!("{}/{} sums to u", m.name, m.system.code()),
            holds,
            detail: (!holds).then(|| format!("{} effects on {width} wires", m.effects.len())),
        });
    }
    for (index, prep) in instance.preparations.items.iter().enumerate() {
        let value = deterministic(prep.state.width()).evaluate(&prep.state)?;
        let holds = value.is_one();
        checks.push(CausalityCheck {
            name: format!("u on preparation {index}"),
            holds,
            detail: (!holds).then(|| format_fraction(&value)),
        });
    }
    let passed = checks.iter().all(|c| c.holds);
    Ok(CausalityReport { checks, passed })
}

impl CausalityReport {
    pub fn failures(&self) -> impl Iterator<Item = &CausalityCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }

    pub fn summary(&self) -> String {
        let failed = self.failures().count();
        format!("{} checks, {failed} failed", self.checks.len())
    }
}
