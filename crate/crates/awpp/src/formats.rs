//! JSON file formats for machines, circuits and allowed-circuit descriptors.
//! Unknown fields are rejected and weights must be exact fractions.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use awpp_core::circuit::{bits_to_string, make_gate, parse_bits, AffineGate, Circuit, CircuitError, Effect};
use awpp_core::machine::{AffTm, Label, Machine, MachineError, Move, Ntm, Rule, TimeBound};
use awpp_core::rational::{format_fraction, parse_fraction, Rational};
use awpp_core::sat::Cnf;
use awpp_core::theory::{AllowedCircuitDescriptor, WireMeasurement};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

fn field(name: impl Into<String>, message: impl std::fmt::Display) -> FormatError {
    FormatError::Field {
        field: name.into(),
        message: message.to_string(),
    }
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MachineKind {
    Ntm,
    Afftm,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum TimeBoundFile {
    Constant(usize),
    PerLength { per_length: Vec<usize> },
    Affine { constant: usize, slope: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionFile {
    pub from: (String, String),
    pub to: (String, String, String),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineFile {
    pub kind: MachineKind,
    pub alphabet: Vec<String>,
    pub blank: String,
    pub states: Vec<String>,
    pub initial: String,
    pub accept: String,
    pub reject: String,
    pub time_bound: TimeBoundFile,
    pub transitions: Vec<TransitionFile>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoadedMachine {
    Ntm(Ntm),
    AffTm(AffTm),
}

impl LoadedMachine {
    pub fn kind(&self) -> MachineKind {
        match self {
            LoadedMachine::Ntm(_) => MachineKind::Ntm,
            LoadedMachine::AffTm(_) => MachineKind::Afftm,
        }
    }
}

fn time_bound_from(file: &TimeBoundFile) -> TimeBound {
    match file {
        TimeBoundFile::Constant(t) => TimeBound::Constant(*t),
        TimeBoundFile::PerLength { per_length } => TimeBound::PerLength(per_length.clone()),
        TimeBoundFile::Affine { constant, slope } => TimeBound::Affine {
            constant: *constant,
            slope: *slope,
        },
    }
}

fn time_bound_to(bound: &TimeBound) -> TimeBoundFile {
    match bound {
        TimeBound::Constant(t) => TimeBoundFile::Constant(*t),
        TimeBound::PerLength(v) => TimeBoundFile::PerLength { per_length: v.clone() },
        TimeBound::Affine { constant, slope } => TimeBoundFile::Affine {
            constant: *constant,
            slope: *slope,
        },
    }
}

fn build<A: Clone>(
    file: &MachineFile,
    annotation: impl Fn(usize, &TransitionFile) -> Result<A, FormatError>,
) -> Result<Machine<A>, FormatError> {
    let mut m = Machine::from_names(
        file.alphabet.clone(),
        &file.blank,
        file.states.clone(),
        &file.initial,
        &file.accept,
        &file.reject,
        time_bound_from(&file.time_bound),
    )?;
    for (i, t) in file.transitions.iter().enumerate() {
        let movement = Move::from_code(&t.to.2)
            .ok_or_else(|| field(format!("transitions[{i}].to[2]"), format!("move `{}` is not L, S or R", t.to.2)))?;
        let value = annotation(i, t)?;
        m.add_rule(&t.from.0, &t.from.1, &t.to.0, &t.to.1, movement, value)
            .map_err(|e| field(format!("transitions[{i}]"), e))?;
    }
    m.provenance = file.provenance.clone();
    Ok(m)
}

impl MachineFile {
    pub fn into_machine(&self) -> Result<LoadedMachine, FormatError> {
        match self.kind {
            MachineKind::Afftm => build(self, |i, t| {
                if t.label.is_some() {
                    return Err(field(format!("transitions[{i}].label"), "labels belong to ntm files"));
                }
                let text = t
                    .weight
                    .as_deref()
                    .ok_or_else(|| field(format!("transitions[{i}].weight"), "missing"))?;
                parse_fraction(text).map_err(|e| field(format!("transitions[{i}].weight"), e))
            })
            .map(LoadedMachine::AffTm),
            MachineKind::Ntm => build(self, |i, t| {
                if t.weight.is_some() {
                    return Err(field(format!("transitions[{i}].weight"), "weights belong to afftm files"));
                }
                t.label
                    .ok_or_else(|| field(format!("transitions[{i}].label"), "missing"))
            })
            .map(LoadedMachine::Ntm),
        }
    }
}

fn to_file<A: Clone>(
    m: &Machine<A>,
    kind: MachineKind,
    annotate: impl Fn(&Rule<A>, &mut TransitionFile),
) -> MachineFile {
    let mut transitions = Vec::new();
    for (&(q, a), row) in m.rows() {
        for rule in row {
            let mut t = TransitionFile {
                from: (m.states()[q].clone(), m.alphabet()[a].clone()),
                to: (
                    m.states()[rule.next].clone(),
                    m.alphabet()[rule.write].clone(),
                    rule.movement.code().to_string(),
                ),
                weight: None,
                label: None,
            };
            annotate(rule, &mut t);
            transitions.push(t);
        }
    }
    MachineFile {
        kind,
        alphabet: m.alphabet().to_vec(),
        blank: m.alphabet()[m.blank()].clone(),
        states: m.states().to_vec(),
        initial: m.states()[m.initial()].clone(),
        accept: m.states()[m.accept()].clone(),
        reject: m.states()[m.reject()].clone(),
        time_bound: time_bound_to(m.time_bound()),
        transitions,
        provenance: m.provenance.clone(),
    }
}

pub fn afftm_to_file(m: &AffTm) -> MachineFile {
    to_file(m, MachineKind::Afftm, |r, t| t.weight = Some(format_fraction(&r.annotation)))
}

pub fn ntm_to_file(m: &Ntm) -> MachineFile {
    to_file(m, MachineKind::Ntm, |r, t| t.label = Some(r.annotation))
}

pub fn machine_to_file(m: &LoadedMachine) -> MachineFile {
    match m {
        LoadedMachine::Ntm(n) => ntm_to_file(n),
        LoadedMachine::AffTm(a) => afftm_to_file(a),
    }
}

pub fn parse_machine_str(text: &str) -> Result<LoadedMachine, FormatError> {
    let file: MachineFile = serde_json::from_str(text)?;
    file.into_machine()
}

pub fn parse_machine(path: &Path) -> Result<LoadedMachine, FormatError> {
    parse_machine_str(&read_text(path)?)
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateFile {
    pub name: String,
    pub offset: usize,
    /// Column bits -> row bits -> fraction.
    pub matrix: BTreeMap<String, BTreeMap<String, String>>,
    #[serde(default)]
    pub identity_elsewhere: bool,
    /// Needed when the matrix is empty; otherwise the bit-string length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arity: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectFile {
    pub wires: Vec<usize>,
    pub dual: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    pub wires: usize,
    pub prep: String,
    pub gates: Vec<GateFile>,
    #[serde(default)]
    pub effects: Vec<EffectFile>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

fn bits_of(name: &str, text: &str, width: Option<usize>) -> Result<(u64, usize), FormatError> {
    let (value, len) = parse_bits(text).map_err(|e| field(name, e))?;
    if let Some(w) = width {
        if w != len {
            return Err(field(name, format!("`{text}` should have {w} bits")));
        }
    }
    if len > 63 {
        return Err(field(name, format!("`{text}` is wider than 63 bits")));
    }
    Ok((value as u64, len))
}

fn fraction_of(name: &str, text: &str) -> Result<Rational, FormatError> {
    parse_fraction(text).map_err(|e| field(name, e))
}

impl CircuitFile {
    /// Builds the circuit. Gates with the same name and matrix are shared.
    /// Column-sum failures surface as [`FormatError::Circuit`].
    pub fn into_circuit(&self) -> Result<Circuit, FormatError> {
        let (prep, prep_len) = parse_bits(&self.prep).map_err(|e| field("prep", e))?;
        if prep_len != self.wires {
            return Err(field("prep", format!("expected {} bits, got {prep_len}", self.wires)));
        }
        let mut circuit = Circuit::new(self.wires, prep);
        let mut shared: BTreeMap<(String, String), Arc<AffineGate>> = BTreeMap::new();
        for (i, g) in self.gates.iter().enumerate() {
            let key = (g.name.clone(), serde_json::to_string(&(&g.matrix, g.identity_elsewhere, g.arity)).expect("json"));
            let gate = match shared.get(&key) {
                Some(gate) => gate.clone(),
                None => {
                    let gate = Arc::new(gate_from_file(i, g)?);
                    shared.insert(key, gate.clone());
                    gate
                }
            };
            circuit.push_gate(gate, g.offset)?;
        }
        for (i, e) in self.effects.iter().enumerate() {
            let name = format!("effects[{i}].dual");
            let mut dual = Vec::new();
            for (bits, value) in &e.dual {
                let (b, _) = bits_of(&name, bits, Some(e.wires.len()))?;
                dual.push((b, fraction_of(&name, value)?));
            }
            circuit.effects.push((Effect::new(e.wires.len(), dual), e.wires.clone()));
        }
        circuit.metadata = self.metadata.clone();
        circuit.validate()?;
        Ok(circuit)
    }

    pub fn from_circuit(c: &Circuit) -> Self {
        CircuitFile {
            wires: c.wires,
            prep: bits_to_string(c.prep, c.wires),
            gates: c
                .gates
                .iter()
                .map(|p| {
                    let arity = p.gate.arity();
                    let mut matrix: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
                    for (col, row, value) in p.gate.triples() {
                        matrix
                            .entry(bits_to_string(col as u128, arity))
                            .or_default()
                            .insert(bits_to_string(row as u128, arity), format_fraction(&value));
                    }
                    GateFile {
                        name: p.gate.name().to_string(),
                        offset: p.offset,
                        matrix,
                        identity_elsewhere: p.gate.identity_elsewhere(),
                        arity: Some(arity),
                    }
                })
                .collect(),
            effects: c
                .effects
                .iter()
                .map(|(e, wires)| EffectFile {
                    wires: wires.clone(),
                    dual: e
                        .entries()
                        .map(|(b, v)| (bits_to_string(b as u128, e.arity()), format_fraction(v)))
                        .collect(),
                })
                .collect(),
            metadata: c.metadata.clone(),
        }
    }
}

fn gate_from_file(index: usize, g: &GateFile) -> Result<AffineGate, FormatError> {
    let name = format!("gates[{index}].matrix");
    let mut arity = g.arity;
    let mut entries = Vec::new();
    for (col, rows) in &g.matrix {
        let (c, len) = bits_of(&name, col, arity)?;
        arity = Some(len);
        for (row, value) in rows {
            let (r, _) = bits_of(&name, row, arity)?;
            entries.push((c, r, fraction_of(&name, value)?));
        }
    }
    let arity = arity.ok_or_else(|| field(format!("gates[{index}].arity"), "empty matrix needs an arity"))?;
    Ok(make_gate(&g.name, arity, entries, g.identity_elsewhere)?)
}

pub fn parse_circuit_str(text: &str) -> Result<Circuit, FormatError> {
    let file: CircuitFile = serde_json::from_str(text)?;
    file.into_circuit()
}

pub fn parse_circuit(path: &Path) -> Result<Circuit, FormatError> {
    parse_circuit_str(&read_text(path)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescriptorFile {
    pub gates: Vec<usize>,
    /// One of `unmeasured`, `u`, `noisy`, `accept-reject` per wire.
    pub measurements: Vec<String>,
}

impl DescriptorFile {
    pub fn into_descriptor(&self) -> Result<AllowedCircuitDescriptor, FormatError> {
        let measurements = self
            .measurements
            .iter()
            .enumerate()
            .map(|(i, code)| {
                WireMeasurement::from_code(code)
                    .ok_or_else(|| field(format!("measurements[{i}]"), format!("unknown measurement `{code}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(AllowedCircuitDescriptor {
            gate_subset: self.gates.iter().copied().collect(),
            measurements,
        })
    }

    pub fn from_descriptor(d: &AllowedCircuitDescriptor) -> Self {
        DescriptorFile {
            gates: d.gate_subset.iter().copied().collect(),
            measurements: d.measurements.iter().map(|m| m.code().to_string()).collect(),
        }
    }
}

/// One demo formula: `clauses` are signed variable indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormulaEntry {
    pub name: String,
    pub vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl FormulaEntry {
    pub fn from_cnf(name: &str, f: &Cnf) -> Self {
        FormulaEntry {
            name: name.into(),
            vars: f.vars,
            clauses: f.clauses.clone(),
        }
    }

    pub fn to_cnf(&self) -> Result<Cnf, FormatError> {
        Cnf::new(self.vars, self.clauses.clone()).map_err(|e| field(format!("{}.clauses", self.name), e))
    }
}

pub fn parse_formulas(path: &Path) -> Result<Vec<FormulaEntry>, FormatError> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use awpp_core::corpus;
    use awpp_core::rational::frac;

    #[test]
    fn machine_round_trip() {
        for (_, m) in corpus::afftms() {
            let text = to_pretty_json(&afftm_to_file(&m));
            assert_eq!(parse_machine_str(&text).unwrap(), LoadedMachine::AffTm(m));
        }
        for (_, m) in corpus::ntms() {
            let text = to_pretty_json(&ntm_to_file(&m));
            assert_eq!(parse_machine_str(&text).unwrap(), LoadedMachine::Ntm(m));
        }
    }

    #[test]
    fn decimal_weight_is_refused() {
        let mut file = afftm_to_file(&corpus::fair_coin());
        file.transitions[0].weight = Some("0.5".into());
        let err = parse_machine_str(&to_pretty_json(&file)).unwrap_err();
        assert!(matches!(&err, FormatError::Field { field, .. } if field == "transitions[0].weight"), "{err}");
    }

    #[test]
    fn unknown_field_is_refused() {
        let text = to_pretty_json(&afftm_to_file(&corpus::fair_coin())).replacen("\"blank\"", "\"colour\": 1, \"blank\"", 1);
        assert!(matches!(parse_machine_str(&text), Err(FormatError::Json { .. })));
    }

    #[test]
    fn per_length_time_bound() {
        let mut file = afftm_to_file(&corpus::fair_coin());
        file.time_bound = TimeBoundFile::PerLength { per_length: vec![1, 1, 2] };
        let text = to_pretty_json(&file);
        assert!(text.contains("per_length"));
        let LoadedMachine::AffTm(m) = parse_machine_str(&text).unwrap() else { panic!() };
        assert_eq!(m.time_bound(), &TimeBound::PerLength(vec![1, 1, 2]));
    }

    #[test]
    fn circuit_round_trip_and_tamper() {
        let m = corpus::fair_coin();
        let c = awpp_core::compiler::compile(&m, 0).unwrap().circuit;
        let file = CircuitFile::from_circuit(&c);
        let back = file.into_circuit().unwrap();
        assert_eq!(back, c);
        let mut bad = file.clone();
        let column = bad.gates[0].matrix.values_mut().next().unwrap();
        let first = column.values_mut().next().unwrap();
        *first = format_fraction(&(parse_fraction(first).unwrap() + frac(1, 2)));
        assert!(matches!(bad.into_circuit(), Err(FormatError::Circuit(CircuitError::ColumnSum { .. }))));
    }
}
