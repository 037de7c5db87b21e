use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use awpp_core::acceptor::{evaluate_acceptor, Acceptor};
use awpp_core::circuit::{bits_to_string, SimMode};
use awpp_core::compiler::{compile, Outcome};
use awpp_core::corpus;
use awpp_core::machine::{
    check_proper, enumerate_inputs, run_afftm, run_ntm_gap, uniformize_ntm, validate_afftm, AffTm,
    Machine, Ntm, RunMode, SymbolId, Violation,
};
use awpp_core::rational::{parse_fraction, Rational};
use awpp_core::reductions::{
    afftm_to_gap, crosscheck_reductions, gap_to_afftm, CrosscheckOptions, GapToAffSpec,
    ReductionSource,
};
use awpp_core::sat::{build_unique_sat_ntm, Cnf};
use awpp_core::theory::{
    assemble_instance, check_causality, tomography_round_trip, validate_allowed_circuit,
    PreparationLimits, RoundTripMethod, TheoryInstance, TheoryOptions,
};
use serde::Serialize;

use crate::cli::{
    AfftmCommand, BackendMode, CircuitCommand, CliError, Command, CompileArgs, CorpusCommand,
    CrosscheckArgs, DemoCommand, ExecMode, InputArgs, Io, NtmCommand, ReduceCommand, TheoryArgs,
    TheoryCommand, VerifyCommand,
};
use crate::formats::{
    afftm_to_file, ntm_to_file, parse_circuit, parse_machine, read_text, to_pretty_json,
    CircuitFile, DescriptorFile, FormulaEntry, LoadedMachine,
};
use crate::report::{decimal, fraction, OutputFormat, Report, RunRow};

/// Runs one command; `Ok(false)` means a checked property failed.
pub(crate) fn dispatch(command: Command, io: &mut Io<'_>) -> Result<bool, CliError> {
    match command {
        Command::Afftm { command } => match command {
            AfftmCommand::Validate { machine } => afftm_validate(&machine, io),
            AfftmCommand::Run {
                machine,
                inputs,
                exec,
                acceptor,
            } => afftm_run(&machine, &inputs, exec, &acceptor, io),
            AfftmCommand::CheckProper { machine, max_len } => afftm_check_proper(&machine, max_len, io),
        },
        Command::Ntm { command } => match command {
            NtmCommand::Gap { machine, inputs } => ntm_gap(&machine, &inputs, io),
            NtmCommand::Uniformize { machine, max_len } => ntm_uniformize(&machine, max_len, io),
        },
        Command::Reduce { command } => match command {
            ReduceCommand::GapToAfftm { machine, exponent } => reduce_gap_to_afftm(&machine, exponent, io),
            ReduceCommand::AfftmToGap { machine, n } => reduce_afftm_to_gap(&machine, n, io),
            ReduceCommand::Crosscheck(args) => crosscheck(&args, io),
        },
        Command::Verify {
            command: VerifyCommand::Reductions(args),
        } => crosscheck(&args, io),
        Command::Compile(args) => compile_command(&args, io),
        Command::Circuit { command } => match command {
            CircuitCommand::Run { circuit, mode } => circuit_run(&circuit, mode, io),
            CircuitCommand::Validate { circuit } => circuit_validate(&circuit, io),
        },
        Command::Theory { command } => match command {
            TheoryCommand::Veil(args) => theory_veil(&args, io),
            TheoryCommand::Tomography { theory, p } => theory_tomography(&theory, p.as_deref(), io),
            TheoryCommand::Causality(args) => theory_causality(&args, io),
            TheoryCommand::ValidateCircuit { descriptor, machine, n } => {
                theory_validate_circuit(&descriptor, &machine, n, io)
            }
        },
        Command::Demo {
            command: DemoCommand::UniqueSat { formula, vars },
        } => demo_unique_sat(formula.as_deref(), vars, io),
        Command::Corpus {
            command: CorpusCommand::Export { dir },
        } => corpus_export(&dir, io),
    }
}

fn source(path: &Path) -> Option<String> {
    Some(path.display().to_string())
}

fn load_afftm(path: &Path) -> Result<AffTm, CliError> {
    match parse_machine(path)? {
        LoadedMachine::AffTm(m) => Ok(m),
        LoadedMachine::Ntm(_) => Err(CliError::Usage(format!("{}: expected an afftm file", path.display()))),
    }
}

fn load_ntm(path: &Path) -> Result<Ntm, CliError> {
    match parse_machine(path)? {
        LoadedMachine::Ntm(m) => Ok(m),
        LoadedMachine::AffTm(_) => Err(CliError::Usage(format!("{}: expected an ntm file", path.display()))),
    }
}

fn collect_inputs<A: Clone>(m: &Machine<A>, args: &InputArgs) -> Result<Vec<Vec<SymbolId>>, CliError> {
    let mut out = args
        .input
        .iter()
        .map(|s| m.parse_input(s).map_err(|e| CliError::Usage(format!("--input {s:?}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(k) = args.max_len {
        out.extend(enumerate_inputs(&m.input_symbols(), k));
    }
    if out.is_empty() {
        out.push(Vec::new());
    }
    Ok(out)
}

fn exec_mode(mode: ExecMode) -> RunMode {
    match mode {
        ExecMode::Enumerate => RunMode::Enumerate,
        ExecMode::Frontier => RunMode::Frontier,
    }
}

fn sim_mode(mode: BackendMode) -> SimMode {
    match mode {
        BackendMode::Sparse => SimMode::Sparse,
        BackendMode::Dense => SimMode::Dense,
    }
}

#[derive(Default, Serialize)]
struct ViolationRow {
    kind: &'static str,
    detail: String,
}

fn afftm_validate(path: &Path, io: &mut Io<'_>) -> Result<bool, CliError> {
    let m = load_afftm(path)?;
    let rows: Vec<ViolationRow> = validate_afftm(&m)
        .iter()
        .map(|v| ViolationRow {
            kind: match v {
                Violation::RowSum { .. } => "row-sum",
                Violation::DenominatorMismatch { .. } => "denominator",
            },
            detail: v.to_string(),
        })
        .collect();
    let ok = rows.is_empty();
    let report = Report::new("afftm validate", source(path), rows)
        .with("valid", ok)
        .with("states", m.states().len())
        .with("transitions", m.transition_count())
        .with("common_denominator", m.common_denominator())
        .with("fingerprint", m.fingerprint());
    io.emit(&report.render(io.format))?;
    Ok(ok)
}

fn afftm_run(
    path: &Path,
    inputs: &InputArgs,
    exec: ExecMode,
    acceptor: &str,
    io: &mut Io<'_>,
) -> Result<bool, CliError> {
    let m = load_afftm(path)?;
    let acceptor = Acceptor::named(acceptor).map_err(|e| CliError::Usage(format!("--acceptor: {e}")))?;
    let mut rows = Vec::new();
    for x in collect_inputs(&m, inputs)? {
        let start = Instant::now();
        let result = run_afftm(&m, &x, exec_mode(exec))?;
        let elapsed_us = start.elapsed().as_micros();
        let outcome = Outcome {
            accept: result.accept_weight.clone(),
            reject: result.reject_weight.clone(),
            none: Rational::default(),
        };
        let verdict = evaluate_acceptor(&outcome, &acceptor, io.accept_on_one);
        rows.push(RunRow {
            input: m.render_input(&x),
            alpha: fraction(&result.accept_weight),
            alpha_decimal: decimal(&result.accept_weight),
            rho: fraction(&result.reject_weight),
            acceptance: fraction(&verdict.probability),
            decision: verdict.decision.code().into(),
            branches: result.branch_count,
            elapsed_us,
        });
    }
    let report = Report::new("afftm run", source(path), rows)
        .with("exec", format!("{exec:?}").to_lowercase())
        .with("accept_on_one", io.accept_on_one)
        .with("thresholds", "accept >= 2/3, reject <= 1/3");
    io.emit(&report.render(io.format))?;
    Ok(true)
}

#[derive(Default, Serialize)]
struct ProperRow {
    input: String,
    alpha: String,
    alpha_decimal: String,
    proper: bool,
    bounded: bool,
}

fn afftm_check_proper(path: &Path, max_len: usize, io: &mut Io<'_>) -> Result<bool, CliError> {
    let m = load_afftm(path)?;
    let r = check_proper(&m, max_len)?;
    let zero = Rational::default();
    let one = Rational::from_integer(1.into());
    let (third, two_thirds) = (awpp_core::rational::frac(1, 3), awpp_core::rational::frac(2, 3));
    let rows = r
        .evaluated
        .iter()
        .map(|(x, alpha)| {
            let proper = *alpha >= zero && *alpha <= one;
            ProperRow {
                input: m.render_input(x),
                alpha: fraction(alpha),
                alpha_decimal: decimal(alpha),
                proper,
                bounded: proper && (*alpha <= third || *alpha >= two_thirds),
            }
        })
        .collect();
    let mut report = Report::new("afftm check-proper", source(path), rows)
        .with("proper", r.proper)
        .with("bounded_error", r.bounded_error)
        .with("max_len", max_len);
    if let Some(w) = &r.improper_witness {
        report = report.with("improper_witness", m.render_input(w));
    }
    if let Some(w) = &r.unbounded_witness {
        report = report.with("unbounded_witness", m.render_input(w));
    }
    io.emit(&report.render(io.format))?;
    Ok(r.proper)
}

#[derive(Default, Serialize)]
struct GapRow {
    input: String,
    accept: String,
    reject: String,
    gap: String,
    branches: String,
    depth: usize,
    uniform: bool,
}

fn ntm_gap(path: &Path, inputs: &InputArgs, io: &mut Io<'_>) -> Result<bool, CliError> {
    let m = load_ntm(path)?;
    let mut rows = Vec::new();
    for x in collect_inputs(&m, inputs)? {
        let g = run_ntm_gap(&m, &x)?;
        rows.push(GapRow {
            input: m.render_input(&x),
            accept: g.accept_count.to_string(),
            reject: g.reject_count.to_string(),
            gap: g.gap.to_string(),
            branches: g.branch_count.to_string(),
            depth: g.depth,
            uniform: g.uniform,
        });
    }
    io.emit(&Report::new("ntm gap", source(path), rows).render(io.format))?;
    Ok(true)
}

fn ntm_uniformize(path: &Path, max_len: usize, io: &mut Io<'_>) -> Result<bool, CliError> {
    let m = load_ntm(path)?;
    let u = uniformize_ntm(&m, max_len)?;
    io.emit(&to_pretty_json(&ntm_to_file(&u.machine)))?;
    io.note(&format!(
        "multiplier {}, depth {}, unchanged {}",
        u.multiplier, u.depth, u.identity
    ));
    Ok(true)
}

fn reduce_gap_to_afftm(path: &Path, exponent: usize, io: &mut Io<'_>) -> Result<bool, CliError> {
    let m = load_ntm(path)?;
    let aff = gap_to_afftm(&GapToAffSpec::new(&m, exponent))?;
    io.emit(&to_pretty_json(&afftm_to_file(&aff)))?;
    io.note(&format!(
        "{} states, {} transitions, alpha = g / 2^{exponent}",
        aff.states().len(),
        aff.transition_count()
    ));
    Ok(true)
}

fn reduce_afftm_to_gap(path: &Path, n: usize, io: &mut Io<'_>) -> Result<bool, CliError> {
    let m = load_afftm(path)?;
    let r = afftm_to_gap(&m, n)?;
    io.emit(&to_pretty_json(&ntm_to_file(&r.ntm)))?;
    io.note(&format!(
        "{} states, depth {}, h = {} (M = {}, T = {}, m = {})",
        r.ntm.states().len(),
        r.spec.depth,
        r.h,
        r.spec.denominator,
        r.spec.budget,
        r.spec.m
    ));
    Ok(true)
}

#[derive(Default, Serialize)]
struct IdentityRow {
    machine: String,
    identity: String,
    input: String,
    parameters: String,
    lhs: String,
    rhs: String,
    holds: bool,
}

/// Machine files directly inside `path`, or `path` itself.
fn machine_files(path: &Path) -> Result<Vec<PathBuf>, CliError> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(|e| CliError::io(path, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Usage(format!("{}: no machine files", path.display())));
    }
    Ok(files)
}

fn crosscheck(args: &CrosscheckArgs, io: &mut Io<'_>) -> Result<bool, CliError> {
    let options = CrosscheckOptions {
        exponents: args.exponents.clone(),
        round_trip_depth: args.round_trip_depth,
        ..CrosscheckOptions::default()
    };
    let mut rows = Vec::new();
    let mut passed = true;
    let mut notes = Vec::new();
    for file in machine_files(&args.path)? {
        let name = file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let machine = parse_machine(&file)?;
        let (report, inputs) = match &machine {
            LoadedMachine::Ntm(m) => {
                let inputs = enumerate_inputs(&m.input_symbols(), args.max_len);
                let report = crosscheck_reductions(ReductionSource::Ntm(m), &inputs, &options)?;
                let rendered: BTreeMap<_, _> =
                    inputs.iter().map(|x| (x.clone(), m.render_input(x))).collect();
                (report, rendered)
            }
            LoadedMachine::AffTm(m) => {
                let inputs = enumerate_inputs(&m.input_symbols(), args.max_len);
                let report = crosscheck_reductions(ReductionSource::AffTm(m), &inputs, &options)?;
                (report, inputs.iter().map(|x| (x.clone(), m.render_input(x))).collect())
            }
        };
        passed &= report.passed;
        notes.extend(report.notes.iter().map(|n| format!("{name}: {n}")));
        for c in &report.checks {
            rows.push(IdentityRow {
                machine: name.clone(),
                identity: c.identity.clone(),
                input: inputs.get(&c.input).cloned().unwrap_or_default(),
                parameters: c
                    .parameters
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect::<Vec<_>>()
                    .join(";"),
                lhs: fraction(&c.lhs),
                rhs: fraction(&c.rhs),
                holds: c.holds,
            });
        }
    }
    let failed = rows.iter().filter(|r| !r.holds).count();
    let mut report = Report::new("reduce crosscheck", source(&args.path), rows)
        .with("passed", passed)
        .with("failed", failed)
        .with("max_len", args.max_len);
    if !notes.is_empty() {
        report = report.with("notes", notes.join(" | "));
    }
    io.emit(&report.render(io.format))?;
    Ok(passed)
}

#[derive(Default, Serialize)]
struct WireMapEntry {
    cell: i64,
    wires: [usize; 2],
    s: [usize; 2],
    q: [usize; 2],
    a: [usize; 2],
}

#[derive(Default, Serialize)]
struct LayoutFile {
    t: usize,
    n: usize,
    ell: usize,
    wires: usize,
    state_field: [usize; 2],
    cells: Vec<WireMapEntry>,
}

fn compile_command(args: &CompileArgs, io: &mut Io<'_>) -> Result<bool, CliError> {
    let m = load_afftm(&args.machine)?;
    let input = match &args.input {
        Some(s) => Some(m.parse_input(s).map_err(|e| CliError::Usage(format!("--input {s:?}: {e}")))?),
        None => None,
    };
    let n = match (&input, args.n) {
        (Some(x), Some(n)) if x.len() != n => {
            return Err(CliError::Usage(format!("--input has length {} but --n is {n}", x.len())))
        }
        (Some(x), _) => x.len(),
        (None, Some(n)) => n,
        (None, None) => return Err(CliError::Usage("give --n or --input".into())),
    };
    let compiled = compile(&m, n)?;
    let circuit = match &input {
        Some(x) => compiled.with_input(&m, x)?,
        None => compiled.circuit.clone(),
    };
    let text = to_pretty_json(&CircuitFile::from_circuit(&circuit));
    let (g, i, s) = compiled.gate_counts();
    if args.layout {
        let range = |r: std::ops::Range<usize>| [r.start, r.end];
        let layout = &compiled.layout;
        let file = LayoutFile {
            t: layout.t,
            n: layout.n,
            ell: layout.ell(),
            wires: layout.wire_count(),
            state_field: range(layout.state_field()),
            cells: layout
                .wire_map()
                .into_iter()
                .map(|c| WireMapEntry {
                    cell: c.cell,
                    wires: range(c.wires),
                    s: range(c.s),
                    q: range(c.q),
                    a: range(c.a),
                })
                .collect(),
        };
        io.print(&to_pretty_json(&file))?;
        if let Some(path) = &io.out {
            std::fs::write(path, &text).map_err(|e| CliError::io(path, e))?;
        }
    } else {
        io.emit(&text)?;
    }
    io.note(&format!(
        "{} wires, t = {}, ell = {}, gates G {g} I {i} S {s}",
        compiled.layout.wire_count(),
        compiled.layout.t,
        compiled.layout.ell()
    ));
    Ok(true)
}

#[derive(Default, Serialize)]
struct AmplitudeRow {
    bits: String,
    value: String,
    decimal: String,
}

fn circuit_run(path: &Path, mode: BackendMode, io: &mut Io<'_>) -> Result<bool, CliError> {
    let c = parse_circuit(path)?;
    let start = Instant::now();
    let sim = c.simulate(sim_mode(mode))?;
    let elapsed_us = start.elapsed().as_micros();
    let rows: Vec<AmplitudeRow> = match &sim.scalar {
        Some(value) => vec![AmplitudeRow {
            bits: String::new(),
            value: fraction(value),
            decimal: decimal(value),
        }],
        None => sim
            .reduced
            .entries()
            .map(|(bits, v)| AmplitudeRow {
                bits: bits_to_string(bits, sim.reduced.width()),
                value: fraction(v),
                decimal: decimal(v),
            })
            .collect(),
    };
    let report = Report::new("circuit run", source(path), rows)
        .with("mode", format!("{mode:?}").to_lowercase())
        .with("wires", c.wires)
        .with("gates", c.gates.len())
        .with("closed", sim.scalar.is_some())
        .with("open_wires", sim.reduced.width())
        .with("mass", fraction(&sim.reduced.coefficient_sum()))
        .with("elapsed_us", elapsed_us);
    io.emit(&report.render(io.format))?;
    Ok(true)
}

#[derive(Default, Serialize)]
struct GateAuditRow {
    index: usize,
    name: String,
    offset: usize,
    arity: usize,
    columns: u64,
}

fn circuit_validate(path: &Path, io: &mut Io<'_>) -> Result<bool, CliError> {
    // loading already audits column sums and placements
    let c = parse_circuit(path)?;
    let mut rows = Vec::new();
    for (index, p) in c.gates.iter().enumerate() {
        rows.push(GateAuditRow {
            index,
            name: p.gate.name().to_string(),
            offset: p.offset,
            arity: p.gate.arity(),
            columns: p.gate.audit_columns()?,
        });
    }
    let report = Report::new("circuit validate", source(path), rows)
        .with("valid", true)
        .with("wires", c.wires)
        .with("open_wires", c.open_wires().len());
    io.emit(&report.render(io.format))?;
    Ok(true)
}

fn theory_instance(args: &TheoryArgs) -> Result<TheoryInstance, CliError> {
    let m = load_afftm(&args.machine)?;
    let options = TheoryOptions {
        limits: PreparationLimits {
            max_preparations: args.cap,
            marginals: !args.no_marginals,
        },
        precision: args.precision,
        inputs: None,
    };
    Ok(assemble_instance(&m, args.n, &options)?)
}

#[derive(Default, Serialize)]
struct SystemRow {
    kind: &'static str,
    width: usize,
}

#[derive(Default, Serialize)]
struct InstanceFile {
    format_version: u32,
    machine_hash: String,
    n: usize,
    t: usize,
    ell: usize,
    wires: usize,
    p_nu: String,
    p_nu_decimal: String,
    precision: u32,
    verified: bool,
    cap: usize,
    preparations: usize,
    truncated: bool,
    conditioning: &'static str,
    systems: Vec<SystemRow>,
    catalogue: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    binding_preparation: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostic: Option<String>,
}

#[derive(Default, Serialize)]
struct VeilRow {
    machine_hash: String,
    n: usize,
    p_nu: String,
    p_nu_decimal: String,
    precision: u32,
    verified: bool,
    preparations: usize,
    truncated: bool,
}

fn theory_veil(args: &TheoryArgs, io: &mut Io<'_>) -> Result<bool, CliError> {
    let inst = theory_instance(args)?;
    let veil = &inst.veil;
    let ok = veil.verified && veil.p > Rational::default();
    let text = match io.format {
        OutputFormat::Json => to_pretty_json(&InstanceFile {
            format_version: crate::report::FORMAT_VERSION,
            machine_hash: inst.machine_id.clone(),
            n: inst.n,
            t: inst.t,
            ell: inst.ell,
            wires: inst.compiled.layout.wire_count(),
            p_nu: fraction(&veil.p),
            p_nu_decimal: decimal(&veil.p),
            precision: veil.precision,
            verified: veil.verified,
            cap: inst.preparations.cap,
            preparations: inst.preparations.items.len(),
            truncated: inst.preparations.truncated,
            conditioning: inst.conditioning,
            systems: inst
                .systems
                .iter()
                .map(|s| SystemRow {
                    kind: s.kind.code(),
                    width: s.width,
                })
                .collect(),
            catalogue: inst.catalogue_digests(),
            binding_preparation: veil.binding,
            diagnostic: veil.diagnostic.clone(),
        }),
        OutputFormat::Csv => Report::new(
            "theory veil",
            source(&args.machine),
            vec![VeilRow {
                machine_hash: inst.machine_id.clone(),
                n: inst.n,
                p_nu: fraction(&veil.p),
                p_nu_decimal: decimal(&veil.p),
                precision: veil.precision,
                verified: veil.verified,
                preparations: inst.preparations.items.len(),
                truncated: inst.preparations.truncated,
            }],
        )
        .render(OutputFormat::Csv),
    };
    io.emit(&text)?;
    if let Some(d) = &veil.diagnostic {
        io.note(d);
    }
    Ok(ok)
}

#[derive(Default, Serialize)]
struct TomographyRow {
    preparation: usize,
    input: String,
    gates: usize,
    kept: usize,
    method: &'static str,
    holds: bool,
}

fn theory_tomography(args: &TheoryArgs, p: Option<&str>, io: &mut Io<'_>) -> Result<bool, CliError> {
    let inst = theory_instance(args)?;
    let p = match p {
        Some(text) => parse_fraction(text).map_err(|e| CliError::Usage(format!("--p: {e}")))?,
        None => inst.veil.p.clone(),
    };
    let m = load_afftm(&args.machine)?;
    let mut rows = Vec::new();
    for (index, prep) in inst.preparations.items.iter().enumerate() {
        let (holds, method) = tomography_round_trip(&prep.state, &p)?;
        rows.push(TomographyRow {
            preparation: index,
            input: m.render_input(&prep.descriptor.input),
            gates: prep.descriptor.gates.len(),
            kept: prep.descriptor.kept.len(),
            method: match method {
                RoundTripMethod::Full => "full",
                RoundTripMethod::ActiveWires => "active-wires",
            },
            holds,
        });
    }
    let ok = rows.iter().all(|r| r.holds);
    let report = Report::new("theory tomography", source(&args.machine), rows)
        .with("p", fraction(&p))
        .with("passed", ok)
        .with("truncated", inst.preparations.truncated);
    io.emit(&report.render(io.format))?;
    Ok(ok)
}

#[derive(Default, Serialize)]
struct CheckRow {
    check: String,
    holds: bool,
    detail: String,
}

fn theory_causality(args: &TheoryArgs, io: &mut Io<'_>) -> Result<bool, CliError> {
    let inst = theory_instance(args)?;
    let r = check_causality(&inst)?;
    let rows = r
        .checks
        .iter()
        .map(|c| CheckRow {
            check: c.name.clone(),
            holds: c.holds,
            detail: c.detail.clone().unwrap_or_default(),
        })
        .collect();
    let report = Report::new("theory causality", source(&args.machine), rows)
        .with("passed", r.passed)
        .with("summary", r.summary());
    io.emit(&report.render(io.format))?;
    Ok(r.passed)
}

#[derive(Default, Serialize)]
struct ValidationRow {
    allowed: bool,
    diagnostic: String,
}

fn theory_validate_circuit(descriptor: &Path, machine: &Path, n: usize, io: &mut Io<'_>) -> Result<bool, CliError> {
    let file: DescriptorFile = serde_json::from_str(&read_text(descriptor)?).map_err(crate::formats::FormatError::from)?;
    let desc = file.into_descriptor()?;
    let m = load_afftm(machine)?;
    let layout = compile(&m, n)?.layout;
    let v = validate_allowed_circuit(&desc, &layout)?;
    let report = Report::new(
        "theory validate-circuit",
        source(descriptor),
        vec![ValidationRow {
            allowed: v.allowed,
            diagnostic: v.diagnostic.clone().unwrap_or_default(),
        }],
    );
    io.emit(&report.render(io.format))?;
    Ok(v.allowed)
}

#[derive(Default, Serialize)]
struct SatRow {
    name: String,
    formula: String,
    vars: usize,
    satisfying: u64,
    gap: String,
    agree: bool,
    promise: bool,
}

fn demo_unique_sat(formula: Option<&str>, vars: Option<usize>, io: &mut Io<'_>) -> Result<bool, CliError> {
    let formulas: Vec<(String, Cnf)> = match (formula, vars) {
        (Some(text), Some(v)) => vec![("formula".into(), Cnf::parse(v, text)?)],
        _ => corpus::demo_formulas()
            .into_iter()
            .map(|(n, f)| (n.to_string(), f))
            .collect(),
    };
    let mut rows = Vec::new();
    for (name, f) in formulas {
        let ntm = build_unique_sat_ntm(&f)?;
        let g = run_ntm_gap(&ntm, &[])?;
        let count = f.count_satisfying();
        rows.push(SatRow {
            name,
            formula: f.render(),
            vars: f.vars,
            satisfying: count,
            gap: g.gap.to_string(),
            agree: g.gap == count.into(),
            promise: count <= 1,
        });
    }
    let ok = rows.iter().all(|r| r.agree);
    io.emit(&Report::new("demo unique-sat", None, rows).with("passed", ok).render(io.format))?;
    Ok(ok)
}

fn corpus_export(dir: &Path, io: &mut Io<'_>) -> Result<bool, CliError> {
    let write = |path: PathBuf, text: String| std::fs::write(&path, text).map_err(|e| CliError::io(&path, e));
    let formulas = dir.join("formulas");
    std::fs::create_dir_all(&formulas).map_err(|e| CliError::io(&formulas, e))?;
    let formula_entries: Vec<FormulaEntry> = corpus::demo_formulas()
        .iter()
        .map(|(name, f)| FormulaEntry::from_cnf(name, f))
        .collect();
    let mut count = 0;
    for (name, m) in corpus::afftms() {
        write(dir.join(format!("{name}.json")), to_pretty_json(&afftm_to_file(&m)))?;
        count += 1;
    }
    for (name, m) in corpus::ntms() {
        write(dir.join(format!("{name}.json")), to_pretty_json(&ntm_to_file(&m)))?;
        count += 1;
    }
    write(formulas.join("unique-sat.json"), to_pretty_json(&formula_entries))?;
    io.note(&format!("wrote {count} machines and {} formulas to {}", formula_entries.len(), dir.display()));
    Ok(true)
}
