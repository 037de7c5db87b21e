//! Argument definitions, dispatch and exit codes.
//!
//! Exit 0 on success, 1 when a checked property fails or a computation is
//! refused, 2 on usage, I/O and parse errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::formats::FormatError;
use crate::report::OutputFormat;

#[derive(Debug, Parser)]
#[command(name = "awpp", version, about = "Exact affine machines, reductions, circuits and the noisy theory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the artifact or report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: OutputFormat,
    /// Accept on outcomes with a(z) = 1 instead of a(z) = 0.
    #[arg(long, global = true)]
    pub accept_on_one: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Affine Turing machines.
    Afftm {
        #[command(subcommand)]
        command: AfftmCommand,
    },
    /// Non-deterministic machines and gap functions.
    Ntm {
        #[command(subcommand)]
        command: NtmCommand,
    },
    /// The two reductions and their identity checks.
    Reduce {
        #[command(subcommand)]
        command: ReduceCommand,
    },
    /// Compile an affine machine into the circuit for input length n.
    Compile(CompileArgs),
    /// Affine circuit files.
    Circuit {
        #[command(subcommand)]
        command: CircuitCommand,
    },
    /// The noisy theory of a compiled machine.
    Theory {
        #[command(subcommand)]
        command: TheoryCommand,
    },
    /// Small demonstrations.
    Demo {
        #[command(subcommand)]
        command: DemoCommand,
    },
    /// Identity checks over a directory of machines.
    Verify {
        #[command(subcommand)]
        command: VerifyCommand,
    },
    /// The bundled corpus.
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExecMode {
    Enumerate,
    Frontier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendMode {
    Sparse,
    Dense,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input string, one character per symbol; repeatable.
    #[arg(long)]
    pub input: Vec<String>,
    /// Also run every input of length up to k.
    #[arg(long, value_name = "K")]
    pub max_len: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum AfftmCommand {
    /// Check row sums and the recorded common denominator.
    Validate { machine: PathBuf },
    /// Exact acceptance weights per input.
    Run {
        machine: PathBuf,
        #[command(flatten)]
        inputs: InputArgs,
        #[arg(long, value_enum, default_value = "frontier")]
        exec: ExecMode,
        /// Acceptor rule: standard, zero or one.
        #[arg(long, default_value = "standard")]
        acceptor: String,
    },
    /// Properness and bounded error on all short inputs.
    CheckProper {
        machine: PathBuf,
        #[arg(long, value_name = "K", default_value_t = 3)]
        max_len: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum NtmCommand {
    /// Gap g(x) = #accept - #reject per input.
    Gap {
        machine: PathBuf,
        #[command(flatten)]
        inputs: InputArgs,
    },
    /// Make every branch halt at exactly T(n).
    Uniformize {
        machine: PathBuf,
        #[arg(long, value_name = "K", default_value_t = 3)]
        max_len: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum ReduceCommand {
    /// Uniform NTM to AffTM with acceptance g(x) / 2^p.
    GapToAfftm {
        machine: PathBuf,
        #[arg(long, default_value_t = 1)]
        exponent: usize,
    },
    /// AffTM to NTM with gap 4 M^T alpha(x) on inputs of length n.
    AfftmToGap {
        machine: PathBuf,
        #[arg(long)]
        n: usize,
    },
    /// Check both identities on a machine file or a directory of them.
    Crosscheck(CrosscheckArgs),
}

#[derive(Debug, Args)]
pub struct CrosscheckArgs {
    pub path: PathBuf,
    #[arg(long, value_name = "K", default_value_t = 3)]
    pub max_len: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3])]
    pub exponents: Vec<usize>,
    /// Also run NTM -> AffTM -> NTM when the result is at most this deep.
    #[arg(long)]
    pub round_trip_depth: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Same as `reduce crosscheck`.
    Reductions(CrosscheckArgs),
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    pub machine: PathBuf,
    #[arg(long)]
    pub n: Option<usize>,
    /// Prepare the circuit on this input; sets n.
    #[arg(long)]
    pub input: Option<String>,
    /// Print the wire map as JSON; the circuit goes to --out only.
    #[arg(long)]
    pub layout: bool,
}

#[derive(Debug, Subcommand)]
pub enum CircuitCommand {
    /// Simulate and report the reduced state or scalar.
    Run {
        circuit: PathBuf,
        #[arg(long, value_enum, default_value = "sparse")]
        mode: BackendMode,
    },
    /// Column sums and placements.
    Validate { circuit: PathBuf },
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    pub machine: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub n: usize,
    /// Bits of the veil search.
    #[arg(long, value_name = "BITS", default_value_t = 20)]
    pub precision: u32,
    /// Preparation enumeration cap.
    #[arg(long, default_value_t = 200)]
    pub cap: usize,
    /// Leave out single-cell and single-wire marginals.
    #[arg(long)]
    pub no_marginals: bool,
}

#[derive(Debug, Subcommand)]
pub enum TheoryCommand {
    /// Largest dyadic p at which every preparation is proper.
    Veil(TheoryArgs),
    /// Exact reconstruction of every preparation from noisy statistics.
    Tomography {
        #[command(flatten)]
        theory: TheoryArgs,
        /// Noise parameter; defaults to the veil.
        #[arg(long)]
        p: Option<String>,
    },
    /// Every measurement sums to u and u is 1 on every preparation.
    Causality(TheoryArgs),
    /// Check an allowed-circuit descriptor against the compiled layout.
    ValidateCircuit {
        descriptor: PathBuf,
        #[arg(long)]
        machine: PathBuf,
        #[arg(long, default_value_t = 0)]
        n: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum DemoCommand {
    /// Gap of the satisfiability NTM against a truth-table count.
    UniqueSat {
        /// Clauses joined by `&`, literals as signed integers: "1 2 & -1".
        #[arg(long, requires = "vars")]
        formula: Option<String>,
        #[arg(long)]
        vars: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum CorpusCommand {
    /// Write every bundled machine and formula as JSON.
    Export { dir: PathBuf },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) | CliError::Format(FormatError::Circuit(_)) => 1,
            CliError::Usage(_) | CliError::Io { .. } | CliError::Format(_) => 2,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

macro_rules! failed_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Failed(e.to_string())
            }
        }
    )*};
}

failed_from!(
    awpp_core::machine::MachineError,
    awpp_core::reductions::ReductionError,
    awpp_core::compiler::CompileError,
    awpp_core::circuit::CircuitError,
    awpp_core::theory::TheoryError,
    awpp_core::sat::SatError
);

/// Where output goes.
pub(crate) struct Io<'a> {
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub accept_on_one: bool,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

impl Io<'_> {
    /// The artifact or report: `--out` when given, stdout otherwise.
    pub fn emit(&mut self, text: &str) -> Result<(), CliError> {
        match &self.out {
            Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
            None => self
                .stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
        }
    }

    pub fn print(&mut self, text: &str) -> Result<(), CliError> {
        self.stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e))
    }

    pub fn note(&mut self, text: &str) {
        let _ = writeln!(self.stderr, "{text}");
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut io = Io {
        out: cli.out.clone(),
        format: cli.format,
        accept_on_one: cli.accept_on_one,
        stdout,
        stderr,
    };
    match crate::commands::dispatch(cli.command, &mut io) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            io.note(&format!("error: {e}"));
            e.exit_code()
        }
    }
}
