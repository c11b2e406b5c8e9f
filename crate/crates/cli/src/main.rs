//! `infopriv`: capacities, balance curves, decomposition and theorem checks
//! for channels stored as JSON files.
//!
//! Exit codes: 0 success, 1 a checked property failed, 2 usage or input
//! error, 3 the requested method is infeasible at this size.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "infopriv",
    version,
    about = "Information-theoretic privacy analysis of discrete channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a standard channel as JSON.
    Gen(GenArgs),
    /// Individual or group channel capacity.
    Capacity(CapacityArgs),
    /// Balance function δ(b) on an equally spaced b-grid.
    Balance(BalanceArgs),
    /// Largest grid b whose δ(b) stays within a target.
    Invert(InvertArgs),
    /// Check one of the privacy bounds.
    Check(CheckArgs),
    /// Verify a chain-rule decomposition on seeded random instances.
    Decompose(DecomposeArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    Identity,
    Constant,
    Rr,
    Xor,
    Geometric,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    pub kind: GenKind,
    /// Number of records (xor, geometric).
    #[arg(long, default_value_t = 2)]
    pub records: usize,
    /// Alphabet sizes, comma separated (identity, constant, rr).
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub alphabets: Vec<usize>,
    /// Output alphabet size (constant).
    #[arg(long, default_value_t = 2)]
    pub outputs: usize,
    /// Flip probability (rr).
    #[arg(long, default_value_t = 0.25)]
    pub q: f64,
    /// Decay factor (geometric).
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetArg {
    #[value(name = "P")]
    P,
    #[value(name = "Pb")]
    Pb,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodArg {
    Grid,
    Exact,
    Mirror,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormatArg {
    Json,
    Csv,
}

/// Estimator settings shared by every command that computes capacities.
#[derive(Args, Debug, Clone)]
pub struct EngineArgs {
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Grid resolution G (lattice spacing 1/G).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Mirror-ascent restarts.
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Add wall time to the report header (the report is then no longer
    /// byte-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug)]
pub struct CapacityArgs {
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long, value_enum, default_value = "P")]
    pub set: SetArg,
    #[arg(long, default_value_t = 0.0)]
    pub b: f64,
    /// Target record, 1-based.
    #[arg(long, conflicts_with = "group")]
    pub individual: Option<usize>,
    /// Group size k.
    #[arg(long)]
    pub group: Option<usize>,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BalanceArgs {
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long, default_value_t = 33)]
    pub points: usize,
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct InvertArgs {
    #[arg(long)]
    pub channel: PathBuf,
    /// Target balance δ* in bits.
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 33)]
    pub points: usize,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TheoremArg {
    Equivalence,
    Group,
    ComposeBasic,
    ComposeGeneral,
    Monotonicity,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingArg {
    Product,
    Dirichlet,
    Correlated,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub theorem: TheoremArg,
    /// Channel file; repeat for compositions.
    #[arg(long, required = true)]
    pub channel: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub b: f64,
    /// ε values for the equivalence check.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.5,1.0")]
    pub eps: Vec<f64>,
    /// Largest group size (defaults to the number of records).
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long, value_enum, default_value = "product")]
    pub coupling: CouplingArg,
    /// Sampled couplings for the general composition check.
    #[arg(long, default_value_t = 16)]
    pub trials: usize,
    /// b-grid size for the monotonicity check.
    #[arg(long, default_value_t = 33)]
    pub points: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum LemmaArg {
    Group,
    Basic,
    General,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[arg(long, value_enum)]
    pub lemma: LemmaArg,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest acceptable residual.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn configure_threads() -> Result<(), String> {
    if let Ok(v) = std::env::var("INFOPRIV_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| format!("INFOPRIV_THREADS={v} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
