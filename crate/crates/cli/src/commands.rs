use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use infopriv::analysis::{
    balance_profile, check_basic_composition, check_equivalence, check_general_composition,
    check_group_privacy, check_monotonicity, invert_balance, CouplingFamily,
};
use infopriv::capacity::{capacity_over_targets, subsets};
use infopriv::decomposition::{random_suite, DecompositionReport, Lemma};
use infopriv::io::{channel_to_json, parse_channel, to_json};
use infopriv::{
    AnalysisConfig, CapacityConfig, KnowledgeSet, Mechanism, Method, PrivacyChannel, TheoremReport,
};

use crate::{
    BalanceArgs, CapacityArgs, CheckArgs, Command, CouplingArg, DecomposeArgs, EngineArgs, FormatArg,
    GenArgs, GenKind, InvertArgs, LemmaArg, MethodArg, SetArg, TheoremArg,
};

#[derive(Debug)]
pub enum CliError {
    Lib(infopriv::Error),
    Io(String),
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(infopriv::Error::Infeasible { .. }) => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(msg) | CliError::Usage(msg) => f.write_str(msg),
        }
    }
}

impl From<infopriv::Error> for CliError {
    fn from(e: infopriv::Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T> = Result<T, CliError>;

/// Provenance wrapper around every structured report.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_s: Option<f64>,
    report: &'a T,
}

struct Clock {
    start: Instant,
    in_report: bool,
}

impl Clock {
    fn start(in_report: bool) -> Self {
        Clock {
            start: Instant::now(),
            in_report,
        }
    }

    /// Logs the elapsed time to stderr; returns it only when it should go
    /// into the report.
    fn stop(&self) -> Option<f64> {
        let secs = self.start.elapsed().as_secs_f64();
        eprintln!("wall time: {secs:.3} s");
        self.in_report.then_some(secs)
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_report<T: Serialize>(
    out: Option<&Path>,
    command: &str,
    seed: u64,
    clock: &Clock,
    report: &T,
) -> CliResult<()> {
    let envelope = Envelope {
        tool: "infopriv",
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed,
        wall_time_s: clock.stop(),
        report,
    };
    emit(out, &to_json(&envelope))
}

fn load_channel(path: &Path) -> CliResult<PrivacyChannel> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_channel(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn channel_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn method(m: MethodArg) -> Method {
    match m {
        MethodArg::Grid => Method::Grid,
        MethodArg::Exact => Method::ExactEnumBa,
        MethodArg::Mirror => Method::MirrorAscent,
    }
}

fn capacity_config(engine: &EngineArgs) -> CliResult<CapacityConfig> {
    if engine.grid == Some(0) {
        return Err(CliError::Usage("--grid must be positive".into()));
    }
    Ok(CapacityConfig {
        grid_resolution: engine.grid,
        restarts: engine.restarts,
        seed: engine.seed,
        ..CapacityConfig::default()
    })
}

fn analysis_config(engine: &EngineArgs, tol: f64) -> CliResult<AnalysisConfig> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
    }
    Ok(AnalysisConfig {
        capacity: capacity_config(engine)?,
        method: engine.method.map_or(Method::Grid, method),
        tol,
    })
}

pub fn run(command: Command) -> CliResult<u8> {
    match command {
        Command::Gen(a) => gen(a),
        Command::Capacity(a) => capacity(a),
        Command::Balance(a) => balance(a),
        Command::Invert(a) => invert(a),
        Command::Check(a) => check(a),
        Command::Decompose(a) => decompose(a),
    }
}

fn gen(a: GenArgs) -> CliResult<u8> {
    let mechanism = match a.kind {
        GenKind::Identity => Mechanism::Identity {
            alphabets: a.alphabets,
        },
        GenKind::Constant => Mechanism::Constant {
            alphabets: a.alphabets,
            outputs: a.outputs,
            row: None,
        },
        GenKind::Rr => Mechanism::RandomizedResponse {
            alphabets: a.alphabets,
            q: a.q,
        },
        GenKind::Xor => Mechanism::Xor { records: a.records },
        GenKind::Geometric => Mechanism::TruncatedGeometric {
            records: a.records,
            alpha: a.alpha,
        },
    };
    let ch = mechanism.build().map_err(|e| CliError::Usage(e.to_string()))?;
    emit(a.out.as_deref(), &channel_to_json(&ch))?;
    Ok(0)
}

fn capacity(a: CapacityArgs) -> CliResult<u8> {
    let clock = Clock::start(a.engine.timing);
    let ch = load_channel(&a.channel)?;
    let ks = match a.set {
        SetArg::P => KnowledgeSet::Unconstrained,
        SetArg::Pb => KnowledgeSet::from_b(a.b),
    };
    let m = match (a.engine.method, ks.is_unconstrained()) {
        (Some(MethodArg::Exact), false) => {
            return Err(CliError::Usage(
                "--method exact covers --set P only; use grid or mirror for Pb".into(),
            ))
        }
        (Some(m), _) => method(m),
        (None, true) => Method::ExactEnumBa,
        (None, false) => Method::Grid,
    };
    let n = ch.input_shape().records();
    let targets = match (a.individual, a.group) {
        (Some(i), _) if i == 0 || i > n => {
            return Err(CliError::Usage(format!("--individual {i} not in 1..={n}")));
        }
        (Some(i), _) => vec![vec![i - 1]],
        (None, Some(k)) if k == 0 || k > n => {
            return Err(CliError::Usage(format!("--group {k} not in 1..={n}")));
        }
        (None, Some(k)) => subsets(n, k),
        (None, None) => subsets(n, 1),
    };
    let config = capacity_config(&a.engine)?;
    let estimate = capacity_over_targets(&ch, &targets, ks, m, &config)?;
    emit_report(a.out.as_deref(), "capacity", a.engine.seed, &clock, &estimate)?;
    Ok(0)
}

fn balance(a: BalanceArgs) -> CliResult<u8> {
    let clock = Clock::start(a.engine.timing);
    let ch = load_channel(&a.channel)?;
    let config = analysis_config(&a.engine, 1e-6)?;
    let profile = balance_profile(&ch, &channel_id(&a.channel), a.points, &config)?;
    match a.format {
        FormatArg::Json => emit_report(a.out.as_deref(), "balance", a.engine.seed, &clock, &profile)?,
        FormatArg::Csv => {
            clock.stop();
            emit(a.out.as_deref(), &profile.to_csv())?
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct Inversion<'a> {
    channel: &'a str,
    delta_target: f64,
    b: f64,
    points: usize,
}

fn invert(a: InvertArgs) -> CliResult<u8> {
    let clock = Clock::start(a.engine.timing);
    let ch = load_channel(&a.channel)?;
    let config = analysis_config(&a.engine, 1e-6)?;
    let id = channel_id(&a.channel);
    let profile = balance_profile(&ch, &id, a.points, &config)?;
    let b = invert_balance(&profile, a.delta)?;
    let report = Inversion {
        channel: &id,
        delta_target: a.delta,
        b,
        points: a.points,
    };
    emit_report(a.out.as_deref(), "invert", a.engine.seed, &clock, &report)?;
    Ok(0)
}

fn summarize(report: &TheoremReport) {
    let s = report.summary;
    eprintln!(
        "{:?}: {} holds, {} inconclusive, {} violated",
        report.theorem, s.holds, s.inconclusive, s.violated
    );
}

fn check(a: CheckArgs) -> CliResult<u8> {
    let clock = Clock::start(a.engine.timing);
    let config = analysis_config(&a.engine, a.tol)?;
    let channels = a
        .channel
        .iter()
        .map(|p| load_channel(p))
        .collect::<CliResult<Vec<_>>>()?;
    let ids: Vec<String> = a.channel.iter().map(|p: &PathBuf| channel_id(p)).collect();
    let single = |what: &str| -> CliResult<()> {
        if channels.len() != 1 {
            return Err(CliError::Usage(format!("{what} takes exactly one --channel")));
        }
        Ok(())
    };
    let report = match a.theorem {
        TheoremArg::Equivalence => {
            single("check equivalence")?;
            check_equivalence(&channels[0], &ids[0], a.b, &a.eps, &config)?
        }
        TheoremArg::Group => {
            single("check group")?;
            let k = a.kmax.unwrap_or(channels[0].input_shape().records());
            check_group_privacy(&channels[0], &ids[0], a.b, k, &config)?
        }
        TheoremArg::ComposeBasic => check_basic_composition(&channels, &ids, a.b, &config)?,
        TheoremArg::ComposeGeneral => {
            if channels.len() != 2 {
                return Err(CliError::Usage(
                    "check compose-general takes exactly two --channel".into(),
                ));
            }
            let family = match a.coupling {
                CouplingArg::Product => CouplingFamily::Product,
                CouplingArg::Dirichlet => CouplingFamily::Dirichlet,
                CouplingArg::Correlated => CouplingFamily::Correlated,
            };
            check_general_composition(
                &channels[0],
                &channels[1],
                &ids,
                family,
                a.b,
                a.trials,
                a.engine.seed,
                &config,
            )?
        }
        TheoremArg::Monotonicity => {
            single("check monotonicity")?;
            let profile = balance_profile(&channels[0], &ids[0], a.points, &config)?;
            check_monotonicity(&profile, a.tol)
        }
    };
    summarize(&report);
    emit_report(a.out.as_deref(), "check", a.engine.seed, &clock, &report)?;
    Ok(if report.violated() { 1 } else { 0 })
}

#[derive(Serialize)]
struct ResidualSummary {
    lemma: Lemma,
    trials: usize,
    completed: usize,
    failures: Vec<String>,
    max_residual: f64,
    mean_residual: f64,
    tol: f64,
}

#[derive(Serialize)]
struct DecomposeReport {
    summary: ResidualSummary,
    reports: Vec<DecompositionReport>,
}

fn decompose(a: DecomposeArgs) -> CliResult<u8> {
    if a.tol.is_nan() || a.tol <= 0.0 {
        return Err(CliError::Usage(format!("--tol must be positive, got {}", a.tol)));
    }
    let clock = Clock::start(a.timing);
    let lemma = match a.lemma {
        LemmaArg::Group => Lemma::Group,
        LemmaArg::Basic => Lemma::Basic,
        LemmaArg::General => Lemma::General,
    };
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (t, r) in random_suite(lemma, a.trials, a.seed).into_iter().enumerate() {
        match r {
            Ok(r) => reports.push(r),
            Err(e) => failures.push(format!("trial {t}: {e}")),
        }
    }
    let max_residual = reports.iter().map(|r| r.residual).fold(0.0, f64::max);
    let mean_residual = if reports.is_empty() {
        0.0
    } else {
        reports.iter().map(|r| r.residual).sum::<f64>() / reports.len() as f64
    };
    eprintln!(
        "{} lemma: {} trials, max residual {max_residual:.3e}, mean {mean_residual:.3e}, {} failed",
        lemma.name(),
        reports.len(),
        failures.len()
    );
    let report = DecomposeReport {
        summary: ResidualSummary {
            lemma,
            trials: a.trials,
            completed: reports.len(),
            failures,
            max_residual,
            mean_residual,
            tol: a.tol,
        },
        reports,
    };
    emit_report(a.out.as_deref(), "decompose", a.seed, &clock, &report)?;
    Ok(if max_residual > a.tol { 1 } else { 0 })
}
