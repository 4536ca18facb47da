//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for invalid input (flags, parameters, config,
//! malformed input files), 2 for runtime failures (I/O, unwritable outputs,
//! aborted campaigns). Every failure prints one `error:` line on stderr.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cls::estimate_cls;
use crate::error::Error;
use crate::harness::{run_campaign, write_samples_csv, CampaignConfig};
use crate::innovation::InnovationModel;
use crate::limit::{sample_limit_batch, write_limit_csv, LimitLaw, LimitModel, DEFAULT_MESH};
use crate::moments::exact_joint_moments;
use crate::process::{classify, simulate, AutoregressiveParams, Regularity, Trajectory};

#[derive(Debug, Parser)]
#[command(name = "inar2", version, about = "Simulate, estimate and check unit-root INAR(2) processes")]
struct Cli {
    /// Worker threads for Monte Carlo work (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON object whose keys override the subcommand's flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one trajectory and write it as `k,x` CSV.
    Simulate(SimulateArgs),
    /// Compute the CLS estimate of a trajectory CSV.
    Estimate(EstimateArgs),
    /// Report the stability and regularity class of (alpha, beta).
    Classify(ClassifyArgs),
    /// Draw from a limit law.
    LimitSample(LimitArgs),
    /// Run a Monte Carlo campaign against the limit law.
    McCompare(CompareArgs),
    /// Tabulate exact first or second moments.
    Moments(MomentsArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum CaseArg {
    Auto,
    PositivelyRegular,
    Decomposable,
    Indecomposable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum LawArg {
    Rho,
    Ab,
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    /// `poisson:L`, `geometric:P`, `categorical:v=p,...` or `constant:V`.
    #[arg(long)]
    innovation: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EstimateArgs {
    /// Trajectory CSV with header `k,x`.
    #[arg(long = "in")]
    #[serde(rename = "in")]
    input: PathBuf,
    /// Known innovation mean.
    #[arg(long)]
    mu: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifyArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LimitArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    innovation: String,
    #[arg(long, value_enum, default_value_t = LawArg::Rho)]
    law: LawArg,
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, default_value_t = DEFAULT_MESH)]
    mesh: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompareArgs {
    /// Expected regularity class; `auto` takes it from (alpha, beta).
    #[arg(long, value_enum, default_value_t = CaseArg::Auto)]
    case: CaseArg,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    innovation: String,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 2000)]
    reps: usize,
    #[arg(long, default_value_t = 10_000)]
    limit_reps: usize,
    #[arg(long, default_value_t = DEFAULT_MESH)]
    mesh: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report destination (JSON); stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional `replication,stat1,stat2` CSV of the scaled statistics.
    #[arg(long)]
    samples: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MomentsArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    innovation: String,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 2)]
    order: u8,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Validation(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidParameter(_)
            | Error::InvalidInnovation(_)
            | Error::Precondition(_)
            | Error::Parse(_)
            | Error::Undefined => Failure::Validation(msg),
            Error::DegenerateDenominator(_)
            | Error::TooManyUndefined { .. }
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => Failure::Runtime(msg),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn runtime(context: &str, path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(format!("{context} {}: {e}", path.display()))
}

/// Runs the command line `args` (program name first) against the given
/// output streams and returns the exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            // Collapse clap's first paragraph into the single diagnostic line.
            let text = e.to_string();
            let line = text
                .lines()
                .take_while(|l| !l.trim().is_empty())
                .map(str::trim)
                .collect::<Vec<_>>()
                .join(" ");
            let _ = writeln!(stderr, "error: {}", line.trim_start_matches("error: "));
            return 1;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.code()
        }
    }
}

/// Process entry point.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut err = std::io::stderr();
    let code = run_with(args, &mut out, &mut err);
    let _ = out.flush();
    code
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| runtime("cannot read config", path, e))?;
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| Failure::Validation(format!("config {}: {e}", path.display())))?;
            if !value.is_object() {
                return Err(Failure::Validation("config file must hold a JSON object".into()));
            }
            Some(value)
        }
        None => None,
    };
    // Output is buffered so the work closure can move into a thread pool.
    let work = move || -> CliResult<Vec<u8>> {
        let cfg = config.as_ref();
        let mut buf = Vec::new();
        match cli.command {
            Command::Simulate(a) => cmd_simulate(overlay(a, cfg)?, &mut buf),
            Command::Estimate(a) => cmd_estimate(overlay(a, cfg)?, &mut buf),
            Command::Classify(a) => cmd_classify(overlay(a, cfg)?, &mut buf),
            Command::LimitSample(a) => cmd_limit(overlay(a, cfg)?, &mut buf),
            Command::McCompare(a) => cmd_compare(overlay(a, cfg)?, &mut buf),
            Command::Moments(a) => cmd_moments(overlay(a, cfg)?, &mut buf),
        }?;
        Ok(buf)
    };
    let buf = match cli.threads {
        Some(0) => return Err(Failure::Validation("--threads must be at least 1".into())),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Failure::Runtime(format!("cannot start thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    stdout
        .write_all(&buf)
        .map_err(|e| Failure::Runtime(format!("cannot write to stdout: {e}")))
}

/// Replaces flag values by the matching keys of the config object.
fn overlay<T: Serialize + DeserializeOwned>(args: T, config: Option<&Value>) -> CliResult<T> {
    let Some(Value::Object(over)) = config else {
        return Ok(args);
    };
    let mut base = serde_json::to_value(&args).map_err(|e| Failure::Runtime(e.to_string()))?;
    let obj = base.as_object_mut().expect("argument structs serialize to objects");
    for (k, v) in over {
        obj.insert(k.clone(), v.clone());
    }
    serde_json::from_value(base).map_err(|e| Failure::Validation(format!("config: {e}")))
}

fn params(alpha: f64, beta: f64) -> CliResult<AutoregressiveParams> {
    Ok(AutoregressiveParams::new(alpha, beta)?)
}

fn innovation(spec: &str) -> CliResult<InnovationModel> {
    Ok(spec.parse::<InnovationModel>()?)
}

/// Runs `f` against the output file, or stdout when `out` is `None`.
fn emit(out: &Option<PathBuf>, stdout: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> crate::Result<()>) -> CliResult<()> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| runtime("cannot write", path, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w).map_err(|e| runtime("cannot write", path, e))?;
            w.flush().map_err(|e| runtime("cannot write", path, e))
        }
        None => f(stdout).map_err(Failure::from),
    }
}

fn write_json<T: Serialize>(value: &T, w: &mut dyn Write) -> crate::Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)?;
    Ok(())
}

fn cmd_simulate(a: SimulateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let p = params(a.alpha, a.beta)?;
    let eps = innovation(&a.innovation)?;
    let traj = simulate(&p, &eps, a.n, a.seed)?;
    emit(&a.out, stdout, |w| traj.write_csv(w))
}

fn cmd_estimate(a: EstimateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    if !a.mu.is_finite() {
        return Err(Failure::Validation(format!("--mu must be finite, got {}", a.mu)));
    }
    let file = File::open(&a.input).map_err(|e| runtime("cannot read", &a.input, e))?;
    let traj = Trajectory::read_csv(std::io::BufReader::new(file))?;
    let report = estimate_cls(&traj, a.mu).report();
    emit(&a.out, stdout, |w| match a.format {
        Format::Json => write_json(&report, w),
        Format::Csv => {
            let mut c = csv::Writer::from_writer(w);
            c.serialize(&report)?;
            c.flush()?;
            Ok(())
        }
    })
}

fn cmd_classify(a: ClassifyArgs, stdout: &mut dyn Write) -> CliResult<()> {
    #[derive(Serialize)]
    struct Out {
        alpha: f64,
        beta: f64,
        rho: f64,
        #[serde(flatten)]
        class: crate::process::ModelClass,
    }
    let p = params(a.alpha, a.beta)?;
    let out = Out { alpha: p.alpha(), beta: p.beta(), rho: p.rho(), class: classify(&p) };
    write_json(&out, stdout).map_err(Failure::from)
}

fn cmd_limit(a: LimitArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let p = params(a.alpha, a.beta)?;
    let eps = innovation(&a.innovation)?;
    if a.count == 0 {
        return Err(Failure::Validation("--count must be at least 1".into()));
    }
    let model = LimitModel::for_model(&p, &eps, a.mesh)?;
    let law = match a.law {
        LawArg::Rho => LimitLaw::Rho,
        LawArg::Ab => LimitLaw::AlphaBeta,
    };
    let batch = sample_limit_batch(&model, law, a.count, a.seed, true)?;
    emit(&a.out, stdout, |w| match a.format {
        Format::Csv => write_limit_csv(&batch.samples, w),
        Format::Json => write_json(&batch.samples, w),
    })
}

fn cmd_compare(a: CompareArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let p = params(a.alpha, a.beta)?;
    let eps = innovation(&a.innovation)?;
    let expected = match a.case {
        CaseArg::Auto => None,
        CaseArg::PositivelyRegular => Some(Regularity::PositivelyRegular),
        CaseArg::Decomposable => Some(Regularity::Decomposable),
        CaseArg::Indecomposable => Some(Regularity::Indecomposable),
    };
    let actual = p.class().regularity;
    if let Some(e) = expected {
        if e != actual {
            return Err(Failure::Validation(format!(
                "--case {} does not match parameters, which are {}",
                e.as_str(),
                actual.as_str()
            )));
        }
    }
    let mut config = CampaignConfig::new(p, eps, a.n, a.reps, a.seed);
    config.mesh = a.mesh;
    config.limit_replications = a.limit_reps;
    config.validate()?;
    let outcome = run_campaign(&config)?;
    if let Some(path) = &a.samples {
        emit(&Some(path.clone()), stdout, |w| write_samples_csv(&outcome.samples, w))?;
    }
    emit(&a.out, stdout, |w| write_json(&outcome.report, w))
}

fn cmd_moments(a: MomentsArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let p = params(a.alpha, a.beta)?;
    let eps = innovation(&a.innovation)?;
    let table = exact_joint_moments(&p, &eps, a.n, a.order)?;
    emit(&a.out, stdout, |w| match a.format {
        Format::Csv => table.write_csv(w),
        Format::Json => write_json(&table, w),
    })
}
