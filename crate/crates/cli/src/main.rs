//! `shiftspec`: predicted spectra of shift, multiplier and Toeplitz
//! operators on weighted sequence spaces, with numerical verification.

mod config;
mod emit;
mod run;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::{resolve, ExperimentConfig, Task};
use emit::{emit, Format, Report};

#[derive(Debug)]
pub enum CliError {
    /// Exit code 2.
    Config(String),
    /// Exit code 3.
    Hypothesis(String),
    /// Exit code 4.
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Hypothesis(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Hypothesis(m) => write!(f, "hypothesis violated: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<shiftspec::Error> for CliError {
    fn from(e: shiftspec::Error) -> Self {
        use shiftspec::Error::*;
        match e {
            Hypothesis(_) | Precondition(_) | Pole { .. } => CliError::Hypothesis(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

const CHECK_FAILURE: u8 = 5;

#[derive(Debug, Parser)]
#[command(name = "shiftspec", version, about = "Spectra of weighted shifts, multipliers and Toeplitz operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; JSON goes to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for randomized test families; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Spectral radii and boundedness of the shifts.
    Radius,
    /// Predicted spectrum of the configured operator.
    Predict,
    /// Witnesses or certificates for each λ.
    Verify,
    /// Joint region and multiplier spectrum on ℤᵏ.
    Joint,
    /// Inner Toeplitz prediction against outside certificates on a λ grid.
    ConjectureGap,
    /// Built-in closed-form checks.
    Selftest,
}

impl From<Command> for Task {
    fn from(c: Command) -> Self {
        match c {
            Command::Radius => Task::Radius,
            Command::Predict => Task::Predict,
            Command::Verify => Task::Verify,
            Command::Joint => Task::Joint,
            Command::ConjectureGap => Task::ConjectureGap,
            Command::Selftest => Task::Selftest,
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let task = Task::from(cli.command);
    let start = Instant::now();
    let mut config = match (&cli.config, task) {
        (Some(path), _) => Some(ExperimentConfig::load(path)?),
        (None, Task::Selftest) => None,
        (None, _) => return Err(CliError::Config(format!("task {} needs --config", task.name()))),
    };
    if let (Some(c), Some(seed)) = (config.as_mut(), cli.seed) {
        c.seed = Some(seed);
    }
    let (result, checks) = match &config {
        Some(c) => run::run(task, &resolve(c, task)?)?,
        None => (run::TaskResult::Selftest, selftest::run()),
    };
    if let Some(c) = config.as_mut() {
        c.task = Some(task);
    }
    let passed = checks.iter().all(|c| c.passed);
    let report = Report {
        tool: "shiftspec",
        version: env!("CARGO_PKG_VERSION"),
        task,
        config,
        result,
        checks,
        passed,
        timing_ms: start.elapsed().as_millis(),
    };
    emit(&report, cli.format, cli.out.as_deref())?;
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("check failed: {}: {}", c.name, c.detail);
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(CHECK_FAILURE),
        Err(e) => {
            eprintln!("shiftspec: {e}");
            ExitCode::from(e.code())
        }
    }
}
