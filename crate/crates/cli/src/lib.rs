//! Command-line harness: run experiments, sweep horizons, check the
//! inequalities the method relies on, and recompute stationarity along stored
//! trajectories.

mod config;
mod diagnose;
mod run;
mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use proxsmooth::approximations::ApproxKind;
use proxsmooth::driver::ScheduleKind;
use proxsmooth::experiment::{Algorithm, ExperimentSpec};
use proxsmooth::models::ModelFamily;
use proxsmooth::problems::{get_problem, ProblemBundle};

pub use config::{config_tokens, expand_config};

/// Exit status for an invalid configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for a solver failure during a run.
pub const EXIT_SOLVER: i32 = 3;
/// Exit status when `verify` finds a violated check.
pub const EXIT_VERIFY: i32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(#[from] proxsmooth::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0} checks failed")]
    VerifyFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Solver(_) | CliError::Io(_) => EXIT_SOLVER,
            CliError::VerifyFailed(_) => EXIT_VERIFY,
        }
    }
}

fn config_error(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "proxsmooth", version, about = "Stochastic model-based minimization over proximally smooth sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one configuration for each seed and write trajectories plus a summary.
    #[command(args_override_self = true)]
    Run(Options),
    /// Run one configuration for several horizons and summarize the mean C² per T.
    #[command(args_override_self = true)]
    Sweep(Options),
    /// Check the inequalities the guarantees rest on, across registered problems.
    #[command(args_override_self = true)]
    Verify(Options),
    /// Recompute the stationarity measure along a stored trajectory.
    #[command(args_override_self = true)]
    Diagnose(Options),
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Problem id: quartic1d, sphere-phase or parabolas2d.
    #[arg(long)]
    pub problem: Option<String>,
    /// 1 steps over the constraint set, 2 over a local approximation followed
    /// by a retraction.
    #[arg(long)]
    pub alg: Option<Algorithm>,
    /// Model family: proxpoint, subgrad, clipped or proxlin.
    #[arg(long)]
    pub model: Option<ModelFamily>,
    /// Set approximation for --alg 2: identity, tangent, inner-exact or inner-linear.
    #[arg(long)]
    pub approx: Option<ApproxKind>,
    /// Horizon: iterations 0..=T are taken.
    #[arg(short = 'T', long = "T")]
    pub horizon: Option<usize>,
    /// Seeds: a count N (seeds 0..N), a range a..b, or a list a,b,c (`5,` is seed 5).
    #[arg(long)]
    pub seeds: Option<String>,
    /// Stepsize schedule: thm41 (constant), thm61 (square root) or custom.
    #[arg(long)]
    pub schedule: Option<ScheduleKind>,
    /// Square-root schedule scale.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Override of the initial gap Δ.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat key=value file with the same keys as the long flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Explicit betas for --schedule custom: one value, or T+1 comma-separated.
    #[arg(long)]
    pub betas: Option<String>,
    /// Horizons for sweep, comma-separated.
    #[arg(long = "Ts")]
    pub horizons: Option<String>,
    /// Restrict verify to one check.
    #[arg(long)]
    pub check: Option<verify::CheckKind>,
    /// Trajectory CSV for diagnose.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    /// Evaluate every k-th iterate when estimating stationarity.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Multiply the declared Lipschitz constant, e.g. to see verify fail.
    #[arg(long = "lipschitz-scale")]
    pub lipschitz_scale: Option<f64>,
}

pub const DEFAULT_PROBLEM: &str = "quartic1d";
pub const DEFAULT_HORIZON: usize = 100;
pub const DEFAULT_SWEEP: [usize; 3] = [100, 1000, 10_000];

impl Options {
    pub fn problem_id(&self) -> &str {
        self.problem.as_deref().unwrap_or(DEFAULT_PROBLEM)
    }

    pub fn bundle(&self, id: &str) -> Result<ProblemBundle, CliError> {
        let bundle = get_problem(id).map_err(config_error)?;
        Ok(match self.lipschitz_scale {
            Some(s) if !(s > 0.0 && s.is_finite()) => {
                return Err(CliError::Config(format!("lipschitz-scale = {s}")))
            }
            Some(s) => bundle.with_scaled_lipschitz(s),
            None => bundle,
        })
    }

    pub fn seeds(&self) -> Result<Vec<u64>, CliError> {
        parse_seeds(self.seeds.as_deref().unwrap_or("1"))
    }

    pub fn spec(&self, horizon: usize) -> Result<ExperimentSpec, CliError> {
        let alg = self.alg.unwrap_or(Algorithm::Plain);
        if alg == Algorithm::Retracted && self.approx.is_none() {
            return Err(CliError::Config("--alg 2 requires --approx".into()));
        }
        let mut spec = ExperimentSpec::new(alg, self.model.unwrap_or(ModelFamily::Subgradient), horizon);
        spec.approx = self.approx;
        if let Some(s) = self.schedule {
            spec.schedule = s;
        }
        spec.alpha = self.alpha;
        spec.delta = self.delta;
        spec.betas = self.betas.as_deref().map(parse_floats).transpose()?;
        match (spec.schedule, &spec.betas) {
            (ScheduleKind::Custom, None) => {
                return Err(CliError::Config("--schedule custom requires --betas".into()))
            }
            (ScheduleKind::Custom, Some(_)) | (_, None) => {}
            (_, Some(_)) => {
                return Err(CliError::Config("--betas needs --schedule custom".into()))
            }
        }
        Ok(spec)
    }

    pub fn horizons(&self) -> Result<Vec<usize>, CliError> {
        match &self.horizons {
            None => Ok(DEFAULT_SWEEP.to_vec()),
            Some(s) => s
                .split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|e| CliError::Config(format!("--Ts {t:?}: {e}"))))
                .collect(),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

pub fn parse_seeds(s: &str) -> Result<Vec<u64>, CliError> {
    let bad = |e: &dyn std::fmt::Display| CliError::Config(format!("--seeds {s:?}: {e}"));
    let s = s.trim();
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|e| bad(&e))?;
        let b: u64 = b.trim().parse().map_err(|e| bad(&e))?;
        (a..b).collect()
    } else if s.contains(',') {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<u64>().map_err(|e| bad(&e)))
            .collect::<Result<_, _>>()?
    } else {
        let n: u64 = s.parse().map_err(|e| bad(&e))?;
        (0..n).collect()
    };
    if seeds.is_empty() {
        return Err(bad(&"no seeds"));
    }
    Ok(seeds)
}

fn parse_floats(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| CliError::Config(format!("{t:?}: {e}"))))
        .collect()
}

/// Worker pool capped by `PROXSMOOTH_THREADS` when set.
fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("PROXSMOOTH_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|e| CliError::Config(format!("PROXSMOOTH_THREADS={v:?}: {e}")))?;
        builder = builder.num_threads(n.max(1));
    }
    builder.build().map_err(config_error)
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let pool = thread_pool()?;
    pool.install(|| match cli.command {
        Command::Run(o) => run::cmd_run(&o),
        Command::Sweep(o) => run::cmd_sweep(&o),
        Command::Verify(o) => verify::cmd_verify(&o),
        Command::Diagnose(o) => diagnose::cmd_diagnose(&o),
    })
}

/// Parses `argv` (program name first), runs the command and returns the exit
/// status. Errors go to stderr.
pub fn main_with_args(argv: Vec<OsString>) -> i32 {
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("proxsmooth: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("proxsmooth: {e}");
            e.exit_code()
        }
    }
}
