//! `run` and `sweep`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use proxsmooth::driver::csv::{float, iterates_csv, trajectory_csv};
use proxsmooth::experiment::Experiment;
use proxsmooth::problems::ProblemMetadata;

use crate::{config_error, CliError, Options, DEFAULT_HORIZON};

pub const SUMMARY_HEADER: &str = "seed,t_star,C_lambda_sq_est,bound_rhs";
pub const SWEEP_HEADER: &str = "T,seeds,mean_C_lambda_sq_est,bound_rhs";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub seed: u64,
    pub t_star: usize,
    /// `C_λ(x_{t*})²` from the problem's oracle.
    pub c_sq: f64,
    pub bound: f64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    problem: ProblemMetadata,
    run: RunSettings<'a>,
}

#[derive(Serialize)]
struct RunSettings<'a> {
    alg: u8,
    model: &'a str,
    approx: &'a str,
    schedule: &'a str,
    horizon: usize,
    seeds: &'a [u64],
    alpha: Option<f64>,
    delta: f64,
    gamma: f64,
    rho_bar: f64,
    lambda: f64,
    bound_rhs: f64,
}

pub fn experiment(o: &Options, horizon: usize) -> Result<Experiment, CliError> {
    let bundle = o.bundle(o.problem_id())?;
    Experiment::new(bundle, o.spec(horizon)?).map_err(config_error)
}

fn write_manifest(e: &Experiment, seeds: &[u64], dir: &Path) -> Result<(), CliError> {
    let manifest = Manifest {
        problem: e.bundle.metadata(),
        run: RunSettings {
            alg: e.spec.algorithm.number(),
            model: e.spec.family.name(),
            approx: e.approx.as_ref().map_or("none", |a| a.name()),
            schedule: e.schedule.kind().name(),
            horizon: e.spec.horizon,
            seeds,
            alpha: e.constants.alpha,
            delta: e.constants.delta,
            gamma: e.schedule.gamma(),
            rho_bar: e.schedule.rho_bar(),
            lambda: e.lambda(),
            bound_rhs: e.bound,
        },
    };
    let text = toml::to_string(&manifest).map_err(|err| CliError::Config(err.to_string()))?;
    fs::write(dir.join("problem.toml"), text)?;
    Ok(())
}

/// Runs every seed in parallel, each worker writing its own trajectory and
/// iterates files, then writes the summary once all have finished.
pub fn run_seeds(e: &Experiment, seeds: &[u64], dir: &Path) -> Result<Vec<SummaryRow>, CliError> {
    fs::create_dir_all(dir)?;
    write_manifest(e, seeds, dir)?;
    let rows: Vec<SummaryRow> = seeds
        .par_iter()
        .map(|&seed| {
            let log = e.run(seed)?;
            fs::write(dir.join(format!("trajectory_seed{seed}.csv")), trajectory_csv(&log))?;
            fs::write(dir.join(format!("iterates_seed{seed}.csv")), iterates_csv(&log))?;
            let c = e.stationarity(&log.iterates[log.t_star])?.value;
            Ok(SummaryRow {
                seed,
                t_star: log.t_star,
                c_sq: c * c,
                bound: e.bound,
            })
        })
        .collect::<Result<_, CliError>>()?;
    let mut text = String::from(SUMMARY_HEADER);
    text.push('\n');
    for r in &rows {
        let _ = writeln!(text, "{},{},{},{}", r.seed, r.t_star, float(r.c_sq), float(r.bound));
    }
    fs::write(dir.join("summary.csv"), text)?;
    Ok(rows)
}

pub fn cmd_run(o: &Options) -> Result<(), CliError> {
    let e = experiment(o, o.horizon.unwrap_or(DEFAULT_HORIZON))?;
    let seeds = o.seeds()?;
    let dir = o.out_dir();
    let rows = run_seeds(&e, &seeds, &dir)?;
    let mean = rows.iter().map(|r| r.c_sq).sum::<f64>() / rows.len() as f64;
    println!(
        "{} seeds of {} (alg {}, T={}): mean C² {mean:.6e}, bound {:.6e}; output in {}",
        rows.len(),
        e.bundle.id,
        e.spec.algorithm,
        e.spec.horizon,
        e.bound,
        dir.display()
    );
    Ok(())
}

pub fn cmd_sweep(o: &Options) -> Result<(), CliError> {
    let horizons = o.horizons()?;
    let seeds = o.seeds()?;
    let dir = o.out_dir();
    // Validate every horizon before running any.
    let experiments = horizons
        .iter()
        .map(|&t| experiment(o, t))
        .collect::<Result<Vec<_>, _>>()?;
    let mut text = String::from(SWEEP_HEADER);
    text.push('\n');
    for e in &experiments {
        let rows = run_seeds(e, &seeds, &dir.join(format!("T{}", e.spec.horizon)))?;
        let mean = rows.iter().map(|r| r.c_sq).sum::<f64>() / rows.len() as f64;
        let _ = writeln!(text, "{},{},{},{}", e.spec.horizon, rows.len(), float(mean), float(e.bound));
        println!("T={}: mean C² {mean:.6e}, bound {:.6e}", e.spec.horizon, e.bound);
    }
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("sweep.csv"), text)?;
    Ok(())
}
