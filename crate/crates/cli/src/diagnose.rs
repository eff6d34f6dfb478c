//! `diagnose`: stationarity along a stored trajectory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use proxsmooth::diagnostics::stationarity;
use proxsmooth::driver::csv::{float, parse_iterates, TRAJECTORY_HEADER};

use crate::{run::experiment, CliError, Options};

pub const DIAGNOSE_COLUMNS: &str = "C_lambda_est,oracle_err";

/// The file written next to `trajectory`, or into `out` when given.
pub fn companion(trajectory: &Path, from: &str, to: &str, out: Option<&Path>) -> PathBuf {
    let name = trajectory
        .file_name()
        .map(|n| n.to_string_lossy().replacen(from, to, 1))
        .unwrap_or_else(|| to.to_string());
    match out {
        Some(dir) => dir.join(name),
        None => trajectory.with_file_name(name),
    }
}

/// `(problem id, λ)` recorded by `run` next to the trajectory.
fn recorded_run(dir: &Path) -> Option<(String, f64)> {
    let text = fs::read_to_string(dir.join("problem.toml")).ok()?;
    let table: toml::Table = text.parse().ok()?;
    let id = table.get("problem")?.get("id")?.as_str()?.to_string();
    let lambda = table.get("run")?.get("lambda")?.as_float()?;
    Some((id, lambda))
}

fn read(path: &Path, what: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {what} {}: {e}", path.display())))
}

pub fn cmd_diagnose(o: &Options) -> Result<(), CliError> {
    let path = o
        .trajectory
        .as_deref()
        .ok_or_else(|| CliError::Config("diagnose requires --trajectory".into()))?;
    let text = read(path, "trajectory")?;
    let iterates_path = companion(path, "trajectory", "iterates", None);
    let iterates = parse_iterates(&read(&iterates_path, "iterates")?).map_err(CliError::Config)?;
    let mut lines = text.lines();
    if lines.next() != Some(TRAJECTORY_HEADER) {
        return Err(CliError::Config(format!("{} is not a trajectory file", path.display())));
    }
    let rows: Vec<&str> = lines.filter(|l| !l.is_empty()).collect();
    if rows.len() + 1 != iterates.len() {
        return Err(CliError::Config(format!(
            "{} rows but {} iterates",
            rows.len(),
            iterates.len()
        )));
    }

    let dir = path.parent().unwrap_or(Path::new("."));
    let (id, lambda) = match recorded_run(dir) {
        Some((id, lambda)) if o.problem.is_none() => (id, lambda),
        _ => {
            let e = experiment(o, rows.len().saturating_sub(1))?;
            (e.bundle.id.clone(), e.lambda())
        }
    };
    let bundle = o.bundle(&id)?;
    let stride = o.stride.unwrap_or((rows.len() / 100).max(1)).max(1);
    let picked: Vec<usize> = (0..rows.len()).step_by(stride).collect();
    let values = picked
        .par_iter()
        .map(|&t| stationarity(&bundle.objective, &bundle.set, lambda, &iterates[t], &bundle.oracle))
        .collect::<Result<Vec<_>, _>>()?;

    let mut out = format!("{TRAJECTORY_HEADER},{DIAGNOSE_COLUMNS}\n");
    for (&t, s) in picked.iter().zip(&values) {
        let _ = writeln!(out, "{},{},{}", rows[t], float(s.value), float(s.error));
    }
    if let Some(dir) = &o.out {
        fs::create_dir_all(dir)?;
    }
    let target = companion(path, "trajectory", "diagnose", o.out.as_deref());
    fs::write(&target, out)?;
    println!("{} points of {} written to {}", picked.len(), path.display(), target.display());
    Ok(())
}
