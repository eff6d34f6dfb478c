//! Line-oriented CSV forms of a run log.
//!
//! Floats are printed with 17 significant digits so they round-trip.

use std::fmt::Write;

use super::RunLog;

pub const TRAJECTORY_HEADER: &str = "t,beta,f,dist_X,step_norm,xi_index";

pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per iteration `t = 0, …, T`.
pub fn trajectory_csv(log: &RunLog) -> String {
    let mut out = String::with_capacity(64 * (log.steps.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for (t, s) in log.steps.iter().enumerate() {
        let _ = writeln!(
            out,
            "{t},{},{},{},{},{}",
            float(s.beta),
            float(s.value),
            float(s.dist_to_set),
            float(s.step_norm),
            s.xi
        );
    }
    out
}

/// `t,x_0,…,x_{d−1}` for every iterate `x_0, …, x_{T+1}`.
pub fn iterates_csv(log: &RunLog) -> String {
    let d = log.iterates.first().map_or(0, |x| x.dim());
    let mut out = String::from("t");
    for j in 0..d {
        let _ = write!(out, ",x_{j}");
    }
    out.push('\n');
    for (t, x) in log.iterates.iter().enumerate() {
        let _ = write!(out, "{t}");
        for v in x.iter() {
            let _ = write!(out, ",{}", float(*v));
        }
        out.push('\n');
    }
    out
}

/// Parses the output of [`iterates_csv`].
pub fn parse_iterates(text: &str) -> Result<Vec<crate::Vector>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty iterates file")?;
    if !header.starts_with('t') {
        return Err(format!("unexpected header {header:?}"));
    }
    lines
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| {
            let mut cols = l.split(',');
            let t: usize = cols
                .next()
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| format!("bad row {l:?}"))?;
            if t != i {
                return Err(format!("row {i} has index {t}"));
            }
            cols.map(|c| c.parse::<f64>().map_err(|e| format!("{c:?}: {e}")))
                .collect::<Result<Vec<_>, _>>()
                .map(crate::Vector::from)
        })
        .collect()
}
