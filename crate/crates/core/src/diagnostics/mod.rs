//! Brute-force Moreau envelope and stationarity oracles, and checkers for
//! the inequalities the convergence analysis relies on.

mod checks;
mod sphere;

pub use checks::{
    check_one_step_alg1, check_one_step_alg2, check_prox_point_bound, check_three_point,
    expected_stationarity_sq, OneStepCheck, StationarityEstimate,
};

use crate::error::{Error, Result};
use crate::geometry::{ProxSmoothSet, CONTAINS_TOL};
use crate::models::StochasticObjective;
use crate::vector::{dist_sq, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMethod {
    Grid1D,
    Grid2D,
    MultiStartSphere,
}

impl OracleMethod {
    pub fn name(self) -> &'static str {
        match self {
            OracleMethod::Grid1D => "grid1d",
            OracleMethod::Grid2D => "grid2d",
            OracleMethod::MultiStartSphere => "multistart-sphere",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProxOracleConfig {
    pub method: OracleMethod,
    /// Grid spacing `h`.
    pub resolution: f64,
    /// Number of starts for the sphere oracle.
    pub starts: usize,
    /// Iterations per start for the sphere oracle.
    pub iterations: usize,
}

impl ProxOracleConfig {
    pub fn grid1d(h: f64) -> Self {
        ProxOracleConfig {
            method: OracleMethod::Grid1D,
            resolution: h,
            starts: 0,
            iterations: 0,
        }
    }

    pub fn grid2d(h: f64) -> Self {
        ProxOracleConfig {
            method: OracleMethod::Grid2D,
            resolution: h,
            starts: 0,
            iterations: 0,
        }
    }

    pub fn multistart_sphere(starts: usize) -> Self {
        ProxOracleConfig {
            method: OracleMethod::MultiStartSphere,
            resolution: 0.0,
            starts,
            iterations: 3000,
        }
    }
}

/// Oracle output for `min_{y∈X} f(y) + ‖y − x‖²/(2λ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProxEstimate {
    /// `M_λ(x)` up to `envelope_error`.
    pub envelope: f64,
    /// A minimizer `ŷ ∈ P_λ(x)` up to `point_error`.
    pub point: Vector,
    pub envelope_error: f64,
    pub point_error: f64,
    /// False when the errors are heuristic estimates rather than bounds.
    pub certified: bool,
}

/// `λ⁻¹‖x − ŷ‖` with its error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stationarity {
    pub value: f64,
    pub error: f64,
    pub certified: bool,
}

fn prox_objective<'a>(
    objective: &'a StochasticObjective,
    lambda: f64,
    x: &'a [f64],
) -> impl Fn(&[f64]) -> f64 + 'a {
    move |y: &[f64]| objective.value(y) + dist_sq(y, x) / (2.0 * lambda)
}

/// Moreau envelope value and proximal point of `f` over `X` at `x`.
pub fn moreau_prox(
    objective: &StochasticObjective,
    set: &ProxSmoothSet,
    lambda: f64,
    x: &[f64],
    cfg: &ProxOracleConfig,
) -> Result<ProxEstimate> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidConstants(format!("lambda = {lambda}")));
    }
    match cfg.method {
        OracleMethod::Grid1D => grid_1d(objective, set, lambda, x, cfg.resolution),
        OracleMethod::Grid2D => grid_2d(objective, set, lambda, x, cfg.resolution),
        OracleMethod::MultiStartSphere => sphere::multistart(objective, set, lambda, x, cfg),
    }
}

/// `C_λ(x) = λ⁻¹ dist(x, P_λ(x))`.
pub fn stationarity(
    objective: &StochasticObjective,
    set: &ProxSmoothSet,
    lambda: f64,
    x: &[f64],
    cfg: &ProxOracleConfig,
) -> Result<Stationarity> {
    let p = moreau_prox(objective, set, lambda, x, cfg)?;
    Ok(Stationarity {
        value: p.point.dist(x) / lambda,
        error: p.point_error / lambda,
        certified: p.certified,
    })
}

const ZOOM_POINTS: usize = 1000;
const MAX_GRID_POINTS: usize = 50_000_000;

fn interval_of(set: &ProxSmoothSet) -> Result<(f64, f64)> {
    if set.dim() != 1 {
        return Err(Error::UnsupportedDimension(set.dim()));
    }
    let (lo, hi) = set
        .bounding_box()
        .ok_or_else(|| Error::Unsupported("grid oracle needs a bounded set".into()))?;
    Ok((lo[0], hi[0]))
}

fn scan_1d(phi: &dyn Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> (f64, f64, f64) {
    let step = (hi - lo) / n as f64;
    let mut best = (f64::INFINITY, lo);
    for i in 0..=n {
        let y = if i == n { hi } else { lo + i as f64 * step };
        let v = phi(y);
        if v < best.0 {
            best = (v, y);
        }
    }
    (best.1, best.0, step)
}

/// One-dimensional grid oracle over an interval.
///
/// When `1/λ` exceeds the weak convexity of `f` the prox objective is
/// strongly convex, the true minimizer lies within one spacing of the grid
/// argmin, and the grid is refined around it until the spacing is at most
/// `h`. Otherwise the whole interval is scanned at spacing `h`.
fn grid_1d(
    objective: &StochasticObjective,
    set: &ProxSmoothSet,
    lambda: f64,
    x: &[f64],
    h: f64,
) -> Result<ProxEstimate> {
    let (lo, hi) = interval_of(set)?;
    if !(h > 0.0) {
        return Err(Error::InvalidConstants(format!("resolution = {h}")));
    }
    let f = prox_objective(objective, lambda, x);
    let phi = |y: f64| f(&[y]);
    let l = objective.constants().lipschitz;
    let convex = 1.0 / lambda > objective.constants().weak_convexity;
    let (y, v, step) = if convex {
        let (mut a, mut b) = (lo, hi);
        loop {
            let (y, v, step) = scan_1d(&phi, a, b, ZOOM_POINTS);
            if step <= h || b - a == 0.0 {
                break (y, v, step);
            }
            a = (y - step).max(lo);
            b = (y + step).min(hi);
        }
    } else {
        let n = ((hi - lo) / h).ceil() as usize;
        if n > MAX_GRID_POINTS {
            return Err(Error::Unsupported(format!("{n} grid points")));
        }
        scan_1d(&phi, lo, hi, n.max(1))
    };
    let slope = l + ((y - x[0]).abs() + step) / lambda;
    Ok(ProxEstimate {
        envelope: v,
        point: Vector::from([y]),
        envelope_error: slope * step + step * step / (2.0 * lambda),
        point_error: step,
        certified: convex,
    })
}

/// Two-dimensional exhaustive grid over `B(x, 2Lλ)` intersected with the
/// bounding box of `X`, keeping only feasible grid points.
fn grid_2d(
    objective: &StochasticObjective,
    set: &ProxSmoothSet,
    lambda: f64,
    x: &[f64],
    h: f64,
) -> Result<ProxEstimate> {
    if set.dim() != 2 {
        return Err(Error::UnsupportedDimension(set.dim()));
    }
    let (lo, hi) = set
        .bounding_box()
        .ok_or_else(|| Error::Unsupported("grid oracle needs a bounded set".into()))?;
    let l = objective.constants().lipschitz;
    let r = 2.0 * l * lambda + h;
    let a = [(x[0] - r).max(lo[0]), (x[1] - r).max(lo[1])];
    let b = [(x[0] + r).min(hi[0]), (x[1] + r).min(hi[1])];
    let nx = ((b[0] - a[0]) / h).ceil() as usize;
    let ny = ((b[1] - a[1]) / h).ceil() as usize;
    if (nx + 1) * (ny + 1) > MAX_GRID_POINTS {
        return Err(Error::Unsupported(format!("{} grid points", (nx + 1) * (ny + 1))));
    }
    let phi = prox_objective(objective, lambda, x);
    let mut best = (phi(x), Vector::from(x));
    for i in 0..=nx {
        let u = (a[0] + i as f64 * h).min(b[0]);
        for j in 0..=ny {
            let y = [u, (a[1] + j as f64 * h).min(b[1])];
            if dist_sq(&y, x) > r * r || !set.contains(&y, 0.0) {
                continue;
            }
            let v = phi(&y);
            if v < best.0 {
                best = (v, Vector::from(y));
            }
        }
    }
    debug_assert!(set.contains(&best.1, CONTAINS_TOL));
    let diag = h * std::f64::consts::FRAC_1_SQRT_2;
    let slope = l + (best.1.dist(x) + diag) / lambda;
    Ok(ProxEstimate {
        envelope: best.0,
        point: best.1,
        envelope_error: slope * diag + diag * diag / (2.0 * lambda),
        point_error: diag,
        certified: false,
    })
}
