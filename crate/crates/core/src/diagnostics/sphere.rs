//! Multistart proximal oracle on the unit sphere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{prox_objective, ProxEstimate, ProxOracleConfig};
use crate::error::{Error, Result};
use crate::geometry::sampling::sample_near;
use crate::geometry::ProxSmoothSet;
use crate::models::StochasticObjective;
use crate::vector::{dot, Vector};

/// Final step size relative to the first one.
const STEP_DECAY: f64 = 1e-10;
/// Starts whose values agree with the best to this relative accuracy count
/// towards the reported spread.
const AGREEMENT: f64 = 1e-9;
const START_SEED: u64 = 0x5eed;

/// Normalized Riemannian subgradient descent, with step lengths decaying
/// geometrically from `2Lλ` to `1e-10·2Lλ`, started from
/// `x` and from random points of `B(x, 2Lλ)` on the sphere. The best value
/// wins.
///
/// This is a heuristic: it can miss the global minimizer and so can only
/// under-report `C_λ`. The reported point error is the spread of the
/// starts that reach the best value.
pub(super) fn multistart(
    objective: &StochasticObjective,
    set: &ProxSmoothSet,
    lambda: f64,
    x: &[f64],
    cfg: &ProxOracleConfig,
) -> Result<ProxEstimate> {
    if !matches!(set, ProxSmoothSet::UnitSphere(_)) {
        return Err(Error::Unsupported("multistart oracle needs the unit sphere".into()));
    }
    let l = objective.constants().lipschitz;
    let radius = (2.0 * l * lambda).min(2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut starts = vec![Vector::from(x)];
    while starts.len() < cfg.starts.max(1) {
        starts.push(sample_near(set, x, radius, &mut rng));
    }
    let phi = prox_objective(objective, lambda, x);
    let runs: Vec<(f64, Vector)> = starts
        .par_iter()
        .map(|y0| descend(objective, lambda, x, y0, radius, cfg.iterations, &phi))
        .collect();
    let best = runs
        .iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .cloned()
        .expect("at least one start");
    let spread = runs
        .iter()
        .filter(|r| r.0 - best.0 <= AGREEMENT * (1.0 + best.0.abs()))
        .map(|r| r.1.dist(&best.1))
        .fold(0.0, f64::max);
    Ok(ProxEstimate {
        envelope: best.0,
        point: best.1,
        envelope_error: 0.0,
        point_error: spread,
        certified: false,
    })
}

fn descend(
    objective: &StochasticObjective,
    lambda: f64,
    x: &[f64],
    y0: &Vector,
    radius: f64,
    iterations: usize,
    phi: &dyn Fn(&[f64]) -> f64,
) -> (f64, Vector) {
    let mut y = y0.clone();
    let mut best = (phi(&y), y.clone());
    let q = STEP_DECAY.powf(1.0 / iterations.max(1) as f64);
    let mut s = radius;
    for _ in 0..iterations {
        let mut g = objective.mean_subgradient(&y);
        g.axpy(1.0 / lambda, &y.sub(x));
        let radial = dot(&g, &y);
        g.axpy(-radial, &y);
        let n = g.norm();
        if n == 0.0 {
            break;
        }
        let z = y.add_scaled(-s / n, &g);
        y = z.scale(1.0 / z.norm());
        let v = phi(&y);
        if v < best.0 {
            best = (v, y.clone());
        }
        s *= q;
    }
    best
}
