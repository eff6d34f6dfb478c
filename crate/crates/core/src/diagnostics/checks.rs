//! Inequality checkers. Each returns a violation: positive means the
//! inequality failed by that much.

use rand::Rng;
use rayon::prelude::*;

use super::{stationarity, ProxEstimate, ProxOracleConfig};
use crate::approximations::SetApproximation;
use crate::driver::{plain_step, retracted_step, retraction_coefficient, RunLog, TheoremConstants};
use crate::error::{Error, Result};
use crate::geometry::sampling::sample_near;
use crate::geometry::ProxSmoothSet;
use crate::models::{Model, ModelFamily, StochasticObjective};
use crate::subsolver::{solve, SubproblemSpec};
use crate::vector::{dist_sq, Vector};

/// `‖β(x − x̃)‖ − 2L`.
pub fn check_prox_point_bound(x: &[f64], x_tilde: &[f64], lipschitz: f64, beta: f64) -> f64 {
    beta * dist_sq(x, x_tilde).sqrt() - 2.0 * lipschitz
}

/// Largest violation of the three-point inequality
/// `f(y) − f(x̃) ≥ ((β−ρ−3L/R)/2)‖y−x̃‖² + (β/2)‖x−x̃‖² − (β/2)‖y−x‖²`
/// over `y = x̃`, `y = x` and `samples` random points of `X`, where `f` is
/// the model and `x̃` its subproblem solution at `x`.
#[allow(clippy::too_many_arguments)]
pub fn check_three_point<R: Rng + ?Sized>(
    model: &Model,
    set: &ProxSmoothSet,
    beta: f64,
    rho: f64,
    lipschitz: f64,
    radius: f64,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    let curvature = if radius.is_infinite() { 0.0 } else { 3.0 * lipschitz / radius };
    if !(beta > rho + curvature) {
        return Err(Error::InvalidConstants(format!(
            "beta = {beta} must exceed rho + 3L/R = {}",
            rho + curvature
        )));
    }
    let x = model.base().clone();
    let tilde = solve(&SubproblemSpec::new(model, set, beta))?.point;
    let c = 0.5 * (beta - rho - curvature);
    let f_tilde = model.value(&tilde);
    let base = 0.5 * beta * dist_sq(&x, &tilde);
    let violation = |y: &[f64]| {
        let rhs = c * dist_sq(y, &tilde) + base - 0.5 * beta * dist_sq(y, &x);
        rhs - (model.value(y) - f_tilde)
    };
    let reach = match set.bounding_box() {
        Some((lo, hi)) => lo.dist(&hi),
        None => 2.0,
    };
    let mut worst = violation(&tilde).max(violation(&x));
    for _ in 0..samples {
        let y = sample_near(set, &x, reach, rng);
        worst = worst.max(violation(&y));
    }
    Ok(worst)
}

/// Both sides of a one-step improvement inequality evaluated with the exact
/// conditional expectation over the finite support.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OneStepCheck {
    /// `E‖x̂ − x₊‖²`.
    pub lhs: f64,
    pub rhs: f64,
    /// How much the proximal oracle's point error can move `lhs − rhs`.
    pub allowance: f64,
}

impl OneStepCheck {
    pub fn violation(&self) -> f64 {
        self.lhs - self.rhs
    }
}

fn one_step<F>(
    objective: &StochasticObjective,
    x: &[f64],
    prox: &ProxEstimate,
    coefficient: f64,
    constant: f64,
    mut step: F,
) -> Result<OneStepCheck>
where
    F: FnMut(usize) -> Result<Vector>,
{
    let hat = &prox.point;
    let delta = prox.point_error;
    let mut lhs = 0.0;
    let mut allowance = 0.0;
    for xi in 0..objective.num_samples() {
        let p = objective.probability(xi);
        let next = step(xi)?;
        let d = hat.dist(&next);
        lhs += p * d * d;
        allowance += p * delta * (2.0 * d + delta);
    }
    let d = hat.dist(x);
    allowance += coefficient.abs() * delta * (2.0 * d + delta);
    Ok(OneStepCheck {
        lhs,
        rhs: coefficient * d * d + constant,
        allowance,
    })
}

/// `E_t‖x̂ − x₊‖² ≤ ((β+μ−ρ̄)/(β−γ))‖x̂ − x‖² + L²/(β(β−γ))` for the
/// unretracted step, with `x̂` the proximal point of `f` at `x` for `λ = 1/ρ̄`.
#[allow(clippy::too_many_arguments)]
pub fn check_one_step_alg1(
    objective: &StochasticObjective,
    set: &ProxSmoothSet,
    family: ModelFamily,
    x: &[f64],
    beta: f64,
    gamma: f64,
    rho_bar: f64,
    prox: &ProxEstimate,
    tol: f64,
) -> Result<OneStepCheck> {
    if !(beta > gamma) {
        return Err(Error::InvalidWeights { gamma });
    }
    let c = objective.constants();
    let coefficient = (beta + c.accuracy - rho_bar) / (beta - gamma);
    let constant = c.lipschitz * c.lipschitz / (beta * (beta - gamma));
    one_step(objective, x, prox, coefficient, constant, |xi| {
        Ok(plain_step(objective, set, family, x, xi, beta, tol)?.1)
    })
}

/// `E_t‖x̂ − x₊‖² ≤ ((β+μ+3τ1L−ρ̄)/(β−γ))‖x − x̂‖² + L²a_t` for the retracted
/// step.
#[allow(clippy::too_many_arguments)]
pub fn check_one_step_alg2(
    objective: &StochasticObjective,
    approx: &SetApproximation,
    family: ModelFamily,
    x: &[f64],
    beta: f64,
    constants: &TheoremConstants,
    gamma: f64,
    rho_bar: f64,
    prox: &ProxEstimate,
    tol: f64,
) -> Result<OneStepCheck> {
    if !(beta > gamma) {
        return Err(Error::InvalidWeights { gamma });
    }
    let l = constants.lipschitz;
    let coefficient =
        (beta + constants.mu + 3.0 * constants.approx.tau1 * l - rho_bar) / (beta - gamma);
    let constant = l * l * retraction_coefficient(constants, beta, gamma, rho_bar);
    one_step(objective, x, prox, coefficient, constant, |xi| {
        Ok(retracted_step(objective, approx, family, x, xi, beta, tol)?.1)
    })
}

/// Estimates of `E[C_λ(x_{t*})²]` from one run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationarityEstimate {
    /// `Σ_t P(t* = t) C_λ(x_t)²` over the evaluated iterates, with the
    /// probabilities renormalized when iterates are thinned.
    pub averaged: f64,
    /// `C_λ(x_{t*})²` for the sampled output index.
    pub sampled: f64,
    /// Oracle error bounds on the two estimates.
    pub averaged_error: f64,
    pub sampled_error: f64,
    pub certified: bool,
}

/// Evaluates `C_λ` along a run at every `stride`-th iterate and at `t*`.
pub fn expected_stationarity_sq(
    objective: &StochasticObjective,
    set: &ProxSmoothSet,
    log: &RunLog,
    probabilities: &[f64],
    lambda: f64,
    cfg: &ProxOracleConfig,
    stride: usize,
) -> Result<StationarityEstimate> {
    let stride = stride.max(1);
    let mut indices: Vec<usize> = (0..probabilities.len()).step_by(stride).collect();
    if !indices.contains(&log.t_star) {
        indices.push(log.t_star);
    }
    let values: Vec<(usize, f64, f64, bool)> = indices
        .par_iter()
        .map(|&t| {
            stationarity(objective, set, lambda, &log.iterates[t], cfg)
                .map(|s| (t, s.value, s.error, s.certified))
        })
        .collect::<Result<_>>()?;
    let sq_err = |v: f64, e: f64| e * (2.0 * v + e);
    let grid: Vec<&(usize, f64, f64, bool)> =
        values.iter().filter(|v| v.0 % stride == 0).collect();
    let total: f64 = grid.iter().map(|v| probabilities[v.0]).sum();
    let averaged = grid.iter().map(|v| probabilities[v.0] * v.1 * v.1).sum::<f64>() / total;
    let averaged_error = grid
        .iter()
        .map(|v| probabilities[v.0] * sq_err(v.1, v.2))
        .sum::<f64>()
        / total;
    let star = values.iter().find(|v| v.0 == log.t_star).expect("t* evaluated");
    Ok(StationarityEstimate {
        averaged,
        sampled: star.1 * star.1,
        averaged_error,
        sampled_error: sq_err(star.1, star.2),
        certified: values.iter().all(|v| v.3),
    })
}
