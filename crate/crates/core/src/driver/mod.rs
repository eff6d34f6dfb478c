//! The stochastic model-based algorithm and its retracted variant.

pub mod csv;
mod schedule;

pub use schedule::{
    general_bound_alg1, general_bound_alg2, retraction_coefficient, sample_tstar, theorem_bound,
    theorem_schedule, tstar_probabilities, ScheduleKind, StepSchedule, TheoremConstants,
};

use std::time::Instant;

use crate::approximations::SetApproximation;
use crate::error::{Error, Result};
use crate::geometry::{ProxSmoothSet, CONTAINS_TOL};
use crate::models::{Model, ModelFamily, StochasticObjective};
use crate::rng::{inverse_cdf, CounterRng, STREAM_SAMPLE};
use crate::subsolver::{solve, Certificate, SubproblemSpec, DEFAULT_TOL};
use crate::vector::Vector;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub family: ModelFamily,
    pub seed: u64,
    pub schedule: StepSchedule,
    pub x0: Vector,
    /// Subproblem tolerance.
    pub tol: f64,
}

impl RunConfig {
    pub fn new(family: ModelFamily, seed: u64, schedule: StepSchedule, x0: Vector) -> Self {
        RunConfig {
            family,
            seed,
            schedule,
            x0,
            tol: DEFAULT_TOL,
        }
    }

    /// `T`.
    pub fn horizon(&self) -> usize {
        self.schedule.horizon()
    }
}

/// What happened at iteration `t`, taking `x_t` to `x_{t+1}`.
#[derive(Clone, Debug)]
pub struct StepRecord {
    pub beta: f64,
    pub xi: usize,
    pub certificate: Certificate,
    /// `‖x_{t+1} − x_t‖`.
    pub step_norm: f64,
    /// `f(x_t)`.
    pub value: f64,
    /// `dist(x_t, X)`.
    pub dist_to_set: f64,
    /// `‖β_t (x_t − x̃_t)‖` for the subproblem solution `x̃_t` before retraction.
    pub prox_gradient_norm: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct RunLog {
    /// `x_0, …, x_{T+1}`.
    pub iterates: Vec<Vector>,
    /// One record per iteration `t = 0, …, T`.
    pub steps: Vec<StepRecord>,
    pub t_star: usize,
    pub seed: u64,
}

impl RunLog {
    pub fn horizon(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn output(&self) -> &Vector {
        &self.iterates[self.t_star]
    }

    pub fn degenerate_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.certificate.degenerate).count()
    }

    /// Largest `‖β_t(x_t − x̃_t)‖ − 2L` over the run.
    pub fn max_prox_bound_excess(&self, lipschitz: f64) -> f64 {
        self.steps
            .iter()
            .map(|s| s.prox_gradient_norm - 2.0 * lipschitz)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Sample index used at iteration `t`.
pub fn sample_index(objective: &StochasticObjective, rng: &CounterRng, t: usize) -> usize {
    inverse_cdf(&objective.probabilities(), rng.uniform(STREAM_SAMPLE, t as u64))
}

/// One step over the approximation at `x`: returns `(x̃, x₊)`.
pub fn retracted_step(
    objective: &StochasticObjective,
    approx: &SetApproximation,
    family: ModelFamily,
    x: &[f64],
    xi: usize,
    beta: f64,
    tol: f64,
) -> Result<(Vector, Vector, Certificate)> {
    let local = approx.build(x)?;
    let model = Model::new(objective, family, x, xi)?;
    let sol = solve(&SubproblemSpec::new(&model, &local.set, beta).with_tol(tol))?;
    let next = approx.retract(x, &sol.point)?;
    Ok((sol.point, next, sol.certificate))
}

/// One step of the unretracted method over `X`: returns `(x̃, x₊)` with `x₊ = x̃`.
pub fn plain_step(
    objective: &StochasticObjective,
    set: &ProxSmoothSet,
    family: ModelFamily,
    x: &[f64],
    xi: usize,
    beta: f64,
    tol: f64,
) -> Result<(Vector, Vector, Certificate)> {
    let model = Model::new(objective, family, x, xi)?;
    let sol = solve(&SubproblemSpec::new(&model, set, beta).with_tol(tol))?;
    Ok((sol.point.clone(), sol.point, sol.certificate))
}

fn run_with<F>(
    config: &RunConfig,
    objective: &StochasticObjective,
    set: &ProxSmoothSet,
    mut step: F,
) -> Result<RunLog>
where
    F: FnMut(&[f64], usize, f64) -> Result<(Vector, Vector, Certificate)>,
{
    if !set.contains(&config.x0, CONTAINS_TOL) {
        return Err(Error::InfeasibleBasepoint(set.distance(&config.x0).unwrap_or(f64::INFINITY)));
    }
    let rng = CounterRng::new(config.seed);
    let betas = config.schedule.betas();
    let n = betas.len();
    let mut iterates = Vec::with_capacity(n + 1);
    let mut steps = Vec::with_capacity(n);
    iterates.push(config.x0.clone());
    for (t, &beta) in betas.iter().enumerate() {
        let started = Instant::now();
        let x = iterates[t].clone();
        let xi = sample_index(objective, &rng, t);
        let (tilde, next, certificate) = step(&x, xi, beta)?;
        let record = StepRecord {
            beta,
            xi,
            certificate,
            step_norm: next.dist(&x),
            value: objective.value(&x),
            dist_to_set: set.distance(&x)?,
            prox_gradient_norm: beta * tilde.dist(&x),
            seconds: started.elapsed().as_secs_f64(),
        };
        steps.push(record);
        iterates.push(next);
    }
    let t_star = sample_tstar(betas, config.schedule.gamma(), &rng)?;
    Ok(RunLog {
        iterates,
        steps,
        t_star,
        seed: config.seed,
    })
}

fn check_schedule(schedule: &StepSchedule, floor: f64) -> Result<()> {
    if let Some(b) = schedule.betas().iter().find(|b| !(**b > floor)) {
        return Err(Error::InvalidSchedule(format!(
            "beta = {b} must exceed {floor}"
        )));
    }
    Ok(())
}

/// Sample `ξ_t`, minimize the model plus `(β_t/2)‖· − x_t‖²` over `X`.
///
/// Requires every `β_t > γ`, which the output-index weights need.
pub fn run_algorithm1(
    config: &RunConfig,
    objective: &StochasticObjective,
    set: &ProxSmoothSet,
) -> Result<RunLog> {
    check_schedule(&config.schedule, config.schedule.gamma())?;
    run_with(config, objective, set, |x, xi, beta| {
        plain_step(objective, set, config.family, x, xi, beta, config.tol)
    })
}

/// Like [`run_algorithm1`], but each step minimizes over `X_{x_t}` and
/// retracts the minimizer back onto `X`.
///
/// Requires every `β_t > max{2L/r2, γ}`.
pub fn run_algorithm2(
    config: &RunConfig,
    objective: &StochasticObjective,
    approx: &SetApproximation,
) -> Result<RunLog> {
    let l = objective.constants().lipschitz;
    let floor = (2.0 * l / approx.params().r2).max(config.schedule.gamma());
    check_schedule(&config.schedule, floor)?;
    let log = run_with(config, objective, approx.set(), |x, xi, beta| {
        retracted_step(objective, approx, config.family, x, xi, beta, config.tol)
    })?;
    if let Some(x) = log
        .iterates
        .iter()
        .find(|x| !approx.set().contains(x, CONTAINS_TOL))
    {
        return Err(Error::OutsideApprox(approx.set().distance(x)?));
    }
    Ok(log)
}

#[cfg(test)]
mod tests;
