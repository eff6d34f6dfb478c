//! Stepsize schedules, output-index sampling and theoretical bounds.

use crate::approximations::ApproxParams;
use crate::error::{Error, Result};
use crate::rng::{inverse_cdf, CounterRng, STREAM_TSTAR};

/// Problem constants entering the stepsize rules and the bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoremConstants {
    /// `L`.
    pub lipschitz: f64,
    /// Model weak convexity `η`.
    pub eta: f64,
    /// One-sided accuracy `μ`.
    pub mu: f64,
    /// Upper bound `Δ ≥ f(x_0) − min_X f`.
    pub delta: f64,
    /// `(R, τ1, r1, τ2, r2)`; only `R` matters for Algorithm 1.
    pub approx: ApproxParams,
    /// `α` of the square-root schedule.
    pub alpha: Option<f64>,
    /// Overrides the default choice of `ρ̄`.
    pub rho_bar: Option<f64>,
}

impl TheoremConstants {
    fn three_l_over_r(&self) -> f64 {
        if self.approx.radius.is_infinite() {
            0.0
        } else {
            3.0 * self.lipschitz / self.approx.radius
        }
    }

    /// `γ = η + 3L/R`.
    pub fn gamma_alg1(&self) -> f64 {
        self.eta + self.three_l_over_r()
    }

    /// `ρ̄ = 2(η + μ + 3L/R)` unless overridden.
    pub fn rho_bar_alg1(&self) -> f64 {
        self.rho_bar
            .unwrap_or(2.0 * (self.eta + self.mu + self.three_l_over_r()))
    }

    /// `γ = η + 3Lν`.
    pub fn gamma_alg2(&self) -> Result<f64> {
        Ok(self.eta + 3.0 * self.lipschitz * self.approx.nu()?)
    }

    /// `max{2L/r1, γ + μ + 3τ1L}`; `ρ̄` must exceed it.
    pub fn rho_bar_floor_alg2(&self) -> Result<f64> {
        let l = self.lipschitz;
        Ok((2.0 * l / self.approx.r1).max(self.gamma_alg2()? + self.mu + 3.0 * self.approx.tau1 * l))
    }

    /// Twice the floor unless overridden.
    pub fn rho_bar_alg2(&self) -> Result<f64> {
        let floor = self.rho_bar_floor_alg2()?;
        match self.rho_bar {
            Some(r) if r > floor => Ok(r),
            Some(r) => Err(Error::InvalidConstants(format!(
                "rho_bar = {r} must exceed {floor}"
            ))),
            None if floor > 0.0 => Ok(2.0 * floor),
            None => Ok(1.0),
        }
    }

    /// `β_t > 2L/r2` is required on top of `β_t > γ`.
    pub fn beta_floor_alg2(&self) -> Result<f64> {
        Ok((2.0 * self.lipschitz / self.approx.r2).max(self.gamma_alg2()?))
    }

    fn check(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.lipschitz) || !ok(self.eta) || !ok(self.mu) || !(self.delta >= 0.0) {
            return Err(Error::InvalidConstants(format!("{self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleKind {
    /// Constant `β = max{γ, √(ρ̄L²(T+1)/(2Δ))}` for Algorithm 1.
    ConstantTheorem41,
    /// `β_t = γ + √(T+1)/α` for Algorithm 2.
    SqrtTheorem61,
    Custom,
}

impl ScheduleKind {
    pub fn name(self) -> &'static str {
        match self {
            ScheduleKind::ConstantTheorem41 => "thm41",
            ScheduleKind::SqrtTheorem61 => "thm61",
            ScheduleKind::Custom => "custom",
        }
    }
}

impl std::str::FromStr for ScheduleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thm41" => Ok(ScheduleKind::ConstantTheorem41),
            "thm61" => Ok(ScheduleKind::SqrtTheorem61),
            "custom" => Ok(ScheduleKind::Custom),
            _ => Err(Error::InvalidSchedule(format!("unknown schedule {s:?}"))),
        }
    }
}

/// `β_0, …, β_T` together with the offset `γ` of the output weights and the
/// envelope parameter `ρ̄` the run is measured against.
#[derive(Clone, Debug, PartialEq)]
pub struct StepSchedule {
    kind: ScheduleKind,
    betas: Vec<f64>,
    gamma: f64,
    rho_bar: f64,
}

impl StepSchedule {
    pub fn custom(betas: Vec<f64>, gamma: f64, rho_bar: f64) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::InvalidSchedule("empty schedule".into()));
        }
        if let Some(b) = betas.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
            return Err(Error::InvalidSchedule(format!("beta = {b}")));
        }
        Ok(StepSchedule {
            kind: ScheduleKind::Custom,
            betas,
            gamma,
            rho_bar,
        })
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// `T`, the last iteration index.
    pub fn horizon(&self) -> usize {
        self.betas.len() - 1
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn rho_bar(&self) -> f64 {
        self.rho_bar
    }

    /// Normalized `P(t* = t) ∝ 1/(β_t − γ)`.
    pub fn tstar_probabilities(&self) -> Result<Vec<f64>> {
        tstar_probabilities(&self.betas, self.gamma)
    }
}

/// The prescribed constant schedule of `kind` for `T + 1` steps.
pub fn theorem_schedule(
    kind: ScheduleKind,
    c: &TheoremConstants,
    horizon: usize,
) -> Result<StepSchedule> {
    c.check()?;
    let n = horizon + 1;
    match kind {
        ScheduleKind::ConstantTheorem41 => {
            let gamma = c.gamma_alg1();
            let rho_bar = c.rho_bar_alg1();
            let l = c.lipschitz;
            let beta = if l == 0.0 {
                gamma
            } else {
                if !(c.delta > 0.0) {
                    return Err(Error::InvalidConstants("delta must be positive".into()));
                }
                gamma.max((rho_bar * l * l * n as f64 / (2.0 * c.delta)).sqrt())
            };
            Ok(StepSchedule {
                kind,
                betas: vec![beta; n],
                gamma,
                rho_bar,
            })
        }
        ScheduleKind::SqrtTheorem61 => {
            let gamma = c.gamma_alg2()?;
            let rho_bar = c.rho_bar_alg2()?;
            let alpha = c
                .alpha
                .ok_or_else(|| Error::InvalidConstants("alpha is required".into()))?;
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::InvalidConstants(format!("alpha = {alpha}")));
            }
            let r2 = c.approx.r2;
            if r2.is_finite() {
                let denom = 2.0 * c.lipschitz - gamma * r2;
                if denom > 0.0 && alpha >= r2 / denom {
                    return Err(Error::InvalidConstants(format!(
                        "alpha = {alpha} must be below {}",
                        r2 / denom
                    )));
                }
            }
            let beta = gamma + (n as f64).sqrt() / alpha;
            Ok(StepSchedule {
                kind,
                betas: vec![beta; n],
                gamma,
                rho_bar,
            })
        }
        ScheduleKind::Custom => Err(Error::InvalidSchedule(
            "custom schedules take explicit betas".into(),
        )),
    }
}

/// The guaranteed upper bound on `E[C_{1/ρ̄}(x_{t*})²]` for `kind`.
///
/// For the constant schedule this is the closed form
/// `max{ρ̄Δ/(T+1), L√(2ρ̄Δ/(T+1))}`; for the square-root schedule it is the
/// full right-hand side with the prescribed `β_t`.
pub fn theorem_bound(kind: ScheduleKind, c: &TheoremConstants, horizon: usize) -> Result<f64> {
    match kind {
        ScheduleKind::ConstantTheorem41 => {
            c.check()?;
            let rho_bar = c.rho_bar_alg1();
            let n = (horizon + 1) as f64;
            let first = rho_bar * c.delta / n;
            Ok(first.max(c.lipschitz * (2.0 * rho_bar * c.delta / n).sqrt()))
        }
        ScheduleKind::SqrtTheorem61 => {
            let s = theorem_schedule(kind, c, horizon)?;
            general_bound_alg2(c, &s)
        }
        ScheduleKind::Custom => Err(Error::InvalidSchedule(
            "bounds for custom schedules come from the general forms".into(),
        )),
    }
}

/// The right-hand side for Algorithm 1 with arbitrary `β_t > γ`:
/// `[ρ̄Δ + (ρ̄²L²/2) Σ 1/(β_t(β_t−γ))] / Σ (ρ̄−γ−μ)/(β_t−γ)`.
pub fn general_bound_alg1(c: &TheoremConstants, s: &StepSchedule) -> Result<f64> {
    let gamma = s.gamma;
    let rho_bar = s.rho_bar;
    let slack = rho_bar - gamma - c.mu;
    if !(slack > 0.0) {
        return Err(Error::InvalidConstants(format!(
            "rho_bar = {rho_bar} must exceed gamma + mu = {}",
            gamma + c.mu
        )));
    }
    check_above(&s.betas, gamma)?;
    let l2 = c.lipschitz * c.lipschitz;
    let num: f64 = rho_bar * c.delta
        + 0.5 * rho_bar * rho_bar * l2 * s.betas.iter().map(|b| 1.0 / (b * (b - gamma))).sum::<f64>();
    let den: f64 = s.betas.iter().map(|b| slack / (b - gamma)).sum();
    Ok(num / den)
}

/// `a_t = 1/(β(β−γ)) + 8τ2L(1/ρ̄ + 1/β)/β² + 4τ2²L²/β⁴`.
pub fn retraction_coefficient(c: &TheoremConstants, beta: f64, gamma: f64, rho_bar: f64) -> f64 {
    let l = c.lipschitz;
    let t2 = c.approx.tau2;
    1.0 / (beta * (beta - gamma))
        + 8.0 * t2 * l * (1.0 / rho_bar + 1.0 / beta) / (beta * beta)
        + 4.0 * t2 * t2 * l * l / beta.powi(4)
}

/// The right-hand side for Algorithm 2:
/// `[2ρ̄Δ + ρ̄²L² Σ a_t] / Σ (ρ̄−γ−μ−3τ1L)/(β_t−γ)`.
pub fn general_bound_alg2(c: &TheoremConstants, s: &StepSchedule) -> Result<f64> {
    let gamma = s.gamma;
    let rho_bar = s.rho_bar;
    let slack = rho_bar - gamma - c.mu - 3.0 * c.approx.tau1 * c.lipschitz;
    if !(slack > 0.0) {
        return Err(Error::InvalidConstants(format!(
            "rho_bar = {rho_bar} leaves no slack over gamma + mu + 3 tau1 L"
        )));
    }
    check_above(&s.betas, gamma)?;
    let l2 = c.lipschitz * c.lipschitz;
    let sum_a: f64 = s
        .betas
        .iter()
        .map(|&b| retraction_coefficient(c, b, gamma, rho_bar))
        .sum();
    let num = 2.0 * rho_bar * c.delta + rho_bar * rho_bar * l2 * sum_a;
    let den: f64 = s.betas.iter().map(|b| slack / (b - gamma)).sum();
    Ok(num / den)
}

fn check_above(betas: &[f64], gamma: f64) -> Result<()> {
    if betas.iter().any(|b| !(*b > gamma)) {
        return Err(Error::InvalidWeights { gamma });
    }
    Ok(())
}

/// `P(t* = t) ∝ 1/(β_t − γ)`, normalized.
pub fn tstar_probabilities(betas: &[f64], gamma: f64) -> Result<Vec<f64>> {
    check_above(betas, gamma)?;
    if betas.is_empty() {
        return Err(Error::InvalidSchedule("empty schedule".into()));
    }
    let w: Vec<f64> = betas.iter().map(|b| 1.0 / (b - gamma)).collect();
    let total: f64 = w.iter().sum();
    Ok(w.into_iter().map(|v| v / total).collect())
}

/// Draws `t*` from the first uniform of the output-index stream.
pub fn sample_tstar(betas: &[f64], gamma: f64, rng: &CounterRng) -> Result<usize> {
    let p = tstar_probabilities(betas, gamma)?;
    Ok(inverse_cdf(&p, rng.uniform(STREAM_TSTAR, 0)))
}
