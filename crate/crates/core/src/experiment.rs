//! A problem, an algorithm and a schedule wired together, ready to run per seed.

use std::fmt;
use std::str::FromStr;

use crate::approximations::{ApproxKind, SetApproximation};
use crate::diagnostics::{
    expected_stationarity_sq, stationarity, Stationarity, StationarityEstimate,
};
use crate::driver::{
    general_bound_alg1, general_bound_alg2, run_algorithm1, run_algorithm2, theorem_bound,
    theorem_schedule, RunConfig, RunLog, ScheduleKind, StepSchedule, TheoremConstants,
};
use crate::models::ModelFamily;
use crate::problems::ProblemBundle;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    /// Steps taken directly over `X`.
    Plain,
    /// Steps taken over a local approximation of `X`, then retracted.
    Retracted,
}

impl Algorithm {
    pub fn number(self) -> u8 {
        match self {
            Algorithm::Plain => 1,
            Algorithm::Retracted => 2,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().trim_start_matches("alg") {
            "1" => Ok(Algorithm::Plain),
            "2" => Ok(Algorithm::Retracted),
            _ => Err(Error::Unsupported(format!("algorithm {s:?}"))),
        }
    }
}

/// Everything needed to build an [`Experiment`].
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub algorithm: Algorithm,
    pub family: ModelFamily,
    /// Required by [`Algorithm::Retracted`], ignored otherwise.
    pub approx: Option<ApproxKind>,
    pub schedule: ScheduleKind,
    pub horizon: usize,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    /// Explicit `β_0, …, β_T` for [`ScheduleKind::Custom`]; a single value is
    /// repeated.
    pub betas: Option<Vec<f64>>,
    pub tol: f64,
}

impl ExperimentSpec {
    pub fn new(algorithm: Algorithm, family: ModelFamily, horizon: usize) -> Self {
        let schedule = match algorithm {
            Algorithm::Plain => ScheduleKind::ConstantTheorem41,
            Algorithm::Retracted => ScheduleKind::SqrtTheorem61,
        };
        ExperimentSpec {
            algorithm,
            family,
            approx: None,
            schedule,
            horizon,
            alpha: None,
            delta: None,
            betas: None,
            tol: 1e-10,
        }
    }

    pub fn with_approx(mut self, kind: ApproxKind) -> Self {
        self.approx = Some(kind);
        self
    }
}

#[derive(Clone, Debug)]
pub struct Experiment {
    pub bundle: ProblemBundle,
    pub spec: ExperimentSpec,
    pub approx: Option<SetApproximation>,
    pub constants: TheoremConstants,
    pub schedule: StepSchedule,
    /// Upper bound on `E[C_λ(x_{t*})²]` for this schedule.
    pub bound: f64,
}

impl Experiment {
    pub fn new(bundle: ProblemBundle, spec: ExperimentSpec) -> Result<Self> {
        let approx = match (spec.algorithm, spec.approx) {
            (Algorithm::Plain, _) => None,
            (Algorithm::Retracted, Some(kind)) => Some(bundle.approximation(kind)?.clone()),
            (Algorithm::Retracted, None) => {
                return Err(Error::InvalidConstants(
                    "the retracted method needs an approximation kind".into(),
                ))
            }
        };
        let mut constants = bundle.theorem_constants(approx.as_ref());
        if let Some(a) = spec.alpha {
            constants.alpha = Some(a);
        }
        if let Some(d) = spec.delta {
            constants.delta = d;
        }
        let (schedule, bound) = match spec.schedule {
            ScheduleKind::Custom => {
                let betas = spec.betas.clone().ok_or_else(|| {
                    Error::InvalidSchedule("a custom schedule needs explicit betas".into())
                })?;
                let n = spec.horizon + 1;
                let betas = match betas.len() {
                    1 => vec![betas[0]; n],
                    k if k == n => betas,
                    k => {
                        return Err(Error::InvalidSchedule(format!(
                            "{k} betas given for {n} steps"
                        )))
                    }
                };
                let s = match spec.algorithm {
                    Algorithm::Plain => StepSchedule::custom(
                        betas,
                        constants.gamma_alg1(),
                        constants.rho_bar_alg1(),
                    )?,
                    Algorithm::Retracted => StepSchedule::custom(
                        betas,
                        constants.gamma_alg2()?,
                        constants.rho_bar_alg2()?,
                    )?,
                };
                let bound = match spec.algorithm {
                    Algorithm::Plain => general_bound_alg1(&constants, &s)?,
                    Algorithm::Retracted => general_bound_alg2(&constants, &s)?,
                };
                (s, bound)
            }
            kind => (
                theorem_schedule(kind, &constants, spec.horizon)?,
                theorem_bound(kind, &constants, spec.horizon)?,
            ),
        };
        Ok(Experiment {
            bundle,
            spec,
            approx,
            constants,
            schedule,
            bound,
        })
    }

    /// `λ = 1/ρ̄`, the envelope parameter the bound is stated for.
    pub fn lambda(&self) -> f64 {
        1.0 / self.schedule.rho_bar()
    }

    pub fn config(&self, seed: u64) -> RunConfig {
        let mut cfg = RunConfig::new(
            self.spec.family,
            seed,
            self.schedule.clone(),
            self.bundle.x0.clone(),
        );
        cfg.tol = self.spec.tol;
        cfg
    }

    pub fn run(&self, seed: u64) -> Result<RunLog> {
        let cfg = self.config(seed);
        match &self.approx {
            None => run_algorithm1(&cfg, &self.bundle.objective, &self.bundle.set),
            Some(a) => run_algorithm2(&cfg, &self.bundle.objective, a),
        }
    }

    /// `C_λ(x)` from the problem's oracle.
    pub fn stationarity(&self, x: &[f64]) -> Result<Stationarity> {
        stationarity(
            &self.bundle.objective,
            &self.bundle.set,
            self.lambda(),
            x,
            &self.bundle.oracle,
        )
    }

    /// Sampled and probability-weighted estimates of `E[C_λ(x_{t*})²]`.
    pub fn estimate(&self, log: &RunLog, stride: usize) -> Result<StationarityEstimate> {
        expected_stationarity_sq(
            &self.bundle.objective,
            &self.bundle.set,
            log,
            &self.schedule.tstar_probabilities()?,
            self.lambda(),
            &self.bundle.oracle,
            stride,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{get_problem, quartic1d};

    #[test]
    fn retracted_needs_an_approximation() {
        let spec = ExperimentSpec::new(Algorithm::Retracted, ModelFamily::Subgradient, 10);
        assert!(Experiment::new(get_problem("quartic1d").unwrap(), spec).is_err());
    }

    #[test]
    fn custom_betas_expand_and_use_general_bound() {
        let mut spec = ExperimentSpec::new(Algorithm::Plain, ModelFamily::Subgradient, 9);
        spec.schedule = ScheduleKind::Custom;
        spec.betas = Some(vec![400.0]);
        let e = Experiment::new(quartic1d(0.5).unwrap(), spec.clone()).unwrap();
        assert_eq!(e.schedule.betas(), &[400.0; 10]);
        assert_eq!(e.bound, general_bound_alg1(&e.constants, &e.schedule).unwrap());
        spec.betas = Some(vec![400.0; 3]);
        assert!(Experiment::new(quartic1d(0.5).unwrap(), spec).is_err());
    }

    #[test]
    fn overrides_reach_the_bound() {
        let mut spec = ExperimentSpec::new(Algorithm::Plain, ModelFamily::Subgradient, 99);
        let base = Experiment::new(quartic1d(0.5).unwrap(), spec.clone()).unwrap();
        spec.delta = Some(12.0);
        let more = Experiment::new(quartic1d(0.5).unwrap(), spec).unwrap();
        assert!(more.bound > base.bound);
    }

    #[test]
    fn algorithm_names() {
        assert_eq!("alg2".parse::<Algorithm>().unwrap(), Algorithm::Retracted);
        assert_eq!("1".parse::<Algorithm>().unwrap(), Algorithm::Plain);
        assert!("3".parse::<Algorithm>().is_err());
    }
}
