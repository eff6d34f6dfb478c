//! Registered benchmark problems with declared constants.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::approximations::{ApproxKind, ApproxParams, ConstraintModel, SetApproximation};
use crate::diagnostics::ProxOracleConfig;
use crate::driver::TheoremConstants;
use crate::error::{Error, Result};
use crate::geometry::sampling::sample_near;
use crate::geometry::{BoxSet, ProxSmoothSet, Quadratic, SublevelSet};
use crate::models::losses::{AbsQuadratic, ShiftedL1};
use crate::models::{
    verify_one_sided_accuracy, Model, ModelConstants, ModelFamily, StochasticObjective,
};
use crate::rng::{gaussian_vector, sphere_point, CounterRng};
use crate::vector::{dot, Vector};

pub const PROBLEM_IDS: [&str; 3] = ["quartic1d", "sphere-phase", "parabolas2d"];

/// Default perturbation size of the quartic problem.
pub const QUARTIC_SIGMA: f64 = 0.5;
/// Data seed, dimension and sample count of the registered phase problem.
pub const PHASE_SEED: u64 = 20_240;
pub const PHASE_DIM: usize = 10;
pub const PHASE_SAMPLES: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProblemConstants {
    /// `L`.
    pub lipschitz: f64,
    /// Model weak convexity `η`.
    pub eta: f64,
    /// One-sided accuracy `μ`.
    pub mu: f64,
    /// Weak convexity `ρ` of each `f(·, ξ)`.
    pub rho: f64,
    /// Proximal smoothness radius `R` of `X`.
    pub radius: f64,
    /// `Δ ≥ f(x_0) − min_X f`.
    pub delta: f64,
}

#[derive(Clone, Debug)]
pub struct ProblemBundle {
    pub id: String,
    pub objective: StochasticObjective,
    pub set: ProxSmoothSet,
    pub approximations: Vec<SetApproximation>,
    pub constants: ProblemConstants,
    pub oracle: ProxOracleConfig,
    /// Points at which the approximation conditions are re-verified.
    pub basepoints: Vec<Vector>,
    pub x0: Vector,
    /// `α` of the square-root schedule, chosen to balance its two terms.
    pub alpha: f64,
    /// Model families the subsolver handles on this problem.
    pub families: Vec<ModelFamily>,
}

/// Flat, serializable summary of a bundle.
#[derive(Clone, Debug, Serialize)]
pub struct ProblemMetadata {
    pub id: String,
    pub dim: usize,
    pub samples: usize,
    pub constants: ProblemConstants,
    pub x0: Vec<f64>,
    pub alpha: f64,
    pub oracle: String,
    pub oracle_resolution: f64,
    pub oracle_starts: usize,
    pub approximations: Vec<ApproxMetadata>,
    pub generator: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ApproxMetadata {
    pub kind: String,
    pub radius: f64,
    pub tau1: f64,
    pub r1: f64,
    pub tau2: f64,
    pub r2: f64,
    pub gamma_model: f64,
}

impl ProblemBundle {
    pub fn approximation(&self, kind: ApproxKind) -> Result<&SetApproximation> {
        self.approximations
            .iter()
            .find(|a| a.kind() == kind)
            .ok_or_else(|| {
                Error::Unsupported(format!("{} approximation on {}", kind.name(), self.id))
            })
    }

    /// Constants for the unretracted method (`approx = None`) or for the
    /// retracted one over `approx`.
    pub fn theorem_constants(&self, approx: Option<&SetApproximation>) -> TheoremConstants {
        let c = &self.constants;
        TheoremConstants {
            lipschitz: c.lipschitz,
            eta: c.eta,
            mu: c.mu,
            delta: c.delta,
            approx: approx.map_or(ApproxParams::exact(c.radius), |a| *a.params()),
            alpha: Some(self.alpha),
            rho_bar: None,
        }
    }

    /// The same problem with `L` multiplied by `factor` everywhere.
    pub fn with_scaled_lipschitz(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.constants.lipschitz *= factor;
        let mut mc = *self.objective.constants();
        mc.lipschitz *= factor;
        out.objective = self.objective.clone().with_constants(mc);
        out
    }

    pub fn metadata(&self) -> ProblemMetadata {
        ProblemMetadata {
            id: self.id.clone(),
            dim: self.objective.dim(),
            samples: self.objective.num_samples(),
            constants: self.constants,
            x0: self.x0.to_vec(),
            alpha: self.alpha,
            oracle: self.oracle.method.name().into(),
            oracle_resolution: self.oracle.resolution,
            oracle_starts: self.oracle.starts,
            approximations: self
                .approximations
                .iter()
                .map(|a| {
                    let p = a.params();
                    ApproxMetadata {
                        kind: a.name().into(),
                        radius: p.radius,
                        tau1: p.tau1,
                        r1: p.r1,
                        tau2: p.tau2,
                        r2: p.r2,
                        gamma_model: a.gamma(),
                    }
                })
                .collect(),
            generator: crate::rng::GENERATOR.into(),
        }
    }
}

fn model_constants(c: &ProblemConstants) -> ModelConstants {
    ModelConstants {
        lipschitz: c.lipschitz,
        model_weak_convexity: c.eta,
        accuracy: c.mu,
        weak_convexity: c.rho,
    }
}

/// `α = √(2Δ/(ρ̄L²))` balances the two terms of the square-root schedule's
/// bound; it is halved below the admissible ceiling when that binds.
fn balanced_alpha(bundle: &ProblemBundle, approx: &SetApproximation) -> f64 {
    let c = bundle.theorem_constants(Some(approx));
    let (Ok(rho_bar), Ok(gamma)) = (c.rho_bar_alg2(), c.gamma_alg2()) else {
        return 1.0;
    };
    let l = c.lipschitz;
    let mut alpha = if l > 0.0 && c.delta > 0.0 {
        (2.0 * c.delta / (rho_bar * l * l)).sqrt()
    } else {
        1.0
    };
    let r2 = c.approx.r2;
    if r2.is_finite() && 2.0 * l - gamma * r2 > 0.0 {
        alpha = alpha.min(0.5 * r2 / (2.0 * l - gamma * r2));
    }
    alpha
}

pub fn get_problem(id: &str) -> Result<ProblemBundle> {
    match id {
        "quartic1d" => quartic1d(QUARTIC_SIGMA),
        "sphere-phase" => sphere_phase(PHASE_DIM, PHASE_SAMPLES, PHASE_SEED),
        "parabolas2d" => parabolas2d(),
        _ => Err(Error::UnknownProblem(id.into())),
    }
}

/// `f(x) = |x² − 1|` over `[−2, 2]`, with the stochastic subgradient
/// perturbed by `ζ ∈ {−σ, 0, σ}` uniformly.
///
/// `L = 4 + σ` bounds both `|f'| ≤ 4` and the perturbed model slopes.
pub fn quartic1d(sigma: f64) -> Result<ProblemBundle> {
    if !(sigma >= 0.0) {
        return Err(Error::InvalidConstants(format!("sigma = {sigma}")));
    }
    let constants = ProblemConstants {
        lipschitz: 4.0 + sigma,
        eta: 2.0,
        mu: 2.0,
        rho: 2.0,
        radius: f64::INFINITY,
        delta: 3.0,
    };
    let loss = Arc::new(AbsQuadratic::new(vec![Vector::from([1.0])], vec![1.0]));
    let noise = vec![Vector::from([-sigma]), Vector::from([0.0]), Vector::from([sigma])];
    let objective = StochasticObjective::with_subgradient_noise(loss, noise, model_constants(&constants))?;
    let set = ProxSmoothSet::Box(BoxSet::interval(-2.0, 2.0)?);
    let mut families = vec![ModelFamily::ProxPoint, ModelFamily::Subgradient, ModelFamily::ProxLinear];
    if sigma == 0.0 {
        families.push(ModelFamily::ClippedSubgradient);
    }
    let mut bundle = ProblemBundle {
        id: "quartic1d".into(),
        objective,
        set: set.clone(),
        approximations: vec![SetApproximation::identity(set)],
        constants,
        oracle: ProxOracleConfig::grid1d(1e-6),
        basepoints: vec![Vector::from([0.5]), Vector::from([1.0]), Vector::from([2.0])],
        x0: Vector::from([2.0]),
        alpha: 1.0,
        families,
    };
    bundle.alpha = balanced_alpha(&bundle, &bundle.approximations[0]);
    Ok(bundle)
}

/// `f(x) = (1/m) Σ |⟨a_i, x⟩² − b_i|` over the unit sphere with Gaussian
/// `a_i` and `b_i = ⟨a_i, x♯⟩²` for a planted unit `x♯`.
///
/// `L = η = ρ = 2 max‖a_i‖²` and `μ = 2λ_max(AᵀA)/m`. The tangent
/// approximation uses `R = 1`, `τ1 = τ2 = 1`, `r1 = 1/2`, `r2 = ∞`.
pub fn sphere_phase(dim: usize, samples: usize, seed: u64) -> Result<ProblemBundle> {
    if dim < 2 || samples == 0 {
        return Err(Error::InvalidConstants(format!("dim = {dim}, samples = {samples}")));
    }
    let mut rng = CounterRng::new(seed).stream(0);
    let a: Vec<Vector> = (0..samples).map(|_| gaussian_vector(&mut rng, dim)).collect();
    let planted = sphere_point(&mut rng, dim);
    let x0 = sphere_point(&mut rng, dim);
    let b: Vec<f64> = a.iter().map(|v| dot(v, &planted).powi(2)).collect();
    let l = 2.0 * a.iter().map(Vector::norm_sq).fold(0.0, f64::max);
    let mut gram = nalgebra::DMatrix::<f64>::zeros(dim, dim);
    for v in &a {
        let col = nalgebra::DVector::from_column_slice(v);
        gram += &col * col.transpose();
    }
    let lambda_max = gram.symmetric_eigenvalues().max();
    let loss = Arc::new(AbsQuadratic::new(a, b));
    let mut constants = ProblemConstants {
        lipschitz: l,
        eta: l,
        mu: 2.0 * lambda_max / samples as f64,
        rho: l,
        radius: 1.0,
        delta: 0.0,
    };
    let objective = StochasticObjective::uniform(loss, model_constants(&constants));
    // min f = 0 at ±x♯.
    constants.delta = objective.value(&x0);
    let set = ProxSmoothSet::unit_sphere(dim);
    let mut basepoints = vec![x0.clone(), planted];
    for _ in 0..3 {
        basepoints.push(sphere_point(&mut rng, dim));
    }
    let mut bundle = ProblemBundle {
        id: "sphere-phase".into(),
        objective,
        set: set.clone(),
        approximations: vec![
            SetApproximation::identity(set),
            SetApproximation::tangent_sphere(dim, 0.5)?,
        ],
        constants,
        oracle: ProxOracleConfig::multistart_sphere(64),
        basepoints,
        x0,
        alpha: 1.0,
        families: vec![
            ModelFamily::Subgradient,
            ModelFamily::ClippedSubgradient,
            ModelFamily::ProxLinear,
        ],
    };
    bundle.alpha = balanced_alpha(&bundle, &bundle.approximations[1]);
    Ok(bundle)
}

/// The two-parabola region `{x² − y ≤ 0, y − x²/5 − 4/5 ≤ 0}`.
///
/// It is `R`-proximally smooth with `R = 2.5`, the curvature radius of the
/// upper boundary at its apex.
pub fn parabola_region() -> Result<ProxSmoothSet> {
    let pieces = vec![
        Quadratic::diagonal(&[2.0, 0.0], Vector::from([0.0, -1.0]), 0.0)?,
        Quadratic::diagonal(&[-0.4, 0.0], Vector::from([0.0, 1.0]), -0.8)?,
    ];
    Ok(ProxSmoothSet::Sublevel(
        SublevelSet::with_radius(pieces, 2.5)?
            .with_bounds(Vector::from([-1.0, 0.0]), Vector::from([1.0, 1.0])),
    ))
}

/// Calibrated `τ1` of the exact-constraint inner approximation with
/// `γ = 1/2` and of the linearized one with `γ = 2.2`, both on `r1 = 1/2`.
pub const PARABOLA_TAU1_EXACT: f64 = 2.0;
pub const PARABOLA_TAU1_LINEAR: f64 = 8.0;
pub const PARABOLA_R1: f64 = 0.5;

/// `f(x, y) = |x − 1| + |y|` over the two-parabola region.
///
/// Ships the inner approximations `g_i + ¼‖· − x‖² ≤ 0` and
/// `g_i(x) + ⟨∇g_i(x), · − x⟩ + 1.1‖· − x‖² ≤ 0`.
pub fn parabolas2d() -> Result<ProblemBundle> {
    let constants = ProblemConstants {
        lipschitz: 2f64.sqrt(),
        eta: 0.0,
        mu: 0.0,
        rho: 0.0,
        radius: 2.5,
        // f(−0.7, 0.8) = 2.5 and the minimum 0.75 is attained at (1/2, 1/4).
        delta: 1.75,
    };
    let objective = StochasticObjective::uniform(
        Arc::new(ShiftedL1::new(Vector::from([1.0, 0.0]))),
        model_constants(&constants),
    );
    let set = parabola_region()?;
    let exact = SetApproximation::functional_inner(
        set.clone(),
        ConstraintModel::Exact,
        0.5,
        PARABOLA_TAU1_EXACT,
        PARABOLA_R1,
    )?;
    let linear = SetApproximation::functional_inner(
        set.clone(),
        ConstraintModel::Linearized,
        2.2,
        PARABOLA_TAU1_LINEAR,
        PARABOLA_R1,
    )?;
    let mut bundle = ProblemBundle {
        id: "parabolas2d".into(),
        objective,
        set,
        approximations: vec![exact, linear],
        constants,
        oracle: ProxOracleConfig::grid2d(1e-3),
        basepoints: vec![Vector::from([1.0, 1.0]), Vector::from([-0.7, 0.8])],
        x0: Vector::from([-0.7, 0.8]),
        alpha: 1.0,
        families: vec![
            ModelFamily::ProxPoint,
            ModelFamily::Subgradient,
            ModelFamily::ClippedSubgradient,
            ModelFamily::ProxLinear,
        ],
    };
    bundle.alpha = balanced_alpha(&bundle, &bundle.approximations[0]);
    Ok(bundle)
}

/// Largest violation found for each declared constant.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstantsReport {
    pub entries: Vec<(String, f64)>,
}

impl ConstantsReport {
    fn record(&mut self, name: impl Into<String>, v: f64) {
        let name = name.into();
        match self.entries.iter_mut().find(|e| e.0 == name) {
            Some(e) => e.1 = e.1.max(v),
            None => self.entries.push((name, v)),
        }
    }

    pub fn max_violation(&self) -> f64 {
        self.entries.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_violation() <= tol
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.0 == name).map(|e| e.1)
    }
}

fn secant_violation(f: impl Fn(&[f64]) -> f64, a: &Vector, b: &Vector, rho: f64) -> f64 {
    [0.25, 0.5, 0.75]
        .iter()
        .map(|&t| {
            let m = a.scale(t).add(&b.scale(1.0 - t));
            let d = a.dist(b);
            f(&m) - t * f(a) - (1.0 - t) * f(b) - 0.5 * rho * t * (1.0 - t) * d * d
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Samples the declared constants against their defining inequalities.
///
/// Pairs are drawn from `X`; model checks also use points of the local
/// approximations within distance 1/2 of the basepoint.
pub fn validate_constants(bundle: &ProblemBundle, samples: usize, seed: u64) -> ConstantsReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ConstantsReport::default();
    let obj = &bundle.objective;
    let c = &bundle.constants;
    let reach = match bundle.set.bounding_box() {
        Some((lo, hi)) => lo.dist(&hi),
        None => 2.0,
    };
    let draw = |rng: &mut ChaCha8Rng| sample_near(&bundle.set, &bundle.x0, reach, rng);
    for _ in 0..samples {
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        let d = x.dist(&y);
        report.record("lipschitz", (obj.value(&x) - obj.value(&y)).abs() - c.lipschitz * d);
        for xi in 0..obj.num_samples() {
            let g = obj.stochastic_subgradient(&x, xi).norm();
            report.record("lipschitz", g - c.lipschitz);
            report.record(
                "rho",
                secant_violation(|z| obj.sample_value(z, xi), &x, &y, c.rho),
            );
        }
        for &family in &bundle.families {
            if let Ok(v) = verify_one_sided_accuracy(obj, family, &x, &y) {
                report.record("mu", v);
            }
            for approx in &bundle.approximations {
                let Ok(local) = approx.build(&x) else { continue };
                let u = sample_near(&local.set, &x, 0.5, &mut rng);
                let w = sample_near(&local.set, &x, 0.5, &mut rng);
                let xi = rng_index(&mut rng, obj.num_samples());
                let Ok(model) = Model::new(obj, family, &x, xi) else { continue };
                report.record(
                    "lipschitz",
                    (model.value(&u) - model.value(&w)).abs() - c.lipschitz * u.dist(&w),
                );
                report.record("eta", secant_violation(|z| model.value(z), &u, &w, c.eta));
            }
        }
    }
    report.record("delta", delta_gap(bundle));
    for approx in &bundle.approximations {
        for x in &bundle.basepoints {
            let n = (samples / 4).max(10);
            if let Ok(v) = approx.check_condition_i(x, n, &mut rng) {
                report.record(format!("{}:condition-i", approx.name()), v);
            }
            if let Ok(v) = approx.check_condition_ii(x, n, &mut rng) {
                report.record(format!("{}:condition-ii", approx.name()), v);
            }
        }
    }
    report
}

fn rng_index(rng: &mut ChaCha8Rng, n: usize) -> usize {
    use rand::Rng;
    rng.random_range(0..n)
}

/// `f(x_0) − min f − Δ` with the minimum taken over a grid of the bounding
/// box (or known to be zero on the sphere problem).
fn delta_gap(bundle: &ProblemBundle) -> f64 {
    let obj = &bundle.objective;
    let f0 = obj.value(&bundle.x0);
    let min = match (&bundle.set, bundle.set.bounding_box()) {
        (ProxSmoothSet::UnitSphere(_), _) => 0.0,
        (_, Some((lo, hi))) if lo.dim() == 1 => (0..=400_000)
            .map(|i| obj.value(&[lo[0] + (hi[0] - lo[0]) * i as f64 / 400_000.0]))
            .fold(f64::INFINITY, f64::min),
        (set, Some((lo, hi))) if lo.dim() == 2 => {
            let n = 2000;
            let mut best = f64::INFINITY;
            for i in 0..=n {
                for j in 0..=n {
                    let p = [
                        lo[0] + (hi[0] - lo[0]) * i as f64 / n as f64,
                        lo[1] + (hi[1] - lo[1]) * j as f64 / n as f64,
                    ];
                    if set.contains(&p, 0.0) {
                        best = best.min(obj.value(&p));
                    }
                }
            }
            best
        }
        _ => f64::NEG_INFINITY,
    };
    f0 - min - bundle.constants.delta
}

#[cfg(test)]
mod tests;
