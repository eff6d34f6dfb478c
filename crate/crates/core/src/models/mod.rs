//! Stochastic objectives and their one-sided models.

pub mod losses;

use std::fmt::Debug;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::vector::{dot, Vector};

/// A sample loss `y ↦ f(y, ξ)` indexed by `ξ ∈ {0, …, m−1}`.
pub trait Loss: Send + Sync + Debug {
    fn dim(&self) -> usize;
    fn num_samples(&self) -> usize;
    fn value(&self, x: &[f64], xi: usize) -> f64;
    /// An element of the subdifferential of `f(·, ξ)` at `x`.
    fn subgradient(&self, x: &[f64], xi: usize) -> Vector;
    /// `Some(a)` when `f(y, ξ)` depends on `y` only through `⟨a, y⟩`.
    fn ridge(&self, _xi: usize) -> Option<Vector> {
        None
    }
    /// Composite form `f(y, ξ) = h(c(y, ξ))`, used by the prox-linear model.
    fn composite(&self) -> Option<&dyn Composite> {
        None
    }
    /// Whether `f(·, ξ) ≥ 0` for every sample.
    fn nonnegative(&self) -> bool {
        false
    }
}

/// Outer convex function `h` of a composite loss.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outer {
    /// `h(u) = |u|` on R.
    Abs,
    /// `h(u) = ‖u‖₁`.
    L1,
}

impl Outer {
    pub fn value(self, u: &[f64]) -> f64 {
        match self {
            Outer::Abs => u[0].abs(),
            Outer::L1 => u.iter().map(|v| v.abs()).sum(),
        }
    }

    /// Subgradient with `sign(0) = 0`.
    pub fn subgradient(self, u: &[f64]) -> Vector {
        losses::sign_vector(u)
    }
}

pub trait Composite {
    fn outer(&self) -> Outer;
    fn inner(&self, x: &[f64], xi: usize) -> Vector;
    /// Rows are the gradients of the inner components.
    fn jacobian(&self, x: &[f64], xi: usize) -> Vec<Vector>;
    /// Whether the inner map is affine, so the loss is its own linearization.
    fn inner_is_affine(&self) -> bool {
        false
    }
}

/// Constants of assumptions on the objective and its models.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelConstants {
    /// Lipschitz constant `L` of `f` on the set and of every model nearby.
    pub lipschitz: f64,
    /// Weak convexity `η` of every model `f_x(·, ξ)`.
    pub model_weak_convexity: f64,
    /// One-sided accuracy `μ`.
    pub accuracy: f64,
    /// Weak convexity `ρ` of `f(·, ξ)`.
    pub weak_convexity: f64,
}

#[derive(Clone, Debug)]
struct Sample {
    loss_index: usize,
    probability: f64,
    noise: Option<Vector>,
}

/// `f(x) = E_ξ f(x, ξ)` over a finite support.
///
/// Each support point names a loss sample and optionally an additive
/// perturbation of the stochastic subgradient `G(x, ξ)`. Perturbations must
/// average to zero so that `E G(x, ξ)` remains a subgradient of `f`.
#[derive(Clone, Debug)]
pub struct StochasticObjective {
    loss: Arc<dyn Loss>,
    support: Vec<Sample>,
    constants: ModelConstants,
}

impl StochasticObjective {
    /// Uniform distribution over the samples of `loss`.
    pub fn uniform(loss: Arc<dyn Loss>, constants: ModelConstants) -> Self {
        let m = loss.num_samples();
        let support = (0..m)
            .map(|i| Sample {
                loss_index: i,
                probability: 1.0 / m as f64,
                noise: None,
            })
            .collect();
        StochasticObjective {
            loss,
            support,
            constants,
        }
    }

    /// A single-sample loss whose stochastic subgradient is perturbed by a
    /// uniformly drawn element of `noise`.
    pub fn with_subgradient_noise(
        loss: Arc<dyn Loss>,
        noise: Vec<Vector>,
        constants: ModelConstants,
    ) -> Result<Self> {
        if loss.num_samples() != 1 || noise.is_empty() {
            return Err(Error::InvalidConstants(
                "subgradient noise needs a single-sample loss and a nonempty support".into(),
            ));
        }
        let k = noise.len() as f64;
        let mean: Vector = (0..loss.dim())
            .map(|j| noise.iter().map(|z| z[j]).sum::<f64>() / k)
            .collect();
        if mean.norm() > 1e-12 {
            return Err(Error::InvalidConstants("subgradient noise must have mean zero".into()));
        }
        let support = noise
            .into_iter()
            .map(|z| Sample {
                loss_index: 0,
                probability: 1.0 / k,
                noise: Some(z),
            })
            .collect();
        Ok(StochasticObjective {
            loss,
            support,
            constants,
        })
    }

    pub fn with_constants(mut self, constants: ModelConstants) -> Self {
        self.constants = constants;
        self
    }

    pub fn constants(&self) -> &ModelConstants {
        &self.constants
    }

    pub fn loss(&self) -> &dyn Loss {
        self.loss.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.loss.dim()
    }

    pub fn num_samples(&self) -> usize {
        self.support.len()
    }

    pub fn probability(&self, xi: usize) -> f64 {
        self.support[xi].probability
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.support.iter().map(|s| s.probability).collect()
    }

    /// `f(x, ξ)`.
    pub fn sample_value(&self, x: &[f64], xi: usize) -> f64 {
        self.loss.value(x, self.support[xi].loss_index)
    }

    /// A subgradient of `f(·, ξ)` at `y`, without perturbation.
    pub fn sample_subgradient(&self, y: &[f64], xi: usize) -> Vector {
        self.loss.subgradient(y, self.support[xi].loss_index)
    }

    /// The stochastic subgradient `G(x, ξ)`.
    pub fn stochastic_subgradient(&self, x: &[f64], xi: usize) -> Vector {
        let g = self.sample_subgradient(x, xi);
        match &self.support[xi].noise {
            Some(z) => g.add(z),
            None => g,
        }
    }

    fn ridge(&self, xi: usize) -> Option<Vector> {
        self.loss.ridge(self.support[xi].loss_index)
    }

    fn loss_index(&self, xi: usize) -> usize {
        self.support[xi].loss_index
    }

    /// `f(x) = Σ_ξ p_ξ f(x, ξ)`.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.support
            .iter()
            .map(|s| s.probability * self.loss.value(x, s.loss_index))
            .sum()
    }

    /// `E_ξ G(x, ξ)`.
    pub fn mean_subgradient(&self, x: &[f64]) -> Vector {
        let mut g = Vector::zeros(self.dim());
        for (xi, s) in self.support.iter().enumerate() {
            g.axpy(s.probability, &self.stochastic_subgradient(x, xi));
        }
        g
    }

    /// Whether the clipped model is available: every sample loss is
    /// nonnegative and subgradients are unperturbed.
    pub fn supports_clipping(&self) -> bool {
        self.bounded_below_by_zero() && !self.has_noise()
    }

    pub fn bounded_below_by_zero(&self) -> bool {
        self.loss.nonnegative()
    }

    /// Whether the stochastic subgradient carries an additive perturbation.
    pub fn has_noise(&self) -> bool {
        self.support
            .iter()
            .any(|s| s.noise.as_ref().is_some_and(|z| z.iter().any(|v| *v != 0.0)))
    }

    pub fn has_composite(&self) -> bool {
        self.loss.composite().is_some()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelFamily {
    ProxPoint,
    Subgradient,
    ClippedSubgradient,
    ProxLinear,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 4] = [
        ModelFamily::ProxPoint,
        ModelFamily::Subgradient,
        ModelFamily::ClippedSubgradient,
        ModelFamily::ProxLinear,
    ];

    /// Short name used on the command line.
    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::ProxPoint => "proxpoint",
            ModelFamily::Subgradient => "subgrad",
            ModelFamily::ClippedSubgradient => "clipped",
            ModelFamily::ProxLinear => "proxlin",
        }
    }

    /// Whether `E f_x(x, ξ) = f(x)` holds without sign assumptions.
    pub fn touches(self) -> bool {
        !matches!(self, ModelFamily::ClippedSubgradient)
    }
}

impl FromStr for ModelFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ModelFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Unsupported(format!("model family {s:?}")))
    }
}

#[derive(Clone, Debug)]
enum ModelData {
    ProxPoint,
    /// `f(x, ξ) + ⟨G, y − x⟩`, optionally clipped at zero.
    Affine { value: f64, slope: Vector, clipped: bool },
    /// `h(c + J(y − x))`.
    Linearized {
        outer: Outer,
        inner: Vector,
        jacobian: Vec<Vector>,
    },
}

/// The model `y ↦ f_x(y, ξ)` for a fixed basepoint and sample.
#[derive(Clone, Debug)]
pub struct Model<'a> {
    objective: &'a StochasticObjective,
    family: ModelFamily,
    base: Vector,
    xi: usize,
    data: ModelData,
}

impl<'a> Model<'a> {
    pub fn new(
        objective: &'a StochasticObjective,
        family: ModelFamily,
        x: &[f64],
        xi: usize,
    ) -> Result<Self> {
        if x.len() != objective.dim() {
            return Err(Error::DimensionMismatch {
                expected: objective.dim(),
                got: x.len(),
            });
        }
        let data = match family {
            ModelFamily::ProxPoint => ModelData::ProxPoint,
            ModelFamily::Subgradient | ModelFamily::ClippedSubgradient => {
                let clipped = family == ModelFamily::ClippedSubgradient;
                if clipped && (!objective.bounded_below_by_zero() || objective.has_noise()) {
                    return Err(Error::ClippingUnavailable);
                }
                ModelData::Affine {
                    value: objective.sample_value(x, xi),
                    slope: objective.stochastic_subgradient(x, xi),
                    clipped,
                }
            }
            ModelFamily::ProxLinear => {
                let comp = objective
                    .loss
                    .composite()
                    .ok_or(Error::MissingCompositeStructure)?;
                let li = objective.loss_index(xi);
                ModelData::Linearized {
                    outer: comp.outer(),
                    inner: comp.inner(x, li),
                    jacobian: comp.jacobian(x, li),
                }
            }
        };
        Ok(Model {
            objective,
            family,
            base: Vector::from(x),
            xi,
            data,
        })
    }

    pub fn family(&self) -> ModelFamily {
        self.family
    }

    pub fn base(&self) -> &Vector {
        &self.base
    }

    pub fn sample(&self) -> usize {
        self.xi
    }

    pub fn objective(&self) -> &StochasticObjective {
        self.objective
    }

    fn linearization_at(&self, inner: &[f64], jacobian: &[Vector], y: &[f64]) -> Vector {
        let step = Vector::from(y).sub(&self.base);
        inner
            .iter()
            .zip(jacobian)
            .map(|(c, row)| c + dot(row, &step))
            .collect()
    }

    /// `f_x(y, ξ)`.
    pub fn value(&self, y: &[f64]) -> f64 {
        match &self.data {
            ModelData::ProxPoint => self.objective.sample_value(y, self.xi),
            ModelData::Affine {
                value,
                slope,
                clipped,
            } => {
                let v = value + dot(slope, y) - dot(slope, &self.base);
                if *clipped {
                    v.max(0.0)
                } else {
                    v
                }
            }
            ModelData::Linearized {
                outer,
                inner,
                jacobian,
            } => outer.value(&self.linearization_at(inner, jacobian, y)),
        }
    }

    /// An element of `∂_y f_x(y, ξ)`.
    pub fn subgradient(&self, y: &[f64]) -> Vector {
        match &self.data {
            ModelData::ProxPoint => self.objective.sample_subgradient(y, self.xi),
            ModelData::Affine {
                value,
                slope,
                clipped,
            } => {
                let v = value + dot(slope, y) - dot(slope, &self.base);
                if *clipped && v < 0.0 {
                    Vector::zeros(y.len())
                } else {
                    slope.clone()
                }
            }
            ModelData::Linearized {
                outer,
                inner,
                jacobian,
            } => {
                let s = outer.subgradient(&self.linearization_at(inner, jacobian, y));
                let mut g = Vector::zeros(y.len());
                for (si, row) in s.iter().zip(jacobian) {
                    g.axpy(*si, row);
                }
                g
            }
        }
    }

    /// `(f(x, ξ), G(x, ξ))` for the affine families.
    pub fn affine_part(&self) -> Option<(f64, &Vector)> {
        match &self.data {
            ModelData::Affine { value, slope, .. } => Some((*value, slope)),
            _ => None,
        }
    }

    pub fn is_clipped(&self) -> bool {
        matches!(self.data, ModelData::Affine { clipped: true, .. })
    }

    /// The model as `max_k (c_k + ⟨v_k, y⟩)` when it is piecewise affine.
    ///
    /// Available for the affine, clipped, and prox-linear families, and for
    /// the proximal point family when the loss is an affine composite; the
    /// composite forms need at most four components.
    pub fn max_affine_pieces(&self) -> Option<Vec<(f64, Vector)>> {
        match &self.data {
            ModelData::ProxPoint => {
                let comp = self.objective.loss.composite()?;
                if !comp.inner_is_affine() {
                    return None;
                }
                let li = self.objective.loss_index(self.xi);
                l1_pieces(&comp.inner(&self.base, li), &comp.jacobian(&self.base, li), &self.base)
            }
            ModelData::Affine {
                value,
                slope,
                clipped,
            } => {
                let c = value - dot(slope, &self.base);
                let mut pieces = vec![(c, slope.clone())];
                if *clipped {
                    pieces.push((0.0, Vector::zeros(slope.dim())));
                }
                Some(pieces)
            }
            ModelData::Linearized {
                inner, jacobian, ..
            } => l1_pieces(inner, jacobian, &self.base),
        }
    }

    /// `Some(a)` when the model depends on `y` only through `⟨a, y⟩`.
    pub fn ridge_direction(&self) -> Option<Vector> {
        match &self.data {
            ModelData::ProxPoint => self.objective.ridge(self.xi),
            ModelData::Affine { slope, .. } => Some(slope.clone()),
            ModelData::Linearized { jacobian, .. } => {
                if jacobian.len() == 1 {
                    Some(jacobian[0].clone())
                } else {
                    None
                }
            }
        }
    }
}

/// `‖c + J(y − x)‖₁` as `max_k (c_k + ⟨v_k, y⟩)` over sign patterns, for at
/// most four components; `h = |·|` and `h = ‖·‖₁` agree for one.
fn l1_pieces(inner: &[f64], jacobian: &[Vector], base: &[f64]) -> Option<Vec<(f64, Vector)>> {
    let k = inner.len();
    if k > 4 {
        return None;
    }
    let offsets: Vec<f64> = inner
        .iter()
        .zip(jacobian)
        .map(|(c, row)| c - dot(row, base))
        .collect();
    let mut pieces = Vec::with_capacity(1 << k);
    for pattern in 0..(1usize << k) {
        let mut c = 0.0;
        let mut v = Vector::zeros(base.len());
        for j in 0..k {
            let s = if pattern >> j & 1 == 1 { -1.0 } else { 1.0 };
            c += s * offsets[j];
            v.axpy(s, &jacobian[j]);
        }
        pieces.push((c, v));
    }
    Some(pieces)
}

/// `f_x(y, ξ)`.
pub fn model_value(
    objective: &StochasticObjective,
    family: ModelFamily,
    x: &[f64],
    y: &[f64],
    xi: usize,
) -> Result<f64> {
    Ok(Model::new(objective, family, x, xi)?.value(y))
}

/// An element of `∂_y f_x(y, ξ)`.
pub fn model_subgradient(
    objective: &StochasticObjective,
    family: ModelFamily,
    x: &[f64],
    y: &[f64],
    xi: usize,
) -> Result<Vector> {
    Ok(Model::new(objective, family, x, xi)?.subgradient(y))
}

/// `E_ξ f_x(y, ξ)` as an exact weighted sum.
pub fn expected_model_value(
    objective: &StochasticObjective,
    family: ModelFamily,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    let mut total = 0.0;
    for xi in 0..objective.num_samples() {
        total += objective.probability(xi) * model_value(objective, family, x, y, xi)?;
    }
    Ok(total)
}

/// `E_ξ f_x(y, ξ) − f(y) − (μ/2)‖y − x‖²`; nonpositive for accurate models.
pub fn verify_one_sided_accuracy(
    objective: &StochasticObjective,
    family: ModelFamily,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    let mu = objective.constants().accuracy;
    let gap = expected_model_value(objective, family, x, y)?
        - objective.value(y)
        - 0.5 * mu * crate::vector::dist_sq(x, y);
    Ok(gap)
}
