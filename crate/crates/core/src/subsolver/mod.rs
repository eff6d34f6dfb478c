//! Solvers for the per-iteration subproblem
//! `min_{y ∈ S} f_x(y, ξ) + (β/2)‖y − x‖²`.

mod exact;
mod generic;
mod inner;

pub use exact::{solve_linear_over_sphere, solve_model_over_affine, SphereStep};
pub use generic::{projected_subgradient, solve_generic, StronglyConvex};
pub use inner::{find_interior_point, solve_over_functional_inner};

use crate::error::{Error, Result};
use crate::geometry::ProxSmoothSet;
use crate::models::{Model, ModelFamily};
use crate::vector::{dist_sq, Vector};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Closed-form minimizer.
    ClosedForm,
    /// Bisection on the derivative of a one-dimensional convex reduction.
    ScalarBisection,
    /// Angular grid plus golden-section refinement on the unit circle.
    Angular,
    /// Exact dual method for a quadratically constrained quadratic program,
    /// enumerated over the affine pieces of the model.
    PiecewiseQcqp,
    /// Projected subgradient with a duality-gap certificate.
    ProjectedSubgradient,
    /// Bisection on the constraint multiplier around projected subgradient.
    MultiplierBisection,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certificate {
    pub method: Method,
    /// Upper bound on the objective suboptimality of the returned point.
    pub suboptimality: f64,
    pub iterations: usize,
    /// Set when the minimizer is not unique and `x` was returned.
    pub degenerate: bool,
}

impl Certificate {
    fn exact(method: Method) -> Self {
        Certificate {
            method,
            suboptimality: 0.0,
            iterations: 0,
            degenerate: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub point: Vector,
    pub certificate: Certificate,
}

#[derive(Clone, Debug)]
pub struct SubproblemSpec<'a> {
    pub model: &'a Model<'a>,
    pub set: &'a ProxSmoothSet,
    pub beta: f64,
    pub tol: f64,
    pub max_iterations: usize,
}

impl<'a> SubproblemSpec<'a> {
    pub fn new(model: &'a Model<'a>, set: &'a ProxSmoothSet, beta: f64) -> Self {
        SubproblemSpec {
            model,
            set,
            beta,
            tol: DEFAULT_TOL,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn base(&self) -> &Vector {
        self.model.base()
    }

    /// `f_x(y, ξ) + (β/2)‖y − x‖²`.
    pub fn objective(&self, y: &[f64]) -> f64 {
        self.model.value(y) + 0.5 * self.beta * dist_sq(y, self.base())
    }

    /// Strong convexity modulus `β − η` of the objective.
    pub fn modulus(&self) -> f64 {
        self.beta - self.model.objective().constants().model_weak_convexity
    }

    fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidConstants(format!("beta = {}", self.beta)));
        }
        if self.set.dim() != self.base().dim() {
            return Err(Error::DimensionMismatch {
                expected: self.set.dim(),
                got: self.base().dim(),
            });
        }
        Ok(())
    }
}

/// Dispatches to the most exact solver available for the (model, set) pair.
pub fn solve(spec: &SubproblemSpec) -> Result<Solution> {
    spec.validate()?;
    let family = spec.model.family();
    match spec.set {
        ProxSmoothSet::UnitSphere(_) => {
            if family == ModelFamily::Subgradient {
                let (_, g) = spec.model.affine_part().expect("affine family");
                let step = solve_linear_over_sphere(g, spec.base(), spec.beta);
                let mut certificate = Certificate::exact(Method::ClosedForm);
                certificate.degenerate = step.degenerate;
                Ok(Solution {
                    point: step.point,
                    certificate,
                })
            } else if spec.set.dim() == 2 {
                exact::solve_over_circle(spec)
            } else {
                Err(Error::Unsupported(format!(
                    "{} model over the sphere in dimension {}",
                    family.name(),
                    spec.set.dim()
                )))
            }
        }
        ProxSmoothSet::Affine(_) => solve_model_over_affine(spec),
        ProxSmoothSet::Box(_) if spec.set.dim() == 1 => exact::solve_over_interval(spec),
        ProxSmoothSet::Box(_) | ProxSmoothSet::Ball(_) => {
            if family == ModelFamily::Subgradient {
                exact::projected_affine_step(spec)
            } else {
                solve_generic(spec)
            }
        }
        ProxSmoothSet::Sublevel(s) if s.is_convex() => solve_over_functional_inner(spec),
        ProxSmoothSet::Sublevel(_) => Err(Error::Unsupported(
            "subproblem over a nonconvex sublevel set".into(),
        )),
    }
}
