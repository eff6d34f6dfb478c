//! Projected subgradient with a computable optimality certificate.

use super::{Certificate, Method, Solution, SubproblemSpec};
use crate::error::{Error, Result};
use crate::geometry::ProxSmoothSet;
use crate::vector::{dot, Vector};

/// A strongly convex objective given by value and subgradient oracles.
pub trait StronglyConvex {
    fn value(&self, y: &[f64]) -> f64;
    fn subgradient(&self, y: &[f64]) -> Vector;
}

struct SpecObjective<'a, 'b>(&'a SubproblemSpec<'b>);

impl StronglyConvex for SpecObjective<'_, '_> {
    fn value(&self, y: &[f64]) -> f64 {
        self.0.objective(y)
    }
    fn subgradient(&self, y: &[f64]) -> Vector {
        let x = self.0.base();
        self.0
            .model
            .subgradient(y)
            .add_scaled(self.0.beta, &Vector::from(y).sub(x))
    }
}

/// Projected subgradient on the `(β − η)`-strongly convex subproblem.
pub fn solve_generic(spec: &SubproblemSpec) -> Result<Solution> {
    let m = spec.modulus();
    if !(m > 0.0) {
        return Err(Error::InvalidConstants(format!(
            "beta = {} does not exceed the model weak convexity",
            spec.beta
        )));
    }
    projected_subgradient(
        &SpecObjective(spec),
        spec.set,
        spec.base(),
        m,
        spec.tol,
        spec.max_iterations,
    )
}

/// Minimizes an `m`-strongly convex function over a convex set.
///
/// Steps `2/(m(k+2))` with `(k+1)`-weighted averaging. Each subgradient
/// `g_k` at `y_k` gives the minorant `F(y_k) + ⟨g_k, y − y_k⟩ + (m/2)‖y − y_k‖²`.
/// Their weighted average is an isotropic quadratic whose minimum over the
/// set, found by one projection, lower-bounds the optimum. The gap between
/// the best point found and that bound is the certificate.
pub fn projected_subgradient(
    objective: &dyn StronglyConvex,
    set: &ProxSmoothSet,
    start: &[f64],
    m: f64,
    tol: f64,
    max_iterations: usize,
) -> Result<Solution> {
    if !set.is_convex() {
        return Err(Error::Unsupported("projected subgradient needs a convex set".into()));
    }
    let d = start.len();
    let check_every = match set {
        ProxSmoothSet::Sublevel(_) => 32,
        _ => 1,
    };
    let mut y = set.project(start)?;
    let mut best_value = objective.value(&y);
    let mut best = y.clone();
    let mut weight_sum = 0.0;
    let mut linear = Vector::zeros(d);
    let mut constant = 0.0;
    let mut average = Vector::zeros(d);
    let mut gap = f64::INFINITY;
    for k in 0..max_iterations {
        let fy = objective.value(&y);
        if fy < best_value {
            best_value = fy;
            best = y.clone();
        }
        let g = objective.subgradient(&y);
        let w = (k + 1) as f64;
        weight_sum += w;
        // Σ w (g − m y) and Σ w (F − ⟨g, y⟩ + (m/2)‖y‖²).
        linear.axpy(w, &g.add_scaled(-m, &y));
        constant += w * (fy - dot(&g, &y) + 0.5 * m * dot(&y, &y));
        average.axpy(w, &y);
        if k % check_every == 0 || k + 1 == max_iterations {
            let c = linear.scale(1.0 / weight_sum);
            let lb_point = set.project(&c.scale(-1.0 / m))?;
            let lower = 0.5 * m * dot(&lb_point, &lb_point)
                + dot(&c, &lb_point)
                + constant / weight_sum;
            let avg = average.scale(1.0 / weight_sum);
            let fa = objective.value(&avg);
            if fa < best_value {
                best_value = fa;
                best = avg;
            }
            gap = (best_value - lower).max(0.0);
            if gap <= tol {
                return Ok(Solution {
                    point: best,
                    certificate: Certificate {
                        method: Method::ProjectedSubgradient,
                        suboptimality: gap,
                        iterations: k + 1,
                        degenerate: false,
                    },
                });
            }
        }
        let step = 2.0 / (m * (k as f64 + 2.0));
        y = set.project(&y.add_scaled(-step, &g))?;
    }
    Err(Error::NoConvergence {
        what: "projected subgradient",
        iterations: max_iterations,
        residual: gap,
    })
}
