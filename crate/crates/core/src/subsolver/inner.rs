//! Subproblems over convex sublevel sets `{max_i q_i ≤ 0}`.

use super::generic::{projected_subgradient, StronglyConvex};
use super::{Certificate, Method, Solution, SubproblemSpec};
use crate::error::{Error, Result};
use crate::geometry::{max_value, solve_qcqp, AffineSubspace, ProxSmoothSet, Quadratic, SublevelSet};
use crate::vector::Vector;

/// Subproblem over a convex sublevel set such as an inner approximation.
///
/// Piecewise-affine models (subgradient, clipped, prox-linear) are solved
/// exactly: on the region where affine piece `k` attains the maximum the
/// subproblem is a convex QCQP, solved by the dual method, and the best
/// region wins; regions whose intersection with the set has empty
/// interior are skipped. Other models fall back to bisection on the multiplier of
/// `max_i q_i ≤ 0` around projected subgradient solves on R^d. Either way
/// a final pull toward a strictly feasible point makes the output feasible.
pub fn solve_over_functional_inner(spec: &SubproblemSpec) -> Result<Solution> {
    let ProxSmoothSet::Sublevel(set) = spec.set else {
        return Err(Error::Unsupported("functional inner solver needs a sublevel set".into()));
    };
    if !set.is_convex() {
        return Err(Error::Unsupported("sublevel set is not convex".into()));
    }
    let x = spec.base();
    let interior = match set.interior_point() {
        Some(z) => z.clone(),
        None if set.value(x) < 0.0 => x.clone(),
        None => find_interior_point(set.pieces(), x)?,
    };
    let mut solution = match spec.model.max_affine_pieces() {
        Some(pieces) => piecewise_qcqp(spec, set, &pieces)?,
        None => multiplier_bisection(spec, set)?,
    };
    solution.point = pull_inside(set, &solution.point, &interior);
    Ok(solution)
}

fn piecewise_qcqp(
    spec: &SubproblemSpec,
    set: &SublevelSet,
    pieces: &[(f64, Vector)],
) -> Result<Solution> {
    let x = spec.base();
    let proximal = Quadratic::isotropic(spec.beta, x);
    let tol = (0.1 * spec.tol).max(1e-14);
    let mut best: Option<(f64, Vector, f64)> = None;
    let mut sweeps = 0;
    for (k, (ck, vk)) in pieces.iter().enumerate() {
        let objective = proximal.add_scaled(1.0, &Quadratic::affine(vk.clone(), *ck));
        let mut constraints = set.pieces().to_vec();
        for (j, (cj, vj)) in pieces.iter().enumerate() {
            if j != k {
                constraints.push(Quadratic::affine(vj.sub(vk), cj - ck));
            }
        }
        // A region meeting the set without interior lies on ties with
        // neighbouring regions, which cover it, and its dual is unbounded.
        if pieces.len() > 1 && matches!(find_interior_point(&constraints, x), Err(Error::NoSlaterPoint)) {
            continue;
        }
        match solve_qcqp(&objective, &constraints, tol) {
            Ok(sol) => {
                sweeps += sol.sweeps;
                let value = spec.objective(&sol.point);
                if best.as_ref().is_none_or(|b| value < b.0) {
                    best = Some((value, sol.point, sol.gap));
                }
            }
            Err(Error::InfeasibleSet) => continue,
            Err(e) => return Err(e),
        }
    }
    let (_, point, gap) = best.ok_or(Error::InfeasibleSet)?;
    Ok(Solution {
        point,
        certificate: Certificate {
            method: Method::PiecewiseQcqp,
            suboptimality: gap,
            iterations: sweeps,
            degenerate: false,
        },
    })
}

struct Penalized<'a, 'b> {
    spec: &'a SubproblemSpec<'b>,
    pieces: &'a [Quadratic],
    lambda: f64,
}

impl StronglyConvex for Penalized<'_, '_> {
    fn value(&self, y: &[f64]) -> f64 {
        self.spec.objective(y) + self.lambda * max_value(self.pieces, y).0
    }
    fn subgradient(&self, y: &[f64]) -> Vector {
        let x = self.spec.base();
        let mut g = self
            .spec
            .model
            .subgradient(y)
            .add_scaled(self.spec.beta, &Vector::from(y).sub(x));
        if self.lambda > 0.0 {
            let (_, i) = max_value(self.pieces, y);
            g.axpy(self.lambda, &self.pieces[i].gradient(y));
        }
        g
    }
}

fn multiplier_bisection(spec: &SubproblemSpec, set: &SublevelSet) -> Result<Solution> {
    let m = spec.modulus();
    if !(m > 0.0) {
        return Err(Error::InvalidConstants(format!(
            "beta = {} does not exceed the model weak convexity",
            spec.beta
        )));
    }
    let d = spec.base().dim();
    let whole = ProxSmoothSet::Affine(AffineSubspace::new(
        Vector::zeros(d),
        (0..d).map(|i| Vector::basis(d, i)).collect(),
    )?);
    let inner_tol = 0.1 * spec.tol;
    let mut iterations = 0;
    let mut solve_at = |lambda: f64| -> Result<(Vector, f64)> {
        let obj = Penalized {
            spec,
            pieces: set.pieces(),
            lambda,
        };
        let sol = projected_subgradient(&obj, &whole, spec.base(), m, inner_tol, spec.max_iterations)?;
        iterations += sol.certificate.iterations;
        let g = set.value(&sol.point);
        Ok((sol.point, g))
    };
    let (y0, g0) = solve_at(0.0)?;
    if g0 <= 0.0 {
        return Ok(Solution {
            point: y0,
            certificate: Certificate {
                method: Method::MultiplierBisection,
                suboptimality: inner_tol,
                iterations,
                degenerate: false,
            },
        });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let (mut y_hi, mut g_hi) = solve_at(hi)?;
    while g_hi > 0.0 {
        lo = hi;
        hi *= 10.0;
        if hi > 1e12 {
            return Err(Error::NoConvergence {
                what: "multiplier bracket",
                iterations,
                residual: g_hi,
            });
        }
        (y_hi, g_hi) = solve_at(hi)?;
    }
    for _ in 0..200 {
        if g_hi.abs() <= spec.tol || hi - lo <= 1e-15 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (y, g) = solve_at(mid)?;
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
            y_hi = y;
            g_hi = g;
        }
    }
    Ok(Solution {
        point: y_hi,
        certificate: Certificate {
            method: Method::MultiplierBisection,
            suboptimality: hi * g_hi.abs() + inner_tol,
            iterations,
            degenerate: false,
        },
    })
}

/// Moves `y` toward the strictly feasible `z` just far enough to satisfy
/// every constraint exactly in floating point.
fn pull_inside(set: &SublevelSet, y: &Vector, z: &Vector) -> Vector {
    if set.value(y) <= 0.0 {
        return y.clone();
    }
    let at = |t: f64| y.add_scaled(t, &z.sub(y));
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if set.value(&at(mid)) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    at(hi)
}

/// A point with `max_i q_i < 0`, by normalized subgradient descent on the
/// constraint from `start`.
pub fn find_interior_point(pieces: &[Quadratic], start: &[f64]) -> Result<Vector> {
    let mut y = Vector::from(start);
    let mut best = (max_value(pieces, &y).0, y.clone());
    let scale = 0.1 * (1.0 + y.norm());
    let mut extra: Option<usize> = None;
    for k in 0..20_000 {
        let (v, i) = max_value(pieces, &y);
        if v < best.0 {
            best = (v, y.clone());
        }
        if best.0 < 0.0 && extra.is_none() {
            extra = Some(k + 200);
        }
        if extra.is_some_and(|stop| k >= stop) {
            break;
        }
        let g = pieces[i].gradient(&y);
        let n = g.norm();
        if n == 0.0 {
            break;
        }
        y = y.add_scaled(-scale / ((k + 1) as f64).sqrt() / n, &g);
    }
    if best.0 < 0.0 {
        Ok(best.1)
    } else {
        Err(Error::NoSlaterPoint)
    }
}
