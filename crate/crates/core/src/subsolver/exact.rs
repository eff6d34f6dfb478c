//! Exact solvers for structured (model, set) pairs.

use super::{generic, Certificate, Method, Solution, SubproblemSpec};
use crate::error::{Error, Result};
use crate::geometry::ProxSmoothSet;
use crate::models::ModelFamily;
use crate::vector::{dot, Vector};

#[derive(Clone, Debug, PartialEq)]
pub struct SphereStep {
    pub point: Vector,
    /// `βx = g`: every point of the sphere is optimal and `x` is returned.
    pub degenerate: bool,
}

/// Global minimizer of `⟨g, y⟩ + (β/2)‖y − x‖²` over the unit sphere.
///
/// On the sphere the objective equals `−⟨βx − g, y⟩` up to a constant, so
/// the minimizer is `(βx − g)/‖βx − g‖`.
pub fn solve_linear_over_sphere(g: &[f64], x: &[f64], beta: f64) -> SphereStep {
    let v = Vector::from(x).scale(beta).sub(g);
    let n = v.norm();
    if n == 0.0 {
        SphereStep {
            point: Vector::from(x),
            degenerate: true,
        }
    } else {
        SphereStep {
            point: v.scale(1.0 / n),
            degenerate: false,
        }
    }
}

/// Subproblem over an affine subspace.
///
/// Subgradient models use `Π_S(x − g/β)`; clipped models reduce to a line
/// and compare the candidate minimizers; ridge models reduce to an exact
/// one-dimensional convex problem; anything else goes to the generic solver.
pub fn solve_model_over_affine(spec: &SubproblemSpec) -> Result<Solution> {
    let ProxSmoothSet::Affine(s) = spec.set else {
        return Err(Error::Unsupported("affine solver needs an affine set".into()));
    };
    let x = spec.base();
    let p = s.project(x);
    match spec.model.family() {
        ModelFamily::Subgradient => {
            let (_, g) = spec.model.affine_part().expect("affine family");
            let gt = s.project_direction(g);
            Ok(Solution {
                point: p.add_scaled(-1.0 / spec.beta, &gt),
                certificate: Certificate::exact(Method::ClosedForm),
            })
        }
        ModelFamily::ClippedSubgradient => {
            let (value, g) = spec.model.affine_part().expect("affine family");
            let gt = s.project_direction(g);
            let n = gt.norm();
            if n == 0.0 {
                return Ok(Solution {
                    point: p,
                    certificate: Certificate::exact(Method::ClosedForm),
                });
            }
            let a = value + dot(g, &p.sub(x));
            let s_star = clipped_line_minimizer(a, n, spec.beta);
            Ok(Solution {
                point: p.add_scaled(s_star / n, &gt),
                certificate: Certificate::exact(Method::ClosedForm),
            })
        }
        _ => match spec.model.ridge_direction() {
            Some(a) => {
                let at = s.project_direction(&a);
                let n = at.norm();
                if n == 0.0 {
                    return Ok(Solution {
                        point: p,
                        certificate: Certificate::exact(Method::ClosedForm),
                    });
                }
                let u = at.scale(1.0 / n);
                let (t, cert) = line_minimize(spec, &p, &u, f64::NEG_INFINITY, f64::INFINITY)?;
                Ok(Solution {
                    point: p.add_scaled(t, &u),
                    certificate: cert,
                })
            }
            None => generic::solve_generic(spec),
        },
    }
}

/// Minimizer of `max{a + n s, 0} + (β/2) s²` over `s ∈ R` with `n > 0`.
///
/// Candidates: the stationary point of the affine branch, the kink, and
/// the stationary point of the clipped branch; the best feasible one wins.
fn clipped_line_minimizer(a: f64, n: f64, beta: f64) -> f64 {
    let phi = |s: f64| (a + n * s).max(0.0) + 0.5 * beta * s * s;
    let mut candidates = vec![-a / n];
    let s1 = -n / beta;
    if a + n * s1 >= 0.0 {
        candidates.push(s1);
    }
    if a <= 0.0 {
        candidates.push(0.0);
    }
    candidates
        .into_iter()
        .fold((f64::INFINITY, 0.0), |best, s| {
            let v = phi(s);
            if v < best.0 {
                (v, s)
            } else {
                best
            }
        })
        .1
}

/// Minimizes `s ↦ objective(p + s u)` over `[lo, hi]` by bisection on the
/// directional derivative; the restriction is convex when `β > η`.
fn line_minimize(
    spec: &SubproblemSpec,
    p: &Vector,
    u: &Vector,
    lo: f64,
    hi: f64,
) -> Result<(f64, Certificate)> {
    let m = spec.modulus();
    if !(m > 0.0) {
        return Err(Error::InvalidConstants(format!(
            "beta = {} does not exceed the model weak convexity",
            spec.beta
        )));
    }
    let x = spec.base();
    let offset = dot(&p.sub(x), u);
    let dphi = |s: f64| {
        let y = p.add_scaled(s, u);
        dot(&spec.model.subgradient(&y), u) + spec.beta * (s + offset)
    };
    // The minimizer lies within |φ'(s0)|/m of any s0.
    let s0 = (-offset).clamp(lo, hi);
    let radius = dphi(s0).abs() / m;
    let mut a = (s0 - radius * (1.0 + 1e-9) - 1e-300).max(lo);
    let mut b = (s0 + radius * (1.0 + 1e-9) + 1e-300).min(hi);
    let mut widen = 0;
    while a > lo && dphi(a) > 0.0 && widen < 64 {
        a = s0 - 2.0 * (s0 - a);
        a = a.max(lo);
        widen += 1;
    }
    while b < hi && dphi(b) < 0.0 && widen < 128 {
        b = s0 + 2.0 * (b - s0);
        b = b.min(hi);
        widen += 1;
    }
    let (t, iterations) = bisect_derivative(&dphi, a, b);
    let lip = dphi(a).abs().max(dphi(b).abs());
    Ok((
        t,
        Certificate {
            method: Method::ScalarBisection,
            suboptimality: lip * f64::EPSILON * (1.0 + t.abs()),
            iterations,
            degenerate: false,
        },
    ))
}

/// A zero of a nondecreasing function on `[a, b]`, or the endpoint where it
/// has the right sign.
fn bisect_derivative(dphi: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, usize) {
    if dphi(a) >= 0.0 {
        return (a, 0);
    }
    if dphi(b) <= 0.0 {
        return (b, 0);
    }
    let mut k = 0;
    while k < 2200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let d = dphi(mid);
        if d == 0.0 {
            return (mid, k);
        }
        if d < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        k += 1;
    }
    (0.5 * (a + b), k)
}

/// Subproblem over a one-dimensional interval.
pub(super) fn solve_over_interval(spec: &SubproblemSpec) -> Result<Solution> {
    let ProxSmoothSet::Box(b) = spec.set else {
        return Err(Error::Unsupported("interval solver needs a box".into()));
    };
    if spec.model.family() == ModelFamily::Subgradient {
        return projected_affine_step(spec);
    }
    let (lo, hi) = (b.lower()[0], b.upper()[0]);
    let origin = Vector::from([0.0]);
    let unit = Vector::from([1.0]);
    let (t, certificate) = line_minimize(spec, &origin, &unit, lo, hi)?;
    Ok(Solution {
        point: Vector::from([t]),
        certificate,
    })
}

/// `Π_S(x − g/β)` for the subgradient model over a convex set.
pub(super) fn projected_affine_step(spec: &SubproblemSpec) -> Result<Solution> {
    let (_, g) = spec.model.affine_part().expect("affine family");
    let point = spec.set.project(&spec.base().add_scaled(-1.0 / spec.beta, g))?;
    Ok(Solution {
        point,
        certificate: Certificate::exact(Method::ClosedForm),
    })
}

const CIRCLE_GRID: usize = 4096;

/// Subproblem over the unit circle in R²: a uniform angular grid locates the
/// best local minima and golden-section search refines each.
pub(super) fn solve_over_circle(spec: &SubproblemSpec) -> Result<Solution> {
    let point = |th: f64| Vector::from([th.cos(), th.sin()]);
    let phi = |th: f64| spec.objective(&point(th));
    let h = std::f64::consts::TAU / CIRCLE_GRID as f64;
    let values: Vec<f64> = (0..CIRCLE_GRID).map(|k| phi(k as f64 * h)).collect();
    let mut minima: Vec<usize> = (0..CIRCLE_GRID)
        .filter(|&k| {
            let prev = values[(k + CIRCLE_GRID - 1) % CIRCLE_GRID];
            let next = values[(k + 1) % CIRCLE_GRID];
            values[k] <= prev && values[k] <= next
        })
        .collect();
    minima.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    minima.truncate(3);
    let slope = (0..CIRCLE_GRID)
        .map(|k| (values[(k + 1) % CIRCLE_GRID] - values[k]).abs() / h)
        .fold(0.0, f64::max);
    let mut best = (f64::INFINITY, 0.0);
    let mut iterations = 0;
    for k in minima {
        let center = k as f64 * h;
        let (th, v, it) = golden_section(&phi, center - h, center + h);
        iterations += it;
        if v < best.0 {
            best = (v, th);
        }
    }
    Ok(Solution {
        point: point(best.1),
        certificate: Certificate {
            method: Method::Angular,
            suboptimality: slope * 1e-15,
            iterations,
            degenerate: false,
        },
    })
}

fn golden_section(phi: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64, usize) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (phi(c), phi(d));
    let mut k = 0;
    while b - a > 1e-15 && k < 200 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = phi(d);
        }
        k += 1;
    }
    if fc <= fd {
        (c, fc, k)
    } else {
        (d, fd, k)
    }
}

#[cfg(test)]
pub(super) fn clipped_line_minimizer_for_tests(a: f64, n: f64, beta: f64) -> f64 {
    clipped_line_minimizer(a, n, beta)
}
