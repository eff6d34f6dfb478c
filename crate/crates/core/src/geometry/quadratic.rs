//! Quadratic functions and small quadratically constrained problems.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::vector::{dot, Vector};

/// `q(y) = ½ yᵀHy + ⟨b, y⟩ + c` with symmetric `H`.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadratic {
    dim: usize,
    hessian: Vec<f64>,
    linear: Vector,
    constant: f64,
}

impl Quadratic {
    /// `hessian` is row-major `dim × dim`; it is symmetrized.
    pub fn new(hessian: Vec<f64>, linear: Vector, constant: f64) -> Result<Self> {
        let dim = linear.dim();
        if hessian.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: hessian.len(),
            });
        }
        let mut h = hessian;
        for i in 0..dim {
            for j in 0..i {
                let s = 0.5 * (h[i * dim + j] + h[j * dim + i]);
                h[i * dim + j] = s;
                h[j * dim + i] = s;
            }
        }
        Ok(Quadratic {
            dim,
            hessian: h,
            linear,
            constant,
        })
    }

    pub fn diagonal(diag: &[f64], linear: Vector, constant: f64) -> Result<Self> {
        let d = diag.len();
        let mut h = vec![0.0; d * d];
        for (i, v) in diag.iter().enumerate() {
            h[i * d + i] = *v;
        }
        Self::new(h, linear, constant)
    }

    pub fn affine(linear: Vector, constant: f64) -> Self {
        let d = linear.dim();
        Quadratic {
            dim: d,
            hessian: vec![0.0; d * d],
            linear,
            constant,
        }
    }

    /// `(a/2)‖y − center‖²`.
    pub fn isotropic(curvature: f64, center: &[f64]) -> Self {
        let d = center.len();
        let mut h = vec![0.0; d * d];
        for i in 0..d {
            h[i * d + i] = curvature;
        }
        Quadratic {
            dim: d,
            hessian: h,
            linear: Vector::from(center).scale(-curvature),
            constant: 0.5 * curvature * dot(center, center),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hessian(&self) -> &[f64] {
        &self.hessian
    }

    pub fn linear(&self) -> &Vector {
        &self.linear
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    fn hess_times(&self, y: &[f64]) -> Vector {
        let d = self.dim;
        (0..d)
            .map(|i| dot(&self.hessian[i * d..(i + 1) * d], y))
            .collect()
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        0.5 * dot(y, &self.hess_times(y)) + dot(&self.linear, y) + self.constant
    }

    pub fn gradient(&self, y: &[f64]) -> Vector {
        self.hess_times(y).add(&self.linear)
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &Quadratic) -> Quadratic {
        Quadratic {
            dim: self.dim,
            hessian: self
                .hessian
                .iter()
                .zip(&other.hessian)
                .map(|(a, b)| a + s * b)
                .collect(),
            linear: self.linear.add_scaled(s, &other.linear),
            constant: self.constant + s * other.constant,
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = DMatrix::from_row_slice(self.dim, self.dim, &self.hessian);
        m.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_convex(&self) -> bool {
        self.min_eigenvalue() >= -1e-12
    }

    /// The unique minimizer over R^d, if the Hessian is positive definite.
    pub fn minimizer(&self) -> Option<Vector> {
        let m = DMatrix::from_row_slice(self.dim, self.dim, &self.hessian);
        let chol = m.cholesky()?;
        let rhs = DVector::from_iterator(self.dim, self.linear.iter().map(|v| -v));
        let y = chol.solve(&rhs);
        Some(y.iter().copied().collect())
    }
}

/// Pointwise maximum of quadratics. Ties resolve to the lowest index.
pub fn max_value(pieces: &[Quadratic], y: &[f64]) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, q) in pieces.iter().enumerate() {
        let v = q.value(y);
        if v > best.0 {
            best = (v, i);
        }
    }
    best
}

#[derive(Clone, Debug)]
pub struct QcqpSolution {
    pub point: Vector,
    pub multipliers: Vec<f64>,
    /// `max_i q_i(point)`, positive when infeasible.
    pub violation: f64,
    /// `|Σ λ_i q_i(point)|`, the duality gap at a feasible point.
    pub gap: f64,
    pub sweeps: usize,
}

const MAX_SWEEPS: usize = 20_000;
const MULTIPLIER_CAP: f64 = 1e12;

/// Minimizes a strongly convex quadratic subject to `q_i ≤ 0`.
///
/// Cyclic exact maximization of the dual, one multiplier at a time, each by
/// bisection with a ×10 growing bracket. Constraints may be nonconvex as long
/// as the Lagrangian stays positive definite along the path; the result is
/// then globally optimal, since a feasible point minimizing a convex
/// Lagrangian with complementary slackness is optimal.
pub fn solve_qcqp(
    objective: &Quadratic,
    constraints: &[Quadratic],
    tol: f64,
) -> Result<QcqpSolution> {
    let m = constraints.len();
    let mut lam = vec![0.0; m];
    let lagrangian_min = |lam: &[f64]| -> Result<Vector> {
        let mut q = objective.clone();
        for (l, c) in lam.iter().zip(constraints) {
            if *l != 0.0 {
                q = q.add_scaled(*l, c);
            }
        }
        let total: f64 = lam.iter().sum();
        q.minimizer().ok_or(Error::IndefiniteLagrangian(total))
    };
    let mut y = lagrangian_min(&lam)?;
    for sweep in 0..MAX_SWEEPS {
        let violation = constraints
            .iter()
            .map(|c| c.value(&y))
            .fold(f64::NEG_INFINITY, f64::max);
        let gap = lam
            .iter()
            .zip(constraints)
            .map(|(l, c)| l * c.value(&y))
            .sum::<f64>()
            .abs();
        if violation <= tol && gap <= tol {
            return Ok(QcqpSolution {
                point: y,
                multipliers: lam,
                violation: violation.max(0.0),
                gap,
                sweeps: sweep,
            });
        }
        for i in 0..m {
            let current = constraints[i].value(&y);
            if lam[i] == 0.0 && current <= 0.0 {
                continue;
            }
            let mut trial = lam.clone();
            let mut eval = |t: f64| -> Result<(f64, Vector)> {
                trial[i] = t;
                let p = lagrangian_min(&trial)?;
                Ok((constraints[i].value(&p), p))
            };
            let (at_zero, p0) = eval(0.0)?;
            if at_zero <= 0.0 {
                lam[i] = 0.0;
                y = p0;
                continue;
            }
            // Grow the bracket ×10; if the Lagrangian turns indefinite first,
            // bisect between the last definite multiplier and the failure.
            let mut lo = 0.0;
            let mut hi = lam[i].max(1.0);
            let (mut v_hi, mut p_hi);
            loop {
                match eval(hi) {
                    Ok((v, p)) if v <= 0.0 => {
                        v_hi = v;
                        p_hi = p;
                        break;
                    }
                    Ok(_) => {
                        lo = hi;
                        hi *= 10.0;
                        if hi > MULTIPLIER_CAP {
                            return Err(Error::InfeasibleSet);
                        }
                    }
                    Err(Error::IndefiniteLagrangian(_)) => {
                        let mut bad = hi;
                        let mut found = None;
                        while bad - lo > 1e-14 * bad {
                            let mid = 0.5 * (lo + bad);
                            match eval(mid) {
                                Ok((v, p)) if v <= 0.0 => {
                                    found = Some((mid, v, p));
                                    break;
                                }
                                Ok(_) => lo = mid,
                                Err(_) => bad = mid,
                            }
                        }
                        let (h, v, p) = found.ok_or(Error::IndefiniteLagrangian(bad))?;
                        hi = h;
                        v_hi = v;
                        p_hi = p;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            for _ in 0..200 {
                if hi - lo <= 1e-15 * hi || v_hi.abs() <= 0.1 * tol {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let (v, p) = eval(mid)?;
                if v > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                    v_hi = v;
                    p_hi = p;
                }
            }
            lam[i] = hi;
            y = p_hi;
        }
    }
    let violation = constraints
        .iter()
        .map(|c| c.value(&y))
        .fold(f64::NEG_INFINITY, f64::max);
    Err(Error::NoConvergence {
        what: "dual coordinate ascent",
        iterations: MAX_SWEEPS,
        residual: violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_value_and_gradient() {
        let q = Quadratic::diagonal(&[2.0, 0.0], Vector::from([0.0, -1.0]), 0.0).unwrap();
        assert_eq!(q.value(&[1.0, 1.0]), 0.0);
        assert_eq!(q.gradient(&[1.0, 1.0]), Vector::from([2.0, -1.0]));
        let iso = Quadratic::isotropic(2.0, &[1.0, 2.0]);
        assert!((iso.value(&[2.0, 2.0]) - 1.0).abs() < 1e-15);
        assert!(iso.minimizer().unwrap().dist(&[1.0, 2.0]) < 1e-14);
    }

    #[test]
    fn qcqp_ball_projection() {
        let obj = Quadratic::isotropic(1.0, &[2.0, 0.0]);
        let ball = Quadratic::isotropic(2.0, &[0.0, 0.0]).add_scaled(1.0, &Quadratic::affine(Vector::zeros(2), -1.0));
        let sol = solve_qcqp(&obj, &[ball], 1e-13).unwrap();
        assert!(sol.point.dist(&[1.0, 0.0]) < 1e-10);
        assert!((sol.multipliers[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn qcqp_two_halfspaces_corner() {
        // min ½‖y − (1,1)‖² s.t. y1 ≤ 0, y2 ≤ 0 → origin, multipliers (1,1).
        let obj = Quadratic::isotropic(1.0, &[1.0, 1.0]);
        let c1 = Quadratic::affine(Vector::from([1.0, 0.0]), 0.0);
        let c2 = Quadratic::affine(Vector::from([0.0, 1.0]), 0.0);
        let sol = solve_qcqp(&obj, &[c1, c2], 1e-13).unwrap();
        assert!(sol.point.norm() < 1e-12);
        assert!((sol.multipliers[0] - 1.0).abs() < 1e-9);
        assert!((sol.multipliers[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn qcqp_reports_empty_set() {
        let obj = Quadratic::isotropic(1.0, &[0.0]);
        let c = Quadratic::affine(Vector::from([0.0]), 1.0);
        assert_eq!(solve_qcqp(&obj, &[c], 1e-12).unwrap_err(), Error::InfeasibleSet);
    }
}
