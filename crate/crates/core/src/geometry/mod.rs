//! Constraint sets with exact projection oracles.

mod quadratic;
pub mod sampling;

pub use quadratic::{max_value, solve_qcqp, QcqpSolution, Quadratic};

use crate::error::{Error, Result};
use crate::vector::{dot, Vector};

/// Default absolute tolerance for membership tests.
pub const CONTAINS_TOL: f64 = 1e-9;

/// Tolerance used for sublevel-set projections.
pub const SUBLEVEL_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetKind {
    Box,
    Ball,
    UnitSphere,
    AffineSubspace,
    SublevelSet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxSet {
    lower: Vector,
    upper: Vector,
}

impl BoxSet {
    pub fn new(lower: Vector, upper: Vector) -> Result<Self> {
        if lower.dim() != upper.dim() {
            return Err(Error::DimensionMismatch {
                expected: lower.dim(),
                got: upper.dim(),
            });
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| !(l <= u)) {
            return Err(Error::InfeasibleSet);
        }
        Ok(BoxSet { lower, upper })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(Vector::from([lo]), Vector::from([hi]))
    }

    pub fn lower(&self) -> &Vector {
        &self.lower
    }

    pub fn upper(&self) -> &Vector {
        &self.upper
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BallSet {
    center: Vector,
    radius: f64,
}

impl BallSet {
    pub fn new(center: Vector, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(Error::InfeasibleSet);
        }
        Ok(BallSet { center, radius })
    }
}

/// `{y : ‖y‖ = 1}`, proximally smooth with radius 1.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitSphere {
    dim: usize,
}

impl UnitSphere {
    pub fn new(dim: usize) -> Self {
        UnitSphere { dim }
    }
}

/// `base + span(basis)` with an orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineSubspace {
    base: Vector,
    basis: Vec<Vector>,
}

impl AffineSubspace {
    pub fn new(base: Vector, basis: Vec<Vector>) -> Result<Self> {
        for (i, u) in basis.iter().enumerate() {
            if u.dim() != base.dim() {
                return Err(Error::DimensionMismatch {
                    expected: base.dim(),
                    got: u.dim(),
                });
            }
            for (j, v) in basis.iter().enumerate().take(i + 1) {
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot(u, v) - target).abs() > 1e-12 {
                    return Err(Error::InvalidConstants(
                        "affine subspace basis is not orthonormal".into(),
                    ));
                }
            }
        }
        Ok(AffineSubspace { base, basis })
    }

    /// `{y : ⟨normal, y − base⟩ = 0}`.
    pub fn hyperplane(base: Vector, normal: &[f64]) -> Result<Self> {
        let basis = orthonormal_complement(normal)?;
        Self::new(base, basis)
    }

    /// The translated tangent space `x + x^⊥` of the unit sphere at `x`.
    pub fn sphere_tangent(x: &[f64]) -> Result<Self> {
        Self::hyperplane(Vector::from(x), x)
    }

    pub fn base(&self) -> &Vector {
        &self.base
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    /// Orthogonal projection of a direction onto the subspace.
    pub fn project_direction(&self, v: &[f64]) -> Vector {
        let mut out = Vector::zeros(v.len());
        for u in &self.basis {
            out.axpy(dot(u, v), u);
        }
        out
    }

    pub fn project(&self, y: &[f64]) -> Vector {
        self.base.add(&self.project_direction(&Vector::from(y).sub(&self.base)))
    }
}

/// Orthonormal basis of `normal^⊥` by modified Gram–Schmidt on the standard
/// basis, skipping the coordinate most aligned with `normal`.
fn orthonormal_complement(normal: &[f64]) -> Result<Vec<Vector>> {
    let d = normal.len();
    let n = crate::vector::norm(normal);
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    let unit = Vector::from(normal).scale(1.0 / n);
    let skip = (0..d)
        .max_by(|&a, &b| unit[a].abs().total_cmp(&unit[b].abs()))
        .unwrap_or(0);
    let mut basis: Vec<Vector> = Vec::with_capacity(d.saturating_sub(1));
    for k in (0..d).filter(|&k| k != skip) {
        let mut v = Vector::basis(d, k);
        for _ in 0..2 {
            v.axpy(-dot(&unit, &v), &unit);
            for u in &basis {
                v.axpy(-dot(u, &v), u);
            }
        }
        let vn = v.norm();
        basis.push(v.scale(1.0 / vn));
    }
    Ok(basis)
}

/// `{y : max_i q_i(y) ≤ 0}` for quadratic pieces `q_i`.
///
/// Convex pieces give a convex set with radius ∞. Nonconvex pieces are
/// accepted with a declared proximal radius; their projection is the dual
/// solution, which is certified globally optimal whenever the Lagrangian
/// stays positive definite and fails loudly otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct SublevelSet {
    pieces: Vec<Quadratic>,
    radius: f64,
    convex: bool,
    bounds: Option<(Vector, Vector)>,
    interior: Option<Vector>,
}

impl SublevelSet {
    pub fn convex(pieces: Vec<Quadratic>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidConstants("no constraint pieces".into()));
        }
        if let Some(q) = pieces.iter().find(|q| !q.is_convex()) {
            return Err(Error::InvalidConstants(format!(
                "constraint piece has negative curvature {:e}",
                q.min_eigenvalue()
            )));
        }
        Ok(SublevelSet {
            pieces,
            radius: f64::INFINITY,
            convex: true,
            bounds: None,
            interior: None,
        })
    }

    pub fn with_radius(pieces: Vec<Quadratic>, radius: f64) -> Result<Self> {
        if pieces.is_empty() || !(radius > 0.0) {
            return Err(Error::InvalidConstants("bad sublevel set".into()));
        }
        let convex = pieces.iter().all(Quadratic::is_convex);
        Ok(SublevelSet {
            pieces,
            radius: if convex { f64::INFINITY } else { radius },
            convex,
            bounds: None,
            interior: None,
        })
    }

    /// Attach a bounding box used by grid oracles.
    pub fn with_bounds(mut self, lower: Vector, upper: Vector) -> Self {
        self.bounds = Some((lower, upper));
        self
    }

    /// Attach a strictly feasible point.
    pub fn with_interior_point(mut self, point: Vector) -> Self {
        self.interior = Some(point);
        self
    }

    pub fn interior_point(&self) -> Option<&Vector> {
        self.interior.as_ref()
    }

    pub fn pieces(&self) -> &[Quadratic] {
        &self.pieces
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        max_value(&self.pieces, y).0
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    fn project(&self, y: &[f64]) -> Result<Vector> {
        if self.value(y) <= 0.0 {
            return Ok(Vector::from(y));
        }
        let sol = project_sublevel(&self.pieces, y, SUBLEVEL_TOL)?;
        if !self.convex {
            let d = sol.dist(y);
            if d >= self.radius {
                return Err(Error::OutsideTube {
                    distance: d,
                    radius: self.radius,
                });
            }
        }
        Ok(sol)
    }
}

/// Euclidean projection of `z` onto `{max_i q_i ≤ 0}` by dual bisection.
///
/// The returned point satisfies `max_i q_i(p) ≤ tol` and its distance to `z`
/// exceeds the true distance by at most the duality gap, which is `≤ tol`.
pub fn project_sublevel(pieces: &[Quadratic], z: &[f64], tol: f64) -> Result<Vector> {
    if max_value(pieces, z).0 <= 0.0 {
        return Ok(Vector::from(z));
    }
    let objective = Quadratic::isotropic(1.0, z);
    Ok(solve_qcqp(&objective, pieces, tol)?.point)
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProxSmoothSet {
    Box(BoxSet),
    Ball(BallSet),
    UnitSphere(UnitSphere),
    Affine(AffineSubspace),
    Sublevel(SublevelSet),
}

impl ProxSmoothSet {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Ok(ProxSmoothSet::Box(BoxSet::interval(lo, hi)?))
    }

    pub fn unit_sphere(dim: usize) -> Self {
        ProxSmoothSet::UnitSphere(UnitSphere::new(dim))
    }

    pub fn kind(&self) -> SetKind {
        match self {
            ProxSmoothSet::Box(_) => SetKind::Box,
            ProxSmoothSet::Ball(_) => SetKind::Ball,
            ProxSmoothSet::UnitSphere(_) => SetKind::UnitSphere,
            ProxSmoothSet::Affine(_) => SetKind::AffineSubspace,
            ProxSmoothSet::Sublevel(_) => SetKind::SublevelSet,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ProxSmoothSet::Box(b) => b.lower.dim(),
            ProxSmoothSet::Ball(b) => b.center.dim(),
            ProxSmoothSet::UnitSphere(s) => s.dim,
            ProxSmoothSet::Affine(a) => a.base.dim(),
            ProxSmoothSet::Sublevel(s) => s.pieces[0].dim(),
        }
    }

    /// The proximal smoothness radius `R`; infinite for convex sets.
    pub fn proximal_radius(&self) -> f64 {
        match self {
            ProxSmoothSet::UnitSphere(_) => 1.0,
            ProxSmoothSet::Sublevel(s) => s.radius,
            _ => f64::INFINITY,
        }
    }

    pub fn is_convex(&self) -> bool {
        match self {
            ProxSmoothSet::UnitSphere(_) => false,
            ProxSmoothSet::Sublevel(s) => s.convex,
            _ => true,
        }
    }

    fn check_dim(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: y.len(),
            });
        }
        Ok(())
    }

    pub fn project(&self, y: &[f64]) -> Result<Vector> {
        self.check_dim(y)?;
        match self {
            ProxSmoothSet::Box(b) => Ok(y
                .iter()
                .zip(b.lower.iter().zip(b.upper.iter()))
                .map(|(v, (l, u))| v.clamp(*l, *u))
                .collect()),
            ProxSmoothSet::Ball(b) => {
                let diff = Vector::from(y).sub(&b.center);
                let n = diff.norm();
                if n <= b.radius {
                    Ok(Vector::from(y))
                } else {
                    Ok(b.center.add_scaled(b.radius / n, &diff))
                }
            }
            ProxSmoothSet::UnitSphere(_) => {
                let n = crate::vector::norm(y);
                if n == 0.0 {
                    return Err(Error::ZeroVector);
                }
                if (n - 1.0).abs() >= 1.0 {
                    return Err(Error::OutsideTube {
                        distance: (n - 1.0).abs(),
                        radius: 1.0,
                    });
                }
                Ok(Vector::from(y).scale(1.0 / n))
            }
            ProxSmoothSet::Affine(a) => Ok(a.project(y)),
            ProxSmoothSet::Sublevel(s) => s.project(y),
        }
    }

    pub fn distance(&self, y: &[f64]) -> Result<f64> {
        if self.contains(y, 0.0) {
            return Ok(0.0);
        }
        Ok(self.project(y)?.dist(y))
    }

    /// Membership up to an absolute tolerance on the defining residual.
    pub fn contains(&self, y: &[f64], tol: f64) -> bool {
        if y.len() != self.dim() {
            return false;
        }
        match self {
            ProxSmoothSet::Box(b) => y
                .iter()
                .zip(b.lower.iter().zip(b.upper.iter()))
                .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol),
            ProxSmoothSet::Ball(b) => b.center.dist(y) <= b.radius + tol,
            ProxSmoothSet::UnitSphere(_) => (crate::vector::norm(y) - 1.0).abs() <= tol,
            ProxSmoothSet::Affine(a) => a.project(y).dist(y) <= tol,
            ProxSmoothSet::Sublevel(s) => s.value(y) <= tol,
        }
    }

    /// A box containing the set, when one is known.
    pub fn bounding_box(&self) -> Option<(Vector, Vector)> {
        match self {
            ProxSmoothSet::Box(b) => Some((b.lower.clone(), b.upper.clone())),
            ProxSmoothSet::Ball(b) => Some((
                b.center.iter().map(|c| c - b.radius).collect(),
                b.center.iter().map(|c| c + b.radius).collect(),
            )),
            ProxSmoothSet::UnitSphere(s) => Some((
                Vector::from(vec![-1.0; s.dim]),
                Vector::from(vec![1.0; s.dim]),
            )),
            ProxSmoothSet::Affine(_) => None,
            ProxSmoothSet::Sublevel(s) => s.bounds.clone(),
        }
    }
}

#[cfg(test)]
mod tests;
