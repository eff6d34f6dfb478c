//! Per-basepoint set approximations `(X_x, R_x)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::sampling::sample_near;
use crate::geometry::{max_value, AffineSubspace, ProxSmoothSet, Quadratic, SublevelSet, CONTAINS_TOL};
use crate::rng::sphere_point;
use crate::subsolver::find_interior_point;
use crate::vector::{dist_sq, dot, Vector};

/// Largest sampling radius used by the condition checks when the declared
/// radius is infinite or larger.
pub const CHECK_RADIUS_CAP: f64 = 2.0;

/// Accuracy parameters `(R, τ1, r1, τ2, r2)` of a set approximation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApproxParams {
    pub radius: f64,
    pub tau1: f64,
    pub r1: f64,
    pub tau2: f64,
    pub r2: f64,
}

impl ApproxParams {
    /// Parameters of `X_x = X` with the identity retraction. Both conditions
    /// hold at every radius; for finite `R` the radius `r1 = R/2` is recorded,
    /// which gives `ν = 2/R` and `2L/r1 = 4L/R`.
    pub fn exact(radius: f64) -> Self {
        ApproxParams {
            radius,
            tau1: 0.0,
            r1: if radius.is_finite() { 0.5 * radius } else { f64::INFINITY },
            tau2: 0.0,
            r2: f64::INFINITY,
        }
    }

    /// `ν = R / (2 (R − r1)²)`, zero when `R = ∞`.
    pub fn nu(&self) -> Result<f64> {
        if self.radius.is_infinite() {
            return Ok(0.0);
        }
        if !(self.r1 < self.radius) {
            return Err(Error::InvalidConstants(format!(
                "r1 = {} must be below R = {}",
                self.r1, self.radius
            )));
        }
        Ok(self.radius / (2.0 * (self.radius - self.r1).powi(2)))
    }
}

/// Which convex two-sided model of the constraints defines `X_x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintModel {
    /// `g_x = g`; the set adds `(γ/2)‖y − x‖²` to each constraint.
    Exact,
    /// `g_x(y) = max_i g_i(x) + ⟨∇g_i(x), y − x⟩`.
    Linearized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApproxKind {
    Identity,
    TangentSphere,
    FunctionalInner(ConstraintModel),
}

impl ApproxKind {
    pub fn name(self) -> &'static str {
        match self {
            ApproxKind::Identity => "identity",
            ApproxKind::TangentSphere => "tangent",
            ApproxKind::FunctionalInner(ConstraintModel::Exact) => "inner-exact",
            ApproxKind::FunctionalInner(ConstraintModel::Linearized) => "inner-linear",
        }
    }
}

impl std::str::FromStr for ApproxKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            ApproxKind::Identity,
            ApproxKind::TangentSphere,
            ApproxKind::FunctionalInner(ConstraintModel::Exact),
            ApproxKind::FunctionalInner(ConstraintModel::Linearized),
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::Unsupported(format!("approximation {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Retraction {
    Identity,
    /// `y ↦ y/‖y‖`.
    Radial,
}

impl Retraction {
    pub fn apply(self, y: &[f64]) -> Result<Vector> {
        match self {
            Retraction::Identity => Ok(Vector::from(y)),
            Retraction::Radial => {
                let n = crate::vector::norm(y);
                if n == 0.0 {
                    return Err(Error::ZeroVector);
                }
                Ok(Vector::from(y).scale(1.0 / n))
            }
        }
    }
}

/// `X_x` together with `R_x` at one basepoint.
#[derive(Clone, Debug)]
pub struct LocalApproximation {
    pub set: ProxSmoothSet,
    pub retraction: Retraction,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SetApproximation {
    set: ProxSmoothSet,
    kind: ApproxKind,
    params: ApproxParams,
    constraints: Vec<Quadratic>,
    gamma: f64,
}

impl SetApproximation {
    /// `X_x = X`, `R_x = id`.
    pub fn identity(set: ProxSmoothSet) -> Self {
        let params = ApproxParams::exact(set.proximal_radius());
        SetApproximation {
            set,
            kind: ApproxKind::Identity,
            params,
            constraints: Vec::new(),
            gamma: 0.0,
        }
    }

    /// Tangent plane plus radial retraction on the unit sphere, with
    /// `τ1 = τ2 = 1`, the given `r1 < 1`, and `r2 = ∞`.
    pub fn tangent_sphere(dim: usize, r1: f64) -> Result<Self> {
        if !(r1 > 0.0 && r1 < 1.0) {
            return Err(Error::InvalidConstants(format!("r1 = {r1} must lie in (0, 1)")));
        }
        Ok(SetApproximation {
            set: ProxSmoothSet::unit_sphere(dim),
            kind: ApproxKind::TangentSphere,
            params: ApproxParams {
                radius: 1.0,
                tau1: 1.0,
                r1,
                tau2: 1.0,
                r2: f64::INFINITY,
            },
            constraints: Vec::new(),
            gamma: 0.0,
        })
    }

    /// `X_x = {y : g_x(y) + (γ/2)‖y − x‖² ≤ 0}` for `X = {max_i g_i ≤ 0}`.
    ///
    /// `X_x` is convex, so `R = ∞`; the retraction is the identity, so
    /// `τ2 = 0`. `τ1` and `r1` are supplied by the caller.
    pub fn functional_inner(
        set: ProxSmoothSet,
        model: ConstraintModel,
        gamma: f64,
        tau1: f64,
        r1: f64,
    ) -> Result<Self> {
        let ProxSmoothSet::Sublevel(s) = &set else {
            return Err(Error::Unsupported("functional inner approximation needs a sublevel set".into()));
        };
        let constraints = s.pieces().to_vec();
        if !(gamma > 0.0) {
            return Err(Error::InvalidConstants(format!("gamma = {gamma}")));
        }
        Ok(SetApproximation {
            set,
            kind: ApproxKind::FunctionalInner(model),
            params: ApproxParams {
                radius: f64::INFINITY,
                tau1,
                r1,
                tau2: 0.0,
                r2: f64::INFINITY,
            },
            constraints,
            gamma,
        })
    }

    pub fn kind(&self) -> ApproxKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn params(&self) -> &ApproxParams {
        &self.params
    }

    pub fn with_params(mut self, params: ApproxParams) -> Self {
        self.params = params;
        self
    }

    /// The constraint set `X`.
    pub fn set(&self) -> &ProxSmoothSet {
        &self.set
    }

    /// The two-sided model constant `γ` of the functional inner kind.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn check_basepoint(&self, x: &[f64]) -> Result<()> {
        if !self.set.contains(x, CONTAINS_TOL) {
            let v = self.set.distance(x).unwrap_or(f64::INFINITY);
            return Err(Error::InfeasibleBasepoint(v));
        }
        Ok(())
    }

    /// The two-sided models `g_{i,x}` at `y`, one per constraint.
    pub fn constraint_models(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        self.model_pieces(x).iter().map(|q| q.value(y)).collect()
    }

    fn model_pieces(&self, x: &[f64]) -> Vec<Quadratic> {
        match self.kind {
            ApproxKind::FunctionalInner(ConstraintModel::Exact) => self.constraints.clone(),
            ApproxKind::FunctionalInner(ConstraintModel::Linearized) => self
                .constraints
                .iter()
                .map(|g| {
                    let grad = g.gradient(x);
                    Quadratic::affine(grad.clone(), g.value(x) - dot(&grad, x))
                })
                .collect(),
            _ => Vec::new(),
        }
    }

    fn local_pieces(&self, x: &[f64]) -> Vec<Quadratic> {
        let prox = Quadratic::isotropic(self.gamma, x);
        self.model_pieces(x)
            .into_iter()
            .map(|q| q.add_scaled(1.0, &prox))
            .collect()
    }

    /// `max_i g_{i,x}(y) + (γ/2)‖y − x‖²`, nonpositive exactly on `X_x`.
    pub fn local_constraint(&self, x: &[f64], y: &[f64]) -> f64 {
        max_value(&self.local_pieces(x), y).0
    }

    /// `(X_x, R_x)` at a basepoint of `X`.
    pub fn build(&self, x: &[f64]) -> Result<LocalApproximation> {
        self.check_basepoint(x)?;
        match self.kind {
            ApproxKind::Identity => Ok(LocalApproximation {
                set: self.set.clone(),
                retraction: Retraction::Identity,
            }),
            ApproxKind::TangentSphere => Ok(LocalApproximation {
                set: ProxSmoothSet::Affine(AffineSubspace::sphere_tangent(x)?),
                retraction: Retraction::Radial,
            }),
            ApproxKind::FunctionalInner(_) => {
                let pieces = self.local_pieces(x);
                let interior = if max_value(&pieces, x).0 < 0.0 {
                    Vector::from(x)
                } else {
                    find_interior_point(&pieces, x)?
                };
                let mut local = SublevelSet::convex(pieces)?.with_interior_point(interior);
                if let Some((lo, hi)) = self.set.bounding_box() {
                    local = local.with_bounds(lo, hi);
                }
                Ok(LocalApproximation {
                    set: ProxSmoothSet::Sublevel(local),
                    retraction: Retraction::Identity,
                })
            }
        }
    }

    /// `R_x(y)` for `y ∈ X_x ∩ B(x, r2)`.
    pub fn retract(&self, x: &[f64], y: &[f64]) -> Result<Vector> {
        let violation = match self.kind {
            ApproxKind::Identity => self.set.distance(y).unwrap_or(f64::INFINITY),
            ApproxKind::TangentSphere => dot(x, &Vector::from(y).sub(x)).abs(),
            ApproxKind::FunctionalInner(_) => self.local_constraint(x, y).max(0.0),
        };
        if violation > CONTAINS_TOL {
            return Err(Error::OutsideApprox(violation));
        }
        if dist_sq(x, y).sqrt() > self.params.r2 {
            return Err(Error::OutsideRadius {
                radius: self.params.r2,
            });
        }
        match self.kind {
            ApproxKind::TangentSphere => Retraction::Radial.apply(y),
            _ => Ok(Vector::from(y)),
        }
    }

    /// Max over sampled `y ∈ X ∩ B(x, r1)` of `dist(y, X_x) − (τ1/2)‖x − y‖²`.
    pub fn check_condition_i<R: Rng + ?Sized>(
        &self,
        x: &[f64],
        samples: usize,
        rng: &mut R,
    ) -> Result<f64> {
        let local = self.build(x)?;
        let r = self.params.r1.min(CHECK_RADIUS_CAP);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..samples {
            let y = sample_near(&self.set, x, r, rng);
            let d = local.set.distance(&y)?;
            worst = worst.max(d - 0.5 * self.params.tau1 * dist_sq(x, &y));
        }
        Ok(worst)
    }

    /// Max over sampled `y ∈ X_x ∩ B(x, r2)` of `‖y − R_x(y)‖ − (τ2/2)‖x − y‖²`.
    pub fn check_condition_ii<R: Rng + ?Sized>(
        &self,
        x: &[f64],
        samples: usize,
        rng: &mut R,
    ) -> Result<f64> {
        let local = self.build(x)?;
        let r = self.params.r2.min(CHECK_RADIUS_CAP);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..samples {
            let y = sample_near(&local.set, x, r, rng);
            let gap = local.retraction.apply(&y)?.dist(&y);
            worst = worst.max(gap - 0.5 * self.params.tau2 * dist_sq(x, &y));
        }
        Ok(worst)
    }

    /// Points of `X_x`: half drawn from `B(x, radius) ∩ X_x`, half on the
    /// boundary of `X_x` along random rays from its interior point.
    pub fn sample_local_points<R: Rng + ?Sized>(
        &self,
        x: &[f64],
        count: usize,
        radius: f64,
        rng: &mut R,
    ) -> Result<Vec<Vector>> {
        let local = self.build(x)?;
        let mut out = Vec::with_capacity(count);
        let ProxSmoothSet::Sublevel(s) = &local.set else {
            for _ in 0..count {
                out.push(sample_near(&local.set, x, radius, rng));
            }
            return Ok(out);
        };
        let z = s.interior_point().cloned().unwrap_or_else(|| Vector::from(x));
        for k in 0..count {
            if k % 2 == 0 {
                out.push(sample_near(&local.set, x, radius, rng));
                continue;
            }
            let u = sphere_point(rng, x.len());
            let mut hi = radius.max(1e-3);
            while s.value(&z.add_scaled(hi, &u)) <= 0.0 && hi < 1e6 {
                hi *= 2.0;
            }
            let mut lo = 0.0;
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if s.value(&z.add_scaled(mid, &u)) <= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(z.add_scaled(lo, &u));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests;
