//! Concrete sample losses `f(·, ξ)`.

use super::{Composite, Loss, Outer};
use crate::vector::{dot, Vector};

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `f(x, ξ_i) = ⟨a_i, x⟩ + b_i`.
#[derive(Clone, Debug)]
pub struct Linear {
    slopes: Vec<Vector>,
    offsets: Vec<f64>,
}

impl Linear {
    pub fn new(slopes: Vec<Vector>, offsets: Vec<f64>) -> Self {
        assert_eq!(slopes.len(), offsets.len());
        assert!(!slopes.is_empty());
        Linear { slopes, offsets }
    }
}

impl Loss for Linear {
    fn dim(&self) -> usize {
        self.slopes[0].dim()
    }
    fn num_samples(&self) -> usize {
        self.slopes.len()
    }
    fn value(&self, x: &[f64], xi: usize) -> f64 {
        dot(&self.slopes[xi], x) + self.offsets[xi]
    }
    fn subgradient(&self, _x: &[f64], xi: usize) -> Vector {
        self.slopes[xi].clone()
    }
    fn ridge(&self, xi: usize) -> Option<Vector> {
        Some(self.slopes[xi].clone())
    }
}

/// `f(x, ξ_i) = |⟨a_i, x⟩ − b_i|`.
#[derive(Clone, Debug)]
pub struct AbsLinear {
    a: Vec<Vector>,
    b: Vec<f64>,
}

impl AbsLinear {
    pub fn new(a: Vec<Vector>, b: Vec<f64>) -> Self {
        assert_eq!(a.len(), b.len());
        assert!(!a.is_empty());
        AbsLinear { a, b }
    }
}

impl Loss for AbsLinear {
    fn dim(&self) -> usize {
        self.a[0].dim()
    }
    fn num_samples(&self) -> usize {
        self.a.len()
    }
    fn value(&self, x: &[f64], xi: usize) -> f64 {
        (dot(&self.a[xi], x) - self.b[xi]).abs()
    }
    fn subgradient(&self, x: &[f64], xi: usize) -> Vector {
        self.a[xi].scale(sign(dot(&self.a[xi], x) - self.b[xi]))
    }
    fn ridge(&self, xi: usize) -> Option<Vector> {
        Some(self.a[xi].clone())
    }
    fn composite(&self) -> Option<&dyn Composite> {
        Some(self)
    }
    fn nonnegative(&self) -> bool {
        true
    }
}

impl Composite for AbsLinear {
    fn outer(&self) -> Outer {
        Outer::Abs
    }
    fn inner(&self, x: &[f64], xi: usize) -> Vector {
        Vector::from([dot(&self.a[xi], x) - self.b[xi]])
    }
    fn jacobian(&self, _x: &[f64], xi: usize) -> Vec<Vector> {
        vec![self.a[xi].clone()]
    }
    fn inner_is_affine(&self) -> bool {
        true
    }
}

/// `f(x, ξ_i) = |⟨a_i, x⟩² − b_i|`, the robust phase retrieval loss.
///
/// In one dimension with `a = 1, b = 1` this is `|x² − 1|`.
#[derive(Clone, Debug)]
pub struct AbsQuadratic {
    a: Vec<Vector>,
    b: Vec<f64>,
}

impl AbsQuadratic {
    pub fn new(a: Vec<Vector>, b: Vec<f64>) -> Self {
        assert_eq!(a.len(), b.len());
        assert!(!a.is_empty());
        AbsQuadratic { a, b }
    }

    pub fn measurements(&self) -> &[Vector] {
        &self.a
    }
}

impl Loss for AbsQuadratic {
    fn dim(&self) -> usize {
        self.a[0].dim()
    }
    fn num_samples(&self) -> usize {
        self.a.len()
    }
    fn value(&self, x: &[f64], xi: usize) -> f64 {
        let s = dot(&self.a[xi], x);
        (s * s - self.b[xi]).abs()
    }
    fn subgradient(&self, x: &[f64], xi: usize) -> Vector {
        let s = dot(&self.a[xi], x);
        self.a[xi].scale(2.0 * s * sign(s * s - self.b[xi]))
    }
    fn ridge(&self, xi: usize) -> Option<Vector> {
        Some(self.a[xi].clone())
    }
    fn composite(&self) -> Option<&dyn Composite> {
        Some(self)
    }
    fn nonnegative(&self) -> bool {
        true
    }
}

impl Composite for AbsQuadratic {
    fn outer(&self) -> Outer {
        Outer::Abs
    }
    fn inner(&self, x: &[f64], xi: usize) -> Vector {
        let s = dot(&self.a[xi], x);
        Vector::from([s * s - self.b[xi]])
    }
    fn jacobian(&self, x: &[f64], xi: usize) -> Vec<Vector> {
        vec![self.a[xi].scale(2.0 * dot(&self.a[xi], x))]
    }
}

/// `f(x) = Σ_j |x_j − c_j|`, a single deterministic sample.
#[derive(Clone, Debug)]
pub struct ShiftedL1 {
    center: Vector,
}

impl ShiftedL1 {
    pub fn new(center: Vector) -> Self {
        ShiftedL1 { center }
    }
}

impl Loss for ShiftedL1 {
    fn dim(&self) -> usize {
        self.center.dim()
    }
    fn num_samples(&self) -> usize {
        1
    }
    fn value(&self, x: &[f64], _xi: usize) -> f64 {
        x.iter().zip(self.center.iter()).map(|(a, c)| (a - c).abs()).sum()
    }
    fn subgradient(&self, x: &[f64], _xi: usize) -> Vector {
        x.iter().zip(self.center.iter()).map(|(a, c)| sign(a - c)).collect()
    }
    fn ridge(&self, _xi: usize) -> Option<Vector> {
        if self.center.dim() == 1 {
            Some(Vector::from([1.0]))
        } else {
            None
        }
    }
    fn composite(&self) -> Option<&dyn Composite> {
        Some(self)
    }
    fn nonnegative(&self) -> bool {
        true
    }
}

impl Composite for ShiftedL1 {
    fn outer(&self) -> Outer {
        Outer::L1
    }
    fn inner(&self, x: &[f64], _xi: usize) -> Vector {
        Vector::from(x).sub(&self.center)
    }
    fn jacobian(&self, x: &[f64], _xi: usize) -> Vec<Vector> {
        (0..x.len()).map(|i| Vector::basis(x.len(), i)).collect()
    }
    fn inner_is_affine(&self) -> bool {
        true
    }
}

pub(super) fn sign_vector(u: &[f64]) -> Vector {
    u.iter().map(|v| sign(*v)).collect()
}
