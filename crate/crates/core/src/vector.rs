//! Dense real vectors.

use std::ops::{Deref, DerefMut};

/// A point or direction in R^d.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Self {
        Vector(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    /// The `i`-th standard basis vector of R^dim.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(self, other)
    }

    pub fn norm(&self) -> f64 {
        norm(self)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(self, self)
    }

    pub fn dist(&self, other: &[f64]) -> f64 {
        dist(self, other)
    }

    /// `self - other`.
    pub fn sub(&self, other: &[f64]) -> Vector {
        self.iter().zip(other).map(|(a, b)| a - b).collect()
    }

    /// `self + other`.
    pub fn add(&self, other: &[f64]) -> Vector {
        self.iter().zip(other).map(|(a, b)| a + b).collect()
    }

    pub fn scale(&self, s: f64) -> Vector {
        self.iter().map(|a| a * s).collect()
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &[f64]) -> Vector {
        self.iter().zip(other).map(|(a, b)| a + s * b).collect()
    }

    /// In-place `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &[f64]) {
        for (a, b) in self.0.iter_mut().zip(other) {
            *a += s * b;
        }
    }
}

impl Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Vector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl From<&[f64]> for Vector {
    fn from(v: &[f64]) -> Self {
        Vector(v.to_vec())
    }
}

impl<const N: usize> From<[f64; N]> for Vector {
    fn from(v: [f64; N]) -> Self {
        Vector(v.to_vec())
    }
}

impl FromIterator<f64> for Vector {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        Vector(iter.into_iter().collect())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let a = Vector::from([1.0, 2.0]);
        let b = Vector::from([3.0, -1.0]);
        assert_eq!(a.add(&b), Vector::from([4.0, 1.0]));
        assert_eq!(a.sub(&b), Vector::from([-2.0, 3.0]));
        assert_eq!(a.dot(&b), 1.0);
        assert_eq!(a.add_scaled(2.0, &b), Vector::from([7.0, 0.0]));
        assert!((Vector::from([3.0, 4.0]).norm() - 5.0).abs() < 1e-15);
        assert!((dist(&a, &b) - 13f64.sqrt()).abs() < 1e-15);
    }
}
