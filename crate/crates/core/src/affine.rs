//! Affine maps on the Bloch vector, `M ↦ A·M + b`.
//!
//! Every segment propagator of the pulse protocol restricts to this form.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::state::Magnetization;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineMap {
    pub linear: Matrix3<f64>,
    pub offset: Vector3<f64>,
}

impl Default for AffineMap {
    fn default() -> Self {
        Self::identity()
    }
}

impl AffineMap {
    pub fn new(linear: Matrix3<f64>, offset: Vector3<f64>) -> Self {
        Self { linear, offset }
    }

    pub fn identity() -> Self {
        Self { linear: Matrix3::identity(), offset: Vector3::zeros() }
    }

    pub fn apply(&self, m: Magnetization) -> Magnetization {
        Magnetization::from_vector(self.apply_vec(&m.to_vector()))
    }

    pub fn apply_vec(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.linear * v + self.offset
    }

    /// `next ∘ self`: apply `self` first, then `next`.
    pub fn then(&self, next: &AffineMap) -> AffineMap {
        AffineMap { linear: next.linear * self.linear, offset: next.linear * self.offset + next.offset }
    }

    /// Largest singular value of the linear part.
    pub fn operator_norm(&self) -> f64 {
        self.linear.singular_values().max()
    }

    pub fn is_contraction(&self, tol: f64) -> bool {
        self.operator_norm() <= 1.0 + tol
    }

    /// Orthogonal linear part with determinant +1 and zero offset.
    pub fn is_rotation(&self, tol: f64) -> bool {
        let gram = self.linear.transpose() * self.linear - Matrix3::identity();
        gram.amax() <= tol && (self.linear.determinant() - 1.0).abs() <= tol && self.offset.amax() <= tol
    }

    pub fn max_abs_diff(&self, other: &AffineMap) -> f64 {
        (self.linear - other.linear).amax().max((self.offset - other.offset).amax())
    }
}

/// `n`-fold composition of `map` by repeated squaring of the pair `(A, b)`.
pub fn compose_n(map: &AffineMap, n: u64) -> AffineMap {
    let mut result = AffineMap::identity();
    let mut base = *map;
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            // powers of the same map commute, so the order is irrelevant
            result = result.then(&base);
        }
        base = base.then(&base);
        k >>= 1;
    }
    result
}
