//! Bloch-vector and Liouville-space representations of the qubit state.
//!
//! The density matrix is vectorized row-major: `(ρ00, ρ01, ρ10, ρ11)`, with
//! `|0⟩` the spin-up (`σz = +1`) state. This ordering is fixed.

use nalgebra::{Vector3, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|M|² ≤ 1` for states produced by physical evolution.
pub const BLOCH_NORM_TOL: f64 = 1e-9;
const TRACE_TOL: f64 = 1e-12;
const HERMITICITY_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = 1e-10;

/// Bloch vector `(Mx, My, Mz)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Magnetization {
    pub mx: f64,
    pub my: f64,
    pub mz: f64,
}

impl Magnetization {
    pub const fn new(mx: f64, my: f64, mz: f64) -> Self {
        Self { mx, my, mz }
    }

    pub const fn longitudinal(mz: f64) -> Self {
        Self { mx: 0.0, my: 0.0, mz }
    }

    pub fn norm(&self) -> f64 {
        self.to_vector().norm()
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.mx, self.my, self.mz)
    }

    pub fn from_vector(v: Vector3<f64>) -> Self {
        Self { mx: v.x, my: v.y, mz: v.z }
    }

    /// Rejects non-finite components and vectors outside the Bloch ball.
    pub fn validate(self) -> Result<Self> {
        if !(self.mx.is_finite() && self.my.is_finite() && self.mz.is_finite()) {
            return Err(Error::NonFinite { name: "magnetization" });
        }
        let n2 = self.mx * self.mx + self.my * self.my + self.mz * self.mz;
        if n2 > 1.0 + BLOCH_NORM_TOL {
            return Err(Error::MagnetizationOutOfRange(format!("|M|² = {n2} exceeds the Bloch ball")));
        }
        Ok(self)
    }

    pub fn max_abs_diff(&self, other: &Magnetization) -> f64 {
        (self.to_vector() - other.to_vector()).amax()
    }
}

/// Vectorized 2×2 density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiouvilleState(pub Vector4<Complex64>);

impl LiouvilleState {
    pub fn rho00(&self) -> Complex64 {
        self.0[0]
    }
    pub fn rho01(&self) -> Complex64 {
        self.0[1]
    }
    pub fn rho10(&self) -> Complex64 {
        self.0[2]
    }
    pub fn rho11(&self) -> Complex64 {
        self.0[3]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0] + self.0[3]
    }

    /// Smallest eigenvalue of the Hermitian part of the reassembled matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let a = self.rho00().re;
        let d = self.rho11().re;
        let off = 0.5 * (self.rho01() + self.rho10().conj());
        let half_gap = (0.25 * (a - d) * (a - d) + off.norm_sqr()).sqrt();
        0.5 * (a + d) - half_gap
    }

    /// Pauli expectation values, without any validity check. Only the
    /// Hermitian part contributes.
    pub fn pauli_expectations(&self) -> Vector3<f64> {
        let r01 = 0.5 * (self.rho01() + self.rho10().conj());
        Vector3::new(2.0 * r01.re, -2.0 * r01.im, (self.rho00() - self.rho11()).re)
    }

    pub fn check_physical(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::NonPhysicalState(format!("trace {tr} != 1")));
        }
        let herm = (self.rho10() - self.rho01().conj()).norm().max(self.rho00().im.abs()).max(self.rho11().im.abs());
        if herm > HERMITICITY_TOL {
            return Err(Error::NonPhysicalState(format!("not Hermitian (deviation {herm:e})")));
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::NonPhysicalState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(())
    }
}

/// `ρ = (I + Mx σx + My σy + Mz σz) / 2`, vectorized.
pub fn bloch_to_liouville(m: Magnetization) -> LiouvilleState {
    let rho01 = Complex64::new(0.5 * m.mx, -0.5 * m.my);
    LiouvilleState(Vector4::new(
        Complex64::new(0.5 * (1.0 + m.mz), 0.0),
        rho01,
        rho01.conj(),
        Complex64::new(0.5 * (1.0 - m.mz), 0.0),
    ))
}

/// Inverse of [`bloch_to_liouville`]; rejects non-physical density matrices.
pub fn liouville_to_bloch(s: &LiouvilleState) -> Result<Magnetization> {
    s.check_physical()?;
    Ok(Magnetization::from_vector(s.pauli_expectations()))
}
