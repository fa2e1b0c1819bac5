//! Lindblad generators in Liouville space.

use std::ops::Add;

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;

use crate::params::SystemParams;
use crate::state::LiouvilleState;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);
const I: C = C::new(0.0, 1.0);

/// Rotation axis of a pulse, in the rotating frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

pub(crate) fn sigma_x() -> Matrix2<C> {
    Matrix2::new(ZERO, ONE, ONE, ZERO)
}

pub(crate) fn sigma_y() -> Matrix2<C> {
    Matrix2::new(ZERO, -I, I, ZERO)
}

pub(crate) fn sigma_z() -> Matrix2<C> {
    Matrix2::new(ONE, ZERO, ZERO, -ONE)
}

/// `|0⟩⟨1|`, raising toward the spin-up state.
pub(crate) fn sigma_plus() -> Matrix2<C> {
    Matrix2::new(ZERO, ONE, ZERO, ZERO)
}

pub(crate) fn sigma_minus() -> Matrix2<C> {
    Matrix2::new(ZERO, ZERO, ONE, ZERO)
}

fn kron(a: &Matrix2<C>, b: &Matrix2<C>) -> Matrix4<C> {
    Matrix4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// Generator acting on row-major vectorized density matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Superoperator(pub Matrix4<C>);

impl Superoperator {
    pub fn zero() -> Self {
        Self(Matrix4::zeros())
    }

    /// `ρ ↦ A ρ B`, using `vec(AρB) = (A ⊗ Bᵀ) vec(ρ)` for row-major vec.
    pub fn sandwich(a: &Matrix2<C>, b: &Matrix2<C>) -> Self {
        Self(kron(a, &b.transpose()))
    }

    /// `ρ ↦ -i [H, ρ]` (ħ = 1).
    pub fn hamiltonian(h: &Matrix2<C>) -> Self {
        let id = Matrix2::identity();
        Self((Self::sandwich(h, &id).0 - Self::sandwich(&id, h).0) * (-I))
    }

    /// `ρ ↦ L ρ L† - ½ {L†L, ρ}`.
    pub fn dissipator(l: &Matrix2<C>) -> Self {
        let ld = l.adjoint();
        let ldl = ld * l;
        let id = Matrix2::identity();
        let jump = Self::sandwich(l, &ld).0;
        let anti = Self::sandwich(&ldl, &id).0 + Self::sandwich(&id, &ldl).0;
        Self(jump - anti * C::new(0.5, 0.0))
    }

    pub fn apply(&self, s: &LiouvilleState) -> LiouvilleState {
        LiouvilleState(self.0 * s.0)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self(self.0 * C::new(k, 0.0))
    }

    pub fn eigenvalues(&self) -> Vec<C> {
        self.0.schur().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default()
    }

    /// Rate of change of the trace, as a row functional on vec(ρ).
    pub fn trace_derivative(&self, s: &LiouvilleState) -> C {
        let d = self.0 * s.0;
        d[0] + d[3]
    }
}

impl Add for Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

/// Interaction-picture Lindblad generator of the idle (delay) segment with
/// jump operators `√γ↑ σ⁺`, `√γ↓ σ⁻` and `√γφ σz`.
pub fn lindblad_superoperator(p: &SystemParams) -> Superoperator {
    let jumps = [
        sigma_plus() * C::new(p.gamma_up().sqrt(), 0.0),
        sigma_minus() * C::new(p.gamma_down().sqrt(), 0.0),
        sigma_z() * C::new(p.gamma_phi().sqrt(), 0.0),
    ];
    jumps.iter().map(Superoperator::dissipator).fold(Superoperator::zero(), |acc, d| acc + d)
}

/// Coherent drive `H = ω σ_axis / 2` as a Liouville generator. A negative
/// `omega` rotates the other way.
pub fn rotation_generator(omega: f64, axis: Axis) -> Superoperator {
    let sigma = match axis {
        Axis::X => sigma_x(),
        Axis::Y => sigma_y(),
    };
    Superoperator::hamiltonian(&(sigma * C::new(0.5 * omega, 0.0)))
}

/// Vectorized `σ/2` for each Pauli axis, used to read off Bloch components.
pub(crate) fn half_pauli_vectors() -> [Vector4<C>; 3] {
    let h = 0.5;
    [
        Vector4::new(ZERO, C::new(h, 0.0), C::new(h, 0.0), ZERO),
        Vector4::new(ZERO, C::new(0.0, -h), C::new(0.0, h), ZERO),
        Vector4::new(C::new(h, 0.0), ZERO, ZERO, C::new(-h, 0.0)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{validate_params, Dephasing, RawParams};
    use crate::state::{bloch_to_liouville, Magnetization};

    fn params(t1: f64, t2: f64, m_eq: f64) -> SystemParams {
        validate_params(RawParams { t1: Some(t1), t2: Some(t2), t_phi: None, m_eq, omega1: 1.0 }).unwrap()
    }

    fn sorted_re(mut v: Vec<C>) -> Vec<f64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        v.iter().map(|z| z.re).collect()
    }

    #[test]
    fn spectrum_matches_decay_rates() {
        for &(t1, t2, m) in &[(100.0, 1.0, 0.8), (3.0, 0.7, -0.2), (1.0, 2.0, 0.0), (7.57, 0.6, 0.5)] {
            let p = params(t1, t2, m);
            let ev = lindblad_superoperator(&p).eigenvalues();
            assert!(ev.iter().all(|z| z.im.abs() < 1e-12));
            let re = sorted_re(ev);
            let mut expected = vec![-1.0 / t1, -1.0 / t2, -1.0 / t2, 0.0];
            expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (a, b) in re.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-10, "{re:?} vs {expected:?}");
            }
        }
    }

    #[test]
    fn steady_state_is_equilibrium_magnetization() {
        for &m in &[0.8, 0.0, -0.4] {
            let p = params(10.0, 1.0, m);
            let gen = lindblad_superoperator(&p);
            let fixed = bloch_to_liouville(Magnetization::longitudinal(m));
            assert!(gen.apply(&fixed).0.camax() < 1e-15);
        }
        // meq = 0: maximally mixed is stationary
        let gen = lindblad_superoperator(&params(5.0, 2.0, 0.0));
        assert!(gen.apply(&bloch_to_liouville(Magnetization::default())).0.camax() < 1e-15);
    }

    #[test]
    fn bloch_equations_from_generator() {
        // d/dt of Pauli expectations equals the Bloch right-hand side
        let p = params(4.0, 0.9, 0.6);
        let gen = lindblad_superoperator(&p);
        let m = Magnetization::new(0.3, -0.2, 0.5);
        let d = LiouvilleState(gen.apply(&bloch_to_liouville(m)).0).pauli_expectations();
        assert!((d.x + m.mx / p.t2()).abs() < 1e-14);
        assert!((d.y + m.my / p.t2()).abs() < 1e-14);
        assert!((d.z - (p.m_eq() - m.mz) / p.t1()).abs() < 1e-14);
    }

    #[test]
    fn trace_preserving() {
        let p = validate_params(RawParams {
            t1: Some(2.0),
            t2: None,
            t_phi: Some(Dephasing::Finite(0.3)),
            m_eq: 0.1,
            omega1: 1.0,
        })
        .unwrap();
        let gen = lindblad_superoperator(&p) + rotation_generator(3.0, Axis::Y);
        for m in [Magnetization::new(0.1, 0.2, 0.3), Magnetization::longitudinal(-1.0)] {
            assert!(gen.trace_derivative(&bloch_to_liouville(m)).norm() < 1e-12);
        }
    }

    #[test]
    fn rotation_generator_precesses_about_y() {
        let gen = rotation_generator(2.0, Axis::Y);
        let m = Magnetization::new(0.0, 0.0, 1.0);
        let d = gen.apply(&bloch_to_liouville(m)).pauli_expectations();
        // dMx/dt = ω Mz, dMz/dt = -ω Mx
        assert!((d.x - 2.0).abs() < 1e-15 && d.y.abs() < 1e-15 && d.z.abs() < 1e-15);
    }
}
