use std::f64::consts::PI;

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use num_complex::Complex64;
use serde::Serialize;

use super::expm::expm;
use super::superop::{half_pauli_vectors, lindblad_superoperator, rotation_generator, Axis, Superoperator};
use crate::affine::AffineMap;
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::state::LiouvilleState;

/// A hard pulse of angle `θ = π + δ` about `axis`. The deviation `δ` is the
/// stored quantity; `θ` is always derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseSpec {
    axis: Axis,
    delta: f64,
    duration: f64,
}

impl PulseSpec {
    /// Pulse with deviation `delta` from π, driven at amplitude `omega1`.
    pub fn from_delta(axis: Axis, delta: f64, omega1: f64) -> Self {
        let duration = (PI + delta).abs() / omega1;
        Self { axis, delta, duration }
    }

    pub fn from_theta(axis: Axis, theta: f64, omega1: f64) -> Self {
        Self { axis, delta: theta - PI, duration: theta.abs() / omega1 }
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn theta(&self) -> f64 {
        PI + self.delta
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// `(cos θ, sin θ)` evaluated from δ so that δ = 0 gives exactly (-1, 0).
    pub fn cos_sin(&self) -> (f64, f64) {
        (-self.delta.cos(), -self.delta.sin())
    }

    /// Signed drive frequency whose coherent evolution over `duration`
    /// produces this rotation.
    pub fn signed_omega(&self) -> f64 {
        if self.duration == 0.0 {
            0.0
        } else {
            self.theta() / self.duration
        }
    }
}

/// Closed-form relaxation over an idle interval `t`:
/// transverse components decay with T2, `Mz` relaxes toward `M∘` with T1.
pub fn free_evolution_map(p: &SystemParams, t: f64) -> Result<AffineMap> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeDuration(t));
    }
    let e2 = (-t / p.t2()).exp();
    let e1 = (-t / p.t1()).exp();
    Ok(AffineMap::new(
        Matrix3::from_diagonal(&Vector3::new(e2, e2, e1)),
        Vector3::new(0.0, 0.0, p.m_eq() * -(-t / p.t1()).exp_m1()),
    ))
}

/// Dissipation-free rotation of the Bloch vector by the pulse angle.
pub fn rotation_map(pulse: &PulseSpec) -> AffineMap {
    let (c, s) = pulse.cos_sin();
    let linear = match pulse.axis {
        Axis::Y => Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c),
        Axis::X => Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c),
    };
    AffineMap::new(linear, Vector3::zeros())
}

/// Rotation about `axis` by an arbitrary angle.
pub(crate) fn rotation_by(axis: Axis, angle: f64) -> AffineMap {
    rotation_map(&PulseSpec { axis, delta: angle - PI, duration: 0.0 })
}

/// Restricts a trace- and Hermiticity-preserving Liouville propagator to its
/// action on the Bloch vector.
pub fn liouville_to_affine(prop: &Matrix4<Complex64>) -> AffineMap {
    let half = Complex64::new(0.5, 0.0);
    let mixed = Vector4::new(half, Complex64::default(), Complex64::default(), half);
    let offset = LiouvilleState(prop * mixed).pauli_expectations();
    let cols = half_pauli_vectors().map(|v| LiouvilleState(prop * v).pauli_expectations());
    AffineMap::new(Matrix3::from_columns(&cols), offset)
}

/// `exp(gen · t)` in Liouville space, restricted to Bloch form.
pub fn exact_segment_map(gen: &Superoperator, t: f64) -> Result<AffineMap> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeDuration(t));
    }
    let (prop, _) = expm(&gen.0, t)?;
    Ok(liouville_to_affine(&prop))
}

/// Full Liouville propagator of a segment, for state-level checks.
pub fn exact_propagator(gen: &Superoperator, t: f64) -> Result<Superoperator> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeDuration(t));
    }
    expm(&gen.0, t).map(|(m, _)| Superoperator(m))
}

/// Propagator of the pulse segment. With `dissipative` set, relaxation acts
/// during the pulse as well (exact exponential of drive + dissipator).
pub fn pulse_map(p: &SystemParams, pulse: &PulseSpec, dissipative: bool) -> Result<AffineMap> {
    if !dissipative || pulse.duration == 0.0 {
        return Ok(rotation_map(pulse));
    }
    let gen = lindblad_superoperator(p) + rotation_generator(pulse.signed_omega(), pulse.axis);
    exact_segment_map(&gen, pulse.duration)
}

/// One period of the protocol: idle for `tau`, then the pulse.
pub fn cycle_map(p: &SystemParams, tau: f64, pulse: &PulseSpec) -> Result<AffineMap> {
    Ok(free_evolution_map(p, tau)?.then(&rotation_map(pulse)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{validate_params, RawParams};
    use crate::state::Magnetization;

    fn fig1() -> SystemParams {
        validate_params(RawParams { t1: Some(100.0), t2: Some(1.0), t_phi: None, m_eq: 0.8, omega1: 1000.0 * PI })
            .unwrap()
    }

    #[test]
    fn free_evolution_zero_time_is_identity() {
        assert_eq!(free_evolution_map(&fig1(), 0.0).unwrap(), AffineMap::identity());
    }

    #[test]
    fn free_evolution_fig1_values() {
        let out = free_evolution_map(&fig1(), 10.0).unwrap().apply(Magnetization::new(0.5, 0.0, -0.72));
        // adaptive DOP853 integration of the Bloch equations, rtol 1e-13
        assert!((out.mx - 2.269_996_488_125_2e-5).abs() < 1e-12);
        assert!((out.mz - (-0.575_352_875_414_658)).abs() < 1e-12);
    }

    #[test]
    fn negative_duration_rejected() {
        assert_eq!(free_evolution_map(&fig1(), -1.0), Err(Error::NegativeDuration(-1.0)));
    }

    #[test]
    fn spin_lock_regime() {
        let p = fig1();
        let t = 5.0;
        let m0 = Magnetization::new(0.3, -0.2, -0.6);
        let out = free_evolution_map(&p, t).unwrap().apply(m0);
        assert!(out.mx.abs() < 0.01 && out.my.abs() < 0.01);
        assert!((out.mz - m0.mz).abs() <= t / p.t1() * (p.m_eq().abs() + m0.mz.abs()));
    }

    #[test]
    fn rotation_examples() {
        let id = rotation_map(&PulseSpec::from_theta(Axis::Y, 0.0, 1.0));
        assert!(id.max_abs_diff(&AffineMap::identity()) < 1e-15);

        let pi = rotation_map(&PulseSpec::from_delta(Axis::Y, 0.0, 1.0));
        assert_eq!(pi.apply(Magnetization::longitudinal(0.37)), Magnetization::new(0.0, 0.0, -0.37));

        let half = rotation_map(&PulseSpec::from_theta(Axis::Y, PI / 2.0, 1.0));
        assert!(half.apply(Magnetization::longitudinal(1.0)).max_abs_diff(&Magnetization::new(1.0, 0.0, 0.0)) < 1e-15);

        for axis in [Axis::X, Axis::Y] {
            let r = rotation_map(&PulseSpec::from_delta(axis, 0.37, 1.0));
            assert!(r.is_rotation(1e-14));
        }
    }

    #[test]
    fn pulse_duration_matches_drive() {
        let p = fig1();
        let pulse = PulseSpec::from_delta(Axis::Y, 0.0674 * PI, p.omega1());
        assert!((p.omega1() * pulse.duration() - pulse.theta()).abs() < 1e-12);
    }

    #[test]
    fn exact_rotation_matches_closed_form() {
        let omega = 2.5;
        let gen = rotation_generator(omega, Axis::Y);
        let exact = exact_segment_map(&gen, PI / omega).unwrap();
        let closed = rotation_map(&PulseSpec::from_delta(Axis::Y, 0.0, omega));
        assert!(exact.max_abs_diff(&closed) < 1e-9);

        let gen_x = rotation_generator(omega, Axis::X);
        let exact_x = exact_segment_map(&gen_x, 0.3).unwrap();
        let closed_x = rotation_by(Axis::X, 0.3 * omega);
        assert!(exact_x.max_abs_diff(&closed_x) < 1e-12);
    }

    #[test]
    fn cycle_examples() {
        let p = fig1();
        let inversion = cycle_map(&p, 0.0, &PulseSpec::from_delta(Axis::Y, 0.0, p.omega1())).unwrap();
        assert_eq!(inversion.linear, Matrix3::from_diagonal(&Vector3::new(-1.0, 1.0, -1.0)));
        assert_eq!(inversion.offset, Vector3::zeros());

        let mz0 = -0.72;
        let relaxed = free_evolution_map(&p, 10.0).unwrap().apply(Magnetization::longitudinal(mz0)).mz;
        let out = cycle_map(&p, 10.0, &PulseSpec::from_delta(Axis::Y, 0.0, p.omega1()))
            .unwrap()
            .apply(Magnetization::longitudinal(mz0));
        assert_eq!(out, Magnetization::new(0.0, 0.0, -relaxed));
    }

    #[test]
    fn small_delta_expansion() {
        let p = fig1();
        let mz0 = -0.72;
        let relaxed = free_evolution_map(&p, 10.0).unwrap().apply(Magnetization::longitudinal(mz0)).mz;
        for &delta in &[0.1, 0.05, 0.025] {
            let out = cycle_map(&p, 10.0, &PulseSpec::from_delta(Axis::Y, delta, p.omega1()))
                .unwrap()
                .apply(Magnetization::longitudinal(mz0));
            assert!((out.mx - (-relaxed * delta)).abs() <= relaxed.abs() * delta.powi(3) / 6.0 + 1e-15);
            assert!((out.mz - (-relaxed)).abs() <= relaxed.abs() * delta * delta / 2.0 + 1e-15);
        }
    }

    #[test]
    fn dissipative_pulse_is_close_for_short_pulses() {
        let p = fig1();
        let pulse = PulseSpec::from_delta(Axis::Y, 0.1, p.omega1());
        let ideal = pulse_map(&p, &pulse, false).unwrap();
        let lossy = pulse_map(&p, &pulse, true).unwrap();
        assert!(ideal.max_abs_diff(&lossy) < 10.0 * pulse.duration() / p.t2());
        assert!(ideal.max_abs_diff(&lossy) > 0.0);
        assert!(lossy.is_contraction(1e-12));
    }
}
