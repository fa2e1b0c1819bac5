//! Closed-form two-cycle magnetization for a longitudinal initial state.

use crate::params::SystemParams;

/// Exact values over the first two periods, starting from `(0, 0, mz0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoCycleValues {
    pub mz_tau: f64,
    pub mx_t: f64,
    pub mz_t: f64,
    pub mx_t_tau: f64,
    pub mz_t_tau: f64,
    pub mx_2t: f64,
    pub mz_2t: f64,
}

/// First-order (in δ) approximation for `θ = π + δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderTwoCycles {
    pub mx_t: f64,
    pub mz_t: f64,
    pub mx_2t: f64,
    pub mz_2t: f64,
}

fn transverse(p: &SystemParams, m0: f64, t: f64) -> f64 {
    m0 * (-t / p.t2()).exp()
}

fn longitudinal(p: &SystemParams, m0: f64, t: f64) -> f64 {
    let e1 = (-t / p.t1()).exp();
    p.m_eq() * (1.0 - e1) + m0 * e1
}

/// Delay `tau`, rotation by `theta` about `y`, twice, with no small-angle
/// approximation.
pub fn analytic_two_cycles(p: &SystemParams, tau: f64, theta: f64, mz0: f64) -> TwoCycleValues {
    let (s, c) = theta.sin_cos();
    let mz_tau = longitudinal(p, mz0, tau);
    let mx_t = mz_tau * s;
    let mz_t = mz_tau * c;
    let mx_t_tau = transverse(p, mx_t, tau);
    let mz_t_tau = longitudinal(p, mz_t, tau);
    TwoCycleValues {
        mz_tau,
        mx_t,
        mz_t,
        mx_t_tau,
        mz_t_tau,
        mx_2t: mx_t_tau * c + mz_t_tau * s,
        mz_2t: mz_t_tau * c - mx_t_tau * s,
    }
}

/// Truncation of [`analytic_two_cycles`] to first order in the pulse error δ.
pub fn first_order_two_cycles(p: &SystemParams, tau: f64, delta: f64, mz0: f64) -> FirstOrderTwoCycles {
    let mz_tau = longitudinal(p, mz0, tau);
    let carried = transverse(p, -mz_tau * delta, tau);
    let relaxed_flipped = longitudinal(p, -mz_tau, tau);
    FirstOrderTwoCycles {
        mx_t: -mz_tau * delta,
        mz_t: -mz_tau,
        mx_2t: -carried - relaxed_flipped * delta,
        mz_2t: -relaxed_flipped + carried * delta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{validate_params, RawParams};
    use std::f64::consts::PI;

    fn fig1() -> SystemParams {
        validate_params(RawParams { t1: Some(100.0), t2: Some(1.0), t_phi: None, m_eq: 0.8, omega1: 1.0 }).unwrap()
    }

    #[test]
    fn perfect_pi_reduces_to_sign_flips() {
        let p = fig1();
        let mz0 = -0.72;
        let v = analytic_two_cycles(&p, 10.0, PI, mz0);
        let first = longitudinal(&p, mz0, 10.0);
        assert!((v.mz_t + first).abs() < 1e-15);
        assert!((v.mz_2t + longitudinal(&p, -first, 10.0)).abs() < 1e-15);
        assert!(v.mx_t.abs() < 1e-15 && v.mx_2t.abs() < 1e-15);
    }

    #[test]
    fn no_delay_is_double_rotation() {
        let p = fig1();
        for &theta in &[0.3, 1.0, PI + 0.2, -2.0] {
            let v = analytic_two_cycles(&p, 0.0, theta, 0.6);
            assert!((v.mz_2t - 0.6 * (2.0 * theta).cos()).abs() < 1e-15);
            assert!((v.mx_2t - 0.6 * (2.0 * theta).sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn first_order_error_is_quadratic() {
        let p = fig1();
        let deltas = [0.2, 0.1, 0.05, 0.025];
        let errs: Vec<f64> = deltas
            .iter()
            .map(|&d| {
                let exact = analytic_two_cycles(&p, 10.0, PI + d, -0.72);
                let approx = first_order_two_cycles(&p, 10.0, d, -0.72);
                (exact.mz_2t - approx.mz_2t).abs().max((exact.mz_t - approx.mz_t).abs())
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 1.9, "order {order} from {errs:?}");
        }
        // bounded by C δ² with C fit from the largest δ
        let c = errs[0] / (deltas[0] * deltas[0]);
        for (e, d) in errs.iter().zip(deltas) {
            assert!(*e <= 1.05 * c * d * d);
        }
    }
}
