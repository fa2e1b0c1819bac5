use std::f64::consts::PI;

use edtc::analysis::{point_spectrum, spectrum_of, sweep_delta_ratio, sweep_delta_tau, SweepSettings};
use edtc::{validate_params, RawParams, SystemParams};

fn params(t1: f64) -> SystemParams {
    validate_params(RawParams { t1: Some(t1), t2: Some(1.0), t_phi: None, m_eq: 0.8, omega1: 1000.0 * PI }).unwrap()
}

#[test]
fn width_scales_inversely_with_t1() {
    let s = SweepSettings { cycles: 1000, ..Default::default() };
    let widths: Vec<f64> = [50.0, 100.0, 200.0]
        .iter()
        .map(|&t1| point_spectrum(&params(t1), 10.0, 0.0, &s).unwrap().fwhm.unwrap())
        .collect();
    for w in widths.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 2.0).abs() < 0.2, "doubling T1 changed the width by {ratio}, {widths:?}");
    }
}

#[test]
fn transform_limited_line() {
    let n = 256;
    let x: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let spec = spectrum_of(&x, n, 1).unwrap();
    assert!(spec.fwhm.unwrap() <= 2.0 * spec.bin_width());
}

#[test]
fn ratio_diagram_ridge() {
    let s = SweepSettings::default();
    let d = sweep_delta_ratio(&params(1.0), &[-0.2 * PI, 0.0, 0.2 * PI], &[1.0, 1000.0], 5.0, &s);
    let f = |r, c| d.get(r, c).unwrap();
    assert!(f(1, 1) > 0.9);
    assert!(f(0, 1) < 0.1, "T1 ≈ T2 should kill the response");
    assert!(f(1, 0) < f(1, 1) && f(1, 2) < f(1, 1));
}

#[test]
fn delay_diagram_edges() {
    let s = SweepSettings::default();
    let d = sweep_delta_tau(&params(1000.0), &[0.0, 0.1 * PI], &[0.1, 5.0, 500.0], &s);
    let f = |r, c| d.get(r, c).unwrap();
    assert!(f(0, 1) < 0.5 * f(1, 1), "τ < T2 should degrade f at moderate δ");
    assert!(f(2, 0) < 0.5 * f(1, 0), "τ near T1 should collapse f");
}
