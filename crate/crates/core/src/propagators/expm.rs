//! Matrix exponential of 4×4 complex generators.
//!
//! The primary route diagonalizes the generator through its complex Schur form.
//! When the eigenvector basis is ill-conditioned (defective or nearly defective
//! generators) the routine switches to scaling and squaring of a Taylor series.

use nalgebra::linalg::Schur;
use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

/// Eigenbases with a larger 2-norm condition number are not trusted.
pub const MAX_EIGENBASIS_CONDITION: f64 = 1e8;

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 500;

/// Which algorithm produced an exponential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpmMethod {
    Eigen,
    ScalingSquaring,
}

/// `exp(gen · t)`.
pub fn expm(gen: &Matrix4<C>, t: f64) -> Result<(Matrix4<C>, ExpmMethod)> {
    if !t.is_finite() || gen.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::ExponentialNotConverged);
    }
    if t == 0.0 {
        return Ok((Matrix4::identity(), ExpmMethod::Eigen));
    }
    if let Some(e) = expm_eigen(gen, t) {
        return Ok((e, ExpmMethod::Eigen));
    }
    expm_scaling_squaring(gen, t).map(|e| (e, ExpmMethod::ScalingSquaring))
}

/// Eigendecomposition route. Returns `None` when the eigenbasis is too
/// ill-conditioned for `V e^{Λt} V⁻¹` to be accurate.
pub fn expm_eigen(gen: &Matrix4<C>, t: f64) -> Option<Matrix4<C>> {
    let (q, tri) = Schur::try_new(*gen, SCHUR_EPS, SCHUR_MAX_ITER)?.unpack();
    let scale = tri.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tiny = 1e-13 * scale;

    // eigenvectors of the upper-triangular factor by back substitution
    let mut vt = Matrix4::<C>::zeros();
    for k in 0..4 {
        let lambda = tri[(k, k)];
        let mut v = Vector4::<C>::zeros();
        v[k] = C::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut num = C::new(0.0, 0.0);
            for i in (j + 1)..=k {
                num += tri[(j, i)] * v[i];
            }
            let den = tri[(j, j)] - lambda;
            v[j] = if den.norm() > tiny {
                -num / den
            } else if num.norm() <= tiny {
                // repeated eigenvalue with an independent eigenvector
                C::new(0.0, 0.0)
            } else {
                // defective block: the resulting basis is rejected below
                -num / C::new(tiny, 0.0)
            };
        }
        vt.set_column(k, &(v / C::new(v.norm(), 0.0)));
    }

    let v = q * vt;
    let sv = v.singular_values();
    let smin = sv.min();
    if smin <= 0.0 || sv.max() / smin > MAX_EIGENBASIS_CONDITION {
        return None;
    }
    let v_inv = v.try_inverse()?;
    let exp_diag = Matrix4::from_diagonal(&Vector4::from_fn(|k, _| (tri[(k, k)] * t).exp()));
    let e = v * exp_diag * v_inv;
    e.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(e)
}

/// Scaling and squaring with a truncated Taylor series.
pub fn expm_scaling_squaring(gen: &Matrix4<C>, t: f64) -> Result<Matrix4<C>> {
    let a = gen * C::new(t, 0.0);
    let norm1 = (0..4).map(|c| a.column(c).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm1 > 0.5 { (norm1 / 0.5).log2().ceil() as i32 } else { 0 };
    if squarings > 1000 {
        return Err(Error::ExponentialNotConverged);
    }
    let b = a * C::new(0.5f64.powi(squarings), 0.0);

    let mut sum = Matrix4::<C>::identity();
    let mut term = Matrix4::<C>::identity();
    let mut converged = false;
    for k in 1..=40 {
        term = term * b * C::new(1.0 / k as f64, 0.0);
        sum += term;
        if term.camax() <= 1e-18 * sum.camax() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::ExponentialNotConverged);
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    if sum.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::ExponentialNotConverged);
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn zero_time_is_identity() {
        let g = Matrix4::from_fn(|r, k| c(r as f64 - k as f64, 0.3));
        assert_eq!(expm(&g, 0.0).unwrap().0, Matrix4::identity());
    }

    #[test]
    fn diagonal_generator() {
        let g = Matrix4::from_diagonal(&Vector4::new(c(-1.0, 0.0), c(0.0, 2.0), c(-0.5, 1.0), c(0.0, 0.0)));
        let (e, method) = expm(&g, 1.5).unwrap();
        assert_eq!(method, ExpmMethod::Eigen);
        for k in 0..4 {
            assert!((e[(k, k)] - (g[(k, k)] * 1.5).exp()).norm() < 1e-14);
        }
    }

    #[test]
    fn defective_generator_falls_back() {
        // Jordan block: exp(t J) = e^{λt} [[1, t], [0, 1]]
        let mut g = Matrix4::<C>::zeros();
        g[(0, 0)] = c(-1.0, 0.0);
        g[(1, 1)] = c(-1.0, 0.0);
        g[(0, 1)] = c(1.0, 0.0);
        g[(2, 2)] = c(-3.0, 0.0);
        let (e, method) = expm(&g, 2.0).unwrap();
        assert_eq!(method, ExpmMethod::ScalingSquaring);
        let decay = (-2.0f64).exp();
        assert!((e[(0, 0)].re - decay).abs() < 1e-14);
        assert!((e[(0, 1)].re - 2.0 * decay).abs() < 1e-14);
        assert!((e[(3, 3)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn routes_agree_on_generic_matrix() {
        let g = Matrix4::from_fn(|r, k| c(((r * 7 + k * 3) % 5) as f64 * 0.1 - 0.3, ((r + 2 * k) % 3) as f64 * 0.05));
        for &t in &[0.01, 0.7, 3.0] {
            let a = expm_eigen(&g, t).expect("generic matrix is diagonalizable");
            let b = expm_scaling_squaring(&g, t).unwrap();
            assert!((a - b).camax() < 1e-12, "t = {t}: {}", (a - b).camax());
        }
    }

    #[test]
    fn non_finite_input_is_an_error() {
        let mut g = Matrix4::<C>::zeros();
        g[(0, 0)] = c(f64::NAN, 0.0);
        assert_eq!(expm(&g, 1.0), Err(Error::ExponentialNotConverged));
    }
}
