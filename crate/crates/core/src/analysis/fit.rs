//! Least-squares fit of `y = a·δ^λ + b`.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 500;
pub const GRADIENT_TOL: f64 = 1e-10;
const STEP_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub a: f64,
    pub lambda: f64,
    pub b: f64,
    /// Sum of squared residuals at the solution.
    pub residual: f64,
    pub covariance: [[f64; 3]; 3],
    pub iterations: usize,
    pub gradient_norm: f64,
}

impl PowerLawFit {
    pub fn eval(&self, delta: f64) -> f64 {
        self.a * delta.powf(self.lambda) + self.b
    }

    pub fn sse(&self, points: &[(f64, f64)]) -> f64 {
        points.iter().map(|&(d, y)| (self.eval(d) - y).powi(2)).sum()
    }
}

fn model(theta: &Vector3<f64>, d: f64) -> f64 {
    theta[0] * d.powf(theta[1]) + theta[2]
}

fn cost(theta: &Vector3<f64>, points: &[(f64, f64)]) -> f64 {
    points.iter().map(|&(d, y)| (model(theta, d) - y).powi(2)).sum::<f64>()
}

/// Normal-equation pieces `JᵀJ` and `Jᵀr`.
fn normal_equations(theta: &Vector3<f64>, points: &[(f64, f64)]) -> (Matrix3<f64>, Vector3<f64>) {
    let mut jtj = Matrix3::zeros();
    let mut jtr = Vector3::zeros();
    for &(d, y) in points {
        let p = d.powf(theta[1]);
        let row = Vector3::new(p, theta[0] * p * d.ln(), 1.0);
        let r = theta[0] * p + theta[2] - y;
        jtj += row * row.transpose();
        jtr += row * r;
    }
    (jtj, jtr)
}

/// Starting point: `b = min y`, then a log-log regression of `y − b` on δ.
fn initial_guess(points: &[(f64, f64)]) -> Vector3<f64> {
    let b = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let logs: Vec<(f64, f64)> =
        points.iter().filter(|&&(_, y)| y - b > 0.0).map(|&(d, y)| (d.ln(), (y - b).ln())).collect();
    if logs.len() >= 2 {
        let n = logs.len() as f64;
        let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
        let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx > 0.0 {
            let lambda = sxy / sxx;
            return Vector3::new((my - lambda * mx).exp(), lambda, b);
        }
    }
    let spread = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max) - b;
    Vector3::new(spread.max(1e-12), 1.0, b)
}

/// Damped Gauss–Newton (Levenberg–Marquardt) fit of `y = a·δ^λ + b`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 4 {
        return Err(Error::InvalidInput(format!("need at least 4 points, got {}", points.len())));
    }
    if points.iter().any(|&(d, y)| !(d > 0.0 && d.is_finite() && y.is_finite())) {
        return Err(Error::InvalidInput("points need δ > 0 and finite y".into()));
    }

    let mut theta = initial_guess(points);
    let mut current = cost(&theta, points);
    let (mut jtj, mut jtr) = normal_equations(&theta, points);
    let mut mu = 1e-3 * jtj.diagonal().max();
    let mut nu = 2.0;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < MAX_ITERATIONS {
        if jtr.amax() <= GRADIENT_TOL {
            converged = true;
            break;
        }
        iterations += 1;
        let mut damped = jtj;
        for i in 0..3 {
            damped[(i, i)] += mu * jtj[(i, i)].max(1e-300);
        }
        let Some(step) = damped.lu().solve(&-jtr) else {
            mu *= nu;
            nu *= 2.0;
            continue;
        };
        let candidate = theta + step;
        let next = cost(&candidate, points);
        // model-predicted decrease of Σr² for this step
        let predicted = step.dot(&((damped.diagonal() - jtj.diagonal()).component_mul(&step) - jtr));
        if next.is_finite() && next < current {
            let rho = (current - next) / predicted.max(f64::MIN_POSITIVE);
            theta = candidate;
            current = next;
            (jtj, jtr) = normal_equations(&theta, points);
            mu *= (1.0f64 / 3.0).max(1.0 - (2.0 * rho - 1.0).powi(3));
            nu = 2.0;
            if step.norm() <= STEP_TOL * (theta.norm() + STEP_TOL) {
                converged = true;
                break;
            }
        } else {
            mu *= nu;
            nu *= 2.0;
            // no representable improvement left
            if mu > 1e20 * jtj.diagonal().max().max(1.0) {
                converged = true;
                break;
            }
        }
    }
    if !converged && jtr.amax() <= GRADIENT_TOL {
        converged = true;
    }
    if !converged {
        return Err(Error::FitNotConverged { iterations, gradient: jtr.amax() });
    }

    let dof = points.len().saturating_sub(3).max(1) as f64;
    let sigma2 = current / dof;
    let cov = jtj.try_inverse().map(|m| m * sigma2).unwrap_or_else(|| Matrix3::repeat(f64::NAN));
    let mut covariance = [[0.0; 3]; 3];
    for (i, row) in covariance.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            *c = cov[(i, j)];
        }
    }
    let mut fit = PowerLawFit {
        a: theta[0],
        lambda: theta[1],
        b: theta[2],
        residual: 0.0,
        covariance,
        iterations,
        gradient_norm: jtr.amax(),
    };
    fit.residual = fit.sse(points);
    Ok(fit)
}
