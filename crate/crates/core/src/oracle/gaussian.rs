//! Quadrature checks of the complex Gaussian integrals
//!
//! ```text
//! ∫ d²z/π exp(-a|z|² + λ* z + z* μ) = exp(λ* μ / a) / a
//! ∫ Π d²α_k/π exp(-α†Aα + λ†α + α†μ) = exp(λ† A⁻¹ μ) / det A
//! ```
//!
//! Both integrals are evaluated by the trapezoidal rule on a square grid
//! centred on the peak of the integrand's modulus, which converges
//! geometrically for Gaussians.

use rayon::prelude::*;

use crate::linalg::ComplexMatrix;
use crate::{Error, Result, C64};

/// Grid half-width in units of the narrowest standard scale `1/sqrt(a)`.
pub const RADIUS_SCALES: f64 = 6.0;
pub const DEFAULT_STEP_1D: f64 = 0.01;
/// Step of the four-dimensional product grid for the 2x2 case.
pub const DEFAULT_STEP_2D: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianReport {
    pub numeric: C64,
    pub closed_form: C64,
    pub relative_deviation: f64,
}

fn report(numeric: C64, closed_form: C64) -> GaussianReport {
    GaussianReport { numeric, closed_form, relative_deviation: (numeric - closed_form).norm() / closed_form.norm() }
}

pub fn gaussian_integral_check(a: f64, lambda: C64, mu: C64) -> Result<GaussianReport> {
    gaussian_integral_check_with_step(a, lambda, mu, DEFAULT_STEP_1D)
}

pub fn gaussian_integral_check_with_step(a: f64, lambda: C64, mu: C64, step: f64) -> Result<GaussianReport> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("Gaussian width a = {a} must be positive")));
    }
    if !(step > 0.0) {
        return Err(Error::Domain(format!("quadrature step {step} must be positive")));
    }
    let centre = (lambda + mu) / (2.0 * a);
    let half = (RADIUS_SCALES / a.sqrt() / step).ceil() as i64;
    let rows: Vec<C64> = (-half..=half)
        .into_par_iter()
        .map(|i| {
            let x = centre.re + i as f64 * step;
            let mut row = C64::new(0.0, 0.0);
            for j in -half..=half {
                let z = C64::new(x, centre.im + j as f64 * step);
                row += (-a * z.norm_sqr() + lambda.conj() * z + z.conj() * mu).exp();
            }
            row
        })
        .collect();
    let numeric = rows.iter().sum::<C64>() * (step * step / std::f64::consts::PI);
    let closed = (lambda.conj() * mu / a).exp() / a;
    Ok(report(numeric, closed))
}

pub fn gaussian_integral_check_matrix(a: &ComplexMatrix, lambda: [C64; 2], mu: [C64; 2]) -> Result<GaussianReport> {
    gaussian_integral_check_matrix_with_step(a, lambda, mu, DEFAULT_STEP_2D)
}

/// Two-variable case with a positive-definite Hermitian `A`.
pub fn gaussian_integral_check_matrix_with_step(
    a: &ComplexMatrix,
    lambda: [C64; 2],
    mu: [C64; 2],
    step: f64,
) -> Result<GaussianReport> {
    if a.rows() != 2 || a.cols() != 2 {
        return Err(Error::Dimension(format!("expected a 2x2 matrix, got {}x{}", a.rows(), a.cols())));
    }
    if crate::linalg::hermiticity_residual(a) > 1e-12 {
        return Err(Error::Domain("A must be Hermitian".into()));
    }
    let eig = a.hermitian_eigenvalues()?;
    if eig[0] <= 0.0 {
        return Err(Error::Domain(format!("A must be positive definite, smallest eigenvalue {}", eig[0])));
    }
    let inv = a.inverse()?;
    let sum = [lambda[0] + mu[0], lambda[1] + mu[1]];
    let centre = [
        (inv[(0, 0)] * sum[0] + inv[(0, 1)] * sum[1]) / 2.0,
        (inv[(1, 0)] * sum[0] + inv[(1, 1)] * sum[1]) / 2.0,
    ];
    let half = (RADIUS_SCALES / eig[0].sqrt() / step).ceil() as i64;
    let axis: Vec<f64> = (-half..=half).map(|i| i as f64 * step).collect();
    let exponent = |z: [C64; 2]| -> C64 {
        let mut quad = C64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                quad += z[i].conj() * a[(i, j)] * z[j];
            }
        }
        -quad + lambda[0].conj() * z[0] + lambda[1].conj() * z[1] + z[0].conj() * mu[0] + z[1].conj() * mu[1]
    };
    let slabs: Vec<C64> = axis
        .par_iter()
        .map(|&x0| {
            let mut acc = C64::new(0.0, 0.0);
            for &y0 in &axis {
                let z0 = centre[0] + C64::new(x0, y0);
                for &x1 in &axis {
                    for &y1 in &axis {
                        acc += exponent([z0, centre[1] + C64::new(x1, y1)]).exp();
                    }
                }
            }
            acc
        })
        .collect();
    let pi = std::f64::consts::PI;
    let numeric = slabs.iter().sum::<C64>() * (step.powi(4) / (pi * pi));
    let mut bilinear = C64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            bilinear += lambda[i].conj() * inv[(i, j)] * mu[j];
        }
    }
    let closed = bilinear.exp() / a.determinant()?;
    Ok(report(numeric, closed))
}
