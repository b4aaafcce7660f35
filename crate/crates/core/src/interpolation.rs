//! Polynomial interpolation on `[0, 1]` in the Chebyshev basis
//! `T_j(2x - 1)`, with analytic differentiation.
//!
//! Used as an alternative route to efficiency derivatives of the generating
//! function: sample along one axis at `degree + 1` Chebyshev nodes, solve for
//! the coefficients, differentiate, then repeat on the next axis.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Interpolation systems whose condition estimate exceeds this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Debug, PartialEq)]
pub struct ChebyshevFit {
    coeffs: Vec<f64>,
}

impl ChebyshevFit {
    /// Chebyshev points of the first kind mapped to `[0, 1]`.
    pub fn nodes(degree: usize) -> Vec<f64> {
        let n = degree + 1;
        (0..n)
            .map(|j| {
                let theta = std::f64::consts::PI * (j as f64 + 0.5) / n as f64;
                0.5 * (1.0 + theta.cos())
            })
            .collect()
    }

    /// Fits the unique polynomial of the given degree through `values`,
    /// sampled at [`ChebyshevFit::nodes`].
    pub fn fit(degree: usize, values: &[f64]) -> Result<Self> {
        let nodes = Self::nodes(degree);
        if values.len() != nodes.len() {
            return Err(Error::Dimension(format!(
                "{} samples for a degree-{degree} fit",
                values.len()
            )));
        }
        let n = nodes.len();
        let a = DMatrix::from_fn(n, n, |j, i| chebyshev_t(i, 2.0 * nodes[j] - 1.0));
        let sv = a.clone().singular_values();
        let (max, min) = sv.iter().fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
        let cond = max / min;
        if !(cond <= MAX_CONDITION) {
            return Err(Error::Conditioning(format!(
                "interpolation system condition estimate {cond:.3e} exceeds {MAX_CONDITION:.0e}; lower the cutoff"
            )));
        }
        let coeffs = a
            .lu()
            .solve(&DVector::from_column_slice(values))
            .ok_or_else(|| Error::Singular("interpolation system".into()))?;
        Ok(Self { coeffs: coeffs.iter().copied().collect() })
    }

    pub fn fit_fn(degree: usize, mut f: impl FnMut(f64) -> Result<f64>) -> Result<Self> {
        let values = Self::nodes(degree).into_iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        Self::fit(degree, &values)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Clenshaw evaluation at `x` in `[0, 1]`.
    pub fn evaluate(&self, x: f64) -> f64 {
        let t = 2.0 * x - 1.0;
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs.first().copied().unwrap_or(0.0) + t * b1 - b2
    }

    /// Derivative with respect to `x`.
    pub fn derivative(&self) -> Self {
        let n = self.coeffs.len();
        if n <= 1 {
            return Self { coeffs: vec![0.0] };
        }
        let mut d = vec![0.0; n + 1];
        for k in (1..n).rev() {
            d[k - 1] = d[k + 1] + 2.0 * k as f64 * self.coeffs[k];
        }
        d[0] *= 0.5;
        d.truncate(n - 1);
        // chain rule for t = 2x - 1
        d.iter_mut().for_each(|c| *c *= 2.0);
        Self { coeffs: d }
    }

    pub fn derivative_at(&self, order: usize, x: f64) -> f64 {
        (0..order).fold(self.clone(), |f, _| f.derivative()).evaluate(x)
    }
}

fn chebyshev_t(n: usize, t: f64) -> f64 {
    let (mut a, mut b) = (1.0, t);
    if n == 0 {
        return a;
    }
    for _ in 1..n {
        let c = 2.0 * t * b - a;
        a = b;
        b = c;
    }
    b
}

/// `∂^orders f` at `point`, for `f` polynomial of degree at most `degree`
/// in each coordinate on `[0, 1]^k`.
///
/// Costs `(degree + 1)^(number of differentiated axes)` evaluations of `f`.
pub fn mixed_derivative(
    f: &dyn Fn(&[f64]) -> Result<f64>,
    point: &[f64],
    orders: &[usize],
    degree: usize,
) -> Result<f64> {
    if orders.len() != point.len() {
        return Err(Error::Dimension(format!(
            "{} derivative orders for a {}-dimensional point",
            orders.len(),
            point.len()
        )));
    }
    let axes: Vec<usize> = (0..orders.len()).filter(|&a| orders[a] > 0).collect();
    nested(f, &mut point.to_vec(), point, orders, &axes, degree)
}

fn nested(
    f: &dyn Fn(&[f64]) -> Result<f64>,
    work: &mut Vec<f64>,
    point: &[f64],
    orders: &[usize],
    axes: &[usize],
    degree: usize,
) -> Result<f64> {
    let Some((&axis, rest)) = axes.split_first() else {
        return f(work);
    };
    if orders[axis] > degree {
        return Ok(0.0);
    }
    let fit = ChebyshevFit::fit_fn(degree, |x| {
        work[axis] = x;
        nested(f, work, point, orders, rest, degree)
    })?;
    work[axis] = point[axis];
    Ok(fit.derivative_at(orders[axis], point[axis]))
}
