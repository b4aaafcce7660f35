//! Single-mode source states as truncated Fock-basis density matrices, and
//! their Husimi-series coefficients `g_nm = ρ_nm / sqrt(n! m!)`.
//!
//! Truncation is explicit: every constructor checks that the probability
//! mass above the cutoff is within a tolerance (default
//! [`DEFAULT_TRUNCATION_TOLERANCE`]) and records the deficit. States are not
//! renormalized after truncation, so downstream totals fall short of one by
//! exactly the recorded deficit.

use std::f64::consts::PI;

use crate::linalg::{hermiticity_residual, ComplexMatrix};
use crate::math::{sqrt_factorial, MAX_FACTORIAL};
use crate::{Error, Result, C64};

pub const DEFAULT_TRUNCATION_TOLERANCE: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SingleModeSource {
    rho: ComplexMatrix,
    label: String,
    trace_deficit: f64,
}

impl SingleModeSource {
    /// The Fock state `|n⟩` in a space truncated at `n_cut`.
    pub fn fock(n: usize, n_cut: usize) -> Result<Self> {
        if n > n_cut {
            return Err(Error::Cutoff {
                cutoff: n_cut,
                required: n,
                detail: format!("Fock state |{n}⟩ lies above the cutoff"),
            });
        }
        check_factorial_range(n_cut)?;
        let mut rho = ComplexMatrix::zeros(n_cut + 1, n_cut + 1);
        rho[(n, n)] = C64::new(1.0, 0.0);
        Ok(Self { rho, label: format!("fock({n})"), trace_deficit: 0.0 })
    }

    pub fn vacuum() -> Self {
        Self::fock(0, 0).expect("vacuum always fits")
    }

    pub fn coherent(alpha: C64, n_cut: usize) -> Result<Self> {
        Self::coherent_with_tolerance(alpha, n_cut, DEFAULT_TRUNCATION_TOLERANCE)
    }

    pub fn coherent_with_tolerance(alpha: C64, n_cut: usize, tol: f64) -> Result<Self> {
        let mean = alpha.norm_sqr();
        let deficit = poisson_tail(mean, n_cut);
        if deficit > tol {
            return Err(Error::Cutoff {
                cutoff: n_cut,
                required: coherent_cutoff(alpha, tol)?,
                detail: format!("coherent |α|² = {mean}: truncated mass {deficit:.3e} exceeds {tol:.1e}"),
            });
        }
        check_factorial_range(n_cut)?;
        let amp: Vec<C64> = (0..=n_cut)
            .map(|n| {
                let sf = sqrt_factorial(n).expect("checked");
                (-mean / 2.0).exp() * alpha.powu(n as u32) / sf
            })
            .collect();
        let rho = ComplexMatrix::from_fn(n_cut + 1, n_cut + 1, |n, m| amp[n] * amp[m].conj());
        Ok(Self { rho, label: format!("coherent({alpha})"), trace_deficit: deficit })
    }

    /// Coherent state at the smallest cutoff meeting the tolerance.
    pub fn coherent_auto(alpha: C64, tol: f64) -> Result<Self> {
        Self::coherent_with_tolerance(alpha, coherent_cutoff(alpha, tol)?, tol)
    }

    pub fn thermal(nbar: f64, n_cut: usize) -> Result<Self> {
        Self::thermal_with_tolerance(nbar, n_cut, DEFAULT_TRUNCATION_TOLERANCE)
    }

    pub fn thermal_with_tolerance(nbar: f64, n_cut: usize, tol: f64) -> Result<Self> {
        if !(nbar >= 0.0 && nbar.is_finite()) {
            return Err(Error::Domain(format!("thermal mean occupation {nbar} must be >= 0")));
        }
        let ratio = nbar / (1.0 + nbar);
        let deficit = ratio.powi(n_cut as i32 + 1);
        if deficit > tol {
            return Err(Error::Cutoff {
                cutoff: n_cut,
                required: thermal_cutoff(nbar, tol)?,
                detail: format!("thermal n̄ = {nbar}: truncated mass {deficit:.3e} exceeds {tol:.1e}"),
            });
        }
        check_factorial_range(n_cut)?;
        let mut rho = ComplexMatrix::zeros(n_cut + 1, n_cut + 1);
        for n in 0..=n_cut {
            rho[(n, n)] = C64::new(ratio.powi(n as i32) / (1.0 + nbar), 0.0);
        }
        Ok(Self { rho, label: format!("thermal({nbar})"), trace_deficit: deficit })
    }

    pub fn thermal_auto(nbar: f64, tol: f64) -> Result<Self> {
        Self::thermal_with_tolerance(nbar, thermal_cutoff(nbar, tol)?, tol)
    }

    pub fn custom(rho: ComplexMatrix) -> Result<Self> {
        Self::custom_with_tolerance(rho, DEFAULT_TRUNCATION_TOLERANCE)
    }

    /// Validates an arbitrary density matrix; the trace is renormalized to one
    /// only when it is already within `tol` of one.
    pub fn custom_with_tolerance(rho: ComplexMatrix, tol: f64) -> Result<Self> {
        if !rho.is_square() || rho.rows() == 0 {
            return Err(Error::Dimension(format!(
                "density matrix must be square and non-empty, got {}x{}",
                rho.rows(),
                rho.cols()
            )));
        }
        check_factorial_range(rho.rows() - 1)?;
        let herm = hermiticity_residual(&rho);
        if herm > HERMITIAN_TOL {
            return Err(Error::Validation(format!(
                "density matrix is not Hermitian, residual {herm:e}"
            )));
        }
        let min_ev = rho.hermitian_eigenvalues()?[0];
        if min_ev < -PSD_TOL {
            return Err(Error::Validation(format!(
                "density matrix is not positive semi-definite, smallest eigenvalue {min_ev}"
            )));
        }
        let trace: f64 = (0..rho.rows()).map(|n| rho[(n, n)].re).sum();
        if (trace - 1.0).abs() > tol {
            return Err(Error::Validation(format!(
                "density matrix trace {trace} deviates from 1 by more than {tol:e}"
            )));
        }
        let rho = rho.scale(C64::new(1.0 / trace, 0.0));
        Ok(Self { rho, label: "custom".into(), trace_deficit: 0.0 })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn n_cut(&self) -> usize {
        self.rho.rows() - 1
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Probability mass lost to truncation.
    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    pub fn is_vacuum(&self) -> bool {
        self.fock_number() == Some(0)
    }

    /// `Some(n)` when the state is exactly `|n⟩⟨n|`.
    pub fn fock_number(&self) -> Option<usize> {
        let one = C64::new(1.0, 0.0);
        let n = (0..self.rho.rows()).find(|&n| self.rho[(n, n)] == one)?;
        let rest_zero = self
            .rho
            .as_slice()
            .iter()
            .enumerate()
            .all(|(idx, z)| idx == n * self.rho.cols() + n || (z.re == 0.0 && z.im == 0.0));
        rest_zero.then_some(n)
    }

    /// Highest Fock level with non-zero population.
    pub fn highest_level(&self) -> usize {
        (0..self.rho.rows())
            .rev()
            .find(|&n| self.rho[(n, n)].norm() > 0.0)
            .unwrap_or(0)
    }

    pub fn husimi_series(&self) -> HusimiSeries {
        husimi_series(self)
    }
}

fn check_factorial_range(n_cut: usize) -> Result<()> {
    if n_cut > MAX_FACTORIAL {
        Err(Error::SizeGuard { what: "Fock cutoff", size: n_cut, limit: MAX_FACTORIAL })
    } else {
        Ok(())
    }
}

/// `sum_{n > n_cut} e^{-x} x^n / n!`, summed upward from the first omitted term.
fn poisson_tail(x: f64, n_cut: usize) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    // log of the first omitted term, computed without overflowing n!
    let first = n_cut + 1;
    let log_term = -x + first as f64 * x.ln() - (1..=first).map(|k| (k as f64).ln()).sum::<f64>();
    let mut term = log_term.exp();
    let mut sum = 0.0;
    let mut n = first;
    while term > 0.0 && (term > sum * 1e-17 || (n as f64) < x) {
        sum += term;
        n += 1;
        term *= x / n as f64;
        if n > first + 10_000 {
            break;
        }
    }
    sum
}

/// Cutoff estimates may exceed [`MAX_FACTORIAL`]; building such a state
/// then fails with a size error.
const CUTOFF_SEARCH_LIMIT: usize = 100_000;

/// Smallest cutoff whose Poisson tail is at most `tol`.
pub fn coherent_cutoff(alpha: C64, tol: f64) -> Result<usize> {
    let x = alpha.norm_sqr();
    (0..=CUTOFF_SEARCH_LIMIT).find(|&n| poisson_tail(x, n) <= tol).ok_or(Error::SizeGuard {
        what: "coherent-state cutoff",
        size: CUTOFF_SEARCH_LIMIT + 1,
        limit: CUTOFF_SEARCH_LIMIT,
    })
}

/// Smallest cutoff whose geometric tail `(n̄/(1+n̄))^(n_cut+1)` is at most `tol`.
pub fn thermal_cutoff(nbar: f64, tol: f64) -> Result<usize> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::Domain(format!("thermal mean occupation {nbar} must be >= 0")));
    }
    let ratio = nbar / (1.0 + nbar);
    (0..=CUTOFF_SEARCH_LIMIT).find(|&n| ratio.powi(n as i32 + 1) <= tol).ok_or(Error::SizeGuard {
        what: "thermal-state cutoff",
        size: CUTOFF_SEARCH_LIMIT + 1,
        limit: CUTOFF_SEARCH_LIMIT,
    })
}

/// Coefficients of the Husimi function's polynomial part,
/// `Q(α) = e^{-|α|²}/π * sum_nm g_nm (α*)^n α^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct HusimiSeries {
    g: ComplexMatrix,
}

impl HusimiSeries {
    pub fn coefficients(&self) -> &ComplexMatrix {
        &self.g
    }

    pub fn get(&self, n: usize, m: usize) -> C64 {
        self.g[(n, m)]
    }

    /// Non-zero coefficients as `(n, m, g_nm)`.
    pub fn nonzero_terms(&self) -> Vec<(usize, usize, C64)> {
        let size = self.g.rows();
        (0..size)
            .flat_map(|n| (0..size).map(move |m| (n, m)))
            .filter_map(|(n, m)| {
                let g = self.g[(n, m)];
                (g.re != 0.0 || g.im != 0.0).then_some((n, m, g))
            })
            .collect()
    }

    /// Multiplies back by `sqrt(n! m!)`.
    pub fn reconstruct_rho(&self) -> ComplexMatrix {
        let size = self.g.rows();
        ComplexMatrix::from_fn(size, size, |n, m| {
            self.g[(n, m)] * sqrt_factorial(n).unwrap() * sqrt_factorial(m).unwrap()
        })
    }

    pub fn q_value(&self, alpha: C64) -> f64 {
        let size = self.g.rows();
        let conj_pows: Vec<C64> = (0..size).map(|n| alpha.conj().powu(n as u32)).collect();
        let pows: Vec<C64> = (0..size).map(|m| alpha.powu(m as u32)).collect();
        let mut sum = C64::new(0.0, 0.0);
        for n in 0..size {
            for m in 0..size {
                sum += self.g[(n, m)] * conj_pows[n] * pows[m];
            }
        }
        (-alpha.norm_sqr()).exp() / PI * sum.re
    }
}

pub fn husimi_series(src: &SingleModeSource) -> HusimiSeries {
    let size = src.rho.rows();
    HusimiSeries {
        g: ComplexMatrix::from_fn(size, size, |n, m| {
            src.rho[(n, m)] / (sqrt_factorial(n).unwrap() * sqrt_factorial(m).unwrap())
        }),
    }
}
