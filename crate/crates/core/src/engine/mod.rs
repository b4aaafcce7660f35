//! Count statistics of a lossy linear multiport.
//!
//! The zero-count probability `P₀(η)` is evaluated as
//!
//! ```text
//! P₀ = Σ_{n,m} per(H[m, n]) Π_k g⁽ᵏ⁾_{n_k, m_k},   g_nm = ρ_nm / sqrt(n! m!)
//! ```
//!
//! with `H = I - (U Λ U†) ∘ V`. Count probabilities are its scaled
//! efficiency derivatives,
//! `P_m = Π_l (η_l^{m_l} / m_l!) (-∂/∂η_l)^{m_l} P₀`. The production route
//! obtains those derivatives exactly by running the same permanent sum over a
//! ring of truncated power series in efficiency offsets. A Chebyshev
//! interpolation route and a permutation-sum fast path for Fock inputs are
//! provided alongside.

mod fock;
mod series;
mod table;

use serde::{Deserialize, Serialize};

use crate::distinguishability::{gram_matrix, GramMatrix, ModeVector};
use crate::linalg::{row_orthonormality_residual, unitarity_residual, ComplexMatrix, OccupationVector};
use crate::sources::SingleModeSource;
use crate::{Error, Result, C64};

pub use fock::{probability_fock, MAX_FOCK_PHOTONS};
pub use series::{
    probabilities, probability_general, probability_general_interpolated, vacuum_probability,
    vacuum_probability_at, MAX_SERIES_TERMS,
};
pub use table::{distribution, ComputationPath, ProbabilityTable, TableEntry, TableMetadata};

pub const UNITARITY_TOL: f64 = 1e-10;
/// Magnitude below zero (or above one) still treated as roundoff.
pub const CLAMP_TOL: f64 = 1e-9;
/// Largest imaginary residue accepted on a probability.
pub const IMAG_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DetectorBank {
    eta: Vec<f64>,
}

impl DetectorBank {
    pub fn new(eta: Vec<f64>) -> Result<Self> {
        if let Some((l, e)) = eta.iter().enumerate().find(|(_, e)| !(0.0..=1.0).contains(*e)) {
            return Err(Error::Validation(format!(
                "detector efficiency {e} at port {l} is outside [0, 1]"
            )));
        }
        Ok(Self { eta })
    }

    pub fn uniform(ports: usize, eta: f64) -> Result<Self> {
        Self::new(vec![eta; ports])
    }

    pub fn perfect(ports: usize) -> Self {
        Self { eta: vec![1.0; ports] }
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }
}

/// A validated experiment: `N` sources feeding the first-index ports of an
/// `N x M` network with orthonormal rows (the full `M x M` unitary when
/// `N = M`), detected at `M` output ports.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    network: ComplexMatrix,
    sources: Vec<SingleModeSource>,
    gram: GramMatrix,
    mode_vectors: Option<Vec<ModeVector>>,
    detectors: DetectorBank,
    p_max: usize,
}

impl Scenario {
    /// Builds a scenario with total-photon cutoff `Σ_k n_cut_k`.
    pub fn new(
        network: ComplexMatrix,
        sources: Vec<SingleModeSource>,
        gram: GramMatrix,
        detectors: DetectorBank,
    ) -> Result<Self> {
        check_network(&network)?;
        let n = network.rows();
        if sources.len() != n || gram.size() != n {
            return Err(Error::Dimension(format!(
                "network has {n} input ports but {} sources and a {}x{} Gram matrix",
                sources.len(),
                gram.size(),
                gram.size()
            )));
        }
        if detectors.len() != network.cols() {
            return Err(Error::Dimension(format!(
                "network has {} output ports but {} detectors",
                network.cols(),
                detectors.len()
            )));
        }
        let p_max = sources.iter().map(SingleModeSource::n_cut).sum();
        let this = Self { network, sources, gram, mode_vectors: None, detectors, p_max };
        this.check_cutoff(p_max)?;
        Ok(this)
    }

    /// Like [`Scenario::new`] with the Gram matrix computed from mode vectors,
    /// which are kept for the brute-force oracle.
    pub fn with_mode_vectors(
        network: ComplexMatrix,
        sources: Vec<SingleModeSource>,
        modes: Vec<ModeVector>,
        detectors: DetectorBank,
    ) -> Result<Self> {
        let gram = gram_matrix(&modes)?;
        let mut this = Self::new(network, sources, gram, detectors)?;
        this.mode_vectors = Some(modes);
        Ok(this)
    }

    /// Replaces the total-photon cutoff.
    pub fn with_cutoff(mut self, p_max: usize) -> Result<Self> {
        self.check_cutoff(p_max)?;
        self.p_max = p_max;
        Ok(self)
    }

    pub fn with_detectors(mut self, detectors: DetectorBank) -> Result<Self> {
        if detectors.len() != self.ports() {
            return Err(Error::Dimension(format!(
                "scenario has {} output ports but {} detectors",
                self.ports(),
                detectors.len()
            )));
        }
        self.detectors = detectors;
        Ok(self)
    }

    /// Replaces the Gram matrix and drops any stored mode vectors.
    pub fn with_gram(mut self, gram: GramMatrix) -> Result<Self> {
        if gram.size() != self.sources.len() {
            return Err(Error::Dimension(format!(
                "{} sources but a {}x{} Gram matrix",
                self.sources.len(),
                gram.size(),
                gram.size()
            )));
        }
        self.gram = gram;
        self.mode_vectors = None;
        Ok(self)
    }

    fn check_cutoff(&self, p_max: usize) -> Result<()> {
        let required = match self.fock_numbers() {
            Some(ns) => ns.iter().sum(),
            None => 1,
        };
        if p_max < required {
            return Err(Error::Cutoff {
                cutoff: p_max,
                required,
                detail: "total-photon cutoff below the input photon number".into(),
            });
        }
        Ok(())
    }

    pub fn network(&self) -> &ComplexMatrix {
        &self.network
    }

    pub fn sources(&self) -> &[SingleModeSource] {
        &self.sources
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    pub fn mode_vectors(&self) -> Option<&[ModeVector]> {
        self.mode_vectors.as_deref()
    }

    pub fn detectors(&self) -> &DetectorBank {
        &self.detectors
    }

    pub fn p_max(&self) -> usize {
        self.p_max
    }

    /// Number of output ports `M`.
    pub fn ports(&self) -> usize {
        self.network.cols()
    }

    /// Photon numbers when every source is a Fock state.
    pub fn fock_numbers(&self) -> Option<Vec<usize>> {
        self.sources.iter().map(SingleModeSource::fock_number).collect()
    }

    /// Population dropped by the truncation: `1 - Σ_{|n| <= p_max} Π_k ρ⁽ᵏ⁾_{n_k n_k}`.
    pub fn truncation_budget(&self) -> f64 {
        let mut dist = vec![1.0];
        for src in &self.sources {
            let diag: Vec<f64> = (0..=src.n_cut()).map(|n| src.rho()[(n, n)].re).collect();
            let mut next = vec![0.0; (dist.len() + diag.len() - 1).min(self.p_max + 1)];
            for (a, &pa) in dist.iter().enumerate() {
                for (b, &pb) in diag.iter().enumerate() {
                    if a + b <= self.p_max {
                        next[a + b] += pa * pb;
                    }
                }
            }
            dist = next;
        }
        (1.0 - dist.iter().sum::<f64>()).max(0.0)
    }
}

fn check_network(u: &ComplexMatrix) -> Result<()> {
    if u.is_square() {
        let residual = unitarity_residual(u).unwrap_or(f64::INFINITY);
        if residual > UNITARITY_TOL {
            return Err(Error::Validation(format!("unitarity violated, residual {residual:?}")));
        }
        return Ok(());
    }
    if u.rows() > u.cols() {
        return Err(Error::Dimension(format!(
            "network with {} inputs and {} outputs cannot have orthonormal rows",
            u.rows(),
            u.cols()
        )));
    }
    let residual = row_orthonormality_residual(u);
    if residual > UNITARITY_TOL {
        return Err(Error::Validation(format!("unitarity violated, residual {residual:?}")));
    }
    Ok(())
}

/// `H = I - (U Λ U†) ∘ V`, using `V_kk = 1` on the diagonal.
pub fn build_h(network: &ComplexMatrix, detectors: &DetectorBank, gram: &GramMatrix) -> Result<ComplexMatrix> {
    let n = network.rows();
    if detectors.len() != network.cols() || gram.size() != n {
        return Err(Error::Dimension(format!(
            "{}x{} network, {} detectors, {}x{} Gram matrix",
            n,
            network.cols(),
            detectors.len(),
            gram.size(),
            gram.size()
        )));
    }
    Ok(build_h_at(network, detectors.eta(), gram))
}

pub(crate) fn build_h_at(network: &ComplexMatrix, eta: &[f64], gram: &GramMatrix) -> ComplexMatrix {
    let n = network.rows();
    ComplexMatrix::from_fn(n, n, |i, j| {
        let mixed: C64 = (0..network.cols())
            .map(|l| network[(i, l)] * eta[l] * network[(j, l)].conj())
            .sum();
        if i == j {
            C64::new(1.0 - mixed.re, 0.0)
        } else {
            -mixed * gram.get(i, j)
        }
    })
}

/// Drops vacuum sources together with their network rows and Gram
/// rows/columns. Every count probability is unchanged.
pub fn vacuum_reduce(s: &Scenario) -> Scenario {
    let keep: Vec<usize> = (0..s.sources.len()).filter(|&k| !s.sources[k].is_vacuum()).collect();
    if keep.len() == s.sources.len() {
        return s.clone();
    }
    let cols: Vec<usize> = (0..s.ports()).collect();
    Scenario {
        network: s.network.select(&keep, &cols),
        sources: keep.iter().map(|&k| s.sources[k].clone()).collect(),
        gram: s.gram.restrict(&keep),
        mode_vectors: s
            .mode_vectors
            .as_ref()
            .map(|modes| keep.iter().map(|&k| modes[k].clone()).collect()),
        detectors: s.detectors.clone(),
        p_max: s.p_max,
    }
}

/// Converts a computed complex probability to a real one, clamping roundoff
/// just outside `[0, 1]`.
pub(crate) fn finalize_probability(z: C64, pattern: &OccupationVector) -> Result<f64> {
    if z.im.abs() > IMAG_TOL {
        return Err(Error::InvariantViolation(format!(
            "probability of pattern ({pattern}) has imaginary part {:e}",
            z.im
        )));
    }
    let p = z.re;
    if !(-CLAMP_TOL..=1.0 + CLAMP_TOL).contains(&p) || !p.is_finite() {
        return Err(Error::InvariantViolation(format!(
            "probability of pattern ({pattern}) is {p}, outside [0, 1]"
        )));
    }
    Ok(p.clamp(0.0, 1.0))
}
