//! Zero-count probability for sources spread over `d` internal modes, by
//! Monte-Carlo integration over their Husimi functions:
//!
//! ```text
//! P₀ = 1 / Π_k (1 - η_k)^d · E_Q[ exp(-α† (𝓗⁻¹ - I) α) ],   𝓗 = U (I - Λ) U† ⊗ I_d
//! ```
//!
//! Each internal mode of each source is vacuum, coherent or thermal, so the
//! Husimi density is a product of complex Gaussians and is sampled exactly.
//! Samples are drawn in fixed-size chunks, each from its own ChaCha stream
//! of the seed, and chunk statistics are merged in a fixed pairwise tree, so
//! results do not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::DetectorBank;
use crate::linalg::{check_unitary, ComplexMatrix};
use crate::{Error, Result, C64};

/// Efficiencies above this make `𝓗` numerically singular.
pub const MAX_EFFICIENCY: f64 = 1.0 - 1e-6;
const CHUNK: usize = 4096;

/// Husimi function of one internal mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HusimiMode {
    Vacuum,
    Coherent { alpha: C64 },
    Thermal { nbar: f64 },
}

impl HusimiMode {
    /// Draws from `Q(α)`: a complex Gaussian with mean `β` and
    /// `E|α - β|² = 1` (coherent, vacuum) or `1 + n̄` (thermal).
    fn sample(&self, rng: &mut ChaCha8Rng) -> C64 {
        let (mean, var) = match *self {
            HusimiMode::Vacuum => (C64::new(0.0, 0.0), 1.0),
            HusimiMode::Coherent { alpha } => (alpha, 1.0),
            HusimiMode::Thermal { nbar } => (C64::new(0.0, 0.0), 1.0 + nbar),
        };
        let s = (var / 2.0).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        mean + C64::new(re * s, im * s)
    }
}

/// A source as a product of per-internal-mode Husimi functions.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplableHusimiSource {
    modes: Vec<HusimiMode>,
}

impl SamplableHusimiSource {
    pub fn new(modes: Vec<HusimiMode>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Dimension("a source needs at least one internal mode".into()));
        }
        for m in &modes {
            match *m {
                HusimiMode::Thermal { nbar } if !(nbar >= 0.0 && nbar.is_finite()) => {
                    return Err(Error::Domain(format!("thermal mean occupation {nbar} must be >= 0")))
                }
                HusimiMode::Coherent { alpha } if !(alpha.re.is_finite() && alpha.im.is_finite()) => {
                    return Err(Error::Domain("coherent amplitude must be finite".into()))
                }
                _ => {}
            }
        }
        Ok(Self { modes })
    }

    pub fn vacuum(d: usize) -> Self {
        Self { modes: vec![HusimiMode::Vacuum; d] }
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[HusimiMode] {
        &self.modes
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultimodeScenario {
    network: ComplexMatrix,
    sources: Vec<SamplableHusimiSource>,
    detectors: DetectorBank,
    d: usize,
    sample_count: usize,
    rng_seed: u64,
}

impl MultimodeScenario {
    pub fn new(
        network: ComplexMatrix,
        sources: Vec<SamplableHusimiSource>,
        detectors: DetectorBank,
        sample_count: usize,
        rng_seed: u64,
    ) -> Result<Self> {
        if !check_unitary(&network, crate::engine::UNITARITY_TOL) {
            let residual = crate::linalg::unitarity_residual(&network).unwrap_or(f64::INFINITY);
            return Err(Error::Validation(format!("unitarity violated, residual {residual:?}")));
        }
        let m = network.rows();
        if sources.len() != m || detectors.len() != m {
            return Err(Error::Dimension(format!(
                "{m}-port network with {} sources and {} detectors",
                sources.len(),
                detectors.len()
            )));
        }
        let d = sources.first().map_or(1, SamplableHusimiSource::dim);
        if sources.iter().any(|s| s.dim() != d) {
            return Err(Error::Dimension("all sources must share one internal dimension".into()));
        }
        if let Some(eta) = detectors.eta().iter().find(|&&e| e > MAX_EFFICIENCY) {
            return Err(Error::Singular(format!(
                "efficiency {eta} makes U(I - Λ)U† singular; the limit is {MAX_EFFICIENCY}"
            )));
        }
        if sample_count < 2 {
            return Err(Error::Domain("at least two samples are needed for an error estimate".into()));
        }
        Ok(Self { network, sources, detectors, d, sample_count, rng_seed })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn with_sample_count(mut self, sample_count: usize) -> Result<Self> {
        if sample_count < 2 {
            return Err(Error::Domain("at least two samples are needed for an error estimate".into()));
        }
        self.sample_count = sample_count;
        Ok(self)
    }
}

/// `U (I - Λ) U† ⊗ I_d`, with row index `k * d + s`.
pub fn build_calligraphic_h(network: &ComplexMatrix, detectors: &DetectorBank, d: usize) -> Result<ComplexMatrix> {
    let m = network.rows();
    if !network.is_square() || detectors.len() != m {
        return Err(Error::Dimension(format!(
            "{}x{} network with {} detectors",
            m,
            network.cols(),
            detectors.len()
        )));
    }
    if let Some(eta) = detectors.eta().iter().find(|&&e| e > MAX_EFFICIENCY) {
        return Err(Error::Singular(format!("efficiency {eta} makes U(I - Λ)U† singular")));
    }
    let eta = detectors.eta();
    let g = ComplexMatrix::from_fn(m, m, |i, j| {
        (0..m).map(|l| network[(i, l)] * (1.0 - eta[l]) * network[(j, l)].conj()).sum()
    });
    Ok(g.kron(&ComplexMatrix::identity(d)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Count, mean and sum of squared deviations of a batch of weights.
#[derive(Clone, Copy, Debug)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn merge(a: Moments, b: Moments) -> Moments {
        let n = a.n + b.n;
        if n == 0.0 {
            return a;
        }
        let delta = b.mean - a.mean;
        Moments {
            n,
            mean: a.mean + delta * b.n / n,
            m2: a.m2 + b.m2 + delta * delta * a.n * b.n / n,
        }
    }
}

fn pairwise(items: &[Moments]) -> Moments {
    match items.len() {
        0 => Moments { n: 0.0, mean: 0.0, m2: 0.0 },
        1 => items[0],
        len => Moments::merge(pairwise(&items[..len / 2]), pairwise(&items[len / 2..])),
    }
}

/// Monte-Carlo estimate of the zero-count probability and its standard error.
pub fn estimate_vacuum_probability(ms: &MultimodeScenario) -> Result<Estimate> {
    let h = build_calligraphic_h(&ms.network, &ms.detectors, ms.d)?;
    let h_inv = h.inverse()?;
    let size = h.rows();
    // K = 𝓗⁻¹ - I
    let k = ComplexMatrix::from_fn(size, size, |i, j| {
        h_inv[(i, j)] - if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
    });
    let log_prefactor: f64 = -(ms.d as f64) * ms.detectors.eta().iter().map(|&e| (1.0 - e).ln()).sum::<f64>();
    let modes: Vec<HusimiMode> = ms.sources.iter().flat_map(|s| s.modes.iter().copied()).collect();

    let chunks = ms.sample_count.div_ceil(CHUNK);
    let stats: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(ms.rng_seed);
            rng.set_stream(chunk as u64);
            let count = CHUNK.min(ms.sample_count - chunk * CHUNK);
            let mut alpha = vec![C64::new(0.0, 0.0); size];
            let mut acc = Moments { n: 0.0, mean: 0.0, m2: 0.0 };
            for _ in 0..count {
                for (a, mode) in alpha.iter_mut().zip(&modes) {
                    *a = mode.sample(&mut rng);
                }
                let mut quad = C64::new(0.0, 0.0);
                for i in 0..size {
                    let mut row = C64::new(0.0, 0.0);
                    for j in 0..size {
                        row += k[(i, j)] * alpha[j];
                    }
                    quad += alpha[i].conj() * row;
                }
                let w = (log_prefactor - quad.re).exp();
                acc = Moments::merge(acc, Moments { n: 1.0, mean: w, m2: 0.0 });
            }
            acc
        })
        .collect();
    let total = pairwise(&stats);
    let variance = total.m2 / (total.n - 1.0);
    Ok(Estimate { mean: total.mean, std_error: (variance / total.n).sqrt() })
}
