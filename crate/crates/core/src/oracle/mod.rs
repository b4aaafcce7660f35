//! Brute-force reference simulator, written without any of the engine's
//! generating-function machinery.
//!
//! The input state is assembled on the full lattice of `M x d` modes (port
//! `k`, internal mode `s` at index `k * d + s`), the network is applied as an
//! explicit Fock-space unitary, and detection is modelled by binomial
//! thinning of the photon number in each port, summed over its internal
//! modes.
//!
//! Only coherences between states of equal total photon number are kept.
//! The network conserves photon number and detection only reads populations,
//! so this is exact for every count probability while keeping memory to
//! one block per photon-number sector.
//!
//! The [`ordering`] and [`gaussian`] submodules hold numerical fixtures for
//! the operator-ordering identity and the complex Gaussian integrals.

pub mod gaussian;
pub mod ordering;

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::distinguishability::ModeVector;
use crate::engine::{ComputationPath, DetectorBank, ProbabilityTable, Scenario, TableEntry, TableMetadata};
use crate::linalg::{ComplexMatrix, OccupationVector};
use crate::{Error, Result, C64};

/// Largest number of basis states the oracle will allocate.
pub const MAX_BASIS_STATES: usize = 20_000;

/// Occupation-number basis of `modes` bosonic modes with at most
/// `max_total` photons, grouped by total photon number.
#[derive(Clone, Debug)]
pub struct FockBasis {
    modes: usize,
    sectors: Vec<Vec<Vec<u8>>>,
    index: Vec<HashMap<Vec<u8>, usize>>,
}

impl FockBasis {
    pub fn new(modes: usize, max_total: usize) -> Result<Self> {
        let size = basis_size(modes, max_total);
        if size > MAX_BASIS_STATES as u128 {
            return Err(Error::SizeGuard {
                what: "oracle basis",
                size: size.min(usize::MAX as u128) as usize,
                limit: MAX_BASIS_STATES,
            });
        }
        let sectors: Vec<Vec<Vec<u8>>> = (0..=max_total)
            .map(|p| {
                OccupationVector::all_with_total(modes, p)
                    .into_iter()
                    .map(|o| o.0.iter().map(|&c| c as u8).collect())
                    .collect()
            })
            .collect();
        let index = sectors
            .iter()
            .map(|states| states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
            .collect();
        Ok(Self { modes, sectors, index })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn max_total(&self) -> usize {
        self.sectors.len() - 1
    }

    pub fn sector(&self, p: usize) -> &[Vec<u8>] {
        &self.sectors[p]
    }

    pub fn len(&self) -> usize {
        self.sectors.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn position(&self, p: usize, state: &[u8]) -> usize {
        self.index[p][state]
    }
}

fn basis_size(modes: usize, max_total: usize) -> u128 {
    // C(modes + max_total, max_total)
    let mut c: u128 = 1;
    for i in 1..=max_total as u128 {
        c = c.saturating_mul(modes as u128 + i) / i;
    }
    c
}

/// A density operator stored as one dense block per photon-number sector.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    basis: FockBasis,
    blocks: Vec<DMatrix<C64>>,
}

impl DensityOperator {
    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn block(&self, p: usize) -> &DMatrix<C64> {
        &self.blocks[p]
    }

    pub fn trace(&self) -> C64 {
        self.blocks.iter().map(|b| b.trace()).sum()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| (b - b.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .filter(|b| b.nrows() > 0)
            .map(|b| b.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min))
            .fold(f64::INFINITY, f64::min)
    }

    /// `⟨state|ρ|state⟩`
    pub fn population(&self, state: &[u8]) -> f64 {
        let p: usize = state.iter().map(|&c| c as usize).sum();
        if p > self.basis.max_total() {
            return 0.0;
        }
        let i = self.basis.position(p, state);
        self.blocks[p][(i, i)].re
    }
}

/// Amplitude of the lattice occupation `q` (over the `d` internal modes of
/// one port) in `(ĉ†)^n |0⟩ / sqrt(n!)`, with `n = |q|`.
fn expansion_amplitude(phi: &[C64], q: &[u8]) -> C64 {
    let n: usize = q.iter().map(|&c| c as usize).sum();
    let mut log_ratio = (1..=n).map(|i| (i as f64).ln()).sum::<f64>();
    let mut amp = C64::new(1.0, 0.0);
    for (&c, &f) in q.iter().zip(phi) {
        log_ratio -= (1..=c as usize).map(|i| (i as f64).ln()).sum::<f64>();
        amp *= f.powu(c as u32);
    }
    amp * (0.5 * log_ratio).exp()
}

fn oracle_modes(s: &Scenario, d: usize) -> Result<Vec<ModeVector>> {
    match s.mode_vectors() {
        Some(modes) => {
            if modes.iter().any(|m| m.dim() != d) {
                return Err(Error::Dimension(format!(
                    "scenario mode vectors have dimension {} but the oracle was asked for d = {d}",
                    modes[0].dim()
                )));
            }
            Ok(modes.to_vec())
        }
        None => s.gram().factorize(d),
    }
}

/// The input state `ρ⁽¹⁾ ⊗ … ⊗ ρ⁽ᴹ⁾` on the `M x d` lattice, with at most
/// the scenario's cutoff in total photons.
pub fn assemble_input_state(s: &Scenario, d: usize) -> Result<DensityOperator> {
    if d == 0 {
        return Err(Error::Dimension("internal dimension must be at least 1".into()));
    }
    let modes = oracle_modes(s, d)?;
    let ports = s.sources().len();
    let max_total = s.p_max().min(s.sources().iter().map(|src| src.n_cut()).sum());
    let basis = FockBasis::new(ports * d, max_total)?;
    let blocks = (0..=max_total)
        .map(|p| {
            let states = basis.sector(p);
            // per-state, per-port photon numbers and expansion amplitudes
            let local: Vec<Vec<(usize, C64)>> = states
                .iter()
                .map(|q| {
                    (0..ports)
                        .map(|k| {
                            let qk = &q[k * d..(k + 1) * d];
                            let n = qk.iter().map(|&c| c as usize).sum();
                            (n, expansion_amplitude(modes[k].amplitudes(), qk))
                        })
                        .collect()
                })
                .collect();
            DMatrix::from_fn(states.len(), states.len(), |i, j| {
                let mut z = C64::new(1.0, 0.0);
                for (k, src) in s.sources().iter().enumerate() {
                    let (a, amp_a) = local[i][k];
                    let (b, amp_b) = local[j][k];
                    if a > src.n_cut() || b > src.n_cut() {
                        return C64::new(0.0, 0.0);
                    }
                    z *= src.rho()[(a, b)] * amp_a * amp_b.conj();
                    if z.re == 0.0 && z.im == 0.0 {
                        break;
                    }
                }
                z
            })
        })
        .collect();
    Ok(DensityOperator { basis, blocks })
}

/// Fock-space action of the lattice transfer matrix `w` on one sector: column `j` is the image of
/// basis state `j`, obtained by applying the transformed creation operators
/// one photon at a time.
fn sector_unitary(basis: &FockBasis, p: usize, w: &ComplexMatrix) -> DMatrix<C64> {
    let states = basis.sector(p);
    let modes = basis.modes();
    let mut out = DMatrix::zeros(states.len(), states.len());
    for (col, q) in states.iter().enumerate() {
        // start at the vacuum
        let mut vec: Vec<C64> = vec![C64::new(1.0, 0.0)];
        let mut level = 0;
        let mut norm = 1.0;
        for (j, &count) in q.iter().enumerate() {
            for c in 0..count {
                let next_states = basis.sector(level + 1);
                let mut next = vec![C64::new(0.0, 0.0); next_states.len()];
                for (idx, state) in basis.sector(level).iter().enumerate() {
                    let x = vec[idx];
                    if x.re == 0.0 && x.im == 0.0 {
                        continue;
                    }
                    let mut target = state.clone();
                    for out_mode in 0..modes {
                        let coeff = w[(j, out_mode)];
                        if coeff.re == 0.0 && coeff.im == 0.0 {
                            continue;
                        }
                        target[out_mode] += 1;
                        let pos = basis.position(level + 1, &target);
                        next[pos] += x * coeff * (target[out_mode] as f64).sqrt();
                        target[out_mode] -= 1;
                    }
                }
                vec = next;
                level += 1;
                norm *= (c as f64 + 1.0).sqrt();
            }
        }
        for (row, &x) in vec.iter().enumerate() {
            out[(row, col)] = x / norm;
        }
    }
    out
}

/// Single-photon transfer matrix on the lattice. The output creation
/// operators are `b†_l = Σ_k U_kl a†_k`, so an input operator expands as
/// `a†_k = Σ_l U*_kl b†_l`, with the internal mode unchanged.
fn lattice_transfer(u: &ComplexMatrix, d: usize) -> ComplexMatrix {
    let conj = ComplexMatrix::from_fn(u.rows(), u.cols(), |k, l| u[(k, l)].conj());
    conj.kron(&ComplexMatrix::identity(d))
}

/// `𝒰 ρ 𝒰†`: the input state rewritten in the output modes
/// `b†_l = Σ_k U_kl a†_k` of each internal mode.
pub fn apply_network(rho: &DensityOperator, u: &ComplexMatrix) -> Result<DensityOperator> {
    let modes = rho.basis.modes();
    if !u.is_square() || u.rows() == 0 || !modes.is_multiple_of(u.rows()) {
        return Err(Error::Dimension(format!(
            "a {}x{} network cannot act on {modes} lattice modes",
            u.rows(),
            u.cols()
        )));
    }
    let w = lattice_transfer(u, modes / u.rows());
    let blocks = rho
        .blocks
        .iter()
        .enumerate()
        .map(|(p, block)| {
            let big_u = sector_unitary(&rho.basis, p, &w);
            &big_u * block * big_u.adjoint()
        })
        .collect();
    Ok(DensityOperator { basis: rho.basis.clone(), blocks })
}

/// Probability of `m` counts: every lattice population times the chance
/// that binomial thinning of each port's pooled photon number leaves `m_l`.
pub fn detect(rho: &DensityOperator, eta: &DetectorBank, m: &OccupationVector) -> Result<f64> {
    let ports = eta.len();
    let modes = rho.basis.modes();
    if ports == 0 || !modes.is_multiple_of(ports) || m.len() != ports {
        return Err(Error::Dimension(format!(
            "{ports} detectors and a pattern of length {} on {modes} lattice modes",
            m.len()
        )));
    }
    let d = modes / ports;
    let mut total = 0.0;
    for (p, states) in rho.basis.sectors.iter().enumerate() {
        if p < m.total() {
            continue;
        }
        for (i, q) in states.iter().enumerate() {
            let pop = rho.blocks[p][(i, i)].re;
            if pop == 0.0 {
                continue;
            }
            let mut weight = 1.0;
            for l in 0..ports {
                let n: usize = q[l * d..(l + 1) * d].iter().map(|&c| c as usize).sum();
                weight *= binomial_pmf(n, m.counts()[l], eta.eta()[l]);
                if weight == 0.0 {
                    break;
                }
            }
            total += pop * weight;
        }
    }
    Ok(total)
}

fn binomial_pmf(n: usize, k: usize, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

/// Brute-force table over every pattern with at most `max_total` counts.
pub fn oracle_distribution(s: &Scenario, d: usize, max_total: usize) -> Result<ProbabilityTable> {
    if !s.network().is_square() {
        return Err(Error::Dimension("the oracle needs the full square network".into()));
    }
    let rho = assemble_input_state(s, d)?;
    let out = apply_network(&rho, s.network())?;
    let entries = OccupationVector::all_up_to(s.ports(), max_total)
        .into_iter()
        .map(|m| {
            let probability = detect(&out, s.detectors(), &m)?;
            Ok(TableEntry { pattern: m, probability, path: ComputationPath::Oracle })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbabilityTable {
        metadata: TableMetadata {
            digest: None,
            cutoff: s.p_max(),
            max_total,
            truncation_budget: (1.0 - rho.trace().re).max(0.0),
        },
        entries,
    })
}
