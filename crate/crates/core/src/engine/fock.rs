use rayon::prelude::*;

use super::{finalize_probability, Scenario};
use crate::linalg::OccupationVector;
use crate::math::{for_each_permutation, multi_factorial, permutation_rank};
use crate::{Error, Result, C64};

/// Largest photon number accepted by the `(N!)²` permutation sum.
pub const MAX_FOCK_PHOTONS: usize = 8;

/// Probability of `m` for Fock inputs when every photon is detected
/// (`|m| = N`):
///
/// ```text
/// P_m = η^m / (m! n!) Σ_{σ₁, σ₂} J(σ₂ σ₁⁻¹) Π_i U_{k_σ₁(i), l_i} U*_{k_σ₂(i), l_i}
/// ```
///
/// with `J(τ) = Π_i V_{k_i, k_τ(i)}`, input ports `k` expanded from the
/// photon numbers and output ports `l` from `m`, both nondecreasing.
pub fn probability_fock(s: &Scenario, m: &OccupationVector) -> Result<f64> {
    let n = s
        .fock_numbers()
        .ok_or_else(|| Error::WrongPath("the permutation sum needs every source in a Fock state".into()))?;
    if m.len() != s.ports() {
        return Err(Error::Dimension(format!("pattern of length {} for {} ports", m.len(), s.ports())));
    }
    let big_n: usize = n.iter().sum();
    if m.total() != big_n {
        return Err(Error::Domain(format!(
            "pattern ({m}) has {} photons but the input has {big_n}; use the general path",
            m.total()
        )));
    }
    if big_n > MAX_FOCK_PHOTONS {
        return Err(Error::SizeGuard { what: "Fock photon number", size: big_n, limit: MAX_FOCK_PHOTONS });
    }
    let k = OccupationVector::new(n.clone()).expand();
    let l = m.expand();
    let u = s.network();
    let v = s.gram();

    let mut amp = Vec::new();
    let mut weight = Vec::new();
    let mut perms = Vec::new();
    for_each_permutation(big_n, |sigma| {
        amp.push((0..big_n).map(|i| u[(k[sigma[i]], l[i])]).product::<C64>());
        weight.push((0..big_n).map(|i| v.get(k[i], k[sigma[i]])).product::<C64>());
        perms.push(sigma.to_vec());
    });

    let partial: Vec<C64> = perms
        .par_iter()
        .enumerate()
        .map(|(r1, sigma1)| {
            let mut acc = C64::new(0.0, 0.0);
            let mut composed = vec![0usize; big_n];
            for (tau, &j) in perms.iter().zip(&weight) {
                if j.re == 0.0 && j.im == 0.0 {
                    continue;
                }
                for i in 0..big_n {
                    composed[i] = tau[sigma1[i]];
                }
                acc += j * amp[permutation_rank(&composed)].conj();
            }
            acc * amp[r1]
        })
        .collect();
    let sum: C64 = partial.iter().sum();

    let eta_m: f64 = m
        .counts()
        .iter()
        .zip(s.detectors().eta())
        .map(|(&ml, &eta)| eta.powi(ml as i32))
        .product();
    let norm = multi_factorial(m.counts())? * multi_factorial(&n)?;
    finalize_probability(sum * (eta_m / norm), m)
}
