//! Random scenario generators shared by the integration tests and the
//! acceptance runner.
#![allow(dead_code)]

use nalgebra::DMatrix;
use photocount::distinguishability::ModeVector;
use photocount::engine::{DetectorBank, Scenario};
use photocount::linalg::ComplexMatrix;
use photocount::sources::SingleModeSource;
use photocount::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of `R`'s diagonal moved into `Q`.
pub fn haar_unitary(rng: &mut ChaCha8Rng, m: usize) -> ComplexMatrix {
    let z = DMatrix::from_fn(m, m, |_, _| gaussian(rng));
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    let q = DMatrix::from_fn(m, m, |i, j| {
        let d = r[(j, j)];
        q[(i, j)] * (d / d.norm())
    });
    ComplexMatrix::from_nalgebra(&q)
}

pub fn random_modes(rng: &mut ChaCha8Rng, count: usize, d: usize) -> Vec<ModeVector> {
    (0..count)
        .map(|_| ModeVector::normalized((0..d).map(|_| gaussian(rng)).collect()).unwrap())
        .collect()
}

pub fn random_efficiencies(rng: &mut ChaCha8Rng, m: usize) -> DetectorBank {
    DetectorBank::new((0..m).map(|_| rng.random_range(0.0..=1.0)).collect()).unwrap()
}

pub fn hadamard_bs() -> ComplexMatrix {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_real_rows(&[&[r, r], &[r, -r]]).unwrap()
}

/// Fock inputs with photon numbers summing to `n_total`, spread at random
/// over `m` ports.
pub fn random_fock_numbers(rng: &mut ChaCha8Rng, m: usize, n_total: usize) -> Vec<usize> {
    let mut n = vec![0; m];
    for _ in 0..n_total {
        n[rng.random_range(0..m)] += 1;
    }
    n
}

pub fn fock_sources(n: &[usize]) -> Vec<SingleModeSource> {
    n.iter().map(|&k| SingleModeSource::fock(k, k).unwrap()).collect()
}

/// A small non-Fock source with a loose truncation budget so the oracle's
/// Fock space stays small. Both engine and oracle see the same truncated
/// state, so their agreement is exact.
pub fn random_light_source(rng: &mut ChaCha8Rng) -> SingleModeSource {
    match rng.random_range(0..4) {
        0 => SingleModeSource::fock(1, 1).unwrap(),
        1 => {
            let alpha = gaussian(rng) * 0.5;
            SingleModeSource::coherent_with_tolerance(alpha, 2, 1.0).unwrap()
        }
        2 => SingleModeSource::thermal_with_tolerance(rng.random_range(0.05..0.4), 2, 1.0).unwrap(),
        _ => SingleModeSource::vacuum(),
    }
}

pub fn random_mixed_scenario(rng: &mut ChaCha8Rng, m: usize, d: usize, uniform_eta: bool) -> Scenario {
    let sources: Vec<SingleModeSource> = (0..m).map(|_| random_light_source(rng)).collect();
    let u = haar_unitary(rng, m);
    let modes = random_modes(rng, m, d);
    let eta = if uniform_eta {
        DetectorBank::uniform(m, rng.random_range(0.3..=1.0)).unwrap()
    } else {
        random_efficiencies(rng, m)
    };
    Scenario::with_mode_vectors(u, sources, modes, eta).unwrap()
}
