mod common;

use common::*;
use photocount::distinguishability::GramMatrix;
use photocount::engine::{vacuum_probability, DetectorBank, Scenario};
use photocount::multimode::{estimate_vacuum_probability, HusimiMode, MultimodeScenario, SamplableHusimiSource};
use photocount::sources::SingleModeSource;
use photocount::C64;

fn one_mode(mode: HusimiMode) -> SamplableHusimiSource {
    SamplableHusimiSource::new(vec![mode]).unwrap()
}

#[test]
fn embedded_single_mode_sources_match_engine() {
    let mut rng = rng(9);
    let u = haar_unitary(&mut rng, 3);
    let eta = DetectorBank::new(vec![0.4, 0.7, 0.2]).unwrap();
    let alpha = C64::new(0.5, -0.3);
    let ms = MultimodeScenario::new(
        u.clone(),
        vec![
            one_mode(HusimiMode::Coherent { alpha }),
            one_mode(HusimiMode::Thermal { nbar: 0.3 }),
            one_mode(HusimiMode::Vacuum),
        ],
        eta.clone(),
        100_000,
        1,
    )
    .unwrap();
    let est = estimate_vacuum_probability(&ms).unwrap();
    let s = Scenario::new(
        u,
        vec![
            SingleModeSource::coherent(alpha, 30).unwrap(),
            SingleModeSource::thermal(0.3, 30).unwrap(),
            SingleModeSource::vacuum(),
        ],
        GramMatrix::identity(3),
        eta,
    )
    .unwrap()
    .with_cutoff(12)
    .unwrap();
    let exact = vacuum_probability(&s).unwrap();
    assert!((est.mean - exact).abs() < 3.0 * est.std_error, "{est:?} vs {exact}");
}

#[test]
fn coherent_closed_form_with_internal_modes() {
    let betas = [C64::new(0.4, 0.1), C64::new(-0.3, 0.6)];
    let mut rng = rng(4);
    let u = haar_unitary(&mut rng, 2);
    let eta = [0.5, 0.8];
    let sources = vec![
        SamplableHusimiSource::new(vec![HusimiMode::Coherent { alpha: betas[0] }, HusimiMode::Vacuum]).unwrap(),
        SamplableHusimiSource::new(vec![HusimiMode::Vacuum, HusimiMode::Coherent { alpha: betas[1] }]).unwrap(),
    ];
    let ms = MultimodeScenario::new(u.clone(), sources, DetectorBank::new(eta.to_vec()).unwrap(), 100_000, 3).unwrap();
    let est = estimate_vacuum_probability(&ms).unwrap();
    // Orthogonal internal modes: each coherent amplitude spreads as β U[k, :]
    // and is thinned independently.
    let mut exponent = 0.0;
    for (k, beta) in betas.iter().enumerate() {
        for l in 0..2 {
            exponent += eta[l] * (beta * u[(k, l)]).norm_sqr();
        }
    }
    let expect = (-exponent).exp();
    assert!((est.mean - expect).abs() < 3.0 * est.std_error, "{est:?} vs {expect}");
}

#[test]
fn seeded_runs_are_reproducible() {
    let build = |seed| {
        MultimodeScenario::new(
            hadamard_bs(),
            vec![one_mode(HusimiMode::Thermal { nbar: 0.5 }), one_mode(HusimiMode::Vacuum)],
            DetectorBank::uniform(2, 0.6).unwrap(),
            20_000,
            seed,
        )
        .unwrap()
    };
    let a = estimate_vacuum_probability(&build(99)).unwrap();
    let b = estimate_vacuum_probability(&build(99)).unwrap();
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let c = pool.install(|| estimate_vacuum_probability(&build(99)).unwrap());
    assert_eq!(a.mean.to_bits(), c.mean.to_bits());
    let other = estimate_vacuum_probability(&build(100)).unwrap();
    assert_ne!(a.mean, other.mean);
}

#[test]
fn standard_error_scales_with_sample_count() {
    let ms = MultimodeScenario::new(
        hadamard_bs(),
        vec![
            one_mode(HusimiMode::Coherent { alpha: C64::new(0.8, 0.0) }),
            one_mode(HusimiMode::Thermal { nbar: 0.4 }),
        ],
        DetectorBank::new(vec![0.5, 0.3]).unwrap(),
        400_000,
        12,
    )
    .unwrap();
    let full = estimate_vacuum_probability(&ms).unwrap();
    let quarter = estimate_vacuum_probability(&ms.clone().with_sample_count(100_000).unwrap()).unwrap();
    let ratio = quarter.std_error / full.std_error;
    assert!((1.8..=2.2).contains(&ratio), "ratio {ratio}");
    assert!(full.mean > -3.0 * full.std_error && full.mean < 1.0 + 3.0 * full.std_error);
}
