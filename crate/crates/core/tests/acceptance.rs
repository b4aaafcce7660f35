//! Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances and time limits are pinned below.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use photocount::distinguishability::{ModeVector, GramMatrix};
use photocount::engine::{distribution, probability_fock, probability_general, vacuum_probability, vacuum_reduce, DetectorBank, Scenario};
use photocount::linalg::{ComplexMatrix, OccupationVector};
use photocount::multimode::{estimate_vacuum_probability, HusimiMode, MultimodeScenario, SamplableHusimiSource};
use photocount::oracle::gaussian::{gaussian_integral_check, gaussian_integral_check_matrix};
use photocount::oracle::ordering::ordering_identity_check;
use photocount::oracle::oracle_distribution;
use photocount::permanent::{permanent_naive, permanent_ryser};
use photocount::sources::{SingleModeSource, DEFAULT_TRUNCATION_TOLERANCE};
use photocount::C64;
use rand::Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok { Ok(detail) } else { Err(detail) }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn hom_dip() -> Outcome {
    const TOL: f64 = 1e-8;
    let mut worst = 0.0f64;
    for v in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let modes = vec![
            ModeVector::basis(2, 0).map_err(fail)?,
            ModeVector::new(vec![C64::new(v, 0.0), C64::new((1.0 - v * v).sqrt(), 0.0)]).map_err(fail)?,
        ];
        let s = Scenario::with_mode_vectors(hadamard_bs(), fock_sources(&[1, 1]), modes, DetectorBank::perfect(2))
            .map_err(fail)?;
        let coincidence = OccupationVector::new(vec![1, 1]);
        let engine = probability_general(&s, &coincidence).map_err(fail)?;
        let oracle = oracle_distribution(&s, 2, 2).map_err(fail)?.get(&coincidence).unwrap_or(f64::NAN);
        let expect = (1.0 - v * v) / 2.0;
        worst = worst.max((engine - expect).abs()).max((oracle - expect).abs()).max((engine - oracle).abs());
    }
    check(worst <= TOL, format!("max deviation {worst:.2e} (tol {TOL:.0e})"))
}

fn dual_path() -> Outcome {
    const TOL: f64 = 1e-8;
    let mut rng = rng(2);
    let (mut worst, mut patterns) = (0.0f64, 0);
    for case in 0..60 {
        let m = 1 + case % 3;
        let n_total = 1 + (case / 3) % 3;
        let n = random_fock_numbers(&mut rng, m, n_total);
        let s = Scenario::with_mode_vectors(
            haar_unitary(&mut rng, m),
            fock_sources(&n),
            random_modes(&mut rng, m, m),
            random_efficiencies(&mut rng, m),
        )
        .map_err(fail)?;
        for pat in OccupationVector::all_with_total(m, n_total) {
            let a = probability_fock(&s, &pat).map_err(fail)?;
            let b = probability_general(&s, &pat).map_err(fail)?;
            worst = worst.max((a - b).abs());
            patterns += 1;
        }
    }
    check(worst <= TOL, format!("60 scenarios, {patterns} patterns, max deviation {worst:.2e} (tol {TOL:.0e})"))
}

fn mixed_oracle() -> Outcome {
    const TOL: f64 = 1e-8;
    let mut rng = rng(3);
    let mut worst = 0.0f64;
    for case in 0..24 {
        let m = 2 + case % 2;
        let d = 1 + (case / 2) % 2;
        let s = random_mixed_scenario(&mut rng, m, d, case % 3 == 0);
        let max_total = s.p_max().min(3);
        let engine = distribution(&s, max_total).map_err(fail)?;
        let oracle = oracle_distribution(&s, d, max_total).map_err(fail)?;
        worst = worst.max(engine.max_deviation(&oracle));
    }
    check(worst <= TOL, format!("24 scenarios, max deviation {worst:.2e} (tol {TOL:.0e})"))
}

fn normalization() -> Outcome {
    const TOL: f64 = 1e-8;
    let mut rng = rng(4);
    let mut worst = 0.0f64;
    for _ in 0..40 {
        let m = rng.random_range(1..=3);
        let n_total = rng.random_range(1..=3);
        let n = random_fock_numbers(&mut rng, m, n_total);
        let s = Scenario::with_mode_vectors(
            haar_unitary(&mut rng, m),
            fock_sources(&n),
            random_modes(&mut rng, m, 2),
            random_efficiencies(&mut rng, m),
        )
        .map_err(fail)?;
        let total = distribution(&s, n_total).map_err(fail)?.total();
        worst = worst.max((total - 1.0).abs());
    }
    check(worst <= TOL, format!("40 scenarios, max |Σ P - 1| {worst:.2e} (tol {TOL:.0e})"))
}

fn vacuum_reduction() -> Outcome {
    const TOL: f64 = 1e-10;
    let mut rng = rng(5);
    let (mut worst, mut worst_oracle) = (0.0f64, 0.0f64);
    for case in 0..12 {
        let m = 3;
        let mut sources: Vec<SingleModeSource> = (0..m).map(|_| random_light_source(&mut rng)).collect();
        for s in sources.iter_mut() {
            if s.is_vacuum() {
                *s = SingleModeSource::fock(1, 1).map_err(fail)?;
            }
        }
        sources[case % m] = SingleModeSource::vacuum();
        if case % 2 == 1 {
            sources[(case + 1) % m] = SingleModeSource::vacuum();
        }
        let s = Scenario::with_mode_vectors(
            haar_unitary(&mut rng, m),
            sources,
            random_modes(&mut rng, m, 2),
            random_efficiencies(&mut rng, m),
        )
        .map_err(fail)?;
        let reduced = vacuum_reduce(&s);
        let max_total = s.p_max().min(3);
        let full = distribution(&s, max_total).map_err(fail)?;
        let small = distribution(&reduced, max_total).map_err(fail)?;
        worst = worst.max(full.max_deviation(&small));
        let oracle = oracle_distribution(&s, 2, max_total).map_err(fail)?;
        worst_oracle = worst_oracle.max(oracle.max_deviation(&small));
    }
    check(
        worst <= TOL && worst_oracle <= TOL,
        format!("12 scenarios, full vs reduced {worst:.2e}, reduced vs full-space oracle {worst_oracle:.2e} (tol {TOL:.0e})"),
    )
}

fn ordering_fixture() -> Outcome {
    const TOL: f64 = 1e-9;
    let mut worst = 0.0f64;
    for xi in [0.1, 0.3, 0.45] {
        worst = worst.max(ordering_identity_check(10, xi).map_err(fail)?.max_deviation());
    }
    check(worst <= TOL, format!("n_max 10, max element deviation {worst:.2e} (tol {TOL:.0e})"))
}

fn gaussian_fixture() -> Outcome {
    const TOL: f64 = 1e-6;
    let c = C64::new;
    let mut worst = 0.0f64;
    for (a, l, m) in [
        (1.0, c(0.0, 0.0), c(0.0, 0.0)),
        (2.0, c(1.0, 0.0), c(1.0, 0.0)),
        (0.7, c(0.3, -0.4), c(-0.2, 0.5)),
    ] {
        worst = worst.max(gaussian_integral_check(a, l, m).map_err(fail)?.relative_deviation);
    }
    let real = ComplexMatrix::from_real_rows(&[&[2.0, 0.5], &[0.5, 1.0]]).map_err(fail)?;
    worst = worst.max(gaussian_integral_check_matrix(&real, [c(0.0, 0.0); 2], [c(0.0, 0.0); 2]).map_err(fail)?.relative_deviation);
    let complex =
        ComplexMatrix::from_rows(vec![vec![c(1.5, 0.0), c(0.3, 0.4)], vec![c(0.3, -0.4), c(1.2, 0.0)]]).map_err(fail)?;
    worst = worst.max(
        gaussian_integral_check_matrix(&complex, [c(0.2, 0.1), c(-0.3, 0.2)], [c(0.1, -0.2), c(0.4, 0.0)])
            .map_err(fail)?
            .relative_deviation,
    );
    check(worst <= TOL, format!("5 parameter sets, max relative deviation {worst:.2e} (tol {TOL:.0e})"))
}

fn permanents() -> Outcome {
    const RYSER_TOL: f64 = 1e-10;
    const ONES_TOL: f64 = 1e-6;
    let mut rng = rng(8);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let n = 1 + i % 8;
        let a = ComplexMatrix::from_fn(n, n, |_, _| gaussian(&mut rng));
        let naive = permanent_naive(&a).map_err(fail)?;
        let ryser = permanent_ryser(&a).map_err(fail)?;
        worst = worst.max((naive - ryser).norm() / naive.norm().max(f64::MIN_POSITIVE));
    }
    let mut worst_ones = 0.0f64;
    let mut factorial = 1.0;
    for n in 1..=10 {
        factorial *= n as f64;
        let p = permanent_ryser(&ComplexMatrix::ones(n)).map_err(fail)?;
        worst_ones = worst_ones.max((p - factorial).norm() / factorial);
    }
    check(
        worst <= RYSER_TOL && worst_ones <= ONES_TOL,
        format!(
            "Ryser vs naive {worst:.2e} (tol {RYSER_TOL:.0e}), per(J_n) n ≤ 10 {worst_ones:.2e} (tol {ONES_TOL:.0e})"
        ),
    )
}

fn multimode() -> Outcome {
    const SAMPLES: usize = 100_000;
    let one = |mode| SamplableHusimiSource::new(vec![mode]).map_err(fail);
    let mut rng = rng(9);
    let mut worst_sigma = 0.0f64;
    for case in 0..3u64 {
        let u = haar_unitary(&mut rng, 3);
        let eta = DetectorBank::new((0..3).map(|_| rng.random_range(0.1..0.9)).collect()).map_err(fail)?;
        let alpha = gaussian(&mut rng) * 0.6;
        let nbar = rng.random_range(0.1..0.5);
        let ms = MultimodeScenario::new(
            u.clone(),
            vec![one(HusimiMode::Coherent { alpha })?, one(HusimiMode::Thermal { nbar })?, one(HusimiMode::Vacuum)?],
            eta.clone(),
            SAMPLES,
            case,
        )
        .map_err(fail)?;
        let est = estimate_vacuum_probability(&ms).map_err(fail)?;
        let s = Scenario::new(
            u,
            vec![
                SingleModeSource::coherent(alpha, 30).map_err(fail)?,
                SingleModeSource::thermal(nbar, 30).map_err(fail)?,
                SingleModeSource::vacuum(),
            ],
            GramMatrix::identity(3),
            eta,
        )
        .map_err(fail)?
        .with_cutoff(12)
        .map_err(fail)?;
        let exact = vacuum_probability(&s).map_err(fail)?;
        worst_sigma = worst_sigma.max((est.mean - exact).abs() / est.std_error);
    }

    let u = haar_unitary(&mut rng, 2);
    let eta = [0.6, 0.9];
    let alphas = [C64::new(0.5, 0.2), C64::new(-0.4, 0.3)];
    let coherent = |alpha| HusimiMode::Coherent { alpha };
    let ms = MultimodeScenario::new(
        u.clone(),
        vec![
            SamplableHusimiSource::new(vec![coherent(alphas[0]), HusimiMode::Vacuum]).map_err(fail)?,
            SamplableHusimiSource::new(vec![HusimiMode::Vacuum, coherent(alphas[1])]).map_err(fail)?,
        ],
        DetectorBank::new(eta.to_vec()).map_err(fail)?,
        SAMPLES,
        77,
    )
    .map_err(fail)?;
    let est = estimate_vacuum_probability(&ms).map_err(fail)?;
    let mut exponent = 0.0;
    for (k, alpha) in alphas.iter().enumerate() {
        for (l, e) in eta.iter().enumerate() {
            exponent += e * (alpha * u[(k, l)]).norm_sqr();
        }
    }
    let coherent_sigma = (est.mean - (-exponent).exp()).abs() / est.std_error;
    let again = estimate_vacuum_probability(&ms).map_err(fail)?;
    let reproducible = again.mean.to_bits() == est.mean.to_bits() && again.std_error.to_bits() == est.std_error.to_bits();
    check(
        worst_sigma <= 3.0 && coherent_sigma <= 3.0 && reproducible,
        format!(
            "embedded {worst_sigma:.2}σ, all-coherent {coherent_sigma:.2}σ (limit 3σ at {SAMPLES} samples), bit-reproducible {reproducible}"
        ),
    )
}

fn single_port_closed_forms() -> Outcome {
    const TOL: f64 = 1e-9;
    let mut worst = 0.0f64;
    let mut worst_oracle = 0.0f64;
    let one_port = |source| Scenario::new(ComplexMatrix::identity(1), vec![source], GramMatrix::identity(1), DetectorBank::perfect(1));
    let thermal = one_port(SingleModeSource::thermal_auto(1.0, DEFAULT_TRUNCATION_TOLERANCE).map_err(fail)?).map_err(fail)?;
    let coherent = one_port(SingleModeSource::coherent_auto(C64::new(1.0, 0.0), DEFAULT_TRUNCATION_TOLERANCE).map_err(fail)?).map_err(fail)?;
    let mut factorial = 1.0;
    for (s, expect) in [
        (&thermal, (0..=4).map(|k| 0.5f64.powi(k + 1)).collect::<Vec<_>>()),
        (
            &coherent,
            (0..=4)
                .map(|k| {
                    if k > 0 {
                        factorial *= k as f64;
                    }
                    (-1.0f64).exp() / factorial
                })
                .collect(),
        ),
    ] {
        let engine = distribution(s, 4).map_err(fail)?;
        let oracle = oracle_distribution(s, 1, 4).map_err(fail)?;
        for (k, p) in expect.iter().enumerate() {
            let pat = OccupationVector::new(vec![k]);
            worst = worst.max((engine.get(&pat).unwrap_or(f64::NAN) - p).abs());
            worst_oracle = worst_oracle.max((oracle.get(&pat).unwrap_or(f64::NAN) - p).abs());
        }
    }
    check(
        worst <= TOL && worst_oracle <= TOL,
        format!("engine {worst:.2e}, oracle {worst_oracle:.2e} (tol {TOL:.0e})"),
    )
}

type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("HOM dip reproduction", Some(Duration::from_secs(1)), hom_dip),
        ("dual-path equivalence", Some(Duration::from_secs(60)), dual_path),
        ("oracle equivalence, mixed sources", Some(Duration::from_secs(300)), mixed_oracle),
        ("normalization under loss", None, normalization),
        ("vacuum-port reduction", None, vacuum_reduction),
        ("ordering identity fixture", None, ordering_fixture),
        ("Gaussian integral fixture", None, gaussian_fixture),
        ("permanent kernels", None, permanents),
        ("multimode Monte Carlo", None, multimode),
        ("single-port closed forms", None, single_port_closed_forms),
    ];
    let mut failures = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        let in_time = limit.is_none_or(|l| elapsed <= l);
        let timing = match limit {
            Some(l) => format!("{:.3}s, limit {}s", elapsed.as_secs_f64(), l.as_secs()),
            None => format!("{:.3}s", elapsed.as_secs_f64()),
        };
        let pass = ok && in_time;
        if !pass {
            failures += 1;
        }
        println!("{} {:>2} {name}: {detail} [{timing}]", if pass { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
