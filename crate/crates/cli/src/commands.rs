use std::io::Write;
use std::path::Path;
use std::time::Instant;

use photocount::distinguishability::model_uniform_overlap;
use photocount::engine::{distribution, probabilities, DetectorBank, Scenario};
use photocount::linalg::{ComplexMatrix, OccupationVector};
use photocount::multimode::estimate_vacuum_probability;
use photocount::oracle::oracle_distribution;
use photocount::permanent::{permanent_naive, permanent_ryser, NAIVE_MAX, RYSER_MAX};
use photocount::{Error, C64};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::format::{pattern, sig, write_csv};
use crate::scenario::ScenarioFile;

/// Engine and oracle must agree to this absolute tolerance.
pub const ORACLE_TOLERANCE: f64 = 1e-8;
const BENCH_REPEATS: usize = 5;
const BENCH_AGREEMENT: f64 = 1e-10;
const UNIFORM_OVERLAP_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ScanParam {
    Overlap,
    Eta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Algo {
    Naive,
    Ryser,
    Both,
}

fn load(path: &Path) -> CliResult<(ScenarioFile, Scenario)> {
    let file = ScenarioFile::load(path)?;
    let scenario = file.scenario()?;
    Ok((file, scenario))
}

pub fn validate(path: &Path, out: &mut impl Write) -> CliResult<()> {
    let (file, s) = load(path)?;
    if file.multimode.is_some() {
        file.multimode_scenario()?;
    }
    writeln!(
        out,
        "ok: {} ports, {} sources, cutoff {}, truncation budget {}, digest {}",
        s.ports(),
        s.sources().len(),
        s.p_max(),
        sig(s.truncation_budget()),
        file.digest()?
    )?;
    Ok(())
}

pub fn simulate(path: &Path, max_total: Option<usize>, format: Format, out: &mut impl Write) -> CliResult<()> {
    let (file, s) = load(path)?;
    let mut table = distribution(&s, max_total.unwrap_or(s.p_max()))?;
    table.metadata.digest = Some(file.digest()?);
    match format {
        Format::Csv => write_csv(out, &table)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &table).map_err(std::io::Error::other)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn sweep(from: f64, to: f64, steps: usize) -> CliResult<Vec<f64>> {
    match steps {
        0 => Err(CliError::Argument("--steps must be at least 1".into())),
        1 => Ok(vec![from]),
        n => Ok((0..n).map(|i| from + (to - from) * i as f64 / (n - 1) as f64).collect()),
    }
}

fn uniform_overlap(s: &Scenario) -> Option<C64> {
    let g = s.gram();
    let v = g.get(0, 1);
    let n = g.size();
    let uniform = (0..n).all(|k| (k + 1..n).all(|l| (g.get(k, l) - v).norm() <= UNIFORM_OVERLAP_TOL));
    uniform.then_some(v)
}

/// Two-photon output statistics `P(1,1)`, `P(2,0)`, `P(0,2)` on the first
/// two output ports while one parameter is swept.
pub fn hom_scan(path: &Path, param: ScanParam, from: f64, to: f64, steps: usize, out: &mut impl Write) -> CliResult<()> {
    let (_, s) = load(path)?;
    let values = sweep(from, to, steps)?;
    let m = s.ports();
    if m < 2 {
        return Err(Error::Domain(format!("a two-photon scan needs at least two output ports, got {m}")).into());
    }
    let pat = |a: usize, b: usize| {
        let mut counts = vec![0; m];
        counts[0] = a;
        counts[1] = b;
        OccupationVector::new(counts)
    };
    let patterns = [pat(1, 1), pat(2, 0), pat(0, 2)];
    if param == ScanParam::Overlap {
        if s.sources().len() < 2 {
            return Err(Error::Domain("an overlap scan needs at least two sources".into()).into());
        }
        if uniform_overlap(&s).is_none() {
            return Err(Error::Domain("an overlap scan needs a scenario with one common overlap between all sources".into())
                .into());
        }
    }
    let name = match param {
        ScanParam::Overlap => "overlap",
        ScanParam::Eta => "eta",
    };
    writeln!(out, "{name},p11,p20,p02")?;
    for x in values {
        let point = match param {
            ScanParam::Overlap => s.clone().with_gram(model_uniform_overlap(s.sources().len(), C64::new(x, 0.0))?)?,
            ScanParam::Eta => s.clone().with_detectors(DetectorBank::uniform(m, x)?)?,
        };
        let p = probabilities(&point, &patterns)?;
        writeln!(out, "{},{},{},{}", sig(x), sig(p[0]), sig(p[1]), sig(p[2]))?;
    }
    Ok(())
}

pub fn oracle_compare(
    path: &Path,
    d: Option<usize>,
    max_total: Option<usize>,
    inject_error: Option<f64>,
    out: &mut impl Write,
) -> CliResult<()> {
    let (_, s) = load(path)?;
    let d = d.unwrap_or_else(|| match s.mode_vectors() {
        Some(modes) => modes[0].dim(),
        None => s.sources().len().max(1),
    });
    let max_total = max_total.unwrap_or(s.p_max());
    let oracle = oracle_distribution(&s, d, max_total)?;
    let mut engine = distribution(&s, max_total)?;
    if let (Some(delta), Some(first)) = (inject_error, engine.entries.first_mut()) {
        first.probability += delta;
    }
    writeln!(out, "pattern,engine,oracle,deviation")?;
    let mut worst = 0.0f64;
    for e in &engine.entries {
        let o = oracle.get(&e.pattern).unwrap_or(f64::NAN);
        let dev = (e.probability - o).abs();
        worst = if dev.is_nan() { f64::INFINITY } else { worst.max(dev) };
        writeln!(out, "{},{},{},{}", pattern(&e.pattern), sig(e.probability), sig(o), sig(dev))?;
    }
    writeln!(out, "max deviation {} (tolerance {})", sig(worst), sig(ORACLE_TOLERANCE))?;
    if worst <= ORACLE_TOLERANCE {
        Ok(())
    } else {
        Err(CliError::OracleMismatch { deviation: worst, tolerance: ORACLE_TOLERANCE })
    }
}

/// Parses `2,3,5..8` into `[2, 3, 5, 6, 7, 8]`.
pub fn parse_sizes(spec: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::Argument(format!("cannot read sizes `{spec}`; expected a list like 2,3,5..8"));
    let mut sizes = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((a, b)) => {
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b.trim().parse().map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                sizes.extend(a..=b);
            }
            None => sizes.push(part.parse().map_err(|_| bad())?),
        }
    }
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(bad());
    }
    Ok(sizes)
}

fn median_time(a: &ComplexMatrix, kernel: fn(&ComplexMatrix) -> photocount::Result<C64>) -> photocount::Result<(f64, C64)> {
    let mut times = Vec::with_capacity(BENCH_REPEATS);
    let mut value = C64::new(0.0, 0.0);
    for _ in 0..BENCH_REPEATS {
        let start = Instant::now();
        value = std::hint::black_box(kernel(std::hint::black_box(a))?);
        times.push(start.elapsed().as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    Ok((times[BENCH_REPEATS / 2], value))
}

pub fn bench_permanent(sizes: &[usize], algo: Algo, seed: u64, out: &mut impl Write) -> CliResult<()> {
    let naive = matches!(algo, Algo::Naive | Algo::Both);
    let ryser = matches!(algo, Algo::Ryser | Algo::Both);
    for &n in sizes {
        if naive && n > NAIVE_MAX {
            return Err(Error::SizeGuard { what: "naive permanent", size: n, limit: NAIVE_MAX }.into());
        }
        if ryser && n > RYSER_MAX {
            return Err(Error::SizeGuard { what: "Ryser permanent", size: n, limit: RYSER_MAX }.into());
        }
    }
    let mut rng = StdRng::seed_from_u64(seed);
    writeln!(out, "size,naive_seconds,ryser_seconds,relative_difference")?;
    let mut worst = 0.0f64;
    for &n in sizes {
        let a = ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let timed_naive = if naive { Some(median_time(&a, permanent_naive)?) } else { None };
        let timed_ryser = if ryser { Some(median_time(&a, permanent_ryser)?) } else { None };
        let diff = match (timed_naive, timed_ryser) {
            (Some((_, x)), Some((_, y))) => {
                let rel = (x - y).norm() / x.norm().max(f64::MIN_POSITIVE);
                worst = worst.max(rel);
                sig(rel)
            }
            _ => String::new(),
        };
        let time = |t: Option<(f64, C64)>| t.map(|(s, _)| sig(s)).unwrap_or_default();
        writeln!(out, "{n},{},{},{diff}", time(timed_naive), time(timed_ryser))?;
    }
    if worst > BENCH_AGREEMENT {
        return Err(Error::InvariantViolation(format!(
            "naive and Ryser permanents differ by {worst:e} (tolerance {BENCH_AGREEMENT:e})"
        ))
        .into());
    }
    Ok(())
}

#[derive(Serialize)]
struct MultimodeReport {
    mean: f64,
    std_error: f64,
    d: usize,
    sample_count: usize,
    rng_seed: u64,
    digest: String,
}

pub fn multimode_p0(path: &Path, out: &mut impl Write) -> CliResult<()> {
    let file = ScenarioFile::load(path)?;
    let ms = file.multimode_scenario()?;
    let est = estimate_vacuum_probability(&ms)?;
    let spec = file.multimode.as_ref().expect("checked by multimode_scenario");
    let report = MultimodeReport {
        mean: est.mean,
        std_error: est.std_error,
        d: ms.d(),
        sample_count: ms.sample_count(),
        rng_seed: spec.rng_seed,
        digest: file.digest()?,
    };
    serde_json::to_writer_pretty(&mut *out, &report).map_err(std::io::Error::other)?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_lists() {
        assert_eq!(parse_sizes("2,3,5..8").unwrap(), vec![2, 3, 5, 6, 7, 8]);
        assert_eq!(parse_sizes(" 4 ").unwrap(), vec![4]);
        for bad in ["", "a", "5..2", "0", "1..x"] {
            assert!(parse_sizes(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn sweeps() {
        assert_eq!(sweep(0.3, 1.0, 1).unwrap(), vec![0.3]);
        assert_eq!(sweep(0.0, 1.0, 5).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(sweep(0.0, 1.0, 0).is_err());
    }
}
