use rayon::prelude::*;

use super::{build_h_at, finalize_probability, Scenario};
use crate::algebra::{Algebra, ComplexField, TruncatedSeries, MAX_SERIES_DIM};
use crate::interpolation::mixed_derivative;
use crate::linalg::OccupationVector;
use crate::permanent::permanent_repeated;
use crate::{Error, Result, C64};

/// Upper bound on the number of `(n, m)` occupation pairs in the sum.
pub const MAX_SERIES_TERMS: usize = 2_000_000;

/// One `(n, m)` term: `coeff · per(H[row_occ, col_occ])`.
struct Term {
    row_occ: Vec<usize>,
    col_occ: Vec<usize>,
    coeff: C64,
}

/// Every `(n, m)` with `|n| = |m| <= p_max` and a non-vanishing product of
/// Husimi coefficients.
fn terms(s: &Scenario) -> Result<Vec<Term>> {
    let per_source: Vec<Vec<(usize, usize, C64)>> =
        s.sources().iter().map(|src| src.husimi_series().nonzero_terms()).collect();
    let k = per_source.len();
    let mut out = Vec::new();
    let mut n = vec![0usize; k];
    let mut m = vec![0usize; k];
    collect_terms(&per_source, s.p_max(), 0, 0, 0, C64::new(1.0, 0.0), &mut n, &mut m, &mut out)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn collect_terms(
    per_source: &[Vec<(usize, usize, C64)>],
    p_max: usize,
    source: usize,
    n_total: usize,
    m_total: usize,
    coeff: C64,
    n: &mut Vec<usize>,
    m: &mut Vec<usize>,
    out: &mut Vec<Term>,
) -> Result<()> {
    if source == per_source.len() {
        if n_total == m_total {
            if out.len() == MAX_SERIES_TERMS {
                return Err(Error::SizeGuard {
                    what: "generating-function term count",
                    size: MAX_SERIES_TERMS + 1,
                    limit: MAX_SERIES_TERMS,
                });
            }
            out.push(Term { row_occ: m.clone(), col_occ: n.clone(), coeff });
        }
        return Ok(());
    }
    for &(nk, mk, g) in &per_source[source] {
        if n_total + nk > p_max || m_total + mk > p_max {
            continue;
        }
        n[source] = nk;
        m[source] = mk;
        collect_terms(per_source, p_max, source + 1, n_total + nk, m_total + mk, coeff * g, n, m, out)?;
    }
    n[source] = 0;
    m[source] = 0;
    Ok(())
}

/// `Σ coeff · per(H[m, n])` over a ring, in a fixed summation order.
fn generating_sum<A: Algebra>(alg: &A, h: &[Vec<A::Elem>], terms: &[Term]) -> Result<A::Elem> {
    let parts: Vec<A::Elem> = terms
        .par_iter()
        .map(|t| {
            let per = permanent_repeated(alg, h, &t.row_occ, &t.col_occ)?;
            let mut acc = alg.zero();
            alg.add_scaled(&mut acc, &per, t.coeff);
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut sum = alg.zero();
    for p in &parts {
        alg.add_assign(&mut sum, p);
    }
    Ok(sum)
}

/// Raw `P₀` at arbitrary efficiencies, without clamping.
pub fn vacuum_probability_at(s: &Scenario, eta: &[f64]) -> Result<C64> {
    if eta.len() != s.ports() {
        return Err(Error::Dimension(format!("{} efficiencies for {} ports", eta.len(), s.ports())));
    }
    let h = build_h_at(s.network(), eta, s.gram()).to_rows();
    generating_sum(&ComplexField, &h, &terms(s)?)
}

/// Probability that no detector fires.
pub fn vacuum_probability(s: &Scenario) -> Result<f64> {
    let z = vacuum_probability_at(s, s.detectors().eta())?;
    finalize_probability(z, &OccupationVector::zeros(s.ports()))
}

fn check_pattern(s: &Scenario, m: &OccupationVector) -> Result<()> {
    if m.len() != s.ports() {
        return Err(Error::Dimension(format!(
            "pattern of length {} for {} ports",
            m.len(),
            s.ports()
        )));
    }
    if m.total() > s.p_max() {
        return Err(Error::Domain(format!(
            "pattern ({m}) has {} photons, above the cutoff {}",
            m.total(),
            s.p_max()
        )));
    }
    Ok(())
}

/// A port with zero efficiency never clicks.
fn blind_port(s: &Scenario, m: &OccupationVector) -> bool {
    m.counts().iter().zip(s.detectors().eta()).any(|(&ml, &eta)| ml > 0 && eta == 0.0)
}

/// Taylor coefficients of `P₀(η + t)` in the offsets of `ports`, each
/// truncated at the matching degree in `bounds`.
fn taylor_coefficients(
    s: &Scenario,
    terms: &[Term],
    ports: &[usize],
    bounds: Vec<usize>,
) -> Result<(TruncatedSeries, Vec<C64>)> {
    let ring = TruncatedSeries::new(bounds)?;
    let u = s.network();
    let eta = s.detectors().eta();
    let h0 = build_h_at(u, eta, s.gram());
    let n = u.rows();
    let h: Vec<Vec<Vec<C64>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let v = if i == j { C64::new(1.0, 0.0) } else { s.gram().get(i, j) };
                    let lin: Vec<C64> = ports.iter().map(|&l| -u[(i, l)] * u[(j, l)].conj() * v).collect();
                    ring.affine(h0[(i, j)], &lin)
                })
                .collect()
        })
        .collect();
    let p0 = generating_sum(&ring, &h, terms)?;
    Ok((ring, p0))
}

/// `η^m (-1)^{|m|} [t^m] P₀(η + t)` for the ports in `ports`.
fn extract(s: &Scenario, ring: &TruncatedSeries, p0: &[C64], ports: &[usize], m: &OccupationVector) -> Result<f64> {
    let exps: Vec<usize> = ports.iter().map(|&l| m.counts()[l]).collect();
    let coeff = ring.coefficient(p0, &exps);
    let scale: f64 = m
        .counts()
        .iter()
        .zip(s.detectors().eta())
        .map(|(&ml, &eta)| eta.powi(ml as i32))
        .product::<f64>()
        * if m.total().is_multiple_of(2) { 1.0 } else { -1.0 };
    finalize_probability(coeff * scale, m)
}

/// Probability of detecting exactly `m`, from exact Taylor coefficients of
/// the generating function.
pub fn probability_general(s: &Scenario, m: &OccupationVector) -> Result<f64> {
    check_pattern(s, m)?;
    if blind_port(s, m) {
        return Ok(0.0);
    }
    let ports: Vec<usize> = (0..m.len()).filter(|&l| m.counts()[l] > 0).collect();
    let bounds = ports.iter().map(|&l| m.counts()[l]).collect();
    let (ring, p0) = taylor_coefficients(s, &terms(s)?, &ports, bounds)?;
    extract(s, &ring, &p0, &ports, m)
}

/// Probabilities of several patterns from one joint series evaluation when
/// the ring fits, otherwise pattern by pattern.
pub fn probabilities(s: &Scenario, patterns: &[OccupationVector]) -> Result<Vec<f64>> {
    for m in patterns {
        check_pattern(s, m)?;
    }
    let eta = s.detectors().eta();
    let ports: Vec<usize> = (0..s.ports())
        .filter(|&l| eta[l] > 0.0 && patterns.iter().any(|m| m.counts()[l] > 0))
        .collect();
    let bounds: Vec<usize> = ports
        .iter()
        .map(|&l| patterns.iter().map(|m| m.counts()[l]).max().unwrap_or(0))
        .collect();
    let dim = bounds.iter().try_fold(1usize, |acc, &b| acc.checked_mul(b + 1));
    let terms = terms(s)?;
    if dim.is_some_and(|d| d <= MAX_SERIES_DIM) {
        let (ring, p0) = taylor_coefficients(s, &terms, &ports, bounds)?;
        return patterns
            .iter()
            .map(|m| if blind_port(s, m) { Ok(0.0) } else { extract(s, &ring, &p0, &ports, m) })
            .collect();
    }
    patterns
        .iter()
        .map(|m| {
            if blind_port(s, m) {
                return Ok(0.0);
            }
            let own: Vec<usize> = (0..m.len()).filter(|&l| m.counts()[l] > 0).collect();
            let b = own.iter().map(|&l| m.counts()[l]).collect();
            let (ring, p0) = taylor_coefficients(s, &terms, &own, b)?;
            extract(s, &ring, &p0, &own, m)
        })
        .collect()
}

/// Same quantity as [`probability_general`], with the efficiency
/// derivatives taken by Chebyshev interpolation of `P₀` along each axis
/// (degree `p_max`). Accurate only for modest cutoffs.
pub fn probability_general_interpolated(s: &Scenario, m: &OccupationVector) -> Result<f64> {
    check_pattern(s, m)?;
    if blind_port(s, m) {
        return Ok(0.0);
    }
    let terms = terms(s)?;
    let f = |eta: &[f64]| -> Result<f64> {
        let h = build_h_at(s.network(), eta, s.gram()).to_rows();
        Ok(generating_sum(&ComplexField, &h, &terms)?.re)
    };
    let d = mixed_derivative(&f, s.detectors().eta(), m.counts(), s.p_max())?;
    let mut scale = if m.total().is_multiple_of(2) { 1.0 } else { -1.0 };
    for (&ml, &eta) in m.counts().iter().zip(s.detectors().eta()) {
        scale *= eta.powi(ml as i32) / crate::math::factorial(ml)?;
    }
    finalize_probability(C64::new(d * scale, 0.0), m)
}
