//! Matrix permanent kernels.
//!
//! - [`permanent_naive`]: the defining sum over all permutations.
//! - [`permanent_ryser`]: Ryser's inclusion–exclusion formula with subsets
//!   visited in binary-reflected Gray-code order, so each step adds or removes
//!   one column from the running row sums.
//! - [`permanent_repeated`]: the permanent of `A[m, n]` (rows repeated per
//!   `m`, columns per `n`) without expanding the repetitions. Ryser's sum
//!   collapses onto multiplicity vectors `0 <= s <= n`, weighted by
//!   `prod_j C(n_j, s_j)`, visited in reflected mixed-radix Gray-code order.

use rayon::prelude::*;

use crate::algebra::Algebra;
use crate::linalg::{ComplexMatrix, OccupationVector};
use crate::math::binomial;
use crate::{Error, Result, C64};

pub const NAIVE_MAX: usize = 9;
pub const RYSER_MAX: usize = 26;
/// Upper bound on the number of multiplicity vectors visited by
/// [`permanent_repeated`].
pub const REPEATED_MAX_TERMS: usize = 1 << 26;

/// Below this size Ryser runs on a single thread.
const PARALLEL_MIN: usize = 18;

fn require_square(a: &ComplexMatrix) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "permanent needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )))
    }
}

pub fn permanent_naive(a: &ComplexMatrix) -> Result<C64> {
    require_square(a)?;
    let n = a.rows();
    if n > NAIVE_MAX {
        return Err(Error::SizeGuard { what: "naive permanent", size: n, limit: NAIVE_MAX });
    }
    fn rec(a: &ComplexMatrix, row: usize, used: &mut [bool]) -> C64 {
        if row == a.rows() {
            return C64::new(1.0, 0.0);
        }
        let mut sum = C64::new(0.0, 0.0);
        for j in 0..a.cols() {
            if !used[j] {
                used[j] = true;
                sum += a[(row, j)] * rec(a, row + 1, used);
                used[j] = false;
            }
        }
        sum
    }
    Ok(rec(a, 0, &mut vec![false; n]))
}

pub fn permanent_ryser(a: &ComplexMatrix) -> Result<C64> {
    require_square(a)?;
    let n = a.rows();
    if n > RYSER_MAX {
        return Err(Error::SizeGuard { what: "Ryser permanent", size: n, limit: RYSER_MAX });
    }
    if n == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let total: u64 = 1 << n;
    let sum = if n < PARALLEL_MIN {
        ryser_range(a, 1, total)
    } else {
        let chunks = 64u64;
        let step = total.div_ceil(chunks);
        let partial: Vec<C64> = (0..chunks)
            .into_par_iter()
            .map(|c| ryser_range(a, (c * step).max(1), ((c + 1) * step).min(total)))
            .collect();
        partial.into_iter().sum()
    };
    Ok(if n.is_multiple_of(2) { sum } else { -sum })
}

/// Signed Ryser terms for Gray-code positions `start..end` (`start >= 1`).
fn ryser_range(a: &ComplexMatrix, start: u64, end: u64) -> C64 {
    let n = a.rows();
    if start >= end {
        return C64::new(0.0, 0.0);
    }
    let gray = start ^ (start >> 1);
    let mut row_sums = vec![C64::new(0.0, 0.0); n];
    for j in (0..n).filter(|&j| gray >> j & 1 == 1) {
        for (i, s) in row_sums.iter_mut().enumerate() {
            *s += a[(i, j)];
        }
    }
    let mut size = gray.count_ones();
    let term = |row_sums: &[C64], size: u32| {
        let prod: C64 = row_sums.iter().product();
        if size % 2 == 1 { -prod } else { prod }
    };
    let mut sum = term(&row_sums, size);
    let mut gray = gray;
    for k in start + 1..end {
        let j = k.trailing_zeros() as usize;
        gray ^= 1 << j;
        if gray >> j & 1 == 1 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += a[(i, j)];
            }
            size += 1;
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= a[(i, j)];
            }
            size -= 1;
        }
        sum += term(&row_sums, size);
    }
    sum
}

/// Permanent of `a[row_occ, col_occ]` over an arbitrary commutative
/// [`Algebra`], with `a` given as rows of ring elements.
///
/// Iterates over whichever side has fewer multiplicity vectors, using
/// `per(B) = per(Bᵀ)`.
pub fn permanent_repeated<A: Algebra>(
    alg: &A,
    a: &[Vec<A::Elem>],
    row_occ: &[usize],
    col_occ: &[usize],
) -> Result<A::Elem> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    if row_occ.len() != rows || col_occ.len() != cols || a.iter().any(|r| r.len() != cols) {
        return Err(Error::Dimension(format!(
            "occupations of length {}/{} for a {rows}x{cols} matrix",
            row_occ.len(),
            col_occ.len()
        )));
    }
    let p: usize = row_occ.iter().sum();
    let q: usize = col_occ.iter().sum();
    if p != q {
        return Err(Error::PatternMismatch { rows: p, cols: q });
    }
    if p == 0 {
        return Ok(alg.one());
    }
    // A single distinct row (or column) gives p! Π_j a_ij^{n_j} directly,
    // avoiding the alternating sum's cancellation at large multiplicity.
    let live = |occ: &[usize]| occ.iter().filter(|&&c| c > 0).count();
    if live(row_occ) == 1 || live(col_occ) == 1 {
        let p_fact = crate::math::factorial(p)?;
        let mut prod = alg.one();
        if let Some(i) = row_occ.iter().position(|&c| c > 0).filter(|_| live(row_occ) == 1) {
            for (j, &nj) in col_occ.iter().enumerate().filter(|(_, &nj)| nj > 0) {
                prod = alg.mul(&prod, &alg.pow(&a[i][j], nj));
            }
        } else {
            let j = col_occ.iter().position(|&c| c > 0).expect("p > 0");
            for (i, &mi) in row_occ.iter().enumerate().filter(|(_, &mi)| mi > 0) {
                prod = alg.mul(&prod, &alg.pow(&a[i][j], mi));
            }
        }
        let mut out = alg.zero();
        alg.add_scaled(&mut out, &prod, C64::new(p_fact, 0.0));
        return Ok(out);
    }
    let count = |occ: &[usize]| {
        occ.iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n + 1))
            .unwrap_or(usize::MAX)
    };
    let (row_terms, col_terms) = (count(row_occ), count(col_occ));
    if row_terms.min(col_terms) > REPEATED_MAX_TERMS {
        return Err(Error::SizeGuard {
            what: "repeated permanent term count",
            size: row_terms.min(col_terms),
            limit: REPEATED_MAX_TERMS,
        });
    }
    if row_terms < col_terms {
        let at: Vec<Vec<A::Elem>> =
            (0..cols).map(|j| (0..rows).map(|i| a[i][j].clone()).collect()).collect();
        return Ok(repeated_ryser(alg, &at, col_occ, row_occ, p));
    }
    Ok(repeated_ryser(alg, a, row_occ, col_occ, p))
}

fn repeated_ryser<A: Algebra>(
    alg: &A,
    a: &[Vec<A::Elem>],
    row_occ: &[usize],
    col_occ: &[usize],
    p: usize,
) -> A::Elem {
    let live_rows: Vec<usize> = (0..a.len()).filter(|&i| row_occ[i] > 0).collect();
    let live_cols: Vec<usize> = (0..col_occ.len()).filter(|&j| col_occ[j] > 0).collect();
    let radix: Vec<usize> = live_cols.iter().map(|&j| col_occ[j]).collect();
    let binom: Vec<Vec<f64>> =
        radix.iter().map(|&n| (0..=n).map(|s| binomial(n, s)).collect()).collect();

    let mut s = vec![0usize; live_cols.len()];
    let mut dir = vec![1isize; live_cols.len()];
    let mut row_sums: Vec<A::Elem> = live_rows.iter().map(|_| alg.zero()).collect();
    let mut chosen = 0usize;
    let mut sum = alg.zero();
    loop {
        // s = 0 contributes an empty row sum, which vanishes for p >= 1.
        if chosen > 0 {
            let weight: f64 = s.iter().zip(&binom).map(|(&sj, b)| b[sj]).product();
            let mut prod = alg.one();
            let mut vanished = false;
            for (k, &i) in live_rows.iter().enumerate() {
                if alg.is_zero(&row_sums[k]) {
                    vanished = true;
                    break;
                }
                prod = alg.mul(&prod, &alg.pow(&row_sums[k], row_occ[i]));
            }
            if !vanished {
                let sign = if (p - chosen).is_multiple_of(2) { 1.0 } else { -1.0 };
                alg.add_scaled(&mut sum, &prod, C64::new(sign * weight, 0.0));
            }
        }
        let Some(v) = (0..s.len()).find(|&v| {
            let next = s[v] as isize + dir[v];
            if next < 0 || next > radix[v] as isize {
                dir[v] = -dir[v];
                false
            } else {
                true
            }
        }) else {
            break;
        };
        let col = live_cols[v];
        if dir[v] > 0 {
            s[v] += 1;
            chosen += 1;
            for (k, &i) in live_rows.iter().enumerate() {
                alg.add_assign(&mut row_sums[k], &a[i][col]);
            }
        } else {
            s[v] -= 1;
            chosen -= 1;
            for (k, &i) in live_rows.iter().enumerate() {
                alg.sub_assign(&mut row_sums[k], &a[i][col]);
            }
        }
    }
    sum
}

/// [`permanent_repeated`] over the complex numbers for a [`ComplexMatrix`].
pub fn permanent_with_repetition(
    h: &ComplexMatrix,
    row_occ: &OccupationVector,
    col_occ: &OccupationVector,
) -> Result<C64> {
    permanent_repeated(
        &crate::algebra::ComplexField,
        &h.to_rows(),
        row_occ.counts(),
        col_occ.counts(),
    )
}
