//! Factorials, binomials and small combinatorial helpers.

use std::sync::OnceLock;

use crate::{Error, Result};

/// Largest `n` with `n!` representable in double precision.
pub const MAX_FACTORIAL: usize = 170;

fn table() -> &'static [f64; MAX_FACTORIAL + 1] {
    static TABLE: OnceLock<[f64; MAX_FACTORIAL + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; MAX_FACTORIAL + 1];
        for n in 1..=MAX_FACTORIAL {
            t[n] = t[n - 1] * n as f64;
        }
        t
    })
}

fn sqrt_table() -> &'static [f64; MAX_FACTORIAL + 1] {
    static TABLE: OnceLock<[f64; MAX_FACTORIAL + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; MAX_FACTORIAL + 1];
        for n in 1..=MAX_FACTORIAL {
            t[n] = t[n - 1] * (n as f64).sqrt();
        }
        t
    })
}

pub fn factorial(n: usize) -> Result<f64> {
    table().get(n).copied().ok_or(Error::SizeGuard {
        what: "factorial argument",
        size: n,
        limit: MAX_FACTORIAL,
    })
}

/// `sqrt(n!)`, accumulated as a product of square roots so that
/// `sqrt(n!) * sqrt(m!)` never overflows where `n! * m!` would.
pub fn sqrt_factorial(n: usize) -> Result<f64> {
    sqrt_table().get(n).copied().ok_or(Error::SizeGuard {
        what: "factorial argument",
        size: n,
        limit: MAX_FACTORIAL,
    })
}

/// Product of factorials of the entries, `n! = n_1! n_2! ...`.
pub fn multi_factorial(counts: &[usize]) -> Result<f64> {
    counts.iter().try_fold(1.0, |acc, &n| Ok(acc * factorial(n)?))
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Visits every permutation of `0..n` in lexicographic order.
pub fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        visit(&perm);
        if !next_permutation(&mut perm) {
            break;
        }
    }
}

/// Advances `perm` to its lexicographic successor; returns `false` (leaving
/// `perm` untouched) once the last permutation has been reached.
pub fn next_permutation(perm: &mut [usize]) -> bool {
    if perm.len() < 2 {
        return false;
    }
    let Some(i) = (0..perm.len() - 1).rev().find(|&i| perm[i] < perm[i + 1]) else {
        return false;
    };
    let j = (i + 1..perm.len()).rev().find(|&j| perm[j] > perm[i]).unwrap();
    perm.swap(i, j);
    perm[i + 1..].reverse();
    true
}

/// Lexicographic rank of a permutation of `0..n`.
pub fn permutation_rank(perm: &[usize]) -> usize {
    let n = perm.len();
    let mut rank = 0;
    for i in 0..n {
        let smaller_later = perm[i + 1..].iter().filter(|&&x| x < perm[i]).count();
        rank = rank * (n - i) + smaller_later;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_table() {
        assert_eq!(factorial(0).unwrap(), 1.0);
        assert_eq!(factorial(5).unwrap(), 120.0);
        assert!(factorial(170).unwrap().is_finite());
        assert!(matches!(factorial(171), Err(Error::SizeGuard { .. })));
        let s = sqrt_factorial(6).unwrap();
        assert!((s * s - 720.0).abs() < 1e-9);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(5, 0), 1.0);
        assert_eq!(binomial(2, 3), 0.0);
        assert_eq!(binomial(10, 10), 1.0);
    }

    #[test]
    fn permutations_are_lexicographic_and_ranked() {
        let mut seen = Vec::new();
        for_each_permutation(4, |p| seen.push(p.to_vec()));
        assert_eq!(seen.len(), 24);
        for (i, p) in seen.iter().enumerate() {
            assert_eq!(permutation_rank(p), i);
        }
        let mut sorted = seen.clone();
        sorted.sort();
        assert_eq!(sorted, seen);
        let mut empty: Vec<Vec<usize>> = Vec::new();
        for_each_permutation(0, |p| empty.push(p.to_vec()));
        assert_eq!(empty, vec![Vec::<usize>::new()]);
    }
}
