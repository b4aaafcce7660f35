//! Commutative scalar algebras the permanent kernels and the generating
//! function are evaluated over.
//!
//! [`ComplexField`] is the ordinary case. [`TruncatedSeries`] is the ring of
//! multivariate power series in small offsets `t` of the detector
//! efficiencies, truncated at a per-variable degree. Evaluating the
//! generating function over that ring yields its Taylor coefficients, and
//! hence its efficiency derivatives, exactly.

use std::fmt::Debug;

use crate::{Error, Result, C64};

pub trait Algebra: Sync {
    type Elem: Clone + Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn constant(&self, c: C64) -> Self::Elem;
    fn add_assign(&self, acc: &mut Self::Elem, x: &Self::Elem);
    fn sub_assign(&self, acc: &mut Self::Elem, x: &Self::Elem);
    /// `acc += c * x`
    fn add_scaled(&self, acc: &mut Self::Elem, x: &Self::Elem, c: C64);
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, x: &Self::Elem) -> bool;

    fn one(&self) -> Self::Elem {
        self.constant(C64::new(1.0, 0.0))
    }

    fn pow(&self, x: &Self::Elem, mut e: usize) -> Self::Elem {
        let mut result = self.one();
        let mut base = x.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        result
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexField;

impl Algebra for ComplexField {
    type Elem = C64;

    fn zero(&self) -> C64 {
        C64::new(0.0, 0.0)
    }

    fn constant(&self, c: C64) -> C64 {
        c
    }

    fn add_assign(&self, acc: &mut C64, x: &C64) {
        *acc += x;
    }

    fn sub_assign(&self, acc: &mut C64, x: &C64) {
        *acc -= x;
    }

    fn add_scaled(&self, acc: &mut C64, x: &C64, c: C64) {
        *acc += c * x;
    }

    fn mul(&self, a: &C64, b: &C64) -> C64 {
        a * b
    }

    fn is_zero(&self, x: &C64) -> bool {
        x.re == 0.0 && x.im == 0.0
    }
}

/// Largest ring dimension accepted; products cost O(dim²).
pub const MAX_SERIES_DIM: usize = 4096;

/// Power series in `k` variables keeping monomials `t^e` with
/// `e_v <= bounds[v]` for every variable.
///
/// Elements are coefficient vectors in mixed-radix order, index
/// `sum_v e_v * stride_v` with the first variable varying slowest.
#[derive(Clone, Debug)]
pub struct TruncatedSeries {
    bounds: Vec<usize>,
    strides: Vec<usize>,
    dim: usize,
    /// `(i, j, k)` with monomial `i` times monomial `j` equal to monomial `k`.
    products: Vec<(u32, u32, u32)>,
}

impl TruncatedSeries {
    pub fn new(bounds: Vec<usize>) -> Result<Self> {
        let dim = bounds.iter().try_fold(1usize, |acc, &b| acc.checked_mul(b + 1));
        let dim = match dim {
            Some(d) if d <= MAX_SERIES_DIM => d,
            _ => {
                return Err(Error::SizeGuard {
                    what: "truncated series dimension",
                    size: dim.unwrap_or(usize::MAX),
                    limit: MAX_SERIES_DIM,
                })
            }
        };
        let mut strides = vec![1; bounds.len()];
        for v in (0..bounds.len().saturating_sub(1)).rev() {
            strides[v] = strides[v + 1] * (bounds[v + 1] + 1);
        }
        let mut this = Self { bounds, strides, dim, products: Vec::new() };
        let exps: Vec<Vec<usize>> = (0..dim).map(|i| this.exponents(i)).collect();
        for i in 0..dim {
            for j in 0..dim {
                let fits = exps[i]
                    .iter()
                    .zip(&exps[j])
                    .zip(&this.bounds)
                    .all(|((a, b), bound)| a + b <= *bound);
                if fits {
                    let k = this.index(exps[i].iter().zip(&exps[j]).map(|(a, b)| a + b));
                    this.products.push((i as u32, j as u32, k as u32));
                }
            }
        }
        Ok(this)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn variables(&self) -> usize {
        self.bounds.len()
    }

    pub fn exponents(&self, mut index: usize) -> Vec<usize> {
        let mut e = vec![0; self.bounds.len()];
        for v in 0..self.bounds.len() {
            e[v] = index / self.strides[v];
            index %= self.strides[v];
        }
        e
    }

    pub fn index(&self, exps: impl IntoIterator<Item = usize>) -> usize {
        exps.into_iter().zip(&self.strides).map(|(e, s)| e * s).sum()
    }

    /// `c0 + sum_v lin[v] * t_v`
    pub fn affine(&self, c0: C64, lin: &[C64]) -> Vec<C64> {
        let mut x = self.constant(c0);
        for (v, &c) in lin.iter().enumerate() {
            if self.bounds[v] > 0 {
                x[self.strides[v]] += c;
            }
        }
        x
    }

    /// Coefficient of the monomial with the given exponents.
    pub fn coefficient(&self, x: &[C64], exps: &[usize]) -> C64 {
        x[self.index(exps.iter().copied())]
    }
}

impl Algebra for TruncatedSeries {
    type Elem = Vec<C64>;

    fn zero(&self) -> Vec<C64> {
        vec![C64::new(0.0, 0.0); self.dim]
    }

    fn constant(&self, c: C64) -> Vec<C64> {
        let mut x = self.zero();
        x[0] = c;
        x
    }

    fn add_assign(&self, acc: &mut Vec<C64>, x: &Vec<C64>) {
        acc.iter_mut().zip(x).for_each(|(a, b)| *a += b);
    }

    fn sub_assign(&self, acc: &mut Vec<C64>, x: &Vec<C64>) {
        acc.iter_mut().zip(x).for_each(|(a, b)| *a -= b);
    }

    fn add_scaled(&self, acc: &mut Vec<C64>, x: &Vec<C64>, c: C64) {
        acc.iter_mut().zip(x).for_each(|(a, b)| *a += c * b);
    }

    fn mul(&self, a: &Vec<C64>, b: &Vec<C64>) -> Vec<C64> {
        let mut out = self.zero();
        for &(i, j, k) in &self.products {
            out[k as usize] += a[i as usize] * b[j as usize];
        }
        out
    }

    fn is_zero(&self, x: &Vec<C64>) -> bool {
        x.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }
}
