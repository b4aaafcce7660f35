//! Dense complex matrices and the structural checks the rest of the crate
//! relies on.
//!
//! Storage is row-major: `data[i * cols + j]` holds `A[i, j]`. Eigenvalue,
//! determinant and inverse computations are delegated to `nalgebra`.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// A dense complex matrix in row-major order with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite matrix entry at ({}, {})",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    /// Builds a matrix from real rows; handy in tests and presets.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn ones(n: usize) -> Self {
        Self::from_fn(n, n, |_, _| ONE)
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { ZERO })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    /// Largest entry modulus; zero for an empty matrix.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Sub-block on the given row and column index lists (indices may repeat).
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self[(i / r2, j / c2)] * other[(i % r2, j % c2)]
        })
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    /// Eigenvalues of the Hermitian part `(A + A†)/2`, ascending.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        self.require_square("eigenvalues")?;
        if self.rows == 0 {
            return Ok(Vec::new());
        }
        let a = self.to_nalgebra();
        let herm = (&a + a.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    pub fn determinant(&self) -> Result<C64> {
        self.require_square("determinant")?;
        Ok(self.to_nalgebra().determinant())
    }

    pub fn inverse(&self) -> Result<Self> {
        self.require_square("inverse")?;
        self.to_nalgebra()
            .try_inverse()
            .map(|m| Self::from_nalgebra(&m))
            .ok_or_else(|| Error::Singular("matrix is not invertible".into()))
    }

    fn require_square(&self, what: &str) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "{what} needs a square matrix, got {}x{}",
                self.rows, self.cols
            )))
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "shape {}x{} does not match {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|z| format!("{z:.6}")).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Non-negative counts per index: photon numbers per port, or row/column
/// multiplicities for a repeated submatrix.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OccupationVector(pub Vec<usize>);

impl OccupationVector {
    pub fn new(counts: Vec<usize>) -> Self {
        Self(counts)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    /// Index list in nondecreasing order, index `k` repeated `counts[k]` times.
    pub fn expand(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(k, &c)| std::iter::repeat_n(k, c))
            .collect()
    }

    /// Every occupation vector of length `len` with the given total, in
    /// descending lexicographic order (`(2,0)`, `(1,1)`, `(0,2)`).
    pub fn all_with_total(len: usize, total: usize) -> Vec<Self> {
        fn rec(len: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<OccupationVector>) {
            if prefix.len() + 1 == len {
                prefix.push(total);
                out.push(OccupationVector(prefix.clone()));
                prefix.pop();
                return;
            }
            for first in (0..=total).rev() {
                prefix.push(first);
                rec(len, total - first, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if len == 0 {
            if total == 0 {
                out.push(Self(Vec::new()));
            }
            return out;
        }
        rec(len, total, &mut Vec::with_capacity(len), &mut out);
        out
    }

    /// Every occupation vector with total at most `max_total`, ordered by
    /// total and then as in [`Self::all_with_total`].
    pub fn all_up_to(len: usize, max_total: usize) -> Vec<Self> {
        (0..=max_total).flat_map(|t| Self::all_with_total(len, t)).collect()
    }
}

impl From<Vec<usize>> for OccupationVector {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Entrywise product of two equally shaped matrices.
pub fn hadamard(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.check_same_shape(b)?;
    Ok(ComplexMatrix {
        rows: a.rows,
        cols: a.cols,
        data: a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect(),
    })
}

/// `H[m, n]`: rows of `h` repeated per `row_occ`, columns per `col_occ`, both
/// in nondecreasing index order.
pub fn submatrix_with_repetition(
    h: &ComplexMatrix,
    row_occ: &OccupationVector,
    col_occ: &OccupationVector,
) -> Result<ComplexMatrix> {
    if row_occ.len() != h.rows || col_occ.len() != h.cols {
        return Err(Error::Dimension(format!(
            "occupations of length {}/{} for a {}x{} matrix",
            row_occ.len(),
            col_occ.len(),
            h.rows,
            h.cols
        )));
    }
    if row_occ.total() != col_occ.total() {
        return Err(Error::PatternMismatch { rows: row_occ.total(), cols: col_occ.total() });
    }
    Ok(h.select(&row_occ.expand(), &col_occ.expand()))
}

/// Max entry modulus of `U†U - I`, or `None` for a non-square input.
pub fn unitarity_residual(u: &ComplexMatrix) -> Option<f64> {
    if !u.is_square() {
        return None;
    }
    let gram = u.adjoint().matmul(u).ok()?;
    gram.sub(&ComplexMatrix::identity(u.rows)).ok().map(|r| r.max_abs())
}

/// Max entry modulus of `U U† - I` (orthonormal rows); accepts `N x M`
/// isometries with `N <= M`.
pub fn row_orthonormality_residual(u: &ComplexMatrix) -> f64 {
    let gram = u.matmul(&u.adjoint()).expect("U U† is always defined");
    gram.sub(&ComplexMatrix::identity(u.rows)).expect("square").max_abs()
}

pub fn check_unitary(u: &ComplexMatrix, tol: f64) -> bool {
    unitarity_residual(u).is_some_and(|r| r <= tol)
}

/// Max entry modulus of `A - A†`.
pub fn hermiticity_residual(a: &ComplexMatrix) -> f64 {
    a.sub(&a.adjoint()).map_or(f64::INFINITY, |d| d.max_abs())
}

pub fn check_hermitian_psd(a: &ComplexMatrix, tol: f64) -> bool {
    if !a.is_square() || hermiticity_residual(a) > tol {
        return false;
    }
    a.hermitian_eigenvalues()
        .map(|ev| ev.first().is_none_or(|&lo| lo >= -tol))
        .unwrap_or(false)
}
