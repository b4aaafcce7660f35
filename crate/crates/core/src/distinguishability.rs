//! Internal-mode vectors of the sources and their Gram (distinguishability)
//! matrix `V_kl = φ_k† φ_l`.
//!
//! `V = I` describes fully distinguishable sources, the all-ones matrix fully
//! indistinguishable ones.

use crate::linalg::{hermiticity_residual, ComplexMatrix};
use crate::{Error, Result, C64};

pub const NORMALIZATION_TOL: f64 = 1e-10;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-9;
pub const UNIT_DIAGONAL_TOL: f64 = 1e-10;

/// Expansion coefficients of one source's internal mode over a common
/// `d`-dimensional internal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeVector {
    amplitudes: Vec<C64>,
}

impl ModeVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Validation("mode vector needs dimension d >= 1".into()));
        }
        let norm2: f64 = amplitudes.iter().map(C64::norm_sqr).sum();
        if (norm2 - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Validation(format!(
                "mode vector is not normalized: squared norm {norm2}"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Validation("mode vector has zero norm".into()));
        }
        Self::new(amplitudes.into_iter().map(|a| a / norm).collect())
    }

    /// The `s`-th internal basis vector of dimension `d`.
    pub fn basis(d: usize, s: usize) -> Result<Self> {
        if s >= d {
            return Err(Error::Dimension(format!("basis index {s} out of range for d = {d}")));
        }
        Self::new((0..d).map(|i| C64::new(if i == s { 1.0 } else { 0.0 }, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// `self† other`
    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// Applies a `d x d` matrix to the amplitudes.
    pub fn rotated(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.rows() != self.dim() || u.cols() != self.dim() {
            return Err(Error::Dimension(format!(
                "{}x{} rotation for a mode vector of dimension {}",
                u.rows(),
                u.cols(),
                self.dim()
            )));
        }
        Self::normalized(
            (0..self.dim())
                .map(|i| (0..self.dim()).map(|j| u[(i, j)] * self.amplitudes[j]).sum())
                .collect(),
        )
    }
}

/// A validated distinguishability matrix: Hermitian, positive semi-definite
/// and with unit diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    v: ComplexMatrix,
}

impl GramMatrix {
    /// Validates a user-supplied overlap matrix.
    pub fn from_matrix(v: ComplexMatrix) -> Result<Self> {
        if !v.is_square() {
            return Err(Error::Dimension(format!(
                "Gram matrix must be square, got {}x{}",
                v.rows(),
                v.cols()
            )));
        }
        let n = v.rows();
        for k in 0..n {
            let dev = (v[(k, k)] - C64::new(1.0, 0.0)).norm();
            if dev > UNIT_DIAGONAL_TOL {
                return Err(Error::Validation(format!(
                    "Gram matrix diagonal entry {k} is {} (must be 1)",
                    v[(k, k)]
                )));
            }
        }
        let herm = hermiticity_residual(&v);
        if herm > HERMITIAN_TOL {
            return Err(Error::Validation(format!(
                "Gram matrix is not Hermitian, residual {herm:e}"
            )));
        }
        for k in 0..n {
            for l in 0..n {
                if v[(k, l)].norm() > 1.0 + UNIT_DIAGONAL_TOL {
                    return Err(Error::Validation(format!(
                        "Cauchy–Schwarz violated: |V[{k}][{l}]| = {} > 1",
                        v[(k, l)].norm()
                    )));
                }
            }
        }
        let min_ev = v.hermitian_eigenvalues()?.first().copied().unwrap_or(0.0);
        if min_ev < -PSD_TOL {
            return Err(Error::Validation(format!(
                "Gram matrix is not positive semi-definite, smallest eigenvalue {min_ev}"
            )));
        }
        Ok(Self { v })
    }

    pub fn identity(m: usize) -> Self {
        Self { v: ComplexMatrix::identity(m) }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.v
    }

    pub fn size(&self) -> usize {
        self.v.rows()
    }

    pub fn get(&self, k: usize, l: usize) -> C64 {
        self.v[(k, l)]
    }

    /// Principal submatrix on the given sources.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        Self { v: self.v.select(keep, keep) }
    }

    /// Mode vectors `φ_k` of dimension `d` reproducing this matrix, from its
    /// eigendecomposition `V = Q D Q†` as `φ_{k,s} = sqrt(D_s) conj(Q_{k,s})`.
    ///
    /// Fails when the numerical rank exceeds `d`.
    pub fn factorize(&self, d: usize) -> Result<Vec<ModeVector>> {
        let n = self.size();
        if n == 0 {
            return Ok(Vec::new());
        }
        let eig = self.v.to_nalgebra().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let rank = order.iter().filter(|&&i| eig.eigenvalues[i] > PSD_TOL).count();
        if rank > d {
            return Err(Error::Dimension(format!(
                "Gram matrix has rank {rank}, which does not fit internal dimension {d}"
            )));
        }
        (0..n)
            .map(|k| {
                let amps = (0..d)
                    .map(|s| match order.get(s) {
                        Some(&i) if s < rank => {
                            eig.eigenvectors[(k, i)].conj() * eig.eigenvalues[i].max(0.0).sqrt()
                        }
                        _ => C64::new(0.0, 0.0),
                    })
                    .collect();
                ModeVector::normalized(amps)
            })
            .collect()
    }
}

/// `V_kl = φ_k† φ_l` for mode vectors sharing one internal dimension.
pub fn gram_matrix(modes: &[ModeVector]) -> Result<GramMatrix> {
    if let Some(first) = modes.first() {
        if let Some(bad) = modes.iter().find(|m| m.dim() != first.dim()) {
            return Err(Error::Dimension(format!(
                "mode vectors of dimensions {} and {} cannot be compared",
                first.dim(),
                bad.dim()
            )));
        }
    }
    let n = modes.len();
    let v = ComplexMatrix::from_fn(n, n, |k, l| {
        if k == l {
            C64::new(1.0, 0.0)
        } else {
            modes[k].inner(&modes[l])
        }
    });
    Ok(GramMatrix { v })
}

/// Unit diagonal with every off-diagonal overlap equal to `v` (upper
/// triangle) and `conj(v)` (lower triangle).
pub fn model_uniform_overlap(m: usize, v: C64) -> Result<GramMatrix> {
    GramMatrix::from_matrix(ComplexMatrix::from_fn(m, m, |k, l| match k.cmp(&l) {
        std::cmp::Ordering::Equal => C64::new(1.0, 0.0),
        std::cmp::Ordering::Less => v,
        std::cmp::Ordering::Greater => v.conj(),
    }))
}

/// `diag(V, I_count)`: appended vacuum inputs get internal modes orthogonal
/// to everything else.
pub fn embed_block_with_vacuum(v: &GramMatrix, vac_count: usize) -> GramMatrix {
    let n = v.size();
    let total = n + vac_count;
    GramMatrix {
        v: ComplexMatrix::from_fn(total, total, |k, l| {
            if k < n && l < n {
                v.get(k, l)
            } else if k == l {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::check_hermitian_psd;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn gram_examples() {
        let phi = ModeVector::normalized(vec![c(0.6, 0.1), c(0.2, -0.7)]).unwrap();
        let same = gram_matrix(&[phi.clone(), phi.clone(), phi]).unwrap();
        assert!(same.matrix().sub(&ComplexMatrix::ones(3)).unwrap().max_abs() < 1e-12);

        let ortho: Vec<_> = (0..3).map(|s| ModeVector::basis(3, s).unwrap()).collect();
        assert_eq!(gram_matrix(&ortho).unwrap().matrix(), &ComplexMatrix::identity(3));

        let v = 0.8;
        let a = ModeVector::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let b = ModeVector::new(vec![c(v, 0.0), c((1.0f64 - v * v).sqrt(), 0.0)]).unwrap();
        assert!((gram_matrix(&[a, b]).unwrap().get(0, 1) - c(v, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn gram_errors() {
        let a = ModeVector::basis(2, 0).unwrap();
        let b = ModeVector::basis(3, 0).unwrap();
        assert!(matches!(gram_matrix(&[a, b]), Err(Error::Dimension(_))));
        assert!(matches!(ModeVector::new(vec![c(1.0, 0.0), c(1.0, 0.0)]), Err(Error::Validation(_))));
        assert!(ModeVector::new(vec![]).is_err());
    }

    #[test]
    fn uniform_overlap_model() {
        assert_eq!(model_uniform_overlap(2, c(0.0, 0.0)).unwrap().matrix(), &ComplexMatrix::identity(2));
        assert_eq!(model_uniform_overlap(2, c(1.0, 0.0)).unwrap().matrix(), &ComplexMatrix::ones(2));
        assert!(matches!(model_uniform_overlap(3, c(-0.6, 0.0)), Err(Error::Validation(_))));
        assert!(model_uniform_overlap(3, c(-0.5, 0.0)).is_ok());
    }

    #[test]
    fn user_matrix_validation() {
        let cs = ComplexMatrix::from_real_rows(&[&[1.0, 1.5], &[1.5, 1.0]]).unwrap();
        let err = GramMatrix::from_matrix(cs).unwrap_err();
        assert!(err.to_string().contains("Cauchy–Schwarz violated"), "{err}");
        let diag = ComplexMatrix::from_real_rows(&[&[2.0, 0.0], &[0.0, 1.0]]).unwrap();
        assert!(GramMatrix::from_matrix(diag).is_err());
        let nonherm = ComplexMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(0.0, 0.5)],
            vec![c(0.0, 0.5), c(1.0, 0.0)],
        ])
        .unwrap();
        assert!(GramMatrix::from_matrix(nonherm).is_err());
        // unit diagonal, |entries| <= 1, but indefinite
        let indef = ComplexMatrix::from_real_rows(&[
            &[1.0, 0.9, -0.9],
            &[0.9, 1.0, 0.9],
            &[-0.9, 0.9, 1.0],
        ])
        .unwrap();
        let err = GramMatrix::from_matrix(indef).unwrap_err();
        assert!(err.to_string().contains("positive semi-definite"), "{err}");
    }

    #[test]
    fn vacuum_embedding() {
        let i3 = embed_block_with_vacuum(&GramMatrix::identity(2), 1);
        assert_eq!(i3.matrix(), &ComplexMatrix::identity(3));
        let j2 = model_uniform_overlap(2, c(1.0, 0.0)).unwrap();
        let e = embed_block_with_vacuum(&j2, 2);
        assert_eq!(e.get(0, 1), c(1.0, 0.0));
        assert_eq!(e.get(0, 2), c(0.0, 0.0));
        assert_eq!(e.get(3, 3), c(1.0, 0.0));
        assert_eq!(embed_block_with_vacuum(&j2, 0), j2);
    }

    #[test]
    fn factorization_round_trip() {
        let v = model_uniform_overlap(3, c(0.3, 0.2)).unwrap();
        let modes = v.factorize(3).unwrap();
        let back = gram_matrix(&modes).unwrap();
        assert!(back.matrix().sub(v.matrix()).unwrap().max_abs() < 1e-10);
        assert!(v.factorize(2).is_err());
        let ones = model_uniform_overlap(3, c(1.0, 0.0)).unwrap();
        assert_eq!(ones.factorize(1).unwrap()[0].dim(), 1);
    }

    fn modes_strategy() -> impl Strategy<Value = (Vec<ModeVector>, usize)> {
        (1usize..4, 1usize..5).prop_flat_map(|(d, n)| {
            (
                prop::collection::vec(
                    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d),
                    n,
                )
                .prop_filter_map("zero vector", |vs| {
                    vs.into_iter()
                        .map(|v| ModeVector::normalized(v.into_iter().map(|(a, b)| c(a, b)).collect()).ok())
                        .collect::<Option<Vec<_>>>()
                }),
                Just(d),
            )
        })
    }

    proptest! {
        #[test]
        fn gram_is_psd_and_bounded((modes, _d) in modes_strategy()) {
            let v = gram_matrix(&modes).unwrap();
            prop_assert!(check_hermitian_psd(v.matrix(), 1e-9));
            prop_assert!(v.matrix().as_slice().iter().all(|z| z.norm() <= 1.0 + 1e-12));
            prop_assert!(GramMatrix::from_matrix(v.matrix().clone()).is_ok());
        }

        #[test]
        fn gram_invariant_under_common_rotation(
            (modes, d) in modes_strategy(),
            angles in prop::collection::vec(-3.0f64..3.0, 3),
        ) {
            // a d x d unitary from a Hermitian generator's eigenbasis
            let gen = ComplexMatrix::from_fn(d, d, |i, j| {
                let a = angles[(i + 2 * j) % 3];
                if i == j { c(a, 0.0) } else { c(a.sin(), (a * (i as f64 - j as f64)).cos()) }
            });
            let herm = ComplexMatrix::from_fn(d, d, |i, j| (gen[(i, j)] + gen[(j, i)].conj()) * 0.5);
            let eig = herm.to_nalgebra().symmetric_eigen();
            let u = ComplexMatrix::from_nalgebra(&eig.eigenvectors);
            let rotated: Vec<_> = modes.iter().map(|m| m.rotated(&u).unwrap()).collect();
            let v1 = gram_matrix(&modes).unwrap();
            let v2 = gram_matrix(&rotated).unwrap();
            prop_assert!(v1.matrix().sub(v2.matrix()).unwrap().max_abs() < 1e-10);
        }
    }
}
