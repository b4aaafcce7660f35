//! Exact photon-counting statistics at the output of a lossy linear optical
//! multiport fed by single-mode sources in partially distinguishable internal
//! modes.
//!
//! The probability of zero counts, viewed as a function of the detector
//! efficiencies, is a generating function for every count probability. For
//! single-mode sources it is a weighted sum of permanents of repeated-row /
//! repeated-column submatrices of
//!
//! ```text
//! H = I - (U Λ U†) ∘ V
//! ```
//!
//! where `U` is the network, `Λ = diag(η)` holds the detector efficiencies and
//! `V` is the Gram matrix of the sources' internal modes. Count probabilities
//! follow from derivatives of that function with respect to the efficiencies.
//!
//! Module map:
//!
//! - [`linalg`] and [`permanent`]: dense complex matrices, structural checks
//!   and permanent kernels.
//! - [`distinguishability`]: internal-mode vectors and Gram matrices.
//! - [`sources`]: truncated Fock-basis density matrices of single-mode sources.
//! - [`engine`]: the generating function, count probabilities and the
//!   Fock-input permutation-sum fast path.
//! - [`oracle`]: an independent brute-force Fock-space simulator plus numeric
//!   fixtures for the normal/anti-normal ordering identity and complex
//!   Gaussian integrals.
//! - [`multimode`]: Monte-Carlo estimate of the zero-count probability for
//!   multimode sources with Gaussian Husimi functions.

pub mod algebra;
pub mod distinguishability;
pub mod engine;
mod error;
pub mod interpolation;
pub mod linalg;
pub mod math;
pub mod multimode;
pub mod oracle;
pub mod permanent;
pub mod sources;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
