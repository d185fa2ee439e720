//! Sparse storage, the sparse direct solver, and dense factorizations.

mod banded;
mod dense;
mod sparse;

pub use banded::{rcm_ordering, sparse_solve, BandLu};
pub use dense::{dense_lu_solve, eigenvalues_dense, qr_solve, spectral_radius_dense, DenseMatrix, PivotedQr};
pub use sparse::CsrMatrix;

/// Maximum number of unknowns for which a dense amplification matrix is built.
pub const DENSE_LIMIT: usize = 4000;

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
