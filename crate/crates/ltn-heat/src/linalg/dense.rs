use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use ndarray_linalg::EigVals;
use num_complex::Complex64;

pub type DenseMatrix = DMatrix<f64>;

fn rel_residual(a: &DenseMatrix, x: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let r = (a * x - b).amax();
    let denom = a.abs().column_sum().amax().max(a.abs().transpose().column_sum().amax()) * x.amax() + b.amax();
    if denom == 0.0 {
        r
    } else {
        r / denom
    }
}

/// LU with partial pivoting; verifies the normwise backward error.
pub fn dense_lu_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if !a.is_square() || a.nrows() != b.len() {
        return Err(Error::Dimension(format!("{}x{} system with rhs {}", a.nrows(), a.ncols(), b.len())));
    }
    let rhs = DVector::from_column_slice(b);
    let lu = a.clone().lu();
    let x = lu.solve(&rhs).ok_or(Error::Singular { pivot: 0, value: 0.0 })?;
    let res = rel_residual(a, &x, &rhs);
    if !(res <= 1e-11) {
        return Err(Error::Residual { residual: res, tolerance: 1e-11 });
    }
    Ok(x.as_slice().to_vec())
}

/// Column-pivoted QR factorization of a tall matrix `A` (m ≥ n).
#[derive(Debug, Clone)]
pub struct PivotedQr {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    // r column k corresponds to original column perm[k]
    perm: Vec<usize>,
}

impl PivotedQr {
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        let (m, n) = a.shape();
        if m < n {
            return Err(Error::Dimension(format!("least squares needs m >= n, got {m}x{n}")));
        }
        let qr = a.clone().col_piv_qr();
        let q = qr.q();
        let r = qr.r();
        let mut ident = DMatrix::<f64>::identity(n, n);
        qr.p().permute_columns(&mut ident);
        // ident now equals the column permutation P with A P = Q R
        let perm = (0..n).map(|k| (0..n).find(|&i| ident[(i, k)] == 1.0).unwrap()).collect();
        Ok(PivotedQr { q, r, perm })
    }

    pub fn ncols(&self) -> usize {
        self.r.ncols()
    }

    /// Ratio of the largest to the smallest diagonal entry of R, an estimate
    /// of cond(A).
    pub fn condition_estimate(&self) -> f64 {
        let d: Vec<f64> = (0..self.r.ncols()).map(|k| self.r[(k, k)].abs()).collect();
        let hi = d.iter().cloned().fold(0.0, f64::max);
        let lo = d.iter().cloned().fold(f64::INFINITY, f64::min);
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    fn check_rank(&self) -> Result<()> {
        let n = self.r.ncols();
        let scale = self.r[(0, 0)].abs();
        for k in 0..n {
            let v = self.r[(k, k)].abs();
            if !(v > scale * 1e-13) {
                return Err(Error::Singular { pivot: self.perm[k], value: v });
            }
        }
        Ok(())
    }

    /// Least-squares solution of `A x ≈ b`.
    pub fn solve_least_squares(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.check_rank()?;
        let qtb = self.q.transpose() * DVector::from_column_slice(b);
        let z = self
            .r
            .solve_upper_triangular(&qtb)
            .ok_or(Error::Singular { pivot: 0, value: 0.0 })?;
        let mut x = vec![0.0; self.ncols()];
        for k in 0..self.ncols() {
            x[self.perm[k]] = z[k];
        }
        Ok(x)
    }

    /// Solves the normal equations `(AᵀA) y = m` without forming `AᵀA`.
    pub fn solve_normal(&self, m: &[f64]) -> Result<Vec<f64>> {
        self.check_rank()?;
        let n = self.ncols();
        // AᵀA = P Rᵀ R Pᵀ
        let pm = DVector::from_iterator(n, (0..n).map(|k| m[self.perm[k]]));
        let w = self
            .r
            .transpose()
            .solve_lower_triangular(&pm)
            .ok_or(Error::Singular { pivot: 0, value: 0.0 })?;
        let z = self.r.solve_upper_triangular(&w).ok_or(Error::Singular { pivot: 0, value: 0.0 })?;
        let mut y = vec![0.0; n];
        for k in 0..n {
            y[self.perm[k]] = z[k];
        }
        Ok(y)
    }
}

/// Least squares `min ‖A x − b‖` by column-pivoted QR.
pub fn qr_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if a.nrows() != b.len() {
        return Err(Error::Dimension(format!("{} rows with rhs {}", a.nrows(), b.len())));
    }
    PivotedQr::new(a)?.solve_least_squares(b)
}

/// Full spectrum of a real square matrix (LAPACK `dgeev`: balancing,
/// Hessenberg reduction, Francis double-shift QR).
pub fn eigenvalues_dense(a: &DenseMatrix) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("eigenvalues of a {}x{} matrix", a.nrows(), a.ncols())));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("matrix has non-finite entries".into()));
    }
    let arr = ndarray::Array2::from_shape_vec((n, n).f(), a.as_slice().to_vec())
        .map_err(|e| Error::Eigen(e.to_string()))?;
    let ev = arr.eigvals().map_err(|e| Error::Eigen(e.to_string()))?;
    Ok(ev.to_vec())
}

use ndarray::ShapeBuilder;

/// Largest eigenvalue modulus.
pub fn spectral_radius_dense(a: &DenseMatrix) -> Result<f64> {
    Ok(eigenvalues_dense(a)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}
