use ltn_heat::linalg::{
    dense_lu_solve, eigenvalues_dense, qr_solve, rcm_ordering, sparse_solve, spectral_radius_dense, BandLu, CsrMatrix, DenseMatrix,
};
use proptest::prelude::*;

/// Random sparse diagonally dominant matrix from a flat value pool.
fn sparse_matrix(n: usize, vals: &[f64]) -> CsrMatrix {
    let mut t = Vec::new();
    let mut k = 0;
    for i in 0..n {
        let mut off = 0.0;
        for d in [1usize, 3, 7] {
            let j = (i * 5 + d * 11) % n;
            if j != i {
                let v = vals[k % vals.len()];
                k += 1;
                t.push((i, j, v));
                off += v.abs();
            }
        }
        t.push((i, i, off + 1.0 + vals[k % vals.len()].abs()));
        k += 1;
    }
    CsrMatrix::from_triplets(n, n, &t)
}

proptest! {
    #[test]
    fn sparse_solve_matches_dense(n in 3usize..60, vals in prop::collection::vec(-1.0f64..1.0, 32), rhs_seed in -1.0f64..1.0) {
        let a = sparse_matrix(n, &vals);
        let b: Vec<f64> = (0..n).map(|i| rhs_seed + (i as f64 * 0.37).sin()).collect();
        let x = sparse_solve(&a, &b).unwrap();
        let r = a.matvec(&x);
        prop_assert!(r.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-10));
        let xd = dense_lu_solve(&a.to_dense(), &b).unwrap();
        prop_assert!(x.iter().zip(&xd).all(|(u, v)| (u - v).abs() < 1e-10));
    }

    #[test]
    fn rcm_is_a_permutation(n in 1usize..80, vals in prop::collection::vec(-1.0f64..1.0, 8)) {
        let p = rcm_ordering(&sparse_matrix(n, &vals));
        let mut s = p.clone();
        s.sort_unstable();
        prop_assert_eq!(s, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn csr_algebra_matches_dense(n in 2usize..20, vals in prop::collection::vec(-1.0f64..1.0, 16)) {
        let a = sparse_matrix(n, &vals);
        let b = sparse_matrix(n, &vals[3..]);
        let (da, db) = (a.to_dense(), b.to_dense());
        prop_assert!((a.matmul(&b).to_dense() - &da * &db).amax() < 1e-12);
        prop_assert!((a.add_scaled(&b, -2.0).to_dense() - (&da - &db * 2.0)).amax() < 1e-12);
        prop_assert!((a.transpose().to_dense() - da.transpose()).amax() == 0.0);
        let x: Vec<f64> = (0..n).map(|i| i as f64 - 3.0).collect();
        let y = a.matvec(&x);
        let yd = &da * nalgebra::DVector::from_column_slice(&x);
        prop_assert!(y.iter().zip(yd.iter()).all(|(u, v)| (u - v).abs() < 1e-12));
        let rows: Vec<usize> = (0..n).step_by(2).collect();
        let sel = a.select(&rows, &(0..n).collect::<Vec<_>>());
        for (k, &i) in rows.iter().enumerate() {
            for j in 0..n {
                prop_assert_eq!(sel.get(k, j), a.get(i, j));
            }
        }
    }
}

#[test]
fn duplicate_triplets_are_summed() {
    let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 0, -1.0), (1, 1, 4.0)]);
    assert_eq!(a.get(0, 0), 3.0);
    assert_eq!(a.get(0, 1), 0.0);
    assert_eq!(a.nnz(), 3);
}

#[test]
fn identity_rows_replace_rows() {
    let a = CsrMatrix::from_triplets(3, 3, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 2.0), (2, 2, 5.0)]);
    let b = a.with_identity_rows(&[0]);
    assert_eq!(b.get(0, 0), 1.0);
    assert_eq!(b.get(0, 1), 0.0);
    assert_eq!(b.get(1, 0), 1.0);
}

#[test]
fn singular_matrix_is_reported() {
    let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 4.0)]);
    assert!(BandLu::factor(&a).is_err() || sparse_solve(&a, &[1.0, 0.0]).is_err());
}

#[test]
fn nonsymmetric_band_solve() {
    let n = 200;
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, 4.0));
        if i + 1 < n {
            t.push((i, i + 1, -1.0));
            t.push((i + 1, i, -2.0));
        }
        if i + 9 < n {
            t.push((i, i + 9, 0.5));
        }
    }
    let a = CsrMatrix::from_triplets(n, n, &t);
    let lu = BandLu::factor(&a).unwrap();
    let x_true: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
    let b = a.matvec(&x_true);
    let x = lu.solve(&b).unwrap();
    assert!(x.iter().zip(&x_true).all(|(u, v)| (u - v).abs() < 1e-12));
    assert!(lu.backward_error(&x, &b) < 1e-14);
}

#[test]
fn least_squares_fits_a_line() {
    let a = DenseMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
    let x = qr_solve(&a, &[1.0, 3.0, 5.0, 7.0]).unwrap();
    assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
}

#[test]
fn eigenvalues_of_known_matrices() {
    let a = DenseMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, -3.0, 0.0, 0.0, 0.0, 0.5]);
    let mut ev: Vec<f64> = eigenvalues_dense(&a).unwrap().iter().map(|z| z.re).collect();
    ev.sort_by(f64::total_cmp);
    assert_eq!(ev, vec![-3.0, 0.5, 2.0]);
    assert!((spectral_radius_dense(&a).unwrap() - 3.0).abs() < 1e-14);
    // strongly non-normal
    let u = DenseMatrix::from_row_slice(2, 2, &[0.9, 100.0, 0.0, -0.4]);
    assert!((spectral_radius_dense(&u).unwrap() - 0.9).abs() < 1e-12);
    let nan = DenseMatrix::from_row_slice(1, 1, &[f64::NAN]);
    assert!(eigenvalues_dense(&nan).is_err());
    assert!(eigenvalues_dense(&DenseMatrix::zeros(2, 3)).is_err());
}
