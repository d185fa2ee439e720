use ltn_heat::coupler::{coupled_step, run_homogeneous, CoupledState, CoupledSystem};
use ltn_heat::harness::{build_coupled, ExperimentConfig, ExperimentId, Variant};
use ltn_heat::linalg::DenseMatrix;
use ltn_heat::stability::{
    build_lambda, build_lambda_with_limit, coarse_grid, crossings, optimize_beta_with, scaled_beta, spectral_radius, StateLayout,
};
use ltn_heat::Error;
use proptest::prelude::*;
use std::sync::OnceLock;

fn line_system() -> &'static (CoupledSystem, DenseMatrix) {
    static SYS: OnceLock<(CoupledSystem, DenseMatrix)> = OnceLock::new();
    SYS.get_or_init(|| {
        let cfg = ExperimentConfig::defaults(ExperimentId::LtnLine, Variant::Homogeneous);
        let sys = build_coupled(&cfg, 0.1, 3.0).unwrap();
        let lambda = build_lambda(&sys).unwrap();
        (sys, lambda)
    })
}

fn step_packed(sys: &CoupledSystem, s: &[f64]) -> Vec<f64> {
    let lay = StateLayout::of(sys);
    let (u_nl, u_l) = lay.unpack(s, sys.nonlocal.len(), sys.local.len());
    let next = coupled_step(sys, &CoupledState { u_nl, u_l, t: 0.0, k: 0 }, None).unwrap();
    lay.pack(&next.u_nl, &next.u_l)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn lambda_reproduces_one_homogeneous_step(seed in prop::collection::vec(-1.0f64..1.0, 64)) {
        let (sys, lambda) = line_system();
        let n = lambda.nrows();
        let s: Vec<f64> = (0..n).map(|i| seed[i % 64] * (1.0 + (i / 64) as f64).sin()).collect();
        let via_step = step_packed(sys, &s);
        let via_lambda = lambda * nalgebra::DVector::from_column_slice(&s);
        let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        let diff = via_step.iter().zip(via_lambda.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!(diff <= 1e-9 * norm, "diff {diff} vs norm {norm}");
    }

    #[test]
    fn optimizer_returns_grid_minimum(vals in prop::collection::vec(0.0f64..2.0, 2..20)) {
        let grid: Vec<f64> = (0..vals.len()).map(|i| i as f64).collect();
        let f = |b: f64| Ok(vals[b as usize]);
        let (betas, rho, i) = optimize_beta_with(&f, &grid, false).unwrap();
        prop_assert!(rho.iter().all(|r| *r >= rho[i]));
        // ties go to the smaller β
        prop_assert!(betas[..i].iter().zip(&rho[..i]).all(|(_, r)| *r > rho[i]));
        prop_assert!(betas.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn scaled_beta_is_inverse_in_spacing(b0 in 0.0f64..100.0, h0 in 0.01f64..1.0, k in 1u32..16) {
        let h = h0 / k as f64;
        prop_assert!((scaled_beta(b0, h0, h) - b0 * k as f64).abs() <= 1e-10 * (1.0 + b0 * k as f64));
    }
}

#[test]
fn spectral_radius_examples() {
    let d = DenseMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, -0.25]);
    assert!((spectral_radius(&d).unwrap() - 0.5).abs() < 1e-12);
    let (c, s) = (30f64.to_radians().cos(), 30f64.to_radians().sin());
    let rot = DenseMatrix::from_row_slice(2, 2, &[0.9 * c, -0.9 * s, 0.9 * s, 0.9 * c]);
    assert!((spectral_radius(&rot).unwrap() - 0.9).abs() < 1e-12);
    // companion matrix of z² − z + 0.89: complex pair of modulus sqrt(0.89)
    let comp = DenseMatrix::from_row_slice(2, 2, &[1.0, -0.89, 1.0, 0.0]);
    assert!((spectral_radius(&comp).unwrap() - 0.89f64.sqrt()).abs() < 1e-10);
}

#[test]
fn scaled_beta_table_values() {
    assert!((scaled_beta(3.0, 0.1, 0.025) - 12.0).abs() < 1e-12);
    assert!((scaled_beta(3.0, 0.1, 0.0125) - 24.0).abs() < 1e-12);
    assert_eq!(scaled_beta(3.0, 0.1, 0.1), 3.0);
}

#[test]
fn coarse_grid_shape() {
    let g = coarse_grid(0.1);
    assert_eq!(g.len(), 25);
    assert_eq!(g[0], 0.0);
    assert!((g[1] - 0.5).abs() < 1e-12 && (g[24] - 500.0).abs() < 1e-9);
    assert!(g.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn crossings_interpolate_linearly() {
    let c = crossings(&[0.0, 1.0, 2.0, 3.0], &[1.5, 0.5, 0.5, 2.0]);
    assert_eq!(c.len(), 2);
    assert!((c[0] - 0.5).abs() < 1e-12);
    assert!((c[1] - (2.0 + 1.0 / 3.0)).abs() < 1e-12);
}

#[test]
fn optimizer_rejects_bad_grids() {
    let f = |_: f64| Ok(1.0);
    assert!(optimize_beta_with(&f, &[], false).is_err());
    assert!(optimize_beta_with(&f, &[-1.0, 1.0], false).is_err());
    let nan = |_: f64| Ok(f64::NAN);
    assert!(optimize_beta_with(&nan, &[0.0, 1.0], false).is_err());
}

#[test]
fn refinement_brackets_coarse_minimum() {
    let f = |b: f64| Ok((b - 2.3).abs() + 0.1);
    let (betas, _, i) = optimize_beta_with(&f, &[0.0, 1.0, 2.0, 4.0, 8.0], true).unwrap();
    assert!((betas[i] - 2.3).abs() <= 2.0 / 24.0 + 1e-12);
}

#[test]
fn lambda_is_deterministic() {
    let (sys, lambda) = line_system();
    let again = build_lambda(sys).unwrap();
    let r1 = spectral_radius(lambda).unwrap();
    let r2 = spectral_radius(&again).unwrap();
    assert!((r1 - r2).abs() <= 1e-12);
}

#[test]
fn dense_limit_is_enforced() {
    let (sys, _) = line_system();
    match build_lambda_with_limit(sys, 10) {
        Err(Error::DenseLimit { limit: 10, .. }) => {}
        other => panic!("expected dense-limit error, got {other:?}"),
    }
}

#[test]
fn spectral_radius_predicts_power_growth() {
    let (sys, lambda) = line_system();
    let rho = spectral_radius(lambda).unwrap();
    assert!(rho < 0.999, "rho = {rho}");
    let lay = StateLayout::of(sys);
    let s: Vec<f64> = (0..lay.len()).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
    let (u_nl, u_l) = lay.unpack(&s, sys.nonlocal.len(), sys.local.len());
    let hist = run_homogeneous(sys, CoupledState { u_nl, u_l, t: 0.0, k: 0 }, 200).unwrap();
    // observed asymptotic growth rate matches rho
    let rate = (hist[199] / hist[149]).powf(1.0 / 50.0);
    assert!((rate - rho).abs() < 0.02, "rate {rate} vs rho {rho}");
    // monotone decay after transients
    assert!(hist[50..].windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
}

#[test]
fn tiny_step_is_identity_on_nonlocal_block() {
    // mass terms dominate as Δt → 0
    let cfg = ExperimentConfig { dt_coef: 1e-9, ..ExperimentConfig::defaults(ExperimentId::LtnLine, Variant::Homogeneous) };
    let sys = build_coupled(&cfg, 0.1, 0.0).unwrap();
    let lambda = build_lambda(&sys).unwrap();
    let n1 = sys.nonlocal.unknowns.len();
    let mut worst: f64 = 0.0;
    for i in 0..n1 {
        for j in 0..n1 {
            let id = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((lambda[(i, j)] - id).abs());
        }
    }
    assert!(worst < 1e-4, "deviation {worst}");
}
