use ltn_heat::coupler::{coupled_step, run_coupled, run_homogeneous, write_snapshot, CoupledState, CoupledSystem, RunReport};
use ltn_heat::harness::{build_coupled, registry_case, ExperimentConfig, ExperimentId, Variant};
use ltn_heat::linalg::max_abs;
use ltn_heat::transfer::GradientMode;
use proptest::prelude::*;
use std::sync::OnceLock;

fn line_system() -> &'static CoupledSystem {
    static S: OnceLock<CoupledSystem> = OnceLock::new();
    S.get_or_init(|| build_coupled(&ExperimentConfig::defaults(ExperimentId::LtnLine, Variant::Homogeneous), 0.1, 3.0).unwrap())
}

fn state(sys: &CoupledSystem, seed: f64) -> CoupledState {
    let mut s = sys.zero_state();
    for (i, v) in s.u_nl.iter_mut().enumerate() {
        *v = (seed * (i as f64 + 1.0)).sin();
    }
    for (i, v) in s.u_l.iter_mut().enumerate() {
        *v = (seed * (i as f64 + 0.5)).cos();
    }
    s
}

#[test]
fn linear_patch_is_steady_in_both_modes() {
    let cases = registry_case(ExperimentId::PatchLinear, Variant::Homogeneous).unwrap();
    for mode in [GradientMode::Mls, GradientMode::Element] {
        let mut cfg = ExperimentConfig::defaults(ExperimentId::PatchLinear, Variant::Homogeneous);
        cfg.gradient = mode;
        let sys = build_coupled(&cfg, 0.1, 6.0).unwrap();
        let rep = run_coupled(&sys, &cases, 30.0 * sys.dt).unwrap();
        assert_eq!(rep.steps, 30);
        assert!(!rep.diverged);
        assert!(rep.errors.err_inf() < 1e-11, "{mode:?}: {:?}", rep.errors);
    }
}

#[test]
fn zero_state_is_a_fixed_point() {
    let sys = line_system();
    let s = coupled_step(sys, &sys.zero_state(), None).unwrap();
    assert_eq!(max_abs(&s.u_nl), 0.0);
    assert_eq!(max_abs(&s.u_l), 0.0);
    assert_eq!(s.k, 1);
    assert!((s.t - sys.dt).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn homogeneous_step_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, s1 in 0.1f64..3.0, s2 in 0.1f64..3.0) {
        let sys = line_system();
        let (x, y) = (state(sys, s1), state(sys, s2));
        let mut z = sys.zero_state();
        for i in 0..z.u_nl.len() {
            z.u_nl[i] = a * x.u_nl[i] + b * y.u_nl[i];
        }
        for i in 0..z.u_l.len() {
            z.u_l[i] = a * x.u_l[i] + b * y.u_l[i];
        }
        let (fx, fy, fz) = (coupled_step(sys, &x, None).unwrap(), coupled_step(sys, &y, None).unwrap(), coupled_step(sys, &z, None).unwrap());
        let scale = 1.0 + max_abs(&fz.u_nl).max(max_abs(&fz.u_l));
        for i in 0..fz.u_nl.len() {
            prop_assert!((fz.u_nl[i] - a * fx.u_nl[i] - b * fy.u_nl[i]).abs() < 1e-10 * scale);
        }
        for i in 0..fz.u_l.len() {
            prop_assert!((fz.u_l[i] - a * fx.u_l[i] - b * fy.u_l[i]).abs() < 1e-10 * scale);
        }
    }
}

#[test]
fn local_interface_takes_the_nonlocal_trace() {
    let sys = line_system();
    let s = coupled_step(sys, &state(sys, 0.7), None).unwrap();
    let tr = sys.trace.matvec(&s.u_nl);
    for (k, &j) in sys.local.interface.iter().enumerate() {
        assert!((s.u_l[j] - tr[k]).abs() < 1e-12);
    }
}

#[test]
fn homogeneous_history_decays_at_a_stable_beta() {
    let sys = line_system();
    let hist = run_homogeneous(sys, state(sys, 1.3), 100).unwrap();
    assert_eq!(hist.len(), 100);
    assert!(hist[99] < hist[0]);
}

#[test]
fn report_and_snapshot_formats() {
    let sys = line_system();
    let cases = registry_case(ExperimentId::LtnLine, Variant::Homogeneous).unwrap();
    let rep = run_coupled(sys, &cases, 2.0 * sys.dt).unwrap();
    let mut buf = Vec::new();
    rep.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], RunReport::CSV_HEADER);
    assert_eq!(lines[1].split(',').count(), RunReport::CSV_HEADER.split(',').count());
    assert_eq!(rep.history.len(), 2);

    let s = sys.initial_state(&cases);
    let mut buf = Vec::new();
    write_snapshot(sys, &s, &mut buf).unwrap();
    let n = String::from_utf8(buf).unwrap().lines().count();
    assert_eq!(n, 1 + sys.nonlocal.len() + sys.local.len());
}

#[test]
fn beta_swap_keeps_geometry() {
    let sys = line_system();
    let other = sys.with_beta(7.0).unwrap();
    assert_eq!(other.beta, 7.0);
    assert_eq!(other.nonlocal.beta, 7.0);
    assert_eq!(other.nonlocal.len(), sys.nonlocal.len());
    let s = state(sys, 0.4);
    let a = coupled_step(sys, &s, None).unwrap();
    let b = coupled_step(&other, &s, None).unwrap();
    assert!(a.u_nl.iter().zip(&b.u_nl).any(|(x, y)| (x - y).abs() > 1e-8));
}
