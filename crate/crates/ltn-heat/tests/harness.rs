use ltn_heat::geometry::Vec2;
use ltn_heat::harness::{
    case_list, fit_slope, g_as_printed, registry_case, run_convergence, BetaRule, ConvergenceTable, ExperimentConfig, ExperimentId, Variant,
};
use ltn_heat::stability::scaled_beta;
use proptest::prelude::*;

fn all_pairs() -> Vec<(ExperimentId, Variant)> {
    ExperimentId::ALL.iter().flat_map(|&id| id.variants().iter().map(move |&v| (id, v))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn registry_cases_satisfy_their_equations(x in -2.0f64..2.0, y in -2.0f64..2.0, t in 0.0f64..1.0) {
        let p = Vec2::new(x, y);
        for (id, v) in all_pairs() {
            let c = registry_case(id, v).unwrap();
            for case in [c.nonlocal, c.local] {
                let r = case.pde_residual(p, t);
                prop_assert!(r.abs() <= 1e-10 * (1.0 + (case.f)(p, t).abs()), "{id} {v} {}: residual {r}", case.name);
            }
        }
    }

    #[test]
    fn analytic_limits_agree_on_the_interface(s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let line = Vec2::new(1.0, s);
        let th = 2.0 * std::f64::consts::PI * s;
        let circle = Vec2::new(th.cos(), th.sin());
        for (id, v) in all_pairs() {
            let p = match id {
                ExperimentId::LtnLine => line,
                ExperimentId::LtnCircle => circle,
                ExperimentId::LtnCross => Vec2::new(0.5, 0.5 + 0.5 * s),
                _ => continue,
            };
            let c = registry_case(id, v).unwrap();
            prop_assert!(((c.nonlocal.u)(p, t) - (c.local.u)(p, t)).abs() < 1e-12, "{id} {v}");
        }
    }
}

#[test]
fn initial_data_is_the_solution_at_time_zero() {
    // both the Dirichlet data and the initial state are read off the same
    // field, so they agree at t = 0; the cases with a t factor start at rest
    for (id, v) in all_pairs() {
        let c = registry_case(id, v).unwrap();
        let p = Vec2::new(0.3, -0.7);
        if !matches!(id, ExperimentId::PatchLinear | ExperimentId::PatchQuadratic) {
            assert_eq!((c.nonlocal.u)(p, 0.0), 0.0, "{id} {v}");
        }
    }
}

#[test]
fn missing_variants_are_rejected() {
    assert!(registry_case(ExperimentId::LtnCross, Variant::HeteroB).is_err());
    assert!(registry_case(ExperimentId::BcSquare, Variant::HeteroA).is_err());
    assert_eq!(case_list().len(), all_pairs().len());
}

#[test]
fn legacy_interface_data_differs_from_the_analytic_one() {
    let (t, beta, y) = (0.5, 2.0, 0.3);
    let p = Vec2::new(1.0, y);
    let c = registry_case(ExperimentId::BcSquare, Variant::Homogeneous).unwrap().nonlocal;
    let exact = c.robin(p, Vec2::new(1.0, 0.0), beta, t);
    let expect_exact = beta * t * t * 1f64.sin() * y.cos() + t * t * 1f64.cos() * y.cos();
    assert!((exact - expect_exact).abs() < 1e-14);
    let legacy = g_as_printed(p, t, beta);
    assert!((legacy - exact - (std::f64::consts::PI - t * t) * 1f64.cos() * y.cos()).abs() < 1e-14);
}

#[test]
fn beta_rules() {
    assert_eq!(BetaRule::parse("zero").unwrap(), BetaRule::Zero);
    assert_eq!(BetaRule::parse("0").unwrap(), BetaRule::Zero);
    assert_eq!(BetaRule::parse("auto").unwrap(), BetaRule::Auto);
    assert_eq!(BetaRule::parse("2.5").unwrap(), BetaRule::Const(2.5));
    assert_eq!(BetaRule::parse("0.3/h").unwrap(), BetaRule::OverH(0.3));
    assert!(BetaRule::parse("fast").is_err());
    assert!(BetaRule::parse("x/h").is_err());
    assert!((BetaRule::OverH(0.3).at(0.05, None) - 6.0).abs() < 1e-12);
    assert_eq!(BetaRule::Auto.at(0.05, Some((3.0, 0.1))), scaled_beta(3.0, 0.1, 0.05));
    assert_eq!(BetaRule::Auto.at(0.1, Some((3.0, 0.1))), 3.0);
}

#[test]
fn config_from_toml() {
    let cfg = ExperimentConfig::from_toml(
        r#"
        id = "ltn-line"
        variant = "heteroB"
        h = [0.1, 0.05]
        ratio = 3.9
        dt_coef = 10.0
        beta = { over_h = 0.4 }
        T = 0.5
        gradient = "element"
        [thresholds]
        min_slope_inf = 1.0
        "#,
    )
    .unwrap();
    assert_eq!(cfg.id, ExperimentId::LtnLine);
    assert_eq!(cfg.variant, Variant::HeteroB);
    assert_eq!(cfg.beta, BetaRule::OverH(0.4));
    assert_eq!(cfg.t_final, 0.5);
    assert_eq!(cfg.thresholds.min_slope_inf, Some(1.0));
    assert!((cfg.dt(0.1) - 0.1).abs() < 1e-15);

    let bad = |extra: &str| {
        ExperimentConfig::from_toml(&format!("id = \"ltn-line\"\nh = [0.1]\nratio = 3.9\ndt_coef = 10.0\nbeta = \"zero\"\n{extra}"))
    };
    assert!(bad("").is_ok());
    assert!(bad("colour = 1").is_err());
    assert!(bad("variant = \"heteroC\"").is_err());
    assert!(ExperimentConfig::from_toml("id = \"ltn-cross\"\nvariant = \"heteroB\"\nh = [0.1]\nratio = 3.5\ndt_coef = 10.0\nbeta = \"zero\"").is_err());
    let mut c = ExperimentConfig::defaults(ExperimentId::LtnLine, Variant::Homogeneous);
    c.ratio = 1.5;
    assert!(c.validate().is_err());
}

#[test]
fn defaults_per_experiment() {
    let d = ExperimentConfig::defaults(ExperimentId::LtnCross, Variant::Homogeneous);
    assert_eq!((d.ratio, d.dt_coef), (3.5, 100.0));
    let d = ExperimentConfig::defaults(ExperimentId::LtnLine, Variant::HeteroA);
    assert_eq!((d.ratio, d.dt_coef, d.beta), (3.9, 10.0, BetaRule::OverH(0.4)));
    let d = ExperimentConfig::defaults(ExperimentId::BcCircle, Variant::Homogeneous);
    assert_eq!(d.beta, BetaRule::Zero);
}

#[test]
fn slope_fit() {
    let h = [0.1, 0.05, 0.025];
    let e: Vec<f64> = h.iter().map(|x: &f64| 3.0 * x.powi(2)).collect();
    assert!((fit_slope(&h, &e).unwrap() - 2.0).abs() < 1e-12);
    assert!(fit_slope(&[0.1], &[1.0]).is_none());
    assert!(fit_slope(&h, &[1.0, f64::NAN, f64::NAN]).is_none());
}

fn csv(t: &ConvergenceTable) -> String {
    let mut buf = Vec::new();
    t.write_csv(&mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn linear_patch_table_is_exact_and_deterministic() {
    let mut cfg = ExperimentConfig::defaults(ExperimentId::PatchLinear, Variant::Homogeneous);
    cfg.h = vec![0.2, 0.1];
    cfg.t_final = 0.2;
    let a = run_convergence(&cfg).unwrap();
    let b = run_convergence(&cfg).unwrap();
    assert_eq!(csv(&a), csv(&b));
    let text = csv(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), ConvergenceTable::CSV_HEADER);
    let ncol = ConvergenceTable::CSV_HEADER.split(',').count();
    assert!(lines.all(|l| l.split(',').count() == ncol));
    // coarse row first, and the linear field is reproduced
    assert!(a.rows[0].h > a.rows[1].h);
    for r in &a.rows {
        assert!(r.err_inf() < 1e-10, "{r:?}");
        assert!(r.err_rms_nl <= r.err_inf_nl);
    }
}
