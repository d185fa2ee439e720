use ltn_heat::fem::FemSystem;
use ltn_heat::geometry::{NodeTag, Vec2};
use ltn_heat::harness::{build_local, build_nonlocal, ExperimentId};
use ltn_heat::kernels::KernelFamily;
use ltn_heat::nonlocal::NonlocalSystem;
use ltn_heat::transfer::{build_dirichlet_trace, build_robin_extraction, GradientMode};
use proptest::prelude::*;
use std::sync::OnceLock;

fn systems(id: ExperimentId) -> (NonlocalSystem, FemSystem) {
    let ratio = if id == ExperimentId::LtnCross { 3.5 } else { 3.9 };
    (build_nonlocal(id, 0.1, ratio, KernelFamily::J1Constant, 1.0, 0.0).unwrap(), build_local(id, 0.1, 1.0).unwrap())
}

fn line() -> &'static (NonlocalSystem, FemSystem) {
    static S: OnceLock<(NonlocalSystem, FemSystem)> = OnceLock::new();
    S.get_or_init(|| systems(ExperimentId::LtnLine))
}

fn cross() -> &'static (NonlocalSystem, FemSystem) {
    static S: OnceLock<(NonlocalSystem, FemSystem)> = OnceLock::new();
    S.get_or_init(|| systems(ExperimentId::LtnCross))
}

type Quad = [f64; 6];

fn value(c: &Quad, p: Vec2) -> f64 {
    c[0] + c[1] * p.x + c[2] * p.y + c[3] * p.x * p.x + c[4] * p.x * p.y + c[5] * p.y * p.y
}

fn grad(c: &Quad, p: Vec2) -> Vec2 {
    Vec2::new(c[1] + 2.0 * c[3] * p.x + c[4] * p.y, c[2] + c[4] * p.x + 2.0 * c[5] * p.y)
}

fn hess(c: &Quad) -> [[f64; 2]; 2] {
    [[2.0 * c[3], c[4]], [c[4], 2.0 * c[5]]]
}

/// Robin data of a polynomial for each functional, from the analytic
/// derivatives.
fn robin_oracle(nl: &NonlocalSystem, c: &Quad, beta: f64) -> Vec<f64> {
    let h = hess(c);
    nl.functionals()
        .iter()
        .map(|f| {
            let g = grad(c, f.point);
            match f.tangent {
                None => g.dot(&f.normal) + beta * value(c, f.point),
                Some(p) => {
                    let hn = Vec2::new(h[0][0] * f.normal.x + h[0][1] * f.normal.y, h[1][0] * f.normal.x + h[1][1] * f.normal.y);
                    p.dot(&hn) + beta * g.dot(&p)
                }
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn mls_extraction_reproduces_quadratics(c in prop::array::uniform6(-1.0f64..1.0), beta in 0.0f64..30.0) {
        for (nl, loc) in [line(), cross()] {
            let ex = build_robin_extraction(&loc.mesh, nl.functionals(), nl.cloud.delta.max(3.0 * loc.mesh.h), GradientMode::Mls).unwrap();
            let u = loc.nodal(|p| value(&c, p));
            let g = ex.apply(beta, &u);
            let oracle = robin_oracle(nl, &c, beta);
            for (a, b) in g.iter().zip(&oracle) {
                prop_assert!((a - b).abs() < 1e-8 * (1.0 + beta), "{a} vs {b}");
            }
            let via_map = ex.robin_map(beta).matvec(&u);
            prop_assert!(via_map.iter().zip(&g).all(|(a, b)| (a - b).abs() < 1e-12 * (1.0 + a.abs())));
        }
    }

    #[test]
    fn element_extraction_reproduces_linear_fields(a in -1.0f64..1.0, b in -1.0f64..1.0, c0 in -1.0f64..1.0, beta in 0.0f64..30.0) {
        let coef = [c0, a, b, 0.0, 0.0, 0.0];
        for (nl, loc) in [line(), cross()] {
            let ex = build_robin_extraction(&loc.mesh, nl.functionals(), 0.3, GradientMode::Element).unwrap();
            let g = ex.apply(beta, &loc.nodal(|p| value(&coef, p)));
            let oracle = robin_oracle(nl, &coef, beta);
            for (x, y) in g.iter().zip(&oracle) {
                prop_assert!((x - y).abs() < 1e-9 * (1.0 + beta));
            }
        }
    }

    #[test]
    fn dirichlet_trace_reproduces_quadratics(c in prop::array::uniform6(-1.0f64..1.0)) {
        for (nl, loc) in [line(), cross()] {
            let tr = build_dirichlet_trace(&nl.cloud, &loc.mesh, nl.cloud.delta).unwrap();
            let u: Vec<f64> = nl.cloud.points.iter().map(|&p| value(&c, p)).collect();
            let v = tr.matvec(&u);
            let nodes = loc.mesh.indices_with(NodeTag::Interface);
            prop_assert_eq!(v.len(), nodes.len());
            for (k, &j) in nodes.iter().enumerate() {
                prop_assert!((v[k] - value(&c, loc.mesh.nodes[j])).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn sigma1_shapes() {
    for (nl, _) in [line(), cross()] {
        let s = &nl.sigma1;
        assert_eq!(s.trace.nrows(), nl.len());
        assert_eq!(s.trace.ncols(), nl.len());
        assert_eq!(s.inject.nrows(), nl.len());
        assert_eq!(s.inject.ncols(), s.functionals.len());
        // every functional feeds exactly the collar row that requested it
        for (k, f) in s.functionals.iter().enumerate() {
            for i in 0..nl.len() {
                if s.inject.get(i, k) != 0.0 {
                    assert_eq!(i, f.row);
                }
            }
        }
        // Dirichlet and interior rows carry no Robin terms
        for &i in &nl.dirichlet {
            assert_eq!(s.trace.row(i).0.len(), 0);
        }
    }
}

#[test]
fn edge_rows_weight_data_by_alpha_v() {
    use ltn_heat::nonlocal::CollarKind;
    let (nl, _) = line();
    for c in &nl.collar {
        if let CollarKind::Edge(cc) = c.kind {
            let k = nl.functionals().iter().position(|f| f.row == c.index).unwrap();
            assert!((nl.sigma1.inject.get(c.index, k) - nl.alpha * cc.v).abs() < 1e-12 * (1.0 + cc.v));
        }
    }
}
