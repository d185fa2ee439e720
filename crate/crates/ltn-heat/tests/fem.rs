use ltn_heat::fem::{assemble_fem, evaluate_local, fem_step, locate, shape_gradients, FemSolver, Locator};
use ltn_heat::geometry::{generate_mesh, DomainSpec, Mat2, NodeTag, TriMesh, Vec2};
use ltn_heat::linalg::max_abs;
use ltn_heat::nonlocal::ManufacturedCase;
use proptest::prelude::*;

fn reference_triangle() -> TriMesh {
    TriMesh {
        nodes: vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)],
        tags: vec![NodeTag::Interior; 3],
        triangles: vec![[0, 1, 2]],
        h: 1.0,
    }
}

fn rectangle(h: f64) -> TriMesh {
    generate_mesh(&DomainSpec::rectangle_local(Vec2::new(1.0, 0.0), Vec2::new(2.0, 1.0)), h).unwrap()
}

#[test]
fn reference_element_matrices() {
    let sys = assemble_fem(&reference_triangle(), 1.0).unwrap();
    let k = sys.stiffness.to_dense();
    let expect_k = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
    let m = sys.mass.to_dense();
    for a in 0..3 {
        for b in 0..3 {
            assert!((k[(a, b)] - expect_k[a][b]).abs() < 1e-15);
            let em = if a == b { 1.0 / 12.0 } else { 1.0 / 24.0 };
            assert!((m[(a, b)] - em).abs() < 1e-15);
        }
    }
    let g = shape_gradients(&reference_triangle(), 0);
    assert_eq!(g, [Vec2::new(-1.0, -1.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)]);
}

#[test]
fn degenerate_triangle_is_rejected() {
    let mut m = reference_triangle();
    m.nodes[2] = Vec2::new(2.0, 0.0);
    assert!(assemble_fem(&m, 1.0).is_err());
}

#[test]
fn assembled_mass_and_stiffness_invariants() {
    let sys = assemble_fem(&rectangle(0.1), 2.0).unwrap();
    let ones = vec![1.0; sys.len()];
    let total: f64 = sys.mass.matvec(&ones).iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!(max_abs(&sys.stiffness.matvec(&ones)) < 1e-12);
    // stiffness of x is α times the boundary flux only
    let x = sys.nodal(|p| p.x);
    let kx = sys.stiffness.matvec(&x);
    for &i in &sys.interior {
        assert!(kx[i].abs() < 1e-12);
    }
    assert!((sys.l2_norm(&ones) - 1.0).abs() < 1e-12);
}

fn lin_u(x: Vec2, _: f64) -> f64 {
    2.0 * x.x - x.y + 0.5
}
fn zero(_: Vec2, _: f64) -> f64 {
    0.0
}
fn lin_grad(_: Vec2, _: f64) -> Vec2 {
    Vec2::new(2.0, -1.0)
}
fn zero_m(_: Vec2, _: f64) -> Mat2 {
    Mat2::zeros()
}

fn heat_u(x: Vec2, t: f64) -> f64 {
    t * x.x.sin() * x.y.cos()
}
fn heat_ut(x: Vec2, _: f64) -> f64 {
    x.x.sin() * x.y.cos()
}
fn heat_grad(x: Vec2, t: f64) -> Vec2 {
    Vec2::new(t * x.x.cos() * x.y.cos(), -t * x.x.sin() * x.y.sin())
}
fn heat_hess(x: Vec2, t: f64) -> Mat2 {
    let (s, c, sy, cy) = (x.x.sin(), x.x.cos(), x.y.sin(), x.y.cos());
    Mat2::new(-t * s * cy, -t * c * sy, -t * c * sy, -t * s * cy)
}
fn heat_f(x: Vec2, t: f64) -> f64 {
    (1.0 + 2.0 * t) * x.x.sin() * x.y.cos()
}

#[test]
fn linear_steady_state_is_exact() {
    let case = ManufacturedCase { name: "linear", alpha: 1.0, u: lin_u, u_t: zero, grad: lin_grad, hess: zero_m, f: zero };
    let sys = assemble_fem(&rectangle(0.1), 1.0).unwrap();
    let mut u = sys.nodal(|x| lin_u(x, 0.0));
    for k in 1..=5 {
        u = fem_step(&sys, &u, &case, k as f64 * 0.01, 0.01).unwrap();
    }
    let e: Vec<f64> = u.iter().zip(&sys.mesh.nodes).map(|(v, &x)| v - lin_u(x, 0.0)).collect();
    assert!(max_abs(&e) < 1e-12);
}

#[test]
fn heat_convergence_is_second_order() {
    let case = ManufacturedCase { name: "heat", alpha: 1.0, u: heat_u, u_t: heat_ut, grad: heat_grad, hess: heat_hess, f: heat_f };
    assert!(case.pde_residual(Vec2::new(1.3, 0.4), 0.7).abs() < 1e-14);
    let mut errs = Vec::new();
    for h in [0.1, 0.05] {
        let sys = assemble_fem(&rectangle(h), 1.0).unwrap();
        let dt = h * h;
        let solver = FemSolver::new(&sys, dt).unwrap();
        let steps = (0.5 / dt).round() as usize;
        let mut u = sys.nodal(|x| heat_u(x, 0.0));
        for k in 1..=steps {
            let t = k as f64 * dt;
            let load = sys.load(|x| heat_f(x, t));
            u = solver.step(&sys, &u, &load, |i| heat_u(sys.mesh.nodes[i], t)).unwrap();
        }
        let e: Vec<f64> = u.iter().zip(&sys.mesh.nodes).map(|(v, &x)| v - heat_u(x, 0.5)).collect();
        errs.push(max_abs(&e));
    }
    let rate = (errs[0] / errs[1]).log2();
    assert!(rate > 1.8, "errors {errs:?}, rate {rate}");
}

#[test]
fn solver_rejects_bad_step() {
    let sys = assemble_fem(&rectangle(0.25), 1.0).unwrap();
    assert!(FemSolver::new(&sys, 0.0).is_err());
}

proptest! {
    #[test]
    fn locate_and_evaluate_reproduce_linear_fields(x in 1.0f64..2.0, y in 0.0f64..1.0, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let m = rectangle(0.1);
        let vals: Vec<f64> = m.nodes.iter().map(|p| a * p.x + b * p.y + 1.0).collect();
        let p = Vec2::new(x, y);
        let (v, g) = evaluate_local(&m, &vals, p).unwrap();
        prop_assert!((v - (a * x + b * y + 1.0)).abs() < 1e-12);
        prop_assert!((g - Vec2::new(a, b)).norm() < 1e-10);
        let (t, l) = locate(&m, p).unwrap();
        let (t2, l2) = Locator::new(&m).locate(&m, p).unwrap();
        prop_assert!(l.iter().all(|&c| c >= -1e-12));
        prop_assert!(l2.iter().all(|&c| c >= -1e-12));
        let back: Vec2 = (0..3).map(|k| m.nodes[m.triangles[t][k]] * l[k]).sum();
        prop_assert!((back - p).norm() < 1e-12);
        let back2: Vec2 = (0..3).map(|k| m.nodes[m.triangles[t2][k]] * l2[k]).sum();
        prop_assert!((back2 - p).norm() < 1e-12);
    }
}

#[test]
fn outside_points_are_rejected() {
    let m = rectangle(0.1);
    assert!(locate(&m, Vec2::new(0.5, 0.5)).is_err());
    // tiny overshoot snaps
    assert!(locate(&m, Vec2::new(1.0 - 1e-9, 0.5)).is_ok());
}
