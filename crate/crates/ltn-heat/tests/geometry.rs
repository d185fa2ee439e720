use ltn_heat::geometry::{
    contour_point, fill_distance, generate_mesh, generate_point_cloud, project_to_interface, read_mesh, write_mesh, DomainSpec,
    NodeTag, PointLabel, Shape, Vec2,
};
use proptest::prelude::*;
use std::f64::consts::PI;

fn unit_square() -> DomainSpec {
    DomainSpec::square_nonlocal(Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0))
}

fn unit_disk() -> DomainSpec {
    DomainSpec::disk_nonlocal(Vec2::zeros(), 1.0, Vec2::new(0.0, -1.0))
}

fn cross() -> DomainSpec {
    DomainSpec::cross_nonlocal(0.5, 1.0, Vec2::new(-1.0, -0.5))
}

#[test]
fn square_cloud_counts_and_labels() {
    let d = unit_square();
    let c = generate_point_cloud(&d, 0.1, 0.39).unwrap();
    let inside = c.labels.iter().filter(|l| **l != PointLabel::CollarDirichlet).count();
    assert!(inside >= 100, "{inside} points");
    for (p, l) in c.points.iter().zip(&c.labels) {
        assert!(d.omega.signed_distance(*p) <= 0.39 + 1e-12);
        match l {
            PointLabel::CollarInterface => assert!(d.interface_distance(*p).0 <= 0.39 + 1e-12),
            PointLabel::Interior => assert!(d.interface_distance(*p).0 > 0.39),
            PointLabel::CollarDirichlet => assert!(!d.omega.contains(*p, -1e-12) || d.dirichlet_points.contains(p)),
        }
    }
}

#[test]
fn square_collar_size_matches_lattice_count() {
    let h = 0.05;
    let c = generate_point_cloud(&unit_square(), h, 3.9 * h).unwrap();
    let n = c.indices_with(PointLabel::CollarInterface).len() as f64;
    let expect = 20.0 * (3.9f64).ceil();
    assert!((n - expect).abs() <= 0.25 * expect, "{n} collar points vs {expect}");
}

#[test]
fn fill_distance_is_recorded() {
    for d in [unit_square(), unit_disk(), cross()] {
        let c = generate_point_cloud(&d, 0.05, 0.195).unwrap();
        assert!((c.fill_distance - 0.05).abs() <= 0.005);
        assert!((fill_distance(&c.points, 0.05) - c.fill_distance).abs() < 1e-15);
    }
}

#[test]
fn small_horizon_is_rejected() {
    assert!(generate_point_cloud(&unit_square(), 0.1, 0.15).is_err());
    let local = DomainSpec::rectangle_local(Vec2::new(1.0, 0.0), Vec2::new(2.0, 1.0));
    assert!(generate_point_cloud(&local, 0.1, 0.39).is_err());
}

#[test]
fn flat_projection() {
    let p = project_to_interface(Vec2::new(0.9, 0.5), &unit_square(), 0.39).unwrap();
    assert!((p.xbar - Vec2::new(1.0, 0.5)).norm() < 1e-14);
    assert!((p.s - 0.1).abs() < 1e-14);
    assert!((p.normal - Vec2::new(1.0, 0.0)).norm() < 1e-14);
    assert_eq!(p.kappa, 0.0);
    assert!(p.corner.is_none());
}

#[test]
fn disk_projection() {
    let p = project_to_interface(Vec2::new(0.95, 0.0), &unit_disk(), 0.2).unwrap();
    assert!((p.xbar - Vec2::new(1.0, 0.0)).norm() < 1e-14);
    assert!((p.s - 0.05).abs() < 1e-14);
    assert!((p.kappa - 1.0).abs() < 1e-14);
    // the contour is the concentric circle through x
    for l in [-0.2, -0.05, 0.1, 0.2] {
        assert!((contour_point(&p, l).norm() - 0.95).abs() < 1e-14);
    }
    assert!((contour_point(&p, 0.0) - p.x).norm() < 1e-14);
}

#[test]
fn beyond_horizon_is_an_error() {
    assert!(project_to_interface(Vec2::new(0.3, 0.5), &unit_square(), 0.39).is_err());
    assert!(project_to_interface(Vec2::new(1.3, 0.5), &unit_square(), 0.39).is_err());
}

#[test]
fn right_angle_corner_frames() {
    let e = 0.02 / 2f64.sqrt();
    let x = Vec2::new(0.5 - e, 1.0 - e);
    let p = project_to_interface(x, &cross(), 0.175).unwrap();
    let c = p.corner.expect("corner data");
    assert!((c.theta - PI / 2.0).abs() < 1e-12);
    assert!(!c.concave);
    assert!((c.corner - Vec2::new(0.5, 1.0)).norm() < 1e-14);
    let bars = [c.xbar1, c.xbar2];
    assert!(bars.iter().any(|b| (b - Vec2::new(0.5 - e, 1.0)).norm() < 1e-14));
    assert!(bars.iter().any(|b| (b - Vec2::new(0.5, 1.0 - e)).norm() < 1e-14));
    for z in [Vec2::new(0.1, -0.03), Vec2::new(-0.07, 0.2)] {
        let (d1, d2) = c.d_coords(z);
        assert!((c.n1 * d1 + c.n2 * d2 - z).norm() < 1e-14);
    }
}

#[test]
fn concave_corner_is_flagged() {
    let x = Vec2::new(0.45, 0.45);
    let p = project_to_interface(x, &cross(), 0.175).unwrap();
    let c = p.corner.expect("corner data");
    assert!(c.concave);
    assert!((c.theta - 1.5 * PI).abs() < 1e-12);
}

#[test]
fn rectangle_mesh_area_and_tags() {
    let d = DomainSpec::rectangle_local(Vec2::new(1.0, 0.0), Vec2::new(2.0, 1.0));
    let m = generate_mesh(&d, 0.1).unwrap();
    assert!((m.total_area() - 1.0).abs() < 1e-12);
    let iface = m.indices_with(NodeTag::Interface);
    // the two endpoints sit on the outer boundary and carry the Dirichlet tag
    assert_eq!(iface.len(), 9);
    for y in [0.0, 1.0] {
        let k = m.nodes.iter().position(|p| (p - Vec2::new(1.0, y)).norm() < 1e-14).unwrap();
        assert_eq!(m.tags[k], NodeTag::Dirichlet);
    }
    assert!(iface.iter().all(|&i| (m.nodes[i].x - 1.0).abs() < 1e-14));
    assert!((0..m.triangles.len()).all(|t| m.area(t) > 0.0));
}

#[test]
fn complement_mesh_snaps_to_circle() {
    let inner = unit_disk();
    let d = DomainSpec::complement_local(Vec2::new(-2.0, -2.0), Vec2::new(2.0, 2.0), &inner);
    let m = generate_mesh(&d, 0.1).unwrap();
    for i in m.indices_with(NodeTag::Interface) {
        assert!((m.nodes[i].norm() - 1.0).abs() < 1e-12);
    }
    // inscribed polygon: area exceeds 16 − π by O(h²)
    let a = m.total_area();
    assert!(a > 16.0 - PI && a < 16.0 - PI + 0.02, "area {a}");
}

#[test]
fn mesh_round_trip() {
    let d = DomainSpec::rectangle_local(Vec2::new(1.0, 0.0), Vec2::new(2.0, 1.0));
    let m = generate_mesh(&d, 0.25).unwrap();
    let mut buf = Vec::new();
    write_mesh(&m, &mut buf).unwrap();
    let back = read_mesh(buf.as_slice(), 0.25).unwrap();
    assert_eq!(back.triangles, m.triangles);
    assert_eq!(back.tags, m.tags);
    assert!(back.nodes.iter().zip(&m.nodes).all(|(a, b)| (a - b).norm() == 0.0));
}

proptest! {
    #[test]
    fn square_projection_invariants(x in 0.62f64..1.0, y in 0.0f64..1.0) {
        let p = project_to_interface(Vec2::new(x, y), &unit_square(), 0.39).unwrap();
        prop_assert!((p.xbar - p.x - p.normal * p.s).norm() <= 1e-12 * (1.0 + p.x.norm()));
        prop_assert!((p.normal.norm() - 1.0).abs() < 1e-14);
        prop_assert!((p.tangent.norm() - 1.0).abs() < 1e-14);
        prop_assert!(p.normal.dot(&p.tangent).abs() < 1e-14);
    }

    #[test]
    fn disk_projection_invariants(r in 0.81f64..0.999, phi in 0.0f64..(2.0 * PI)) {
        let x = Vec2::new(r * phi.cos(), r * phi.sin());
        let p = project_to_interface(x, &unit_disk(), 0.2).unwrap();
        prop_assert!((p.xbar - p.x - p.normal * p.s).norm() <= 1e-12);
        prop_assert!((p.xbar.norm() - 1.0).abs() < 1e-14);
        prop_assert!((p.s - (1.0 - r)).abs() < 1e-14);
        prop_assert!(p.normal.dot(&p.tangent).abs() < 1e-14);
        prop_assert!((p.kappa - 1.0).abs() < 1e-14);
    }

    #[test]
    fn disk_signed_distance_is_exact(x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let s = Shape::Disk { center: Vec2::zeros(), radius: 1.0 };
        let p = Vec2::new(x, y);
        prop_assert!((s.signed_distance(p) - (p.norm() - 1.0)).abs() < 1e-14);
    }
}
