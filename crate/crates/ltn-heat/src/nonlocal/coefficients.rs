use crate::error::Result;
use crate::geometry::{BoundaryProjection, CornerProjection, Mat2, Shape, Vec2};
use crate::kernels::{raw_moments, KernelSpec, RawMoments, Region};
use serde::Serialize;

/// Collar correction coefficients of a point near a smooth part of the
/// interface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollarCoefficients {
    /// Mass scaling.
    pub q: f64,
    /// Weight of the boundary data (includes the curvature correction).
    pub v: f64,
    /// Weight of the tangential (contour) diffusion.
    pub m: f64,
    pub kappa: f64,
}

/// Corner variant. `qc`, `d1`, `d2` are the right-angle style summary
/// quantities; the row itself uses the general tensor form (`q`, `k`,
/// `omega`, `v`), which reduces to them when the sides are orthogonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CornerCoefficients {
    pub theta: f64,
    pub d1: f64,
    pub d2: f64,
    pub qc: f64,
    /// Mass scaling used in the row.
    pub q: f64,
    /// Coefficient of the second tangential derivative along the reference side.
    pub k: f64,
    /// Coefficient of the mixed normal–tangential derivative.
    pub omega: f64,
    /// Weights of the data on the two sides (`∫J d₁`, `∫J d₂`).
    pub v: [f64; 2],
    /// 0 for the first side, 1 for the second.
    pub reference: usize,
}

/// Exterior moments: the part of the horizon ball outside the data region.
pub fn exterior_moments(kernel: &KernelSpec, x: Vec2, data_region: &Shape) -> Result<RawMoments> {
    raw_moments(kernel, x, Region::Outside(data_region))
}

/// Mass, data and contour coefficients for a point whose projection lies on
/// a smooth interface piece.
pub fn compute_collar_coefficients(proj: &BoundaryProjection, kernel: &KernelSpec, data_region: &Shape) -> Result<CollarCoefficients> {
    let mu = exterior_moments(kernel, proj.x, data_region)?;
    Ok(collar_from_moments(proj, &mu))
}

pub fn collar_from_moments(proj: &BoundaryProjection, mu: &RawMoments) -> CollarCoefficients {
    let n = proj.normal;
    let p = proj.tangent;
    let a = n.dot(&mu.m1);
    let nn = n.dot(&(mu.m2 * n));
    let pp = p.dot(&(mu.m2 * p));
    let big_a = 0.5 * nn - proj.s * a;
    let big_b = 0.5 * pp;
    let q = 1.0 - 2.0 * big_a;
    let m = 2.0 * (big_b - big_a);
    let v = 2.0 * a + m * proj.kappa;
    CollarCoefficients { q, v, m, kappa: proj.kappa }
}

fn inner(a: &Mat2, b: &Mat2) -> f64 {
    a.component_mul(b).sum()
}

fn sym_outer(a: Vec2, b: Vec2) -> Mat2 {
    (a * b.transpose() + b * a.transpose()) * 0.5
}

/// Corner coefficients for a point within the horizon of two sides.
pub fn compute_corner_coefficients(x: Vec2, cp: &CornerProjection, kernel: &KernelSpec, data_region: &Shape) -> Result<CornerCoefficients> {
    let mu = exterior_moments(kernel, x, data_region)?;
    Ok(corner_from_moments(x, cp, &mu))
}

pub fn corner_from_moments(x: Vec2, cp: &CornerProjection, mu: &RawMoments) -> CornerCoefficients {
    let (r1, r2) = cp.d_rows();
    let a = [r1.dot(&mu.m1), r2.dot(&mu.m1)];
    let dd = |u: Vec2, w: Vec2| u.dot(&(mu.m2 * w));
    let e = [x - cp.xbar1, x - cp.xbar2];
    let n = [cp.n1, cp.n2];
    let p = [cp.p1, cp.p2];
    let d1 = dd(r1, r1) + 2.0 * e[0].dot(&n[0]) * a[0];
    let d2 = dd(r2, r2) + 2.0 * e[1].dot(&n[1]) * a[1];
    let qc = 1.0 - d1 + cp.theta.cos() * dd(r1, r2);
    let s = sym_outer(e[0], n[0]) * a[0] + sym_outer(e[1], n[1]) * a[1] + mu.m2 * 0.5;
    let r = if d1 >= d2 { 0 } else { 1 };
    let big_n = n[r] * n[r].transpose();
    let big_t = p[r] * p[r].transpose();
    let big_p = n[r] * p[r].transpose() + p[r] * n[r].transpose();
    let sn = inner(&big_n, &s);
    CornerCoefficients {
        theta: cp.theta,
        d1,
        d2,
        qc,
        q: 1.0 - 2.0 * sn,
        k: inner(&big_t, &s) - sn,
        omega: inner(&big_p, &s),
        v: a,
        reference: r,
    }
}
