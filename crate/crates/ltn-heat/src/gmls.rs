//! Generalized moving least squares: weighted quadratic reconstruction over
//! stencils and the sparse rows it induces for integral and point functionals.

use crate::error::{Error, Result};
use crate::geometry::{BoundaryProjection, ContourPath, PointCloud, SpatialGrid, Vec2};
use crate::kernels::{raw_moments, ContourKernelSpec, KernelSpec, RawMoments, Region};
use crate::linalg::{DenseMatrix, PivotedQr};
use crate::quadrature::gl16;

/// Number of quadratic monomials in 2D.
pub const Q: usize = 6;

/// Scaled monomials `[1, a, b, a², ab, b²]`.
pub fn basis(a: f64, b: f64) -> [f64; Q] {
    [1.0, a, b, a * a, a * b, b * b]
}

/// Coefficient-space vector of a linear functional of the reconstruction.
pub type Functional = [f64; Q];

fn add(a: &mut Functional, b: &Functional, s: f64) {
    for k in 0..Q {
        a[k] += s * b[k];
    }
}

/// `(1 − r/δ)⁴` on `[0, δ]`.
pub fn weight(r: f64, radius: f64) -> f64 {
    if r >= radius {
        0.0
    } else {
        (1.0 - r / radius).powi(4)
    }
}

/// A weighted least-squares stencil around a center point.
#[derive(Debug, Clone)]
pub struct Stencil {
    /// Cloud index of the center, if it is a cloud point.
    pub center_index: Option<usize>,
    pub center: Vec2,
    pub neighbors: Vec<usize>,
    pub weights: Vec<f64>,
    pub radius: f64,
    pub condition: f64,
    coords: Vec<Vec2>,
    qr: PivotedQr,
}

impl Stencil {
    /// Builds a stencil from candidate points (already filtered by radius).
    pub fn new(center: Vec2, center_index: Option<usize>, points: &[Vec2], neighbors: Vec<usize>, radius: f64) -> Result<Self> {
        let fail = |reason: String| Error::Unisolvent {
            index: center_index.unwrap_or(usize::MAX),
            x: center.x,
            y: center.y,
            reason,
        };
        if neighbors.len() < Q {
            return Err(fail(format!("{} neighbors, need at least {Q}", neighbors.len())));
        }
        let coords: Vec<Vec2> = neighbors.iter().map(|&j| (points[j] - center) / radius).collect();
        let weights: Vec<f64> = neighbors.iter().map(|&j| weight((points[j] - center).norm(), radius)).collect();
        let mut a = DenseMatrix::zeros(neighbors.len(), Q);
        for (r, (z, w)) in coords.iter().zip(&weights).enumerate() {
            let row = basis(z.x, z.y);
            let sw = w.sqrt();
            for k in 0..Q {
                a[(r, k)] = sw * row[k];
            }
        }
        let qr = PivotedQr::new(&a).map_err(|e| fail(e.to_string()))?;
        let cond_a = qr.condition_estimate();
        if !cond_a.is_finite() || cond_a > 1e12 {
            return Err(fail(format!("weighted Gram matrix is singular (cond ≈ {cond_a:.3e})")));
        }
        let condition = cond_a * cond_a;
        if condition > 1e8 {
            log::warn!("GMLS Gram condition {condition:.3e} at ({}, {})", center.x, center.y);
        }
        Ok(Stencil { center_index, center, neighbors, weights, radius, condition, coords, qr })
    }

    /// Scaled coordinates of a physical point relative to the center.
    pub fn local(&self, x: Vec2) -> (f64, f64) {
        let z = (x - self.center) / self.radius;
        (z.x, z.y)
    }

    /// Nodal weights `w` such that `Σ w_j u_j = λ(R)` for the functional
    /// with coefficient-space vector `m`.
    pub fn apply(&self, m: &Functional) -> Result<Vec<(usize, f64)>> {
        let y = self.qr.solve_normal(m).map_err(|e| Error::Unisolvent {
            index: self.center_index.unwrap_or(usize::MAX),
            x: self.center.x,
            y: self.center.y,
            reason: e.to_string(),
        })?;
        Ok(self
            .neighbors
            .iter()
            .zip(self.coords.iter().zip(&self.weights))
            .map(|(&j, (z, w))| {
                let p = basis(z.x, z.y);
                (j, w * (0..Q).map(|k| p[k] * y[k]).sum::<f64>())
            })
            .collect())
    }

    /// Reconstruction coefficients from nodal values on the stencil.
    pub fn coefficients(&self, values: &[f64]) -> Result<Functional> {
        let mut c = [0.0; Q];
        for k in 0..Q {
            let mut e = [0.0; Q];
            e[k] = 1.0;
            c[k] = self.apply(&e)?.iter().map(|&(j, w)| w * values[j]).sum();
        }
        Ok(c)
    }

    pub fn value_functional(&self, x: Vec2) -> Functional {
        let (a, b) = self.local(x);
        basis(a, b)
    }

    /// Functionals for `∂/∂x` and `∂/∂y` at `x`.
    pub fn gradient_functionals(&self, x: Vec2) -> [Functional; 2] {
        let (a, b) = self.local(x);
        let s = 1.0 / self.radius;
        [[0.0, s, 0.0, 2.0 * a * s, b * s, 0.0], [0.0, 0.0, s, 0.0, a * s, 2.0 * b * s]]
    }

    /// Functionals for `∂xx`, `∂xy`, `∂yy` (constant for a quadratic basis).
    pub fn hessian_functionals(&self) -> [Functional; 3] {
        let s = 1.0 / (self.radius * self.radius);
        [
            [0.0, 0.0, 0.0, 2.0 * s, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, s, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 2.0 * s],
        ]
    }

    /// Directional derivative functional `d·∇` at `x`.
    pub fn directional_functional(&self, x: Vec2, d: Vec2) -> Functional {
        let [gx, gy] = self.gradient_functionals(x);
        let mut f = [0.0; Q];
        add(&mut f, &gx, d.x);
        add(&mut f, &gy, d.y);
        f
    }

    /// Second directional derivative functional `aᵀ∇²b`.
    pub fn second_functional(&self, a: Vec2, b: Vec2) -> Functional {
        let [hxx, hxy, hyy] = self.hessian_functionals();
        let mut f = [0.0; Q];
        add(&mut f, &hxx, a.x * b.x);
        add(&mut f, &hxy, a.x * b.y + a.y * b.x);
        add(&mut f, &hyy, a.y * b.y);
        f
    }

    /// `2∫ J(|y − x_c|)(R(y) − R(x_c)) dy` from precomputed raw moments about
    /// the stencil center.
    pub fn moment_functional(&self, mom: &RawMoments) -> Functional {
        let s = 1.0 / self.radius;
        let s2 = s * s;
        [
            0.0,
            2.0 * mom.m1.x * s,
            2.0 * mom.m1.y * s,
            2.0 * mom.m2[(0, 0)] * s2,
            2.0 * mom.m2[(0, 1)] * s2,
            2.0 * mom.m2[(1, 1)] * s2,
        ]
    }

    /// `2∫_{-δ}^{δ} H(|l|)(R(x_l) − R(x)) dl` along a contour, normalized so
    /// that it reproduces the second tangential derivative.
    pub fn contour_functional(&self, ck: &ContourKernelSpec, path: &ContourPath) -> Functional {
        let (xs, ws) = gl16();
        let d = ck.delta;
        let x0 = path.at(0.0);
        let r0 = self.value_functional(x0);
        let mut f = [0.0; Q];
        for (lo, hi) in [(-d, 0.0), (0.0, d)] {
            let (c, hw) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            for (t, w) in xs.iter().zip(ws) {
                let l: f64 = c + hw * t;
                let r = self.value_functional(path.at(l));
                let wt = 2.0 * w * hw * ck.eval(l.abs());
                for k in 0..Q {
                    f[k] += wt * (r[k] - r0[k]);
                }
            }
        }
        f
    }
}

/// Stencil over all cloud points with `|x_i − x_j| < δ`.
pub fn build_stencil(cloud: &PointCloud, grid: &SpatialGrid, i: usize, order: usize) -> Result<Stencil> {
    if order != 2 {
        return Err(Error::Config(format!("only quadratic reconstruction is supported, got order {order}")));
    }
    let x = cloud.points[i];
    let nb = grid.within(&cloud.points, x, cloud.delta);
    Stencil::new(x, Some(i), &cloud.points, nb, cloud.delta)
}

/// Row of `2∫_{B(x_i,δ) ∩ region} J(|y − x_i|)(u(y) − u(x_i)) dy`.
pub fn quadrature_row_interior(stencil: &Stencil, kernel: &KernelSpec, region: Region) -> Result<Vec<(usize, f64)>> {
    let mom = raw_moments(kernel, stencil.center, region)?;
    stencil.apply(&stencil.moment_functional(&mom))
}

/// Row approximating the second tangential derivative through the contour
/// integral `2∫ H(|l|)(u(x_l) − u(x)) dl`.
pub fn quadrature_row_contour(stencil: &Stencil, ck: &ContourKernelSpec, proj: &BoundaryProjection) -> Result<Vec<(usize, f64)>> {
    if proj.contour_truncated && proj.corner.is_none() {
        return Err(Error::Geometry(format!(
            "contour through ({}, {}) leaves the subdomain; use the corner formulation",
            proj.x.x, proj.x.y
        )));
    }
    stencil.apply(&stencil.contour_functional(ck, &proj.contour))
}

/// MLS value and gradient at `x` from samples within `radius`.
pub fn mls_evaluate(points: &[Vec2], values: &[f64], x: Vec2, order: usize, radius: f64) -> Result<(f64, Vec2)> {
    if order != 2 {
        return Err(Error::Config(format!("only quadratic reconstruction is supported, got order {order}")));
    }
    let r2 = radius * radius;
    let nb: Vec<usize> = (0..points.len()).filter(|&j| (points[j] - x).norm_squared() < r2).collect();
    let st = Stencil::new(x, None, points, nb, radius)?;
    let v = st.apply(&st.value_functional(x))?;
    let [gx, gy] = st.gradient_functionals(x);
    let dot = |w: Vec<(usize, f64)>| w.iter().map(|&(j, c)| c * values[j]).sum::<f64>();
    Ok((dot(v), Vec2::new(dot(st.apply(&gx)?), dot(st.apply(&gy)?))))
}
