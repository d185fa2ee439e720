//! Radial interaction kernels, the 1D contour kernel, and kernel moments over
//! balls clipped by analytic regions.

use crate::error::{Error, Result};
use crate::geometry::{Mat2, Shape, Vec2};
use crate::quadrature;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    /// `4/(πδ⁴)` on the ball.
    J1Constant,
    /// `3/(πδ³r)` on the ball.
    J2InverseR,
}

/// A radial kernel rescaled to horizon `delta`, normalized so that
/// `∫ J(|z|)|z|² dz = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub delta: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Kernel(format!("horizon must be positive, got {delta}")));
        }
        let spec = KernelSpec { family, delta };
        let norm = 2.0 * PI * spec.radial(2, 0.0, delta);
        if (norm - 2.0).abs() > 1e-10 {
            return Err(Error::Kernel(format!("second moment {norm} differs from 2")));
        }
        Ok(spec)
    }

    fn constant(&self) -> f64 {
        let d = self.delta;
        match self.family {
            KernelFamily::J1Constant => 4.0 / (PI * d.powi(4)),
            KernelFamily::J2InverseR => 3.0 / (PI * d.powi(3)),
        }
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Kernel(format!("negative distance {r}")));
        }
        if r > self.delta {
            return Ok(0.0);
        }
        match self.family {
            KernelFamily::J1Constant => Ok(self.constant()),
            KernelFamily::J2InverseR if r == 0.0 => {
                Err(Error::Kernel("the inverse-distance kernel is singular at r = 0".into()))
            }
            KernelFamily::J2InverseR => Ok(self.constant() / r),
        }
    }

    /// `∫_{r0}^{r1} J(r) r^{k+1} dr`, clamped to the support.
    pub fn radial(&self, k: i32, r0: f64, r1: f64) -> f64 {
        let r1 = r1.min(self.delta);
        let r0 = r0.max(0.0);
        if r1 <= r0 {
            return 0.0;
        }
        let c = self.constant();
        match self.family {
            KernelFamily::J1Constant => {
                let p = k + 2;
                c * (r1.powi(p) - r0.powi(p)) / p as f64
            }
            KernelFamily::J2InverseR => {
                let p = k + 1;
                c * (r1.powi(p) - r0.powi(p)) / p as f64
            }
        }
    }

    /// Moments over the full ball.
    pub fn full_ball(&self) -> RawMoments {
        let m0 = 2.0 * PI * self.radial(0, 0.0, self.delta);
        let m2 = PI * self.radial(2, 0.0, self.delta);
        RawMoments { m0, m1: Vec2::zeros(), m2: Mat2::identity() * m2 }
    }
}

pub fn eval_j(spec: &KernelSpec, r: f64) -> Result<f64> {
    spec.eval(r)
}

/// The 1D contour kernel `H_δ(r) = δ⁻³ H(r/δ)` with constant profile
/// `H = 3/2` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourKernelSpec {
    pub delta: f64,
}

impl ContourKernelSpec {
    pub const PROFILE: f64 = 1.5;

    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Kernel(format!("horizon must be positive, got {delta}")));
        }
        Ok(ContourKernelSpec { delta })
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r.abs() <= self.delta {
            Self::PROFILE / self.delta.powi(3)
        } else {
            0.0
        }
    }

    /// `∫_{-1}^{1} H(|z|) dz` for the unscaled profile.
    pub fn c_h(&self) -> f64 {
        2.0 * Self::PROFILE
    }

    /// `∫_{-L}^{L} H_δ(|l|) l^k dl` for even `k`, `L ≤ δ`.
    pub fn moment(&self, k: i32, half_length: f64) -> f64 {
        if k % 2 == 1 {
            return 0.0;
        }
        let l = half_length.min(self.delta);
        2.0 * Self::PROFILE / self.delta.powi(3) * l.powi(k + 1) / (k + 1) as f64
    }
}

pub fn eval_h(spec: &ContourKernelSpec, r: f64) -> f64 {
    spec.eval(r)
}

/// The part of `B(x, δ)` to integrate over.
#[derive(Debug, Clone, Copy)]
pub enum Region<'a> {
    Ball,
    Inside(&'a Shape),
    Outside(&'a Shape),
}

/// Raw kernel moments `∫J`, `∫J z`, `∫J z zᵀ` with `z = y − x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawMoments {
    pub m0: f64,
    pub m1: Vec2,
    pub m2: Mat2,
}

impl RawMoments {
    pub fn zero() -> Self {
        RawMoments { m0: 0.0, m1: Vec2::zeros(), m2: Mat2::zeros() }
    }

    pub fn eval(&self, sel: &MomentSelector) -> f64 {
        sel.constant * self.m0 + sel.linear.dot(&self.m1) + (sel.quadratic.component_mul(&self.m2)).sum()
    }

    pub fn sub(&self, other: &RawMoments) -> RawMoments {
        RawMoments { m0: self.m0 - other.m0, m1: self.m1 - other.m1, m2: self.m2 - other.m2 }
    }
}

/// Quadratic integrand `c + a·z + zᵀQz` in `z = y − x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSelector {
    pub constant: f64,
    pub linear: Vec2,
    pub quadratic: Mat2,
}

impl MomentSelector {
    pub fn one() -> Self {
        MomentSelector { constant: 1.0, linear: Vec2::zeros(), quadratic: Mat2::zeros() }
    }

    /// `a·z`.
    pub fn linear(a: Vec2) -> Self {
        MomentSelector { constant: 0.0, linear: a, quadratic: Mat2::zeros() }
    }

    /// `(a·z + c)²`.
    pub fn affine_square(a: Vec2, c: f64) -> Self {
        MomentSelector { constant: c * c, linear: a * (2.0 * c), quadratic: a * a.transpose() }
    }

    /// `(a·z)(b·z)`.
    pub fn product(a: Vec2, b: Vec2) -> Self {
        let q = (a * b.transpose() + b * a.transpose()) * 0.5;
        MomentSelector { constant: 0.0, linear: Vec2::zeros(), quadratic: q }
    }

    /// `|z|²`.
    pub fn norm_squared() -> Self {
        MomentSelector { constant: 0.0, linear: Vec2::zeros(), quadratic: Mat2::identity() }
    }

    pub fn scaled(self, s: f64) -> Self {
        MomentSelector { constant: self.constant * s, linear: self.linear * s, quadratic: self.quadratic * s }
    }

    pub fn plus(self, o: MomentSelector) -> Self {
        MomentSelector {
            constant: self.constant + o.constant,
            linear: self.linear + o.linear,
            quadratic: self.quadratic + o.quadratic,
        }
    }
}

fn ray_intervals(region: &Region, x: Vec2, e: Vec2, delta: f64, out: &mut Vec<(f64, f64)>) {
    out.clear();
    let (shape, want_inside) = match region {
        Region::Ball => {
            out.push((0.0, delta));
            return;
        }
        Region::Inside(s) => (*s, true),
        Region::Outside(s) => (*s, false),
    };
    let hits = shape.ray_hits(x, e, delta);
    let mut lo = 0.0;
    for t in hits.into_iter().chain(std::iter::once(delta)) {
        if t - lo > 1e-15 * delta {
            let mid = x + e * (0.5 * (lo + t));
            let inside = shape.signed_distance(mid) <= 0.0;
            if inside == want_inside {
                match out.last_mut() {
                    Some(last) if (last.1 - lo).abs() <= 1e-15 * delta => last.1 = t,
                    _ => out.push((lo, t)),
                }
            }
        }
        lo = t;
    }
}

/// Raw moments of `J` over the chosen part of `B(x, δ)` by adaptive polar
/// Gauss–Legendre quadrature with analytic radial integration.
pub fn raw_moments(spec: &KernelSpec, x: Vec2, region: Region) -> Result<RawMoments> {
    let delta = spec.delta;
    let shape = match region {
        Region::Ball => return Ok(spec.full_ball()),
        Region::Inside(s) | Region::Outside(s) => s,
    };
    let sd = shape.signed_distance(x);
    let fully_inside = sd <= -delta;
    let fully_outside = sd >= delta;
    match region {
        Region::Inside(_) if fully_inside => return Ok(spec.full_ball()),
        Region::Outside(_) if fully_inside => return Ok(RawMoments::zero()),
        Region::Inside(_) if fully_outside => return Ok(RawMoments::zero()),
        Region::Outside(_) if fully_outside => return Ok(spec.full_ball()),
        _ => {}
    }

    let mut cuts: Vec<f64> = shape.critical_angles(x, delta).into_iter().map(crate::geometry::wrap_angle).collect();
    cuts.push(0.0);
    cuts.push(2.0 * PI);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);

    let mut buf = Vec::new();
    let mut integrand = |phi: f64| -> [f64; 6] {
        let e = Vec2::new(phi.cos(), phi.sin());
        ray_intervals(&region, x, e, delta, &mut buf);
        let (mut r0, mut r1, mut r2) = (0.0, 0.0, 0.0);
        for &(a, b) in &buf {
            r0 += spec.radial(0, a, b);
            r1 += spec.radial(1, a, b);
            r2 += spec.radial(2, a, b);
        }
        [r0, r1 * e.x, r1 * e.y, r2 * e.x * e.x, r2 * e.x * e.y, r2 * e.y * e.y]
    };
    let d = delta;
    let scale = [d * d, d, d, 1.0, 1.0, 1.0];
    let mut acc = [0.0; 6];
    let mut worst = 0.0f64;
    for w in cuts.windows(2) {
        if w[1] - w[0] < 1e-15 {
            continue;
        }
        let (v, err) = quadrature::adaptive(&mut integrand, w[0], w[1], &scale, 1e-13 * (w[1] - w[0]) / (2.0 * PI));
        worst = worst.max(err);
        for k in 0..6 {
            acc[k] += v[k];
        }
    }
    if worst > 1e-9 {
        return Err(Error::Quadrature { achieved: worst, wanted: 1e-9 });
    }
    Ok(RawMoments {
        m0: acc[0],
        m1: Vec2::new(acc[1], acc[2]),
        m2: Mat2::new(acc[3], acc[4], acc[4], acc[5]),
    })
}

/// `∫_{region} J(|y − x|) m(y − x) dy` for a quadratic moment selector.
pub fn clipped_moment(spec: &KernelSpec, x: Vec2, region: Region, sel: &MomentSelector) -> Result<f64> {
    Ok(raw_moments(spec, x, region)?.eval(sel))
}
