use crate::coupler::CasePair;
use crate::error::{Error, Result};
use crate::geometry::{Mat2, Vec2};
use crate::nonlocal::ManufacturedCase;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Experiment identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentId {
    #[serde(rename = "bc-square")]
    BcSquare,
    #[serde(rename = "bc-circle")]
    BcCircle,
    #[serde(rename = "bc-cross")]
    BcCross,
    #[serde(rename = "ltn-line")]
    LtnLine,
    #[serde(rename = "ltn-circle")]
    LtnCircle,
    #[serde(rename = "ltn-cross")]
    LtnCross,
    #[serde(rename = "patch-linear")]
    PatchLinear,
    #[serde(rename = "patch-quadratic")]
    PatchQuadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Homogeneous,
    #[serde(rename = "heteroA")]
    HeteroA,
    #[serde(rename = "heteroB")]
    HeteroB,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 8] = [
        ExperimentId::BcSquare,
        ExperimentId::BcCircle,
        ExperimentId::BcCross,
        ExperimentId::LtnLine,
        ExperimentId::LtnCircle,
        ExperimentId::LtnCross,
        ExperimentId::PatchLinear,
        ExperimentId::PatchQuadratic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::BcSquare => "bc-square",
            ExperimentId::BcCircle => "bc-circle",
            ExperimentId::BcCross => "bc-cross",
            ExperimentId::LtnLine => "ltn-line",
            ExperimentId::LtnCircle => "ltn-circle",
            ExperimentId::LtnCross => "ltn-cross",
            ExperimentId::PatchLinear => "patch-linear",
            ExperimentId::PatchQuadratic => "patch-quadratic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment id {s:?}")))
    }

    /// Standalone nonlocal experiments.
    pub fn is_boundary_test(self) -> bool {
        matches!(self, ExperimentId::BcSquare | ExperimentId::BcCircle | ExperimentId::BcCross)
    }

    pub fn variants(self) -> &'static [Variant] {
        match self {
            ExperimentId::LtnLine | ExperimentId::LtnCircle => &[Variant::Homogeneous, Variant::HeteroA, Variant::HeteroB],
            ExperimentId::LtnCross => &[Variant::Homogeneous, Variant::HeteroA],
            _ => &[Variant::Homogeneous],
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Homogeneous => "homogeneous",
            Variant::HeteroA => "heteroA",
            Variant::HeteroB => "heteroB",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "homogeneous" => Ok(Variant::Homogeneous),
            "heteroA" | "hetero" => Ok(Variant::HeteroA),
            "heteroB" => Ok(Variant::HeteroB),
            _ => Err(Error::Config(format!("unknown variant {s:?}"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

fn sc(x: Vec2) -> f64 {
    x.x.sin() * x.y.cos()
}

fn sc_grad(x: Vec2) -> Vec2 {
    Vec2::new(x.x.cos() * x.y.cos(), -x.x.sin() * x.y.sin())
}

fn sc_hess(x: Vec2) -> Mat2 {
    let (s, c) = (x.x.sin() * x.y.cos(), x.x.cos() * x.y.sin());
    Mat2::new(-s, -c, -c, -s)
}

// t·sin(x)cos(y)
fn lin_u(x: Vec2, t: f64) -> f64 {
    t * sc(x)
}
fn lin_ut(x: Vec2, _t: f64) -> f64 {
    sc(x)
}
fn lin_grad(x: Vec2, t: f64) -> Vec2 {
    sc_grad(x) * t
}
fn lin_hess(x: Vec2, t: f64) -> Mat2 {
    sc_hess(x) * t
}
fn lin_f1(x: Vec2, t: f64) -> f64 {
    (1.0 + 2.0 * t) * sc(x)
}
fn lin_f2(x: Vec2, t: f64) -> f64 {
    (1.0 + 4.0 * t) * sc(x)
}
fn lin_f10(x: Vec2, t: f64) -> f64 {
    (1.0 + 20.0 * t) * sc(x)
}

// t²·sin(x)cos(y)
fn sq_u(x: Vec2, t: f64) -> f64 {
    t * t * sc(x)
}
fn sq_ut(x: Vec2, t: f64) -> f64 {
    2.0 * t * sc(x)
}
fn sq_grad(x: Vec2, t: f64) -> Vec2 {
    sc_grad(x) * (t * t)
}
fn sq_hess(x: Vec2, t: f64) -> Mat2 {
    sc_hess(x) * (t * t)
}
fn sq_f1(x: Vec2, t: f64) -> f64 {
    (2.0 * t + 2.0 * t * t) * sc(x)
}
fn sq_f01(x: Vec2, t: f64) -> f64 {
    (2.0 * t + 0.2 * t * t) * sc(x)
}

// t·x⁴ and t(3x² − 2x)
fn quart_u(x: Vec2, t: f64) -> f64 {
    t * x.x.powi(4)
}
fn quart_ut(x: Vec2, _t: f64) -> f64 {
    x.x.powi(4)
}
fn quart_grad(x: Vec2, t: f64) -> Vec2 {
    Vec2::new(4.0 * t * x.x.powi(3), 0.0)
}
fn quart_hess(x: Vec2, t: f64) -> Mat2 {
    Mat2::new(12.0 * t * x.x * x.x, 0.0, 0.0, 0.0)
}
fn quart_f(x: Vec2, t: f64) -> f64 {
    x.x * x.x * (x.x * x.x - 12.0 * t)
}
fn poly_u(x: Vec2, t: f64) -> f64 {
    t * (3.0 * x.x * x.x - 2.0 * x.x)
}
fn poly_ut(x: Vec2, _t: f64) -> f64 {
    3.0 * x.x * x.x - 2.0 * x.x
}
fn poly_grad(x: Vec2, t: f64) -> Vec2 {
    Vec2::new(t * (6.0 * x.x - 2.0), 0.0)
}
fn poly_hess(_x: Vec2, t: f64) -> Mat2 {
    Mat2::new(6.0 * t, 0.0, 0.0, 0.0)
}
fn poly_f(x: Vec2, t: f64) -> f64 {
    3.0 * x.x * x.x - 2.0 * x.x - 12.0 * t
}

// t·r² and t(r⁴ + 1)/2
fn r2(x: Vec2) -> f64 {
    x.norm_squared()
}
fn rad_u(x: Vec2, t: f64) -> f64 {
    t * r2(x)
}
fn rad_ut(x: Vec2, _t: f64) -> f64 {
    r2(x)
}
fn rad_grad(x: Vec2, t: f64) -> Vec2 {
    x * (2.0 * t)
}
fn rad_hess(_x: Vec2, t: f64) -> Mat2 {
    Mat2::identity() * (2.0 * t)
}
fn rad_f(x: Vec2, t: f64) -> f64 {
    r2(x) - 4.0 * t
}
fn rad4_u(x: Vec2, t: f64) -> f64 {
    0.5 * t * (r2(x) * r2(x) + 1.0)
}
fn rad4_ut(x: Vec2, _t: f64) -> f64 {
    0.5 * (r2(x) * r2(x) + 1.0)
}
fn rad4_grad(x: Vec2, t: f64) -> Vec2 {
    x * (2.0 * t * r2(x))
}
fn rad4_hess(x: Vec2, t: f64) -> Mat2 {
    (Mat2::identity() * r2(x) + x * x.transpose() * 2.0) * (2.0 * t)
}
fn rad4_f(x: Vec2, t: f64) -> f64 {
    0.5 * (r2(x) * r2(x) + 1.0) - 80.0 * t * r2(x)
}

// steady patches
fn px_u(x: Vec2, _t: f64) -> f64 {
    x.x
}
fn zero(_x: Vec2, _t: f64) -> f64 {
    0.0
}
fn px_grad(_x: Vec2, _t: f64) -> Vec2 {
    Vec2::new(1.0, 0.0)
}
fn zero_hess(_x: Vec2, _t: f64) -> Mat2 {
    Mat2::zeros()
}
fn pxx_u(x: Vec2, _t: f64) -> f64 {
    x.x * x.x
}
fn pxx_grad(x: Vec2, _t: f64) -> Vec2 {
    Vec2::new(2.0 * x.x, 0.0)
}
fn pxx_hess(_x: Vec2, _t: f64) -> Mat2 {
    Mat2::new(2.0, 0.0, 0.0, 0.0)
}
fn minus_two(_x: Vec2, _t: f64) -> f64 {
    -2.0
}

const fn case(
    name: &'static str,
    alpha: f64,
    u: crate::nonlocal::ScalarField,
    u_t: crate::nonlocal::ScalarField,
    grad: crate::nonlocal::VectorField,
    hess: crate::nonlocal::TensorField,
    f: crate::nonlocal::ScalarField,
) -> ManufacturedCase {
    ManufacturedCase { name, alpha, u, u_t, grad, hess, f }
}

const SQ: ManufacturedCase = case("t^2 sin(x)cos(y)", 1.0, sq_u, sq_ut, sq_grad, sq_hess, sq_f1);
const LIN: ManufacturedCase = case("t sin(x)cos(y)", 1.0, lin_u, lin_ut, lin_grad, lin_hess, lin_f1);

/// Manufactured data of an experiment. For boundary tests both entries are
/// the nonlocal case.
pub fn registry_case(id: ExperimentId, variant: Variant) -> Result<CasePair> {
    use ExperimentId::*;
    use Variant::*;
    let pair = |nonlocal, local| Ok(CasePair { nonlocal, local });
    let bad = || Err(Error::Config(format!("experiment {id} has no {variant} setting")));
    match (id, variant) {
        (BcSquare | BcCircle | BcCross, Homogeneous) => pair(SQ, SQ),
        (PatchLinear, Homogeneous) => {
            let c = case("x", 1.0, px_u, zero, px_grad, zero_hess, zero);
            pair(c, c)
        }
        (PatchQuadratic, Homogeneous) => {
            let c = case("x^2", 1.0, pxx_u, zero, pxx_grad, pxx_hess, minus_two);
            pair(c, c)
        }
        (LtnLine | LtnCircle, Homogeneous) => pair(LIN, LIN),
        (LtnLine, HeteroA) => pair(LIN, case("t sin(x)cos(y)", 2.0, lin_u, lin_ut, lin_grad, lin_hess, lin_f2)),
        (LtnLine, HeteroB) => pair(
            case("t x^4", 1.0, quart_u, quart_ut, quart_grad, quart_hess, quart_f),
            case("t(3x^2-2x)", 2.0, poly_u, poly_ut, poly_grad, poly_hess, poly_f),
        ),
        (LtnCircle, HeteroA) => pair(LIN, case("t sin(x)cos(y)", 10.0, lin_u, lin_ut, lin_grad, lin_hess, lin_f10)),
        (LtnCircle, HeteroB) => pair(
            case("t r^2", 1.0, rad_u, rad_ut, rad_grad, rad_hess, rad_f),
            case("t(r^4+1)/2", 10.0, rad4_u, rad4_ut, rad4_grad, rad4_hess, rad4_f),
        ),
        (LtnCross, Homogeneous) => pair(SQ, SQ),
        (LtnCross, HeteroA) => pair(SQ, case("t^2 sin(x)cos(y)", 0.1, sq_u, sq_ut, sq_grad, sq_hess, sq_f01)),
        _ => bad(),
    }
}

/// Legacy form of the square boundary test's interface data, with a
/// `π·cos(1)cos(y)` second term. It is not consistent with the analytic
/// solution, whose data has `t²·cos(1)cos(y)` there; runs use the latter.
pub fn g_as_printed(x: Vec2, t: f64, beta: f64) -> f64 {
    beta * t * t * 1f64.sin() * x.y.cos() + std::f64::consts::PI * 1f64.cos() * x.y.cos()
}
