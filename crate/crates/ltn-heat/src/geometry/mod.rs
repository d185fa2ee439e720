//! Test domains, point clouds, boundary projections and local meshes.

mod cloud;
mod grid;
mod mesh;
mod projection;
mod shape;

pub use cloud::{fill_distance, generate_point_cloud, PointCloud, PointLabel};
pub use grid::SpatialGrid;
pub use mesh::{generate_mesh, read_mesh, write_mesh, NodeTag, TriMesh};
pub use projection::{contour_point, project_to_interface, BoundaryProjection, ContourPath, CornerProjection};
pub use shape::{closest_on_segment, point_segment_distance, wrap_angle, Shape};

use crate::error::{Error, Result};
use serde::Deserialize;
use std::f64::consts::PI;

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Mat2 = nalgebra::Matrix2<f64>;

pub fn cross2(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// `n` rotated clockwise by a right angle.
pub fn rotate_cw(n: Vec2) -> Vec2 {
    Vec2::new(n.y, -n.x)
}

/// `n` rotated counter-clockwise by a right angle.
pub fn rotate_ccw(n: Vec2) -> Vec2 {
    Vec2::new(-n.y, n.x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Nonlocal,
    Local,
}

/// Piece of an interface or Dirichlet boundary. Normals point out of the
/// nonlocal subdomain.
#[derive(Debug, Clone, PartialEq)]
pub enum CurvePiece {
    /// Traversed from `a` to `b`; the exterior normal is the direction
    /// rotated counter-clockwise.
    Segment { a: Vec2, b: Vec2 },
    /// Full circle with outward radial normal.
    Circle { center: Vec2, radius: f64 },
}

impl CurvePiece {
    /// Closest point on the piece.
    pub fn closest(&self, x: Vec2) -> Vec2 {
        match self {
            CurvePiece::Segment { a, b } => closest_on_segment(x, *a, *b).0,
            CurvePiece::Circle { center, radius } => {
                let w = x - center;
                let r = w.norm();
                if r == 0.0 {
                    center + Vec2::new(*radius, 0.0)
                } else {
                    center + w * (radius / r)
                }
            }
        }
    }

    pub fn distance(&self, x: Vec2) -> f64 {
        (x - self.closest(x)).norm()
    }

    /// Exterior unit normal at a point of the piece.
    pub fn normal_at(&self, p: Vec2) -> Vec2 {
        match self {
            CurvePiece::Segment { a, b } => rotate_ccw((b - a).normalize()),
            CurvePiece::Circle { center, .. } => (p - center).normalize(),
        }
    }

    pub fn curvature(&self) -> f64 {
        match self {
            CurvePiece::Segment { .. } => 0.0,
            CurvePiece::Circle { radius, .. } => 1.0 / radius,
        }
    }
}

/// Interface corner joining `pieces[first]` (ending at `point`) and
/// `pieces[second]` (starting at `point`).
#[derive(Debug, Clone, PartialEq)]
pub struct Corner {
    pub point: Vec2,
    pub theta: f64,
    pub first: usize,
    pub second: usize,
}

impl Corner {
    pub fn is_concave(&self) -> bool {
        self.theta > PI
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Square,
    Disk,
    Cross,
    Rectangle,
}

/// A nonlocal or local test domain.
///
/// For a nonlocal domain `omega` is the closed subdomain and `data_region`
/// is the region whose complement inside a horizon ball counts as exterior.
/// For a local domain the subdomain is `omega` minus the interior of `hole`.
#[derive(Debug, Clone)]
pub struct DomainSpec {
    pub name: String,
    pub kind: DomainKind,
    pub role: Role,
    pub omega: Shape,
    pub hole: Option<Shape>,
    pub data_region: Shape,
    pub interface: Vec<CurvePiece>,
    pub dirichlet: Vec<CurvePiece>,
    pub dirichlet_points: Vec<Vec2>,
    pub corners: Vec<Corner>,
}

fn rect_cw(lo: Vec2, hi: Vec2) -> Vec<Vec2> {
    vec![Vec2::new(lo.x, lo.y), Vec2::new(lo.x, hi.y), Vec2::new(hi.x, hi.y), Vec2::new(hi.x, lo.y)]
}

fn seg(a: Vec2, b: Vec2) -> CurvePiece {
    CurvePiece::Segment { a, b }
}

/// Clockwise cross polygon: arms of half-width `a` reaching to `l`.
pub fn cross_vertices(a: f64, l: f64) -> Vec<Vec2> {
    [(-a, l), (a, l), (a, a), (l, a), (l, -a), (a, -a), (a, -l), (-a, -l), (-a, -a), (-l, -a), (-l, a), (-a, a)]
        .iter()
        .map(|&(x, y)| Vec2::new(x, y))
        .collect()
}

/// Interior angles of a clockwise polygon, one per vertex.
pub fn polygon_corners(v: &[Vec2]) -> Vec<Corner> {
    let n = v.len();
    (0..n)
        .map(|k| {
            let prev = v[(k + n - 1) % n];
            let next = v[(k + 1) % n];
            let din = v[k] - prev;
            let dout = next - v[k];
            let turn = cross2(din, dout).atan2(din.dot(&dout));
            Corner { point: v[k], theta: PI + turn, first: (k + n - 1) % n, second: k }
        })
        .filter(|c| (c.theta - PI).abs() > 1e-12)
        .collect()
}

fn polygon_pieces(v: &[Vec2]) -> Vec<CurvePiece> {
    let n = v.len();
    (0..n).map(|k| seg(v[k], v[(k + 1) % n])).collect()
}

impl DomainSpec {
    /// Nonlocal square `[lo, hi]²`-box whose right side is the interface and
    /// whose other three sides carry a Dirichlet collar.
    pub fn square_nonlocal(lo: Vec2, hi: Vec2) -> Self {
        let v = rect_cw(lo, hi);
        DomainSpec {
            name: "square".into(),
            kind: DomainKind::Square,
            role: Role::Nonlocal,
            omega: Shape::polygon(v.clone()),
            hole: None,
            data_region: Shape::HalfPlane { point: Vec2::new(hi.x, 0.0), normal: Vec2::new(1.0, 0.0) },
            interface: vec![seg(v[2], v[3])],
            dirichlet: vec![seg(v[3], v[0]), seg(v[0], v[1]), seg(v[1], v[2])],
            dirichlet_points: Vec::new(),
            corners: Vec::new(),
        }
    }

    /// Nonlocal disk with the whole circle as interface and one pinned
    /// Dirichlet point.
    pub fn disk_nonlocal(center: Vec2, radius: f64, pinned: Vec2) -> Self {
        let shape = Shape::Disk { center, radius };
        DomainSpec {
            name: "disk".into(),
            kind: DomainKind::Disk,
            role: Role::Nonlocal,
            omega: shape.clone(),
            hole: None,
            data_region: shape,
            interface: vec![CurvePiece::Circle { center, radius }],
            dirichlet: Vec::new(),
            dirichlet_points: vec![pinned],
            corners: Vec::new(),
        }
    }

    /// Nonlocal cross with all twelve sides as interface and one pinned
    /// Dirichlet point.
    pub fn cross_nonlocal(half_width: f64, arm: f64, pinned: Vec2) -> Self {
        let v = cross_vertices(half_width, arm);
        let shape = Shape::polygon(v.clone());
        DomainSpec {
            name: "cross".into(),
            kind: DomainKind::Cross,
            role: Role::Nonlocal,
            omega: shape.clone(),
            hole: None,
            data_region: shape,
            interface: polygon_pieces(&v),
            dirichlet: Vec::new(),
            dirichlet_points: vec![pinned],
            corners: polygon_corners(&v),
        }
    }

    /// Local rectangle whose left side is the interface.
    pub fn rectangle_local(lo: Vec2, hi: Vec2) -> Self {
        let v = rect_cw(lo, hi);
        DomainSpec {
            name: "rectangle".into(),
            kind: DomainKind::Rectangle,
            role: Role::Local,
            omega: Shape::polygon(v.clone()),
            hole: None,
            data_region: Shape::polygon(v.clone()),
            // oriented so that the normal points into the local side
            interface: vec![seg(v[1], v[0])],
            dirichlet: vec![seg(v[1], v[2]), seg(v[2], v[3]), seg(v[3], v[0])],
            dirichlet_points: Vec::new(),
            corners: Vec::new(),
        }
    }

    /// Local square box with a nonlocal subdomain removed.
    pub fn complement_local(box_lo: Vec2, box_hi: Vec2, inner: &DomainSpec) -> Self {
        let v = rect_cw(box_lo, box_hi);
        DomainSpec {
            name: format!("{}-complement", inner.name),
            kind: DomainKind::Square,
            role: Role::Local,
            omega: Shape::polygon(v.clone()),
            hole: Some(inner.omega.clone()),
            data_region: Shape::polygon(v.clone()),
            interface: inner.interface.clone(),
            dirichlet: polygon_pieces(&v),
            dirichlet_points: Vec::new(),
            corners: inner.corners.clone(),
        }
    }

    /// Membership in the closed subdomain.
    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        if !self.omega.contains(p, tol) {
            return false;
        }
        match &self.hole {
            Some(h) => h.signed_distance(p) >= -tol,
            None => true,
        }
    }

    /// Distance to the interface and the index of the closest piece (lowest
    /// index on ties).
    pub fn interface_distance(&self, x: Vec2) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for (k, piece) in self.interface.iter().enumerate() {
            let d = piece.distance(x);
            if d < best.0 - 1e-14 {
                best = (d, k);
            }
        }
        best
    }

    pub fn dirichlet_distance(&self, x: Vec2) -> f64 {
        self.dirichlet.iter().map(|p| p.distance(x)).fold(f64::INFINITY, f64::min)
    }

    /// Smallest geometric feature (arm half-width, radius, side length).
    pub fn min_feature_size(&self) -> f64 {
        match self.kind {
            DomainKind::Disk => match self.omega {
                Shape::Disk { radius, .. } => radius,
                _ => f64::INFINITY,
            },
            _ => {
                let shape = self.hole.as_ref().unwrap_or(&self.omega);
                shape
                    .edges()
                    .iter()
                    .map(|(a, b)| (b - a).norm())
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Parses a key-value text config such as
    /// `shape = "disk"`, `role = "nonlocal"`, `radius = 1.0`.
    pub fn from_config(text: &str) -> Result<Self> {
        let cfg: DomainConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.build()
    }
}

#[derive(Debug, Deserialize)]
struct DomainConfig {
    shape: String,
    #[serde(default = "default_role")]
    role: String,
    lo: Option<[f64; 2]>,
    hi: Option<[f64; 2]>,
    center: Option<[f64; 2]>,
    radius: Option<f64>,
    half_width: Option<f64>,
    arm: Option<f64>,
    pinned: Option<[f64; 2]>,
    box_half: Option<f64>,
}

fn default_role() -> String {
    "nonlocal".into()
}

impl DomainConfig {
    fn build(&self) -> Result<DomainSpec> {
        let v = |a: Option<[f64; 2]>, d: [f64; 2]| {
            let a = a.unwrap_or(d);
            Vec2::new(a[0], a[1])
        };
        let nonlocal = match self.shape.as_str() {
            "square" | "rectangle" => DomainSpec::square_nonlocal(v(self.lo, [0.0, 0.0]), v(self.hi, [1.0, 1.0])),
            "disk" => DomainSpec::disk_nonlocal(
                v(self.center, [0.0, 0.0]),
                self.radius.unwrap_or(1.0),
                v(self.pinned, [0.0, -1.0]),
            ),
            "cross" => DomainSpec::cross_nonlocal(
                self.half_width.unwrap_or(0.5),
                self.arm.unwrap_or(1.0),
                v(self.pinned, [-1.0, -0.5]),
            ),
            other => return Err(Error::Config(format!("unknown shape {other:?}"))),
        };
        match self.role.as_str() {
            "nonlocal" => Ok(nonlocal),
            "local" => {
                if matches!(self.shape.as_str(), "square" | "rectangle") {
                    Ok(DomainSpec::rectangle_local(v(self.lo, [1.0, 0.0]), v(self.hi, [2.0, 1.0])))
                } else {
                    let b = self.box_half.unwrap_or(2.0);
                    Ok(DomainSpec::complement_local(Vec2::new(-b, -b), Vec2::new(b, b), &nonlocal))
                }
            }
            other => Err(Error::Config(format!("unknown role {other:?}"))),
        }
    }
}
