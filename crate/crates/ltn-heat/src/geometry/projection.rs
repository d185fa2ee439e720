use super::{closest_on_segment, rotate_cw, CurvePiece, DomainSpec, Mat2, Vec2};
use crate::error::{Error, Result};

/// Level-set curve through a collar point, parallel to the interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContourPath {
    /// `x + l·direction`.
    Line { origin: Vec2, direction: Vec2 },
    /// Circle of `radius` about `center`, starting at polar angle `angle0`
    /// and advancing clockwise (along the tangent).
    Arc { center: Vec2, radius: f64, angle0: f64 },
}

impl ContourPath {
    pub fn at(&self, l: f64) -> Vec2 {
        match *self {
            ContourPath::Line { origin, direction } => origin + direction * l,
            ContourPath::Arc { center, radius, angle0 } => {
                let a = angle0 - l / radius;
                center + Vec2::new(a.cos(), a.sin()) * radius
            }
        }
    }
}

/// Geometry of a collar point near an interface corner.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerProjection {
    pub corner: Vec2,
    pub theta: f64,
    pub xbar1: Vec2,
    pub xbar2: Vec2,
    pub n1: Vec2,
    pub n2: Vec2,
    pub p1: Vec2,
    pub p2: Vec2,
    pub concave: bool,
    /// Interface piece indices of the two sides.
    pub pieces: (usize, usize),
}

impl CornerProjection {
    /// Matrix with columns `n1`, `n2`.
    pub fn basis(&self) -> Mat2 {
        Mat2::from_columns(&[self.n1, self.n2])
    }

    /// Coordinates `(d1, d2)` with `z = d1·n1 + d2·n2`.
    pub fn d_coords(&self, z: Vec2) -> (f64, f64) {
        let b = self.basis();
        let det = b.determinant();
        let d1 = (z.x * b[(1, 1)] - z.y * b[(0, 1)]) / det;
        let d2 = (b[(0, 0)] * z.y - b[(1, 0)] * z.x) / det;
        (d1, d2)
    }

    /// Row vectors `r1`, `r2` with `d_k = r_k·z`.
    pub fn d_rows(&self) -> (Vec2, Vec2) {
        let inv = self.basis().try_inverse().expect("corner normals are independent");
        (Vec2::new(inv[(0, 0)], inv[(0, 1)]), Vec2::new(inv[(1, 0)], inv[(1, 1)]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryProjection {
    pub x: Vec2,
    pub xbar: Vec2,
    pub s: f64,
    pub normal: Vec2,
    pub tangent: Vec2,
    pub kappa: f64,
    pub piece: usize,
    pub contour: ContourPath,
    /// The contour over `[-δ, δ]` leaves the data region.
    pub contour_truncated: bool,
    pub corner: Option<CornerProjection>,
}

/// Orthogonal projection onto the interface with frames, curvature, contour
/// and, within the influence of a corner, the corner frames.
pub fn project_to_interface(x: Vec2, domain: &DomainSpec, delta: f64) -> Result<BoundaryProjection> {
    if domain.interface.is_empty() {
        return Err(Error::Geometry(format!("domain {} has no interface", domain.name)));
    }
    if !domain.omega.contains(x, 1e-12) {
        return Err(Error::Geometry(format!("({}, {}) lies outside the subdomain", x.x, x.y)));
    }
    let (s, piece) = domain.interface_distance(x);
    if s > delta * (1.0 + 1e-12) {
        return Err(Error::Geometry(format!("({}, {}) is {s} from the interface, beyond the horizon", x.x, x.y)));
    }
    let ties: Vec<usize> = (0..domain.interface.len())
        .filter(|&k| k != piece && (domain.interface[k].distance(x) - s).abs() <= 1e-14)
        .collect();
    if !ties.is_empty() {
        log::debug!("projection tie at ({}, {}): pieces {piece} and {ties:?}; using {piece}", x.x, x.y);
    }
    let pc = &domain.interface[piece];
    let xbar = pc.closest(x);
    let normal = if s > 1e-14 { (xbar - x) / s } else { pc.normal_at(xbar) };
    let tangent = rotate_cw(normal);
    let (kappa, contour) = match pc {
        CurvePiece::Circle { center, radius } => {
            let w = x - center;
            (1.0 / radius, ContourPath::Arc { center: *center, radius: w.norm(), angle0: w.y.atan2(w.x) })
        }
        CurvePiece::Segment { .. } => (0.0, ContourPath::Line { origin: x, direction: tangent }),
    };
    let contour_truncated =
        (0..=16).any(|k| !domain.data_region.contains(contour.at(delta * (k as f64 / 8.0 - 1.0)), 1e-12));
    let corner = corner_projection(x, domain, delta);
    Ok(BoundaryProjection { x, xbar, s, normal, tangent, kappa, piece, contour, contour_truncated, corner })
}

fn corner_projection(x: Vec2, domain: &DomainSpec, delta: f64) -> Option<CornerProjection> {
    let mut best: Option<(f64, usize)> = None;
    for (k, c) in domain.corners.iter().enumerate() {
        let d1 = domain.interface[c.first].distance(x);
        let d2 = domain.interface[c.second].distance(x);
        if d1 < delta && d2 < delta {
            let score = d1 + d2;
            if best.map_or(true, |(b, _)| score < b - 1e-14) {
                best = Some((score, k));
            }
        }
    }
    let (_, k) = best?;
    let c = &domain.corners[k];
    let (a1, b1) = segment_ends(&domain.interface[c.first])?;
    let (a2, b2) = segment_ends(&domain.interface[c.second])?;
    let n1 = domain.interface[c.first].normal_at(c.point);
    let n2 = domain.interface[c.second].normal_at(c.point);
    Some(CornerProjection {
        corner: c.point,
        theta: c.theta,
        xbar1: closest_on_segment(x, a1, b1).0,
        xbar2: closest_on_segment(x, a2, b2).0,
        n1,
        n2,
        p1: rotate_cw(n1),
        p2: rotate_cw(n2),
        concave: c.is_concave(),
        pieces: (c.first, c.second),
    })
}

fn segment_ends(p: &CurvePiece) -> Option<(Vec2, Vec2)> {
    match p {
        CurvePiece::Segment { a, b } => Some((*a, *b)),
        CurvePiece::Circle { .. } => None,
    }
}

/// Point at signed arclength `l` along the contour through the projected
/// point.
pub fn contour_point(proj: &BoundaryProjection, l: f64) -> Vec2 {
    proj.contour.at(l)
}
