use super::{cross2, Vec2};
use std::f64::consts::PI;

/// Analytic planar region used for membership, signed distance and ray
/// clipping. Polygons are stored with vertices in clockwise order.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// `{y : (y − point)·normal ≤ 0}`; `normal` is the unit exterior normal.
    HalfPlane { point: Vec2, normal: Vec2 },
    Disk { center: Vec2, radius: f64 },
    Polygon { vertices: Vec<Vec2> },
}

const EPS: f64 = 1e-13;

fn angle_of(v: Vec2) -> f64 {
    v.y.atan2(v.x)
}

impl Shape {
    pub fn polygon(vertices: Vec<Vec2>) -> Shape {
        Shape::Polygon { vertices }
    }

    pub fn edges(&self) -> Vec<(Vec2, Vec2)> {
        match self {
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                (0..n).map(|k| (vertices[k], vertices[(k + 1) % n])).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Negative inside, positive outside, exact for every variant.
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        match self {
            Shape::HalfPlane { point, normal } => (p - point).dot(normal),
            Shape::Disk { center, radius } => (p - center).norm() - radius,
            Shape::Polygon { .. } => {
                let d = self
                    .edges()
                    .iter()
                    .map(|&(a, b)| point_segment_distance(p, a, b))
                    .fold(f64::INFINITY, f64::min);
                if self.winding_inside(p) {
                    -d
                } else {
                    d
                }
            }
        }
    }

    fn winding_inside(&self, p: Vec2) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let xc = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < xc {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Closed-set membership with a small absolute tolerance.
    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        self.signed_distance(p) <= tol
    }

    /// Parameters `t ∈ (0, tmax)` at which `x + t e` crosses the boundary.
    pub fn ray_hits(&self, x: Vec2, e: Vec2, tmax: f64) -> Vec<f64> {
        let mut out = Vec::new();
        match self {
            Shape::HalfPlane { point, normal } => {
                let den = e.dot(normal);
                if den.abs() > EPS {
                    let t = (point - x).dot(normal) / den;
                    if t > 0.0 && t < tmax {
                        out.push(t);
                    }
                }
            }
            Shape::Disk { center, radius } => {
                let w = x - center;
                let b = w.dot(&e);
                let c = w.norm_squared() - radius * radius;
                let disc = b * b - c;
                if disc > 0.0 {
                    let s = disc.sqrt();
                    for t in [-b - s, -b + s] {
                        if t > 0.0 && t < tmax {
                            out.push(t);
                        }
                    }
                }
            }
            Shape::Polygon { .. } => {
                for (a, b) in self.edges() {
                    let d = b - a;
                    let den = cross2(e, d);
                    if den.abs() <= EPS {
                        continue;
                    }
                    let w = a - x;
                    let t = cross2(w, d) / den;
                    let u = cross2(w, e) / den;
                    if (-1e-14..=1.0 + 1e-14).contains(&u) && t > 0.0 && t < tmax {
                        out.push(t);
                    }
                }
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    /// Polar angles (about `x`) at which the structure of the set
    /// `{r ∈ [0, δ] : x + r e(φ) ∈ shape}` can change.
    pub fn critical_angles(&self, x: Vec2, delta: f64) -> Vec<f64> {
        let mut out = Vec::new();
        match self {
            Shape::HalfPlane { point, normal } => {
                line_circle_angles(x, delta, *point, Vec2::new(-normal.y, normal.x), &mut out);
            }
            Shape::Disk { center, radius } => {
                let w = center - x;
                let dist = w.norm();
                if dist > EPS {
                    // circle–circle intersections
                    let a = (delta * delta - radius * radius + dist * dist) / (2.0 * dist);
                    if a.abs() <= delta {
                        let half = (a / delta).clamp(-1.0, 1.0).acos();
                        let base = angle_of(w);
                        out.push(base + half);
                        out.push(base - half);
                    }
                    // tangent rays from an exterior or boundary point
                    if dist >= radius - 1e-14 {
                        let half = (radius / dist).min(1.0).asin();
                        let base = angle_of(w);
                        out.push(base + half);
                        out.push(base - half);
                    }
                }
            }
            Shape::Polygon { .. } => {
                for (a, b) in self.edges() {
                    segment_circle_angles(x, delta, a, b, &mut out);
                }
            }
        }
        out
    }

    pub fn is_polygon(&self) -> bool {
        matches!(self, Shape::Polygon { .. })
    }
}

pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    (p - closest_on_segment(p, a, b).0).norm()
}

/// Closest point of segment `ab` to `p` and its parameter in `[0, 1]`.
pub fn closest_on_segment(p: Vec2, a: Vec2, b: Vec2) -> (Vec2, f64) {
    let d = b - a;
    let l2 = d.norm_squared();
    if l2 == 0.0 {
        return (a, 0.0);
    }
    let t = ((p - a).dot(&d) / l2).clamp(0.0, 1.0);
    (a + d * t, t)
}

fn line_circle_angles(x: Vec2, delta: f64, p0: Vec2, dir: Vec2, out: &mut Vec<f64>) {
    let d = dir.normalize();
    let w = p0 - x;
    let foot = w - d * w.dot(&d);
    let h = foot.norm();
    if h < delta {
        let s = (delta * delta - h * h).sqrt();
        out.push(angle_of(foot + d * s));
        out.push(angle_of(foot - d * s));
    }
    if h <= 1e-12 * delta.max(1.0) {
        out.push(angle_of(d));
        out.push(angle_of(-d));
    }
}

fn segment_circle_angles(x: Vec2, delta: f64, a: Vec2, b: Vec2, out: &mut Vec<f64>) {
    for v in [a, b] {
        let w = v - x;
        if w.norm() < delta && w.norm() > EPS {
            out.push(angle_of(w));
        }
    }
    let d = b - a;
    let len = d.norm();
    if len == 0.0 {
        return;
    }
    let u = d / len;
    let w = a - x;
    // |w + s u|² = δ²
    let bq = w.dot(&u);
    let cq = w.norm_squared() - delta * delta;
    let disc = bq * bq - cq;
    if disc >= 0.0 {
        let s = disc.sqrt();
        for t in [-bq - s, -bq + s] {
            if (0.0..=len).contains(&t) {
                out.push(angle_of(w + u * t));
            }
        }
    }
    if cross2(u, -w).abs() <= 1e-12 * delta.max(1.0) && point_segment_distance(x, a, b) < delta {
        out.push(angle_of(u));
        out.push(angle_of(-u));
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let t = phi.rem_euclid(2.0 * PI);
    if t >= 2.0 * PI {
        0.0
    } else {
        t
    }
}
