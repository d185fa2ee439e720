use super::{DomainSpec, Role, SpatialGrid, Vec2};
use crate::error::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointLabel {
    Interior,
    /// Within δ of the coupling interface, inside the nonlocal subdomain.
    CollarInterface,
    /// Carries Dirichlet data (outside the subdomain, or a pinned point).
    CollarDirichlet,
}

#[derive(Debug, Clone)]
pub struct PointCloud {
    pub points: Vec<Vec2>,
    pub labels: Vec<PointLabel>,
    pub h: f64,
    pub delta: f64,
    pub fill_distance: f64,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn indices_with(&self, label: PointLabel) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == label).collect()
    }

    /// Points whose value is an unknown (interior and interface collar).
    pub fn unknowns(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] != PointLabel::CollarDirichlet).collect()
    }

    pub fn grid(&self) -> SpatialGrid {
        SpatialGrid::new(&self.points, self.delta.max(self.h))
    }
}

/// Lattice coordinate `i·h`, computed as `i / n` when `1/h` is an integer so
/// that domain boundaries at simple fractions are hit exactly.
fn lattice_coord(i: i64, h: f64) -> f64 {
    let inv = 1.0 / h;
    if (inv - inv.round()).abs() < 1e-9 {
        i as f64 / inv.round()
    } else {
        i as f64 * h
    }
}

/// Cartesian lattice of spacing `h` clipped to the subdomain plus its
/// Dirichlet collar, with labels assigned.
pub fn generate_point_cloud(domain: &DomainSpec, h: f64, delta: f64) -> Result<PointCloud> {
    if domain.role != Role::Nonlocal {
        return Err(Error::Geometry("point clouds are generated for nonlocal domains".into()));
    }
    if !(h > 0.0) {
        return Err(Error::Geometry(format!("spacing must be positive, got {h}")));
    }
    if delta < 2.0 * h * (1.0 - 1e-12) {
        return Err(Error::Geometry(format!(
            "horizon/spacing ratio {:.3} < 2: GMLS stencils would be deficient",
            delta / h
        )));
    }
    if delta > domain.min_feature_size() * 0.5 {
        log::warn!(
            "horizon {delta} exceeds half of the smallest feature {} of domain {}",
            domain.min_feature_size(),
            domain.name
        );
    }
    let (lo, hi) = bounding_box(domain);
    let tol = 1e-12;
    let i0 = ((lo.x - delta) / h).floor() as i64 - 1;
    let i1 = ((hi.x + delta) / h).ceil() as i64 + 1;
    let j0 = ((lo.y - delta) / h).floor() as i64 - 1;
    let j1 = ((hi.y + delta) / h).ceil() as i64 + 1;
    let mut points = Vec::new();
    let mut labels = Vec::new();
    let collar_data = !domain.dirichlet.is_empty();
    for j in j0..=j1 {
        for i in i0..=i1 {
            let p = Vec2::new(lattice_coord(i, h), lattice_coord(j, h));
            if domain.omega.contains(p, tol) {
                let (d, _) = domain.interface_distance(p);
                let label = if d <= delta + tol { PointLabel::CollarInterface } else { PointLabel::Interior };
                points.push(p);
                labels.push(label);
            } else if collar_data
                && domain.data_region.contains(p, tol)
                && domain.omega.signed_distance(p) <= delta + tol
            {
                points.push(p);
                labels.push(PointLabel::CollarDirichlet);
            }
        }
    }
    if points.is_empty() {
        return Err(Error::Geometry(format!("domain {} contains no lattice points", domain.name)));
    }
    for q in &domain.dirichlet_points {
        let k = (0..points.len())
            .min_by(|&a, &b| (points[a] - q).norm().partial_cmp(&(points[b] - q).norm()).unwrap())
            .unwrap();
        if (points[k] - q).norm() > 1e-9 {
            return Err(Error::Geometry(format!("pinned point ({}, {}) is not a lattice point", q.x, q.y)));
        }
        labels[k] = PointLabel::CollarDirichlet;
    }
    let fill = fill_distance(&points, h);
    if (fill - h).abs() > 0.1 * h {
        return Err(Error::Geometry(format!("fill distance {fill} differs from h = {h} by more than 10%")));
    }
    Ok(PointCloud { points, labels, h, delta, fill_distance: fill })
}

fn bounding_box(domain: &DomainSpec) -> (Vec2, Vec2) {
    use super::Shape;
    match &domain.omega {
        Shape::Disk { center, radius } => (center - Vec2::new(*radius, *radius), center + Vec2::new(*radius, *radius)),
        Shape::Polygon { vertices } => {
            let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
            let mut hi = -lo;
            for v in vertices {
                lo = lo.inf(v);
                hi = hi.sup(v);
            }
            (lo, hi)
        }
        Shape::HalfPlane { .. } => (Vec2::zeros(), Vec2::zeros()),
    }
}

/// `sup_i min_{j≠i} |x_i − x_j|`.
pub fn fill_distance(points: &[Vec2], h_guess: f64) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let grid = SpatialGrid::new(points, h_guess);
    let mut sup = 0.0f64;
    for (i, &p) in points.iter().enumerate() {
        let mut r = h_guess * 1.5;
        loop {
            let near: Vec<usize> = grid.within_closed(points, p, r).into_iter().filter(|&j| j != i).collect();
            if let Some(m) = near.iter().map(|&j| (points[j] - p).norm()).min_by(|a, b| a.partial_cmp(b).unwrap()) {
                sup = sup.max(m);
                break;
            }
            r *= 2.0;
        }
    }
    sup
}
