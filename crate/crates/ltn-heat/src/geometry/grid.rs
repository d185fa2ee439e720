use super::Vec2;
use std::collections::HashMap;

/// Uniform bucket grid for radius queries over a fixed point set.
#[derive(Debug, Clone)]
pub struct SpatialGrid {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl SpatialGrid {
    pub fn new(points: &[Vec2], cell: f64) -> Self {
        assert!(cell > 0.0);
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::key(cell, *p)).or_default().push(i);
        }
        SpatialGrid { cell, buckets }
    }

    fn key(cell: f64, p: Vec2) -> (i64, i64) {
        ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)
    }

    /// Indices `j` with `|points[j] − x| < radius`, sorted ascending.
    pub fn within(&self, points: &[Vec2], x: Vec2, radius: f64) -> Vec<usize> {
        self.query(points, x, radius, false)
    }

    /// Indices `j` with `|points[j] − x| ≤ radius`, sorted ascending.
    pub fn within_closed(&self, points: &[Vec2], x: Vec2, radius: f64) -> Vec<usize> {
        self.query(points, x, radius, true)
    }

    fn query(&self, points: &[Vec2], x: Vec2, radius: f64, closed: bool) -> Vec<usize> {
        let reach = (radius / self.cell).ceil() as i64;
        let (cx, cy) = Self::key(self.cell, x);
        let r2 = radius * radius;
        let mut out = Vec::new();
        for i in cx - reach..=cx + reach {
            for j in cy - reach..=cy + reach {
                if let Some(b) = self.buckets.get(&(i, j)) {
                    for &k in b {
                        let d2 = (points[k] - x).norm_squared();
                        if d2 < r2 || (closed && d2 <= r2) {
                            out.push(k);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}
