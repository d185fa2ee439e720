use super::{cross2, DomainSpec, Role, Shape, Vec2};
use crate::error::{Error, Result};
use std::collections::HashMap;
use std::io::{BufRead, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeTag {
    Interior,
    Interface,
    Dirichlet,
}

impl NodeTag {
    fn code(self) -> u8 {
        match self {
            NodeTag::Interior => 0,
            NodeTag::Interface => 1,
            NodeTag::Dirichlet => 2,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        match c {
            0 => Ok(NodeTag::Interior),
            1 => Ok(NodeTag::Interface),
            2 => Ok(NodeTag::Dirichlet),
            _ => Err(Error::Geometry(format!("unknown node tag {c}"))),
        }
    }
}

/// Conforming triangulation with counter-clockwise triangles.
#[derive(Debug, Clone)]
pub struct TriMesh {
    pub nodes: Vec<Vec2>,
    pub tags: Vec<NodeTag>,
    pub triangles: Vec<[usize; 3]>,
    pub h: f64,
}

impl TriMesh {
    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        0.5 * cross2(self.nodes[b] - self.nodes[a], self.nodes[c] - self.nodes[a])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.area(t)).sum()
    }

    pub fn indices_with(&self, tag: NodeTag) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.tags[i] == tag).collect()
    }

    /// Edges that belong to a single triangle.
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut out: Vec<_> = count.into_iter().filter(|&(_, c)| c == 1).map(|(e, _)| e).collect();
        out.sort_unstable();
        out
    }

    /// Barycentric coordinates of `x` in triangle `t`.
    pub fn barycentric(&self, t: usize, x: Vec2) -> [f64; 3] {
        let [a, b, c] = self.triangles[t].map(|i| self.nodes[i]);
        let det = cross2(b - a, c - a);
        let l1 = cross2(x - a, c - a) / det;
        let l2 = cross2(b - a, x - a) / det;
        [1.0 - l1 - l2, l1, l2]
    }
}

fn snap_to(hole: &Shape, p: Vec2) -> Vec2 {
    match hole {
        Shape::Disk { center, radius } => {
            let w = p - center;
            center + w * (radius / w.norm())
        }
        Shape::Polygon { .. } => {
            let mut best = (f64::INFINITY, p);
            for (a, b) in hole.edges() {
                let q = super::closest_on_segment(p, a, b).0;
                let d = (q - p).norm();
                if d < best.0 {
                    best = (d, q);
                }
            }
            best.1
        }
        Shape::HalfPlane { point, normal } => p - normal * (p - point).dot(normal),
    }
}

/// Structured triangulation of a local domain: a lattice split along
/// diagonals, nodes near the interface snapped onto it, straddling triangles
/// cut at the exact crossing, and hole triangles removed.
pub fn generate_mesh(domain: &DomainSpec, h: f64) -> Result<TriMesh> {
    if domain.role != Role::Local {
        return Err(Error::Geometry("meshes are generated for local domains".into()));
    }
    let mut last = None;
    for frac in [0.5, 0.3] {
        match build_mesh(domain, h, frac) {
            Ok(m) => return Ok(m),
            Err(e) => {
                log::debug!("mesh attempt with snap fraction {frac} failed: {e}");
                last = Some(e);
            }
        }
    }
    Err(last.unwrap())
}

fn build_mesh(domain: &DomainSpec, h: f64, snap_frac: f64) -> Result<TriMesh> {
    let verts = match &domain.omega {
        Shape::Polygon { vertices } => vertices.clone(),
        _ => return Err(Error::Geometry("local domain must be a rectangle".into())),
    };
    let lo = verts.iter().fold(Vec2::new(f64::INFINITY, f64::INFINITY), |m, v| m.inf(v));
    let hi = verts.iter().fold(Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |m, v| m.sup(v));
    let nx = ((hi.x - lo.x) / h).round().max(1.0) as usize;
    let ny = ((hi.y - lo.y) / h).round().max(1.0) as usize;
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = lo.x + (hi.x - lo.x) * i as f64 / nx as f64;
            let y = lo.y + (hi.y - lo.y) * j as f64 / ny as f64;
            nodes.push(Vec2::new(x, y));
        }
    }
    let phi = |p: Vec2| domain.hole.as_ref().map_or(f64::INFINITY, |s| s.signed_distance(p));
    let mut level: Vec<f64> = nodes.iter().map(|&p| phi(p)).collect();
    if let Some(hole) = &domain.hole {
        for (k, p) in nodes.iter_mut().enumerate() {
            if level[k].abs() <= snap_frac * h {
                *p = snap_to(hole, *p);
                level[k] = 0.0;
            }
        }
    }
    let mut tris: Vec<[usize; 3]> = Vec::new();
    let mut cut_nodes: HashMap<(usize, usize), usize> = HashMap::new();
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            for t in [[a, b, c], [a, c, d]] {
                let f = t.map(|k| level[k]);
                let has_neg = f.iter().any(|&v| v < 0.0);
                let has_pos = f.iter().any(|&v| v > 0.0);
                if !has_neg {
                    let cen = (nodes[t[0]] + nodes[t[1]] + nodes[t[2]]) / 3.0;
                    if phi(cen) > 0.0 {
                        tris.push(t);
                    }
                    continue;
                }
                if !has_pos {
                    continue;
                }
                let hole = domain.hole.as_ref().unwrap();
                let mut poly = Vec::with_capacity(4);
                for k in 0..3 {
                    let (u, v) = (t[k], t[(k + 1) % 3]);
                    if level[u] >= 0.0 {
                        poly.push(u);
                    }
                    if level[u] * level[v] < 0.0 {
                        let key = (u.min(v), u.max(v));
                        let idx = *cut_nodes.entry(key).or_insert_with(|| {
                            let p = crossing(hole, nodes[u], nodes[v]);
                            nodes.push(p);
                            level.push(0.0);
                            nodes.len() - 1
                        });
                        poly.push(idx);
                    }
                }
                for k in 1..poly.len().saturating_sub(1) {
                    let sub = [poly[0], poly[k], poly[k + 1]];
                    let cen = (nodes[sub[0]] + nodes[sub[1]] + nodes[sub[2]]) / 3.0;
                    if phi(cen) > 0.0 {
                        tris.push(sub);
                    }
                }
            }
        }
    }
    // drop unused nodes
    let mut map = vec![usize::MAX; nodes.len()];
    let mut kept = Vec::new();
    for t in tris.iter_mut() {
        for v in t.iter_mut() {
            if map[*v] == usize::MAX {
                map[*v] = kept.len();
                kept.push(nodes[*v]);
            }
            *v = map[*v];
        }
    }
    // deterministic order: by original index
    let mut order: Vec<usize> = (0..nodes.len()).filter(|&k| map[k] != usize::MAX).collect();
    order.sort_unstable();
    let mut renum = vec![0; kept.len()];
    for (new, &old) in order.iter().enumerate() {
        renum[map[old]] = new;
    }
    let nodes: Vec<Vec2> = order.iter().map(|&k| nodes[k]).collect();
    for t in tris.iter_mut() {
        *t = t.map(|v| renum[v]);
    }
    let mut mesh = TriMesh { tags: vec![NodeTag::Interior; nodes.len()], nodes, triangles: tris, h };
    for t in 0..mesh.triangles.len() {
        let a = mesh.area(t);
        if !(a > 1e-12 * h * h) {
            return Err(Error::Geometry(format!("triangle {t} has area {a:.3e} after snapping")));
        }
    }
    tag_boundary(&mut mesh, domain)?;
    Ok(mesh)
}

fn crossing(hole: &Shape, a: Vec2, b: Vec2) -> Vec2 {
    let fa = hole.signed_distance(a);
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = hole.signed_distance(a + (b - a) * mid);
        if (fm < 0.0) == (fa < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    snap_to(hole, a + (b - a) * (0.5 * (lo + hi)))
}

fn tag_boundary(mesh: &mut TriMesh, domain: &DomainSpec) -> Result<()> {
    let tol = 1e-9 * mesh.h.max(1e-3);
    for (a, b) in mesh.boundary_edges() {
        for v in [a, b] {
            let p = mesh.nodes[v];
            let on_d = domain.dirichlet_distance(p) <= tol;
            let on_i = domain.interface_distance(p).0 <= tol;
            mesh.tags[v] = if on_d {
                NodeTag::Dirichlet
            } else if on_i {
                NodeTag::Interface
            } else {
                return Err(Error::Geometry(format!("boundary node {v} at ({}, {}) lies on no boundary piece", p.x, p.y)));
            };
        }
    }
    Ok(())
}

/// Writes `N_nodes N_tris`, then `id x y tag` lines, then `id n1 n2 n3`.
pub fn write_mesh<W: Write>(mesh: &TriMesh, mut w: W) -> Result<()> {
    writeln!(w, "{} {}", mesh.nodes.len(), mesh.triangles.len())?;
    for (i, p) in mesh.nodes.iter().enumerate() {
        writeln!(w, "{i} {:.17e} {:.17e} {}", p.x, p.y, mesh.tags[i].code())?;
    }
    for (i, t) in mesh.triangles.iter().enumerate() {
        writeln!(w, "{i} {} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

pub fn read_mesh<R: BufRead>(r: R, h: f64) -> Result<TriMesh> {
    let bad = |m: &str| Error::Geometry(format!("mesh file: {m}"));
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| bad("empty"))??;
    let mut it = header.split_whitespace().map(|s| s.parse::<usize>());
    let nn = it.next().ok_or_else(|| bad("header"))?.map_err(|e| bad(&e.to_string()))?;
    let nt = it.next().ok_or_else(|| bad("header"))?.map_err(|e| bad(&e.to_string()))?;
    let mut nodes = Vec::with_capacity(nn);
    let mut tags = Vec::with_capacity(nn);
    for _ in 0..nn {
        let line = lines.next().ok_or_else(|| bad("truncated nodes"))??;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(bad(&format!("node line {line:?}")));
        }
        let x: f64 = f[1].parse().map_err(|_| bad(f[1]))?;
        let y: f64 = f[2].parse().map_err(|_| bad(f[2]))?;
        let t: u8 = f[3].parse().map_err(|_| bad(f[3]))?;
        nodes.push(Vec2::new(x, y));
        tags.push(NodeTag::from_code(t)?);
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let line = lines.next().ok_or_else(|| bad("truncated triangles"))??;
        let f: Vec<usize> = line
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| bad(s)))
            .collect::<Result<_>>()?;
        if f.len() != 4 || f[1..].iter().any(|&v| v >= nn) {
            return Err(bad(&format!("triangle line {line:?}")));
        }
        triangles.push([f[1], f[2], f[3]]);
    }
    Ok(TriMesh { nodes, tags, triangles, h })
}
