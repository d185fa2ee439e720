//! Linear triangle finite elements for the local heat equation.

use crate::error::{Error, Result};
use crate::geometry::{NodeTag, SpatialGrid, TriMesh, Vec2};
use crate::linalg::{BandLu, CsrMatrix};
use crate::nonlocal::ManufacturedCase;

/// Assembled local subproblem.
#[derive(Debug, Clone)]
pub struct FemSystem {
    pub mesh: TriMesh,
    pub alpha: f64,
    /// Consistent mass matrix.
    pub mass: CsrMatrix,
    /// α-scaled stiffness, before any boundary rows are replaced.
    pub stiffness: CsrMatrix,
    pub interior: Vec<usize>,
    pub interface: Vec<usize>,
    pub dirichlet: Vec<usize>,
}

/// Gradients of the three hat functions of triangle `t`.
pub fn shape_gradients(mesh: &TriMesh, t: usize) -> [Vec2; 3] {
    let [a, b, c] = mesh.triangles[t].map(|i| mesh.nodes[i]);
    let det = 2.0 * mesh.area(t);
    let g = |p: Vec2, q: Vec2| Vec2::new(p.y - q.y, q.x - p.x) / det;
    [g(b, c), g(c, a), g(a, b)]
}

pub fn assemble_fem(mesh: &TriMesh, alpha: f64) -> Result<FemSystem> {
    let n = mesh.nodes.len();
    let mut mt = Vec::with_capacity(9 * mesh.triangles.len());
    let mut kt = Vec::with_capacity(9 * mesh.triangles.len());
    for t in 0..mesh.triangles.len() {
        let area = mesh.area(t);
        if !(area > 1e-12 * mesh.h * mesh.h) {
            return Err(Error::Geometry(format!("degenerate triangle {t} (area {area:e})")));
        }
        let tri = mesh.triangles[t];
        let g = shape_gradients(mesh, t);
        for a in 0..3 {
            for b in 0..3 {
                let m = if a == b { area / 6.0 } else { area / 12.0 };
                mt.push((tri[a], tri[b], m));
                kt.push((tri[a], tri[b], alpha * area * g[a].dot(&g[b])));
            }
        }
    }
    Ok(FemSystem {
        mesh: mesh.clone(),
        alpha,
        mass: CsrMatrix::from_triplets(n, n, &mt),
        stiffness: CsrMatrix::from_triplets(n, n, &kt),
        interior: mesh.indices_with(NodeTag::Interior),
        interface: mesh.indices_with(NodeTag::Interface),
        dirichlet: mesh.indices_with(NodeTag::Dirichlet),
    })
}

impl FemSystem {
    pub fn len(&self) -> usize {
        self.mesh.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mesh.nodes.is_empty()
    }

    /// Interface and outer Dirichlet nodes, sorted.
    pub fn constrained(&self) -> Vec<usize> {
        let mut c: Vec<usize> = self.interface.iter().chain(&self.dirichlet).copied().collect();
        c.sort_unstable();
        c
    }

    /// Stiffness blocks: interior × interior and interior × interface.
    pub fn blocks(&self) -> (CsrMatrix, CsrMatrix) {
        (self.stiffness.select(&self.interior, &self.interior), self.stiffness.select(&self.interior, &self.interface))
    }

    /// `M/Δt + B` with identity rows on every constrained node.
    pub fn implicit_matrix(&self, dt: f64) -> CsrMatrix {
        self.mass.scale(1.0 / dt).add_scaled(&self.stiffness, 1.0).with_identity_rows(&self.constrained())
    }

    /// Consistent load `M·f_h` of the nodal interpolant of `f(·, t)`.
    pub fn load(&self, f: impl Fn(Vec2) -> f64) -> Vec<f64> {
        let fv: Vec<f64> = self.mesh.nodes.iter().map(|&x| f(x)).collect();
        self.mass.matvec(&fv)
    }

    pub fn nodal(&self, u: impl Fn(Vec2) -> f64) -> Vec<f64> {
        self.mesh.nodes.iter().map(|&x| u(x)).collect()
    }

    /// Mass-matrix L² norm of a nodal vector.
    pub fn l2_norm(&self, e: &[f64]) -> f64 {
        let me = self.mass.matvec(e);
        e.iter().zip(&me).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt()
    }
}

/// Factorized backward-Euler matrix of the local subproblem.
#[derive(Debug, Clone)]
pub struct FemSolver {
    pub dt: f64,
    lu: BandLu,
}

impl FemSolver {
    pub fn new(system: &FemSystem, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        Ok(FemSolver { dt, lu: BandLu::factor(&system.implicit_matrix(dt))? })
    }

    /// Solves `M/Δt (U − U_prev) + B U = F`; `boundary` returns the value
    /// of each constrained node.
    pub fn step(&self, system: &FemSystem, prev: &[f64], load: &[f64], boundary: impl Fn(usize) -> f64) -> Result<Vec<f64>> {
        let mp = system.mass.matvec(prev);
        let mut b: Vec<f64> = mp.iter().zip(load).map(|(m, f)| m / self.dt + f).collect();
        for i in system.constrained() {
            b[i] = boundary(i);
        }
        self.lu.solve(&b)
    }
}

/// One backward-Euler step with the load and all boundary values taken from
/// a manufactured case at `t_next`.
pub fn fem_step(system: &FemSystem, prev: &[f64], case: &ManufacturedCase, t_next: f64, dt: f64) -> Result<Vec<f64>> {
    let solver = FemSolver::new(system, dt)?;
    let load = system.load(|x| (case.f)(x, t_next));
    solver.step(system, prev, &load, |i| case.dirichlet(system.mesh.nodes[i], t_next))
}

/// Locates the triangle containing `x`; returns it with barycentric
/// coordinates. Points within a small tolerance outside the mesh snap to
/// the nearest triangle.
pub fn locate(mesh: &TriMesh, x: Vec2) -> Result<(usize, [f64; 3])> {
    let mut best = (f64::NEG_INFINITY, usize::MAX, [0.0; 3]);
    let mut consider = |t: usize| {
        let l = mesh.barycentric(t, x);
        let m = l[0].min(l[1]).min(l[2]);
        if m > best.0 {
            best = (m, t, l);
        }
        m >= -1e-12
    };
    // Candidates near the point first, then everything.
    let r = 2.0 * mesh.h;
    let hit = (0..mesh.triangles.len()).find(|&t| {
        let c = mesh.triangles[t].iter().map(|&i| mesh.nodes[i]).sum::<Vec2>() / 3.0;
        (c - x).norm() <= r && consider(t)
    });
    let hit = hit.or_else(|| (0..mesh.triangles.len()).find(|&t| consider(t)));
    if let Some(t) = hit {
        return Ok((t, mesh.barycentric(t, x)));
    }
    if best.0 >= -1e-6 {
        return Ok((best.1, best.2));
    }
    Err(Error::Geometry(format!("point ({}, {}) is outside the mesh", x.x, x.y)))
}

/// Piecewise-linear value and element gradient at `x`.
pub fn evaluate_local(mesh: &TriMesh, values: &[f64], x: Vec2) -> Result<(f64, Vec2)> {
    let (t, l) = locate(mesh, x)?;
    let tri = mesh.triangles[t];
    let g = shape_gradients(mesh, t);
    let v = (0..3).map(|a| l[a] * values[tri[a]]).sum();
    let grad = (0..3).map(|a| g[a] * values[tri[a]]).sum();
    Ok((v, grad))
}

/// Triangle lookup accelerated by a centroid grid, for repeated queries.
#[derive(Debug, Clone)]
pub struct Locator {
    centroids: Vec<Vec2>,
    grid: SpatialGrid,
    reach: f64,
}

impl Locator {
    pub fn new(mesh: &TriMesh) -> Self {
        let centroids: Vec<Vec2> = mesh
            .triangles
            .iter()
            .map(|t| t.iter().map(|&i| mesh.nodes[i]).sum::<Vec2>() / 3.0)
            .collect();
        let reach = 2.0 * mesh.h;
        Locator { grid: SpatialGrid::new(&centroids, reach), centroids, reach }
    }

    pub fn locate(&self, mesh: &TriMesh, x: Vec2) -> Result<(usize, [f64; 3])> {
        for t in self.grid.within_closed(&self.centroids, x, self.reach) {
            let l = mesh.barycentric(t, x);
            if l.iter().all(|&v| v >= -1e-12) {
                return Ok((t, l));
            }
        }
        locate(mesh, x)
    }
}
