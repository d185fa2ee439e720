//! Interface transfer operators: Robin data extraction from the local
//! solution, its injection into the nonlocal collar rows, and the Dirichlet
//! trace of the nonlocal solution on the local interface nodes.

use crate::error::{Error, Result};
use crate::fem::locate;
use crate::geometry::{NodeTag, PointCloud, SpatialGrid, TriMesh, Vec2};
use crate::gmls::Stencil;
use crate::linalg::CsrMatrix;
use crate::nonlocal::{CollarKind, CollarRow, ManufacturedCase};
use serde::{Deserialize, Serialize};

/// A piece of Robin data requested by a collar row: `∂u/∂n + βu` at
/// `point`, or its derivative along `tangent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataFunctional {
    pub point: Vec2,
    pub normal: Vec2,
    pub tangent: Option<Vec2>,
    /// Cloud index of the collar row that uses it.
    pub row: usize,
}

impl DataFunctional {
    pub fn eval_case(&self, case: &ManufacturedCase, beta: f64, t: f64) -> f64 {
        match self.tangent {
            None => case.robin(self.point, self.normal, beta, t),
            Some(p) => case.robin_tangential(self.point, self.normal, p, beta, t),
        }
    }
}

/// Collar-side Robin operators. With `G` the vector of data functionals the
/// collar rows read `… + β·trace·u = … + inject·G`.
#[derive(Debug, Clone)]
pub struct Sigma1 {
    /// Points × points: α-weighted evaluations of the nonlocal solution at
    /// the projected points (the β-implicit part).
    pub trace: CsrMatrix,
    /// Points × functionals: α-weighted data coefficients.
    pub inject: CsrMatrix,
    pub functionals: Vec<DataFunctional>,
}

fn cloud_stencil(cloud: &PointCloud, grid: &SpatialGrid, x: Vec2) -> Result<Stencil> {
    let nb = grid.within(&cloud.points, x, cloud.delta);
    match Stencil::new(x, None, &cloud.points, nb, cloud.delta) {
        Ok(s) => Ok(s),
        Err(e) => {
            log::info!("growing MLS radius to 1.5δ at ({}, {}): {e}", x.x, x.y);
            let r = 1.5 * cloud.delta;
            Stencil::new(x, None, &cloud.points, grid.within(&cloud.points, x, r), r)
        }
    }
}

/// Builds the collar Robin operators from the collar coefficients.
pub fn build_sigma1(cloud: &PointCloud, grid: &SpatialGrid, collar: &[CollarRow], alpha: f64) -> Result<Sigma1> {
    let n = cloud.len();
    let mut trace: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut inject = Vec::new();
    let mut functionals = Vec::new();
    let mut push = |row: usize, f: DataFunctional, coef: f64, weights: Vec<(usize, f64)>, trace: &mut Vec<Vec<(usize, f64)>>| {
        inject.push((row, functionals.len(), coef));
        functionals.push(f);
        trace[row].extend(weights.into_iter().map(|(j, w)| (j, coef * w)));
    };
    for c in collar {
        let i = c.index;
        match &c.kind {
            CollarKind::Edge(cc) => {
                let st = cloud_stencil(cloud, grid, c.proj.xbar)?;
                let w = st.apply(&st.value_functional(c.proj.xbar))?;
                let f = DataFunctional { point: c.proj.xbar, normal: c.proj.normal, tangent: None, row: i };
                push(i, f, alpha * cc.v, w, &mut trace);
            }
            CollarKind::Corner(cc) => {
                let cp = c.proj.corner.as_ref().unwrap();
                let sides = [(cp.xbar1, cp.n1, cp.p1), (cp.xbar2, cp.n2, cp.p2)];
                for (k, &(xb, nk, _)) in sides.iter().enumerate() {
                    let st = cloud_stencil(cloud, grid, xb)?;
                    let w = st.apply(&st.value_functional(xb))?;
                    let f = DataFunctional { point: xb, normal: nk, tangent: None, row: i };
                    push(i, f, 2.0 * alpha * cc.v[k], w, &mut trace);
                }
                let (xb, nr, pr) = sides[cc.reference];
                let st = cloud_stencil(cloud, grid, xb)?;
                let w = st.apply(&st.directional_functional(xb, pr))?;
                let f = DataFunctional { point: xb, normal: nr, tangent: Some(pr), row: i };
                push(i, f, 2.0 * alpha * cc.omega, w, &mut trace);
            }
        }
    }
    let m = functionals.len();
    Ok(Sigma1 {
        trace: CsrMatrix::from_rows(n, &trace),
        inject: CsrMatrix::from_triplets(n, m, &inject),
        functionals,
    })
}

/// How the normal derivative of the local solution is extracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    /// One-sided quadratic MLS over local nodes.
    #[default]
    Mls,
    /// Gradient of the linear element containing the point.
    Element,
}

/// `G_n`, `G_t`: functionals × local nodes. The Robin data of the local
/// solution `U` is `(G_n + β·G_t)·U`.
#[derive(Debug, Clone)]
pub struct RobinExtraction {
    pub g_n: CsrMatrix,
    pub g_t: CsrMatrix,
}

impl RobinExtraction {
    pub fn robin_map(&self, beta: f64) -> CsrMatrix {
        self.g_n.add_scaled(&self.g_t, beta)
    }

    pub fn apply(&self, beta: f64, u: &[f64]) -> Vec<f64> {
        let a = self.g_n.matvec(u);
        let b = self.g_t.matvec(u);
        a.iter().zip(&b).map(|(x, y)| x + beta * y).collect()
    }
}

/// Robin extraction rows for every data functional.
pub fn build_robin_extraction(mesh: &TriMesh, functionals: &[DataFunctional], radius: f64, mode: GradientMode) -> Result<RobinExtraction> {
    let nn = mesh.nodes.len();
    let grid = SpatialGrid::new(&mesh.nodes, radius);
    let mut gn = Vec::with_capacity(functionals.len());
    let mut gt = Vec::with_capacity(functionals.len());
    for (k, f) in functionals.iter().enumerate() {
        let (rn, rt) = match mode {
            GradientMode::Mls => {
                let nb = grid.within(&mesh.nodes, f.point, radius);
                let st = Stencil::new(f.point, None, &mesh.nodes, nb, radius).map_err(|e| match e {
                    Error::Unisolvent { reason, .. } => {
                        Error::Unisolvent { index: k, x: f.point.x, y: f.point.y, reason }
                    }
                    other => other,
                })?;
                match f.tangent {
                    None => (st.apply(&st.directional_functional(f.point, f.normal))?, st.apply(&st.value_functional(f.point))?),
                    Some(p) => (st.apply(&st.second_functional(p, f.normal))?, st.apply(&st.directional_functional(f.point, p))?),
                }
            }
            GradientMode::Element => {
                let (t, bary) = locate(mesh, f.point)?;
                let grads = crate::fem::shape_gradients(mesh, t);
                let tri = mesh.triangles[t];
                match f.tangent {
                    None => (
                        (0..3).map(|a| (tri[a], grads[a].dot(&f.normal))).collect(),
                        (0..3).map(|a| (tri[a], bary[a])).collect(),
                    ),
                    Some(p) => (Vec::new(), (0..3).map(|a| (tri[a], grads[a].dot(&p))).collect()),
                }
            }
        };
        gn.push(rn);
        gt.push(rt);
    }
    Ok(RobinExtraction { g_n: CsrMatrix::from_rows(nn, &gn), g_t: CsrMatrix::from_rows(nn, &gt) })
}

/// Dirichlet trace: interface nodes × cloud points, quadratic MLS with
/// support δ (grown once to 1.5δ if a stencil is deficient).
pub fn build_dirichlet_trace(cloud: &PointCloud, mesh: &TriMesh, delta: f64) -> Result<CsrMatrix> {
    let grid = SpatialGrid::new(&cloud.points, delta);
    let nodes = mesh.indices_with(NodeTag::Interface);
    let mut rows = Vec::with_capacity(nodes.len());
    for &j in &nodes {
        let x = mesh.nodes[j];
        let st = match Stencil::new(x, None, &cloud.points, grid.within(&cloud.points, x, delta), delta) {
            Ok(s) => s,
            Err(e) => {
                log::info!("interface node {j}: growing trace radius to 1.5δ ({e})");
                let r = 1.5 * delta;
                Stencil::new(x, None, &cloud.points, grid.within(&cloud.points, x, r), r)?
            }
        };
        rows.push(st.apply(&st.value_functional(x))?);
    }
    Ok(CsrMatrix::from_rows(cloud.len(), &rows))
}
