//! The nonlocal heat subproblem: interior GMLS rows, Robin/Neumann collar
//! rows, corner rows and backward-Euler stepping.

mod case;
mod coefficients;

pub use case::{ManufacturedCase, ScalarField, TensorField, VectorField};
pub use coefficients::{
    collar_from_moments, compute_collar_coefficients, compute_corner_coefficients, corner_from_moments, exterior_moments,
    CollarCoefficients, CornerCoefficients,
};

use crate::error::{Error, Result};
use crate::geometry::{project_to_interface, BoundaryProjection, ContourPath, DomainSpec, PointCloud, PointLabel};
use crate::gmls::{build_stencil, Functional, Stencil, Q};
use crate::kernels::{raw_moments, ContourKernelSpec, KernelSpec, Region};
use crate::linalg::{BandLu, CsrMatrix};
use crate::transfer::{build_sigma1, DataFunctional, Sigma1};

/// Collar treatment of one point.
#[derive(Debug, Clone)]
pub enum CollarKind {
    Edge(CollarCoefficients),
    Corner(CornerCoefficients),
}

#[derive(Debug, Clone)]
pub struct CollarRow {
    pub index: usize,
    pub proj: BoundaryProjection,
    pub kind: CollarKind,
}

impl CollarRow {
    /// Mass scaling of the row.
    pub fn q(&self) -> f64 {
        match &self.kind {
            CollarKind::Edge(c) => c.q,
            CollarKind::Corner(c) => c.q,
        }
    }
}

/// Assembled nonlocal subproblem. The operator is affine in β:
/// `stiffness + β·sigma1.trace`.
#[derive(Debug, Clone)]
pub struct NonlocalSystem {
    pub cloud: PointCloud,
    pub domain: DomainSpec,
    pub kernel: KernelSpec,
    pub ckernel: ContourKernelSpec,
    pub alpha: f64,
    pub beta: f64,
    /// Mass per point: 1 inside, Q on the collar, 0 on Dirichlet points.
    pub mass: Vec<f64>,
    /// β-independent rows: `−α·(clipped integral + contour term)`.
    pub stiffness: CsrMatrix,
    pub sigma1: Sigma1,
    pub collar: Vec<CollarRow>,
    pub dirichlet: Vec<usize>,
    pub unknowns: Vec<usize>,
}

fn accumulate(row: &mut Vec<(usize, f64)>, w: Vec<(usize, f64)>, s: f64) {
    row.extend(w.into_iter().map(|(j, v)| (j, s * v)));
}

fn scaled(f: &Functional, s: f64) -> Functional {
    let mut o = [0.0; Q];
    for k in 0..Q {
        o[k] = s * f[k];
    }
    o
}

fn sum(a: &Functional, b: &Functional) -> Functional {
    let mut o = [0.0; Q];
    for k in 0..Q {
        o[k] = a[k] + b[k];
    }
    o
}

/// Collar geometry and coefficients for every interface-collar point.
pub fn collar_rows(cloud: &PointCloud, domain: &DomainSpec, kernel: &KernelSpec) -> Result<Vec<CollarRow>> {
    let mut out = Vec::new();
    for i in cloud.indices_with(PointLabel::CollarInterface) {
        let x = cloud.points[i];
        let proj = project_to_interface(x, domain, cloud.delta)?;
        let mu = exterior_moments(kernel, x, &domain.data_region)?;
        let kind = match &proj.corner {
            Some(cp) => CollarKind::Corner(corner_from_moments(x, cp, &mu)),
            None => CollarKind::Edge(collar_from_moments(&proj, &mu)),
        };
        let row = CollarRow { index: i, proj, kind };
        if row.q() <= 0.0 {
            log::warn!("non-positive collar mass {} at ({}, {})", row.q(), x.x, x.y);
        }
        out.push(row);
    }
    Ok(out)
}

/// Assembles interior, collar and corner rows.
pub fn assemble_nonlocal(
    domain: &DomainSpec,
    cloud: &PointCloud,
    kernel: &KernelSpec,
    ckernel: &ContourKernelSpec,
    alpha: f64,
    beta: f64,
) -> Result<NonlocalSystem> {
    let n = cloud.len();
    let grid = cloud.grid();
    let collar = collar_rows(cloud, domain, kernel)?;
    let mut collar_of = vec![usize::MAX; n];
    for (k, c) in collar.iter().enumerate() {
        collar_of[c.index] = k;
    }
    let mut mass = vec![0.0; n];
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for i in 0..n {
        match cloud.labels[i] {
            PointLabel::CollarDirichlet => continue,
            PointLabel::Interior => {
                let st = build_stencil(cloud, &grid, i, 2)?;
                let mom = raw_moments(kernel, st.center, Region::Inside(&domain.data_region))?;
                accumulate(&mut rows[i], st.apply(&st.moment_functional(&mom))?, -alpha);
                mass[i] = 1.0;
            }
            PointLabel::CollarInterface => {
                let c = &collar[collar_of[i]];
                let st = build_stencil(cloud, &grid, i, 2)?;
                let mom = raw_moments(kernel, st.center, Region::Inside(&domain.data_region))?;
                let clip = st.moment_functional(&mom);
                let total = match &c.kind {
                    CollarKind::Edge(cc) => {
                        let contour = contour_or_error(&st, ckernel, &c.proj)?;
                        sum(&clip, &scaled(&contour, cc.m))
                    }
                    CollarKind::Corner(cc) => {
                        let cp = c.proj.corner.as_ref().unwrap();
                        let dir = if cc.reference == 0 { cp.p1 } else { cp.p2 };
                        let path = ContourPath::Line { origin: st.center, direction: dir };
                        let contour = st.contour_functional(ckernel, &path);
                        sum(&clip, &scaled(&contour, 2.0 * cc.k))
                    }
                };
                accumulate(&mut rows[i], st.apply(&total)?, -alpha);
                mass[i] = c.q();
            }
        }
    }
    let stiffness = CsrMatrix::from_rows(n, &rows);
    let sigma1 = build_sigma1(cloud, &grid, &collar, alpha)?;
    Ok(NonlocalSystem {
        cloud: cloud.clone(),
        domain: domain.clone(),
        kernel: *kernel,
        ckernel: *ckernel,
        alpha,
        beta,
        mass,
        stiffness,
        sigma1,
        collar,
        dirichlet: cloud.indices_with(PointLabel::CollarDirichlet),
        unknowns: cloud.unknowns(),
    })
}

fn contour_or_error(st: &Stencil, ck: &ContourKernelSpec, proj: &BoundaryProjection) -> Result<Functional> {
    if proj.contour_truncated {
        return Err(Error::Geometry(format!(
            "contour through ({}, {}) leaves the data region away from any corner",
            proj.x.x, proj.x.y
        )));
    }
    Ok(st.contour_functional(ck, &proj.contour))
}

impl NonlocalSystem {
    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }

    pub fn functionals(&self) -> &[DataFunctional] {
        &self.sigma1.functionals
    }

    /// Spatial operator `stiffness + β·Σ₁ trace` (Dirichlet rows empty).
    pub fn operator(&self) -> CsrMatrix {
        self.stiffness.add_scaled(&self.sigma1.trace, self.beta)
    }

    /// `diag(mass)/Δt + operator`, with identity rows on Dirichlet points.
    pub fn implicit_matrix(&self, dt: f64) -> CsrMatrix {
        let m: Vec<f64> = self.mass.iter().map(|q| q / dt).collect();
        CsrMatrix::from_diagonal(&m).add_scaled(&self.operator(), 1.0).with_identity_rows(&self.dirichlet)
    }

    /// Same system with a different Robin coefficient.
    pub fn with_beta(&self, beta: f64) -> Self {
        let mut s = self.clone();
        s.beta = beta;
        s
    }

    /// Robin data for every functional, from the analytic local limit.
    pub fn data_vector(&self, case: &ManufacturedCase, t: f64) -> Vec<f64> {
        self.functionals().iter().map(|f| f.eval_case(case, self.beta, t)).collect()
    }

    /// Load vector with analytic Robin data; Dirichlet entries hold `u_D`.
    pub fn rhs(&self, case: &ManufacturedCase, t: f64) -> Vec<f64> {
        self.rhs_with_data(case, t, &self.data_vector(case, t))
    }

    /// Load vector with externally supplied Robin data.
    pub fn rhs_with_data(&self, case: &ManufacturedCase, t: f64, data: &[f64]) -> Vec<f64> {
        let inj = self.sigma1.inject.matvec(data);
        let mut b: Vec<f64> = (0..self.len())
            .map(|i| self.mass[i] * (case.f)(self.cloud.points[i], t) + inj[i])
            .collect();
        for &i in &self.dirichlet {
            b[i] = case.dirichlet(self.cloud.points[i], t);
        }
        b
    }

    pub fn initial_state(&self, case: &ManufacturedCase) -> Vec<f64> {
        self.cloud.points.iter().map(|&x| case.initial(x)).collect()
    }

    pub fn exact_state(&self, case: &ManufacturedCase, t: f64) -> Vec<f64> {
        self.cloud.points.iter().map(|&x| (case.u)(x, t)).collect()
    }
}

/// `assemble_rhs` under its operation name.
pub fn assemble_rhs(system: &NonlocalSystem, case: &ManufacturedCase, t: f64) -> Vec<f64> {
    system.rhs(case, t)
}

/// Factorized backward-Euler step matrix for repeated solves.
#[derive(Debug, Clone)]
pub struct NonlocalSolver {
    pub dt: f64,
    lu: BandLu,
}

impl NonlocalSolver {
    pub fn new(system: &NonlocalSystem, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        Ok(NonlocalSolver { dt, lu: BandLu::factor(&system.implicit_matrix(dt))? })
    }

    /// Solves `(M/Δt + A)u = M/Δt·u_prev + rhs` (Dirichlet rows take `rhs`).
    pub fn step(&self, system: &NonlocalSystem, prev: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
        let mut b: Vec<f64> = (0..system.len()).map(|i| system.mass[i] / self.dt * prev[i] + rhs[i]).collect();
        for &i in &system.dirichlet {
            b[i] = rhs[i];
        }
        self.lu.solve(&b)
    }
}

/// One backward-Euler step with analytic data at `t_next`.
pub fn step_backward_euler(system: &NonlocalSystem, state: &[f64], case: &ManufacturedCase, t_next: f64, dt: f64) -> Result<Vec<f64>> {
    let solver = NonlocalSolver::new(system, dt)?;
    solver.step(system, state, &system.rhs(case, t_next))
}

/// Standalone run with analytic Robin data up to `t_end`; returns the final
/// state and the number of steps.
pub fn run_standalone(system: &NonlocalSystem, case: &ManufacturedCase, dt: f64, t_end: f64) -> Result<(Vec<f64>, usize)> {
    let steps = (t_end / dt).round().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let solver = NonlocalSolver::new(system, dt)?;
    let mut u = system.initial_state(case);
    for k in 1..=steps {
        let t = k as f64 * dt;
        u = solver.step(system, &u, &system.rhs(case, t))?;
    }
    Ok((u, steps))
}
