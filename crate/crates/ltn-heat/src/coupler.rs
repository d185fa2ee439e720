//! Explicit partitioned coupling: the nonlocal side takes lagged Robin data
//! from the local solution, then the local side takes the current nonlocal
//! trace as Dirichlet data on the interface.

use crate::error::{Error, Result};
use crate::fem::{FemSolver, FemSystem};
use crate::linalg::{max_abs, CsrMatrix};
use crate::nonlocal::{ManufacturedCase, NonlocalSolver, NonlocalSystem};
use crate::transfer::{build_dirichlet_trace, build_robin_extraction, GradientMode, RobinExtraction};
use serde::Serialize;
use std::io::Write;

/// Manufactured data for the two subdomains of a coupled run.
#[derive(Debug, Clone, Copy)]
pub struct CasePair {
    pub nonlocal: ManufacturedCase,
    pub local: ManufacturedCase,
}

/// Threshold on `max |state|` above which a run counts as divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct CoupledSystem {
    pub nonlocal: NonlocalSystem,
    pub local: FemSystem,
    pub extraction: RobinExtraction,
    /// Interface nodes × cloud points.
    pub trace: CsrMatrix,
    pub beta: f64,
    pub dt: f64,
    nl_solver: NonlocalSolver,
    l_solver: FemSolver,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub u_nl: Vec<f64>,
    pub u_l: Vec<f64>,
    pub t: f64,
    pub k: usize,
}

impl CoupledSystem {
    /// Builds transfer operators and factorizes both step matrices. The β
    /// stored in `nonlocal` is replaced by `beta`.
    pub fn new(nonlocal: &NonlocalSystem, local: &FemSystem, beta: f64, dt: f64, mode: GradientMode) -> Result<Self> {
        let delta = nonlocal.cloud.delta;
        let radius = delta.max(3.0 * local.mesh.h);
        let extraction = build_robin_extraction(&local.mesh, nonlocal.functionals(), radius, mode)?;
        let trace = build_dirichlet_trace(&nonlocal.cloud, &local.mesh, delta)?;
        Self::from_parts(nonlocal.with_beta(beta), local.clone(), extraction, trace, dt)
    }

    fn from_parts(nonlocal: NonlocalSystem, local: FemSystem, extraction: RobinExtraction, trace: CsrMatrix, dt: f64) -> Result<Self> {
        let nl_solver = NonlocalSolver::new(&nonlocal, dt)?;
        let l_solver = FemSolver::new(&local, dt)?;
        Ok(CoupledSystem { beta: nonlocal.beta, nonlocal, local, extraction, trace, dt, nl_solver, l_solver })
    }

    /// Same operators with another Robin coefficient (refactorizes the
    /// nonlocal step matrix only).
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        let nonlocal = self.nonlocal.with_beta(beta);
        let nl_solver = NonlocalSolver::new(&nonlocal, self.dt)?;
        Ok(CoupledSystem { nonlocal, beta, nl_solver, ..self.clone() })
    }

    pub fn initial_state(&self, cases: &CasePair) -> CoupledState {
        CoupledState {
            u_nl: self.nonlocal.initial_state(&cases.nonlocal),
            u_l: self.local.nodal(|x| cases.local.initial(x)),
            t: 0.0,
            k: 0,
        }
    }

    pub fn zero_state(&self) -> CoupledState {
        CoupledState { u_nl: vec![0.0; self.nonlocal.len()], u_l: vec![0.0; self.local.len()], t: 0.0, k: 0 }
    }
}

fn staged<T>(stage: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Step { stage, source: Box::new(e) })
}

/// Executes one coupled step. With `cases = None` all loads and boundary
/// data are zero (the homogeneous iteration).
pub fn coupled_step(sys: &CoupledSystem, state: &CoupledState, cases: Option<&CasePair>) -> Result<CoupledState> {
    let t = state.t + sys.dt;
    // (a) lagged Robin data from the local solution
    let g = sys.extraction.apply(sys.beta, &state.u_l);
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Step { stage: "a", source: Box::new(Error::Dimension("non-finite Robin data".into())) });
    }
    // (b) nonlocal solve
    let nl = &sys.nonlocal;
    let rhs = match cases {
        Some(c) => nl.rhs_with_data(&c.nonlocal, t, &g),
        None => {
            let mut b = nl.sigma1.inject.matvec(&g);
            for &i in &nl.dirichlet {
                b[i] = 0.0;
            }
            b
        }
    };
    let u_nl = staged("b", sys.nl_solver.step(nl, &state.u_nl, &rhs))?;
    // (c) interface trace
    let gamma = sys.trace.matvec(&u_nl);
    // (d) local solve
    let loc = &sys.local;
    let mut on_gamma = vec![usize::MAX; loc.len()];
    for (k, &j) in loc.interface.iter().enumerate() {
        on_gamma[j] = k;
    }
    let load = match cases {
        Some(c) => loc.load(|x| (c.local.f)(x, t)),
        None => vec![0.0; loc.len()],
    };
    let boundary = |j: usize| {
        if on_gamma[j] != usize::MAX {
            gamma[on_gamma[j]]
        } else {
            cases.map_or(0.0, |c| c.local.dirichlet(loc.mesh.nodes[j], t))
        }
    };
    let u_l = staged("d", sys.l_solver.step(loc, &state.u_l, &load, boundary))?;
    Ok(CoupledState { u_nl, u_l, t, k: state.k + 1 })
}

/// Errors against the analytic limits at the final time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorReport {
    pub err_inf_nl: f64,
    pub err_inf_l: f64,
    pub err_l2_nl: f64,
    pub err_l2_l: f64,
    /// Root mean square of the nonlocal pointwise errors.
    pub err_rms_nl: f64,
}

impl ErrorReport {
    pub fn err_inf(&self) -> f64 {
        self.err_inf_nl.max(self.err_inf_l)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub h: f64,
    pub delta: f64,
    pub dt: f64,
    pub beta: f64,
    pub steps: usize,
    pub t_final: f64,
    pub errors: ErrorReport,
    pub diverged: bool,
    /// First step at which the state blew up.
    pub diverged_at: Option<usize>,
    /// `max |state|` after each step.
    pub history: Vec<f64>,
}

impl RunReport {
    pub const CSV_HEADER: &'static str = "h,delta,dt,beta,err_inf_nl,err_inf_l,err_l2_nl,err_l2_l,err_rms_nl,diverged";

    pub fn csv_row(&self) -> String {
        let e = &self.errors;
        format!(
            "{},{},{},{},{:e},{:e},{:e},{:e},{:e},{}",
            self.h, self.delta, self.dt, self.beta, e.err_inf_nl, e.err_inf_l, e.err_l2_nl, e.err_l2_l, e.err_rms_nl, self.diverged
        )
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        writeln!(w, "{}", self.csv_row())?;
        Ok(())
    }
}

/// Errors of a state against the analytic limits at `state.t`.
pub fn state_errors(sys: &CoupledSystem, state: &CoupledState, cases: &CasePair) -> ErrorReport {
    let h = sys.nonlocal.cloud.h;
    let e_nl: Vec<f64> = sys
        .nonlocal
        .cloud
        .points
        .iter()
        .zip(&state.u_nl)
        .map(|(&x, u)| u - (cases.nonlocal.u)(x, state.t))
        .collect();
    let e_l: Vec<f64> = sys.local.mesh.nodes.iter().zip(&state.u_l).map(|(&x, u)| u - (cases.local.u)(x, state.t)).collect();
    let sq = e_nl.iter().map(|e| e * e).sum::<f64>();
    ErrorReport {
        err_inf_nl: max_abs(&e_nl),
        err_inf_l: max_abs(&e_l),
        err_l2_nl: (sq * h * h).sqrt(),
        err_l2_l: sys.local.l2_norm(&e_l),
        err_rms_nl: (sq / e_nl.len() as f64).sqrt(),
    }
}

fn blown_up(s: &CoupledState) -> Option<f64> {
    let m = max_abs(&s.u_nl).max(max_abs(&s.u_l));
    if !m.is_finite() || m > DIVERGENCE_LIMIT || s.u_nl.iter().chain(&s.u_l).any(|v| !v.is_finite()) {
        None
    } else {
        Some(m)
    }
}

/// Runs from the initial data to `t_end` (rounded to whole steps). A blown
/// up state ends the run early with `diverged` set; errors are then
/// infinite.
pub fn run_coupled(sys: &CoupledSystem, cases: &CasePair, t_end: f64) -> Result<RunReport> {
    let steps = (t_end / sys.dt).round().max(1.0) as usize;
    let mut state = sys.initial_state(cases);
    let mut history = Vec::with_capacity(steps);
    let mut diverged_at = None;
    for _ in 0..steps {
        state = coupled_step(sys, &state, Some(cases))?;
        match blown_up(&state) {
            Some(m) => history.push(m),
            None => {
                diverged_at = Some(state.k);
                history.push(f64::INFINITY);
                break;
            }
        }
    }
    let errors = if diverged_at.is_some() {
        ErrorReport { err_inf_nl: f64::INFINITY, err_inf_l: f64::INFINITY, err_l2_nl: f64::INFINITY, err_l2_l: f64::INFINITY, err_rms_nl: f64::INFINITY }
    } else {
        state_errors(sys, &state, cases)
    };
    if let Some(k) = diverged_at {
        log::warn!("coupled run with beta = {} diverged at step {k}", sys.beta);
    }
    Ok(RunReport {
        h: sys.nonlocal.cloud.h,
        delta: sys.nonlocal.cloud.delta,
        dt: sys.dt,
        beta: sys.beta,
        steps,
        t_final: state.t,
        errors,
        diverged: diverged_at.is_some(),
        diverged_at,
        history,
    })
}

/// Runs the homogeneous iteration from `state` for up to `steps` steps and
/// returns `max |state|` after each, stopping at blow-up.
pub fn run_homogeneous(sys: &CoupledSystem, mut state: CoupledState, steps: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        state = coupled_step(sys, &state, None)?;
        match blown_up(&state) {
            Some(m) => out.push(m),
            None => {
                out.push(f64::INFINITY);
                break;
            }
        }
    }
    Ok(out)
}

/// Writes `x,y,u` rows for both subdomains.
pub fn write_snapshot<W: Write>(sys: &CoupledSystem, state: &CoupledState, mut w: W) -> Result<()> {
    writeln!(w, "x,y,u")?;
    for (p, u) in sys.nonlocal.cloud.points.iter().zip(&state.u_nl) {
        writeln!(w, "{},{},{}", p.x, p.y, u)?;
    }
    for (p, u) in sys.local.mesh.nodes.iter().zip(&state.u_l) {
        writeln!(w, "{},{},{}", p.x, p.y, u)?;
    }
    Ok(())
}
