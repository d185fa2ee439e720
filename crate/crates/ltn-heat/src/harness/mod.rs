//! Experiment registry and drivers: refinement studies, patch tests and
//! Robin-coefficient sweeps, with CSV/JSON output.

mod cases;

pub use cases::{g_as_printed, registry_case, ExperimentId, Variant};

use crate::coupler::{run_coupled, CasePair, CoupledSystem, RunReport};
use crate::error::{Error, Result};
use crate::fem::{assemble_fem, FemSystem};
use crate::geometry::{generate_mesh, generate_point_cloud, DomainSpec, Vec2};
use crate::kernels::{ContourKernelSpec, KernelFamily, KernelSpec};
use crate::linalg::{max_abs, DENSE_LIMIT};
use crate::nonlocal::{assemble_nonlocal, run_standalone, NonlocalSystem};
use crate::stability::{optimize_beta, scaled_beta, AmplificationReport, StateLayout};
use crate::transfer::GradientMode;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

/// How β is chosen for each grid spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaRule {
    Zero,
    Const(f64),
    /// `c/h`.
    OverH(f64),
    /// Optimize on the coarsest grid, then scale as `β₀h₀/h`.
    Auto,
}

impl BetaRule {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "zero" || s == "0" {
            return Ok(BetaRule::Zero);
        }
        if s == "auto" {
            return Ok(BetaRule::Auto);
        }
        if let Some(c) = s.strip_suffix("/h") {
            return c.trim().parse().map(BetaRule::OverH).map_err(|_| Error::Config(format!("bad beta rule {s:?}")));
        }
        s.parse().map(BetaRule::Const).map_err(|_| Error::Config(format!("bad beta rule {s:?}")))
    }

    /// β at spacing `h`; `auto` needs the coarse-grid optimum `(β₀, h₀)`.
    pub fn at(&self, h: f64, auto: Option<(f64, f64)>) -> f64 {
        match *self {
            BetaRule::Zero => 0.0,
            BetaRule::Const(c) => c,
            BetaRule::OverH(c) => c / h,
            BetaRule::Auto => {
                let (b0, h0) = auto.expect("auto beta needs a coarse optimum");
                scaled_beta(b0, h0, h)
            }
        }
    }
}

/// Acceptance thresholds checked by the CLI; any failure makes the exit
/// status nonzero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub min_slope_inf: Option<f64>,
    pub min_slope_l2: Option<f64>,
    pub max_err_inf: Option<f64>,
    pub beta_star: Option<[f64; 2]>,
    pub expect_divergence: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: ExperimentId,
    #[serde(default)]
    pub variant: Variant,
    pub h: Vec<f64>,
    pub ratio: f64,
    pub dt_coef: f64,
    pub beta: BetaRule,
    #[serde(default = "default_kernel")]
    pub kernel: KernelFamily,
    #[serde(rename = "T", default = "default_t")]
    pub t_final: f64,
    #[serde(default)]
    pub gradient: GradientMode,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub thresholds: Thresholds,
}

fn default_kernel() -> KernelFamily {
    KernelFamily::J1Constant
}

fn default_t() -> f64 {
    1.0
}

impl ExperimentConfig {
    /// Settings used for an experiment unless overridden: horizon ratio
    /// 3.5 for the cross and 3.9 otherwise, `Δt = 100h²` for the boundary
    /// tests and the cross coupling, `10h²` for the other coupled tests.
    pub fn defaults(id: ExperimentId, variant: Variant) -> Self {
        use ExperimentId::*;
        let ratio = if matches!(id, BcCross | LtnCross) { 3.5 } else { 3.9 };
        let dt_coef = if matches!(id, BcSquare | BcCircle | BcCross | LtnCross) { 100.0 } else { 10.0 };
        let beta = match id {
            BcSquare | BcCircle | BcCross => BetaRule::Zero,
            PatchLinear | PatchQuadratic => BetaRule::OverH(0.3),
            LtnLine if variant == Variant::Homogeneous => BetaRule::OverH(0.3),
            LtnLine => BetaRule::OverH(0.4),
            LtnCircle => BetaRule::Zero,
            LtnCross => BetaRule::OverH(0.2),
        };
        ExperimentConfig {
            id,
            variant,
            h: vec![0.1, 0.05, 0.025, 0.0125],
            ratio,
            dt_coef,
            beta,
            kernel: KernelFamily::J1Constant,
            t_final: 1.0,
            gradient: GradientMode::Mls,
            out: None,
            thresholds: Thresholds::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ratio < 2.0 {
            return Err(Error::Config(format!("horizon ratio {} < 2", self.ratio)));
        }
        if !(self.dt_coef > 0.0) {
            return Err(Error::Config(format!("time-step coefficient must be positive, got {}", self.dt_coef)));
        }
        if self.h.is_empty() || self.h.iter().any(|h| !(*h > 0.0)) {
            return Err(Error::Config("grid spacings must be positive".into()));
        }
        if !(self.t_final > 0.0) {
            return Err(Error::Config("final time must be positive".into()));
        }
        registry_case(self.id, self.variant).map(|_| ())
    }

    pub fn dt(&self, h: f64) -> f64 {
        self.dt_coef * h * h
    }
}

/// Nonlocal subdomain of an experiment.
pub fn nonlocal_domain(id: ExperimentId) -> DomainSpec {
    use ExperimentId::*;
    match id {
        BcSquare | LtnLine | PatchLinear | PatchQuadratic => {
            DomainSpec::square_nonlocal(Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0))
        }
        BcCircle | LtnCircle => DomainSpec::disk_nonlocal(Vec2::zeros(), 1.0, Vec2::new(0.0, -1.0)),
        BcCross | LtnCross => DomainSpec::cross_nonlocal(0.5, 1.0, Vec2::new(-1.0, -0.5)),
    }
}

/// Local subdomain of a coupled experiment.
pub fn local_domain(id: ExperimentId) -> Option<DomainSpec> {
    use ExperimentId::*;
    match id {
        LtnLine | PatchLinear | PatchQuadratic => {
            Some(DomainSpec::rectangle_local(Vec2::new(1.0, 0.0), Vec2::new(2.0, 1.0)))
        }
        LtnCircle | LtnCross => {
            let inner = nonlocal_domain(id);
            Some(DomainSpec::complement_local(Vec2::new(-2.0, -2.0), Vec2::new(2.0, 2.0), &inner))
        }
        _ => None,
    }
}

/// Assembles the nonlocal subproblem of an experiment at spacing `h`.
pub fn build_nonlocal(id: ExperimentId, h: f64, ratio: f64, family: KernelFamily, alpha: f64, beta: f64) -> Result<NonlocalSystem> {
    let delta = ratio * h;
    let domain = nonlocal_domain(id);
    let cloud = generate_point_cloud(&domain, h, delta)?;
    let kernel = KernelSpec::new(family, delta)?;
    let ck = ContourKernelSpec::new(delta)?;
    assemble_nonlocal(&domain, &cloud, &kernel, &ck, alpha, beta)
}

pub fn build_local(id: ExperimentId, h: f64, alpha: f64) -> Result<FemSystem> {
    let domain = local_domain(id).ok_or_else(|| Error::Config(format!("{id} has no local subdomain")))?;
    assemble_fem(&generate_mesh(&domain, h)?, alpha)
}

/// Coupled system of an experiment at spacing `h`.
pub fn build_coupled(cfg: &ExperimentConfig, h: f64, beta: f64) -> Result<CoupledSystem> {
    let cases = registry_case(cfg.id, cfg.variant)?;
    let nl = build_nonlocal(cfg.id, h, cfg.ratio, cfg.kernel, cases.nonlocal.alpha, beta)?;
    let loc = build_local(cfg.id, h, cases.local.alpha)?;
    CoupledSystem::new(&nl, &loc, beta, cfg.dt(h), cfg.gradient)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub delta: f64,
    pub dt: f64,
    pub beta: f64,
    pub err_inf_nl: f64,
    pub err_inf_l: f64,
    pub err_l2_nl: f64,
    pub err_l2_l: f64,
    pub err_rms_nl: f64,
    /// Rates against the previous row, `log(e_prev/e)/log(h_prev/h)`.
    pub rate_inf: Option<f64>,
    pub rate_l2: Option<f64>,
    pub diverged: bool,
}

impl ConvergenceRow {
    /// Combined maximum error over both subdomains.
    pub fn err_inf(&self) -> f64 {
        if self.err_inf_l.is_nan() {
            self.err_inf_nl
        } else {
            self.err_inf_nl.max(self.err_inf_l)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub id: ExperimentId,
    pub variant: Variant,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log₁₀ err_inf` against `log₁₀ h`.
    pub slope_inf: Option<f64>,
    /// Same for the nonlocal L² error.
    pub slope_l2: Option<f64>,
    /// Coarse-grid optimum used by the `auto` rule.
    pub beta0: Option<(f64, f64)>,
}

impl ConvergenceTable {
    pub const CSV_HEADER: &'static str = "h,delta,dt,beta,err_inf_nl,err_inf_l,err_l2_nl,err_l2_l,err_rms_nl,rate_inf,rate_l2,diverged";

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        let opt = |r: Option<f64>| r.map_or(String::new(), |v| format!("{v:.4}"));
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{:e},{:e},{:e},{:e},{:e},{},{},{}",
                r.h,
                r.delta,
                r.dt,
                r.beta,
                r.err_inf_nl,
                r.err_inf_l,
                r.err_l2_nl,
                r.err_l2_l,
                r.err_rms_nl,
                opt(r.rate_inf),
                opt(r.rate_l2),
                r.diverged
            )?;
        }
        Ok(())
    }

    /// A gnuplot script drawing both error norms against `h` on log axes.
    pub fn gnuplot_script(&self, csv_name: &str) -> String {
        format!(
            "set datafile separator ','\nset logscale xy\nset key top left\nset xlabel 'h'\nset ylabel 'error'\n\
             plot '{csv_name}' every ::1 using 1:5 with linespoints title 'L-inf (nonlocal)', \\\n     \
             '{csv_name}' every ::1 using 1:7 with linespoints title 'L2 (nonlocal)'\n"
        )
    }
}

/// Least-squares slope of `log₁₀ y` against `log₁₀ x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && b.is_finite())
        .map(|(a, b)| (a.log10(), b.log10()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn rate(prev: &ConvergenceRow, e_prev: f64, r: &ConvergenceRow, e: f64) -> Option<f64> {
    (e_prev.is_finite() && e.is_finite() && e > 0.0 && e_prev > 0.0).then(|| (e_prev / e).ln() / (prev.h / r.h).ln())
}

/// Maximum, `h`-weighted L² and RMS errors of a standalone nonlocal run.
pub fn standalone_errors(sys: &NonlocalSystem, u: &[f64], cases: &CasePair, t: f64) -> (f64, f64, f64) {
    let e: Vec<f64> = sys.cloud.points.iter().zip(u).map(|(&x, v)| v - (cases.nonlocal.u)(x, t)).collect();
    let h = sys.cloud.h;
    let sq = e.iter().map(|v| v * v).sum::<f64>();
    (max_abs(&e), (sq * h * h).sqrt(), (sq / e.len() as f64).sqrt())
}

/// One standalone nonlocal run.
pub fn run_boundary_test(cfg: &ExperimentConfig, h: f64, beta: f64) -> Result<ConvergenceRow> {
    let cases = registry_case(cfg.id, cfg.variant)?;
    let sys = build_nonlocal(cfg.id, h, cfg.ratio, cfg.kernel, cases.nonlocal.alpha, beta)?;
    let dt = cfg.dt(h);
    let (u, steps) = run_standalone(&sys, &cases.nonlocal, dt, cfg.t_final)?;
    let (ei, e2, rms) = standalone_errors(&sys, &u, &cases, cfg.t_final);
    Ok(ConvergenceRow {
        h,
        delta: sys.cloud.delta,
        dt: cfg.t_final / steps as f64,
        beta,
        err_inf_nl: ei,
        err_inf_l: f64::NAN,
        err_l2_nl: e2,
        err_l2_l: f64::NAN,
        err_rms_nl: rms,
        rate_inf: None,
        rate_l2: None,
        diverged: !ei.is_finite(),
    })
}

/// One coupled run.
pub fn run_coupled_case(cfg: &ExperimentConfig, h: f64, beta: f64) -> Result<RunReport> {
    let cases = registry_case(cfg.id, cfg.variant)?;
    let sys = build_coupled(cfg, h, beta)?;
    run_coupled(&sys, &cases, cfg.t_final)
}

fn row_from_run(r: &RunReport) -> ConvergenceRow {
    ConvergenceRow {
        h: r.h,
        delta: r.delta,
        dt: r.dt,
        beta: r.beta,
        err_inf_nl: r.errors.err_inf_nl,
        err_inf_l: r.errors.err_inf_l,
        err_l2_nl: r.errors.err_l2_nl,
        err_l2_l: r.errors.err_l2_l,
        err_rms_nl: r.errors.err_rms_nl,
        rate_inf: None,
        rate_l2: None,
        diverged: r.diverged,
    }
}

/// Coarse-grid optimum `(β₀, h₀)` for the `auto` rule.
pub fn auto_beta(cfg: &ExperimentConfig) -> Result<(f64, f64)> {
    let h0 = cfg.h.iter().copied().fold(0.0, f64::max);
    let sys = build_coupled(cfg, h0, 0.0)?;
    let rep = optimize_beta(&sys, None, cfg.id.name())?;
    Ok((rep.beta_star, h0))
}

/// Refinement study: one run per spacing, rates and fitted slopes.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceTable> {
    cfg.validate()?;
    let beta0 = match cfg.beta {
        BetaRule::Auto if !cfg.id.is_boundary_test() => Some(auto_beta(cfg)?),
        BetaRule::Auto => return Err(Error::Config("the auto beta rule needs a coupled experiment".into())),
        _ => None,
    };
    let mut hs = cfg.h.clone();
    hs.sort_by(|a, b| b.total_cmp(a));
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &h in &hs {
        let beta = cfg.beta.at(h, beta0);
        log::info!("{} {}: h = {h}, beta = {beta}", cfg.id, cfg.variant);
        let mut row = if cfg.id.is_boundary_test() {
            run_boundary_test(cfg, h, beta)?
        } else {
            row_from_run(&run_coupled_case(cfg, h, beta)?)
        };
        if let Some(prev) = rows.last() {
            row.rate_inf = rate(prev, prev.err_inf(), &row, row.err_inf());
            row.rate_l2 = rate(prev, prev.err_l2_nl, &row, row.err_l2_nl);
        }
        rows.push(row);
    }
    let stable: Vec<&ConvergenceRow> = rows.iter().filter(|r| !r.diverged).collect();
    let h: Vec<f64> = stable.iter().map(|r| r.h).collect();
    let slope_inf = fit_slope(&h, &stable.iter().map(|r| r.err_inf()).collect::<Vec<_>>());
    let slope_l2 = fit_slope(&h, &stable.iter().map(|r| r.err_l2_nl).collect::<Vec<_>>());
    Ok(ConvergenceTable { id: cfg.id, variant: cfg.variant, rows, slope_inf, slope_l2, beta0 })
}

#[derive(Debug, Clone, Serialize)]
pub struct PatchReport {
    pub standalone_linear: f64,
    pub standalone_quadratic: f64,
    pub coupled_linear: f64,
    /// Coupled quadratic table with MLS Robin extraction.
    pub quadratic: ConvergenceTable,
    /// Same with element-gradient extraction.
    pub quadratic_element: ConvergenceTable,
}

/// Patch tests: standalone linear and quadratic at `h`/`β`, the coupled
/// linear patch over `steps` steps, and the coupled quadratic table in
/// both extraction modes.
pub fn run_patch_tests(h: f64, beta_standalone: f64, beta_coupled: f64, steps: usize, quadratic_h: &[f64], beta0: f64) -> Result<PatchReport> {
    let standalone = |id: ExperimentId| -> Result<f64> {
        let cases = registry_case(id, Variant::Homogeneous)?;
        let sys = build_nonlocal(id, h, 3.9, KernelFamily::J1Constant, 1.0, beta_standalone)?;
        let dt = 100.0 * h * h;
        let (u, _) = run_standalone(&sys, &cases.nonlocal, dt, 1.0)?;
        Ok(standalone_errors(&sys, &u, &cases, 1.0).0)
    };
    let standalone_linear = standalone(ExperimentId::PatchLinear)?;
    let standalone_quadratic = standalone(ExperimentId::PatchQuadratic)?;

    let mut lin = ExperimentConfig::defaults(ExperimentId::PatchLinear, Variant::Homogeneous);
    lin.t_final = steps as f64 * lin.dt(h);
    let rep = run_coupled_case(&lin, h, beta_coupled)?;
    let coupled_linear = rep.errors.err_inf();

    let mut quad = ExperimentConfig::defaults(ExperimentId::PatchQuadratic, Variant::Homogeneous);
    quad.h = quadratic_h.to_vec();
    quad.beta = BetaRule::OverH(beta0 * quadratic_h.iter().copied().fold(0.0, f64::max));
    let quadratic = run_convergence(&quad)?;
    quad.gradient = GradientMode::Element;
    let quadratic_element = run_convergence(&quad)?;
    Ok(PatchReport { standalone_linear, standalone_quadratic, coupled_linear, quadratic, quadratic_element })
}

/// β sweeps on coarse grids, one report per spacing.
pub fn run_stability_sweep(cfg: &ExperimentConfig, grid: Option<&[f64]>) -> Result<Vec<AmplificationReport>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for &h in &cfg.h {
        let sys = build_coupled(cfg, h, 0.0)?;
        let dofs = StateLayout::of(&sys).len();
        if dofs > DENSE_LIMIT {
            return Err(Error::Config(format!(
                "{dofs} coupled unknowns at h = {h} exceed the dense limit {DENSE_LIMIT}; sweep a coarser grid \
                 and carry the optimum over with beta0*h0/h"
            )));
        }
        out.push(optimize_beta(&sys, grid, &format!("{} {} h={h}", cfg.id, cfg.variant))?);
    }
    Ok(out)
}

/// Creates `dir` and returns `dir/name`.
pub fn output_path(dir: &Path, name: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    Ok(dir.join(name))
}

/// Describes every registered experiment and its settings, one per line.
pub fn case_list() -> Vec<String> {
    let mut out = Vec::new();
    for id in ExperimentId::ALL {
        for &v in id.variants() {
            let c = registry_case(id, v).expect("registered");
            let d = ExperimentConfig::defaults(id, v);
            out.push(format!(
                "{id:<16} {v:<12} u_nl = {:<18} u_l = {:<18} alpha = ({}, {})  ratio = {}  dt = {}h^2",
                c.nonlocal.name, c.local.name, c.nonlocal.alpha, c.local.alpha, d.ratio, d.dt_coef
            ));
        }
    }
    out
}
