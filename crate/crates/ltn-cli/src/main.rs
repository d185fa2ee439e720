use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ltn_heat::harness::{
    case_list, output_path, run_convergence, run_patch_tests, run_stability_sweep, BetaRule, ConvergenceTable,
    ExperimentConfig, ExperimentId, Variant,
};
use ltn_heat::transfer::GradientMode;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ltn", about = "Local-to-nonlocal coupled heat experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Refinement study of the standalone nonlocal boundary treatment.
    BcConvergence(Common),
    /// Standalone and coupled patch tests.
    PatchTest(PatchArgs),
    /// Refinement study of the coupled problem.
    Couple(Common),
    /// Amplification factor against the Robin coefficient on coarse grids.
    StabilitySweep(SweepArgs),
    /// Lists the registered experiments.
    CaseList,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML experiment file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    variant: Option<String>,
    /// Comma-separated grid spacings.
    #[arg(long, value_delimiter = ',')]
    h: Option<Vec<f64>>,
    /// Horizon to spacing ratio.
    #[arg(long)]
    ratio: Option<f64>,
    /// `zero`, a constant, `c/h`, or `auto`.
    #[arg(long)]
    beta: Option<String>,
    /// Time step as a multiple of h².
    #[arg(long = "dt-coef")]
    dt_coef: Option<f64>,
    #[arg(long = "T")]
    t_final: Option<f64>,
    /// Normal derivative extraction: `mls` or `element`.
    #[arg(long)]
    gradient: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PatchArgs {
    #[arg(long, default_value_t = 0.05)]
    h: f64,
    /// β of the standalone patches.
    #[arg(long, default_value_t = 10.0)]
    beta: f64,
    /// β of the coupled linear patch.
    #[arg(long = "beta-coupled", default_value_t = 6.0)]
    beta_coupled: f64,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Spacings of the coupled quadratic table.
    #[arg(long = "quadratic-h", value_delimiter = ',', default_value = "0.1,0.05,0.025,0.0125")]
    quadratic_h: Vec<f64>,
    /// β on the coarsest quadratic grid, scaled as β₀h₀/h.
    #[arg(long = "beta0", default_value_t = 3.0)]
    beta0: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Explicit comma-separated β grid (default: coarse geometric grid plus
    /// refinement).
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
}

fn config(c: &Common, default_id: ExperimentId) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            ExperimentConfig::from_toml(&text)?
        }
        None => {
            let id = match &c.case {
                Some(s) => ExperimentId::parse(s)?,
                None => default_id,
            };
            let v = match &c.variant {
                Some(s) => Variant::parse(s)?,
                None => Variant::Homogeneous,
            };
            ExperimentConfig::defaults(id, v)
        }
    };
    if c.config.is_some() {
        if let Some(s) = &c.case {
            cfg.id = ExperimentId::parse(s)?;
        }
        if let Some(s) = &c.variant {
            cfg.variant = Variant::parse(s)?;
        }
    }
    if let Some(h) = &c.h {
        cfg.h = h.clone();
    }
    if let Some(r) = c.ratio {
        cfg.ratio = r;
    }
    if let Some(b) = &c.beta {
        cfg.beta = BetaRule::parse(b)?;
    }
    if let Some(d) = c.dt_coef {
        cfg.dt_coef = d;
    }
    if let Some(t) = c.t_final {
        cfg.t_final = t;
    }
    if let Some(g) = &c.gradient {
        cfg.gradient = match g.as_str() {
            "mls" => GradientMode::Mls,
            "element" => GradientMode::Element,
            _ => bail!("unknown gradient mode {g:?}"),
        };
    }
    if let Some(o) = &c.out {
        cfg.out = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_table(t: &ConvergenceTable) -> Result<()> {
    t.write_csv(std::io::stdout().lock())?;
    let s = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.3}"));
    println!("# slope_inf = {}, slope_l2 = {}", s(t.slope_inf), s(t.slope_l2));
    if let Some((b, h)) = t.beta0 {
        println!("# coarse optimum beta0 = {b} at h0 = {h}");
    }
    Ok(())
}

fn save_table(t: &ConvergenceTable, cfg: &ExperimentConfig, stem: &str) -> Result<()> {
    if let Some(dir) = &cfg.out {
        let csv = format!("{stem}.csv");
        t.write_csv(BufWriter::new(File::create(output_path(dir, &csv)?)?))?;
        std::fs::write(output_path(dir, &format!("{stem}.gp"))?, t.gnuplot_script(&csv))?;
        std::fs::write(output_path(dir, &format!("{stem}.json"))?, serde_json::to_string_pretty(t)?)?;
    }
    Ok(())
}

/// Checks the configured thresholds; returns the failures.
fn check_table(t: &ConvergenceTable, cfg: &ExperimentConfig) -> Vec<String> {
    let th = &cfg.thresholds;
    let mut fails = Vec::new();
    if let Some(m) = th.min_slope_inf {
        if !t.slope_inf.is_some_and(|s| s >= m) {
            fails.push(format!("slope_inf {:?} < {m}", t.slope_inf));
        }
    }
    if let Some(m) = th.min_slope_l2 {
        if !t.slope_l2.is_some_and(|s| s >= m) {
            fails.push(format!("slope_l2 {:?} < {m}", t.slope_l2));
        }
    }
    if let Some(m) = th.max_err_inf {
        for r in &t.rows {
            if !(r.err_inf() <= m) {
                fails.push(format!("err_inf {} > {m} at h = {}", r.err_inf(), r.h));
            }
        }
    }
    if let Some(d) = th.expect_divergence {
        let any = t.rows.iter().any(|r| r.diverged);
        if any != d {
            fails.push(format!("divergence expected = {d}, observed = {any}"));
        }
    }
    fails
}

fn finish(fails: Vec<String>) -> ExitCode {
    if fails.is_empty() {
        ExitCode::SUCCESS
    } else {
        for f in &fails {
            eprintln!("threshold failed: {f}");
        }
        ExitCode::FAILURE
    }
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::CaseList => {
            for line in case_list() {
                println!("{line}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::BcConvergence(c) => {
            let cfg = config(&c, ExperimentId::BcSquare)?;
            if !cfg.id.is_boundary_test() {
                bail!("{} is a coupled experiment; use `couple`", cfg.id);
            }
            let t = run_convergence(&cfg)?;
            print_table(&t)?;
            save_table(&t, &cfg, &format!("{}-convergence", cfg.id))?;
            Ok(finish(check_table(&t, &cfg)))
        }
        Command::Couple(c) => {
            let cfg = config(&c, ExperimentId::LtnLine)?;
            if cfg.id.is_boundary_test() {
                bail!("{} is a standalone experiment; use `bc-convergence`", cfg.id);
            }
            let t = run_convergence(&cfg)?;
            print_table(&t)?;
            save_table(&t, &cfg, &format!("{}-{}", cfg.id, cfg.variant))?;
            Ok(finish(check_table(&t, &cfg)))
        }
        Command::PatchTest(p) => {
            let rep = run_patch_tests(p.h, p.beta, p.beta_coupled, p.steps, &p.quadratic_h, p.beta0)?;
            println!("standalone linear patch    max error = {:e}", rep.standalone_linear);
            println!("standalone quadratic patch max error = {:e}", rep.standalone_quadratic);
            println!("coupled linear patch       max error = {:e}", rep.coupled_linear);
            println!("coupled quadratic patch (linear elements, MLS extraction):");
            print_table(&rep.quadratic)?;
            println!("coupled quadratic patch (linear elements, element-gradient extraction):");
            print_table(&rep.quadratic_element)?;
            if let Some(dir) = &p.out {
                std::fs::write(output_path(dir, "patch.json")?, serde_json::to_string_pretty(&rep)?)?;
                rep.quadratic.write_csv(BufWriter::new(File::create(output_path(dir, "patch-quadratic.csv")?)?))?;
                rep.quadratic_element.write_csv(BufWriter::new(File::create(output_path(dir, "patch-quadratic-element.csv")?)?))?;
            }
            let mut fails = Vec::new();
            for (name, v) in [
                ("standalone linear", rep.standalone_linear),
                ("standalone quadratic", rep.standalone_quadratic),
                ("coupled linear", rep.coupled_linear),
            ] {
                if !(v <= 1e-11) {
                    fails.push(format!("{name} patch error {v:e} > 1e-11"));
                }
            }
            Ok(finish(fails))
        }
        Command::StabilitySweep(s) => {
            let mut c = s.common.clone();
            if c.h.is_none() && c.config.is_none() {
                c.h = Some(vec![0.1, 0.05]);
            }
            let cfg = config(&c, ExperimentId::LtnLine)?;
            let reports = run_stability_sweep(&cfg, s.betas.as_deref())?;
            let mut fails = Vec::new();
            for r in &reports {
                println!("{}", serde_json::to_string(&r.summary_json())?);
                if let Some(dir) = &cfg.out {
                    let stem = format!("{}-{}-h{}", cfg.id, cfg.variant, r.h);
                    r.write_csv(BufWriter::new(File::create(output_path(dir, &format!("{stem}.csv"))?)?))?;
                    std::fs::write(output_path(dir, &format!("{stem}.json"))?, serde_json::to_string_pretty(&r.summary_json())?)?;
                }
            }
            if let (Some([lo, hi]), Some(r)) = (cfg.thresholds.beta_star, reports.first()) {
                if !(r.beta_star >= lo && r.beta_star <= hi) {
                    fails.push(format!("beta_star {} outside [{lo}, {hi}]", r.beta_star));
                }
            }
            if reports.len() >= 2 {
                let (a, b) = (&reports[0], &reports[1]);
                println!("# beta* ratio {:.3} vs spacing ratio {:.3}", b.beta_star / a.beta_star, a.h / b.h);
            }
            Ok(finish(fails))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
