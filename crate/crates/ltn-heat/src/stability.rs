//! Amplification matrix of the homogeneous coupled iteration and the
//! spectral choice of the Robin coefficient.

use crate::coupler::CoupledSystem;
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues_dense, BandLu, CsrMatrix, DenseMatrix, DENSE_LIMIT};
use serde::Serialize;
use std::io::Write;

/// Reduced state layout: free nonlocal points, interior local nodes, then
/// interface local nodes.
#[derive(Debug, Clone)]
pub struct StateLayout {
    pub nonlocal: Vec<usize>,
    pub interior: Vec<usize>,
    pub interface: Vec<usize>,
}

impl StateLayout {
    pub fn of(sys: &CoupledSystem) -> Self {
        StateLayout {
            nonlocal: sys.nonlocal.unknowns.clone(),
            interior: sys.local.interior.clone(),
            interface: sys.local.interface.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.nonlocal.len() + self.interior.len() + self.interface.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Packs full nonlocal and local vectors.
    pub fn pack(&self, u_nl: &[f64], u_l: &[f64]) -> Vec<f64> {
        let mut s: Vec<f64> = self.nonlocal.iter().map(|&i| u_nl[i]).collect();
        s.extend(self.interior.iter().map(|&i| u_l[i]));
        s.extend(self.interface.iter().map(|&i| u_l[i]));
        s
    }

    /// Unpacks into full vectors with zeros on eliminated entries.
    pub fn unpack(&self, s: &[f64], n_nl: usize, n_l: usize) -> (Vec<f64>, Vec<f64>) {
        let mut u_nl = vec![0.0; n_nl];
        let mut u_l = vec![0.0; n_l];
        let (a, rest) = s.split_at(self.nonlocal.len());
        let (b, c) = rest.split_at(self.interior.len());
        for (&i, &v) in self.nonlocal.iter().zip(a) {
            u_nl[i] = v;
        }
        for (&i, &v) in self.interior.iter().zip(b) {
            u_l[i] = v;
        }
        for (&i, &v) in self.interface.iter().zip(c) {
            u_l[i] = v;
        }
        (u_nl, u_l)
    }
}

fn place(out: &mut Vec<(usize, usize, f64)>, m: &CsrMatrix, r0: usize, c0: usize) {
    out.extend(m.triplets().into_iter().map(|(i, j, v)| (r0 + i, c0 + j, v)));
}

/// Implicit and explicit block matrices `(L, R)` with `L s^k = R s^{k−1}`.
pub fn block_matrices(sys: &CoupledSystem) -> (CsrMatrix, CsrMatrix, StateLayout) {
    let lay = StateLayout::of(sys);
    let (n1, n2, n3) = (lay.nonlocal.len(), lay.interior.len(), lay.interface.len());
    let n = n1 + n2 + n3;
    let nl = &sys.nonlocal;
    let loc = &sys.local;
    let dt = sys.dt;
    let local_cols: Vec<usize> = lay.interior.iter().chain(&lay.interface).copied().collect();

    let mass_nl: Vec<f64> = lay.nonlocal.iter().map(|&i| nl.mass[i] / dt).collect();
    let a_nl = nl.operator().select(&lay.nonlocal, &lay.nonlocal);
    let step_l = loc.mass.scale(1.0 / dt).add_scaled(&loc.stiffness, 1.0);
    let robin = nl.sigma1.inject.matmul(&sys.extraction.robin_map(sys.beta));

    let mut lhs = Vec::new();
    place(&mut lhs, &CsrMatrix::from_diagonal(&mass_nl).add_scaled(&a_nl, 1.0), 0, 0);
    place(&mut lhs, &step_l.select(&lay.interior, &local_cols), n1, n1);
    place(&mut lhs, &sys.trace.select(&(0..n3).collect::<Vec<_>>(), &lay.nonlocal).scale(-1.0), n1 + n2, 0);
    place(&mut lhs, &CsrMatrix::identity(n3), n1 + n2, n1 + n2);

    let mut rhs = Vec::new();
    place(&mut rhs, &CsrMatrix::from_diagonal(&mass_nl), 0, 0);
    place(&mut rhs, &robin.select(&lay.nonlocal, &local_cols), 0, n1);
    place(&mut rhs, &loc.mass.scale(1.0 / dt).select(&lay.interior, &local_cols), n1, n1);

    (CsrMatrix::from_triplets(n, n, &lhs), CsrMatrix::from_triplets(n, n, &rhs), lay)
}

/// Dense amplification matrix `Λ = L⁻¹R`, built column by column.
pub fn build_lambda(sys: &CoupledSystem) -> Result<DenseMatrix> {
    build_lambda_with_limit(sys, DENSE_LIMIT)
}

pub fn build_lambda_with_limit(sys: &CoupledSystem, limit: usize) -> Result<DenseMatrix> {
    let (lhs, rhs, lay) = block_matrices(sys);
    let n = lay.len();
    if n > limit {
        return Err(Error::DenseLimit { dofs: n, limit });
    }
    let lu = BandLu::factor(&lhs)?;
    let rt = rhs.transpose();
    let mut lambda = DenseMatrix::zeros(n, n);
    let mut col = vec![0.0; n];
    for j in 0..n {
        col.iter_mut().for_each(|v| *v = 0.0);
        let (idx, vals) = rt.row(j);
        if idx.is_empty() {
            continue;
        }
        for (&i, &v) in idx.iter().zip(vals) {
            col[i] = v;
        }
        let x = lu.solve(&col)?;
        lambda.column_mut(j).copy_from_slice(&x);
    }
    Ok(lambda)
}

/// `max |λ_i|` of a dense matrix.
pub fn spectral_radius(lambda: &DenseMatrix) -> Result<f64> {
    let ev = eigenvalues_dense(lambda)?;
    Ok(ev.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Amplification factor of a coupled system.
pub fn amplification_factor(sys: &CoupledSystem) -> Result<f64> {
    spectral_radius(&build_lambda(sys)?)
}

/// `β₀·h₀/h`: carries a coarse-grid optimum to a finer grid.
pub fn scaled_beta(beta0: f64, h0: f64, h: f64) -> f64 {
    beta0 * (h0 / h)
}

#[derive(Debug, Clone, Serialize)]
pub struct AmplificationReport {
    pub label: String,
    pub h: f64,
    pub delta: f64,
    pub dt: f64,
    pub alpha_nl: f64,
    pub alpha_l: f64,
    pub dofs: usize,
    /// Sorted ascending.
    pub betas: Vec<f64>,
    pub rho: Vec<f64>,
    pub beta_star: f64,
    pub rho_star: f64,
    /// Grid intervals where `rho − 1` changes sign, located by linear
    /// interpolation.
    pub crossings: Vec<f64>,
}

impl AmplificationReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "beta,rho")?;
        for (b, r) in self.betas.iter().zip(&self.rho) {
            writeln!(w, "{b},{r}")?;
        }
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "label": self.label,
            "h": self.h,
            "delta": self.delta,
            "dt": self.dt,
            "beta_star": self.beta_star,
            "rho_star": self.rho_star,
            "crossings": self.crossings,
        })
    }
}

/// Default coarse grid: zero plus 24 geometric points on `[0.05/h, 50/h]`.
pub fn coarse_grid(h: f64) -> Vec<f64> {
    let (lo, hi) = (0.05 / h, 50.0 / h);
    let mut g = vec![0.0];
    g.extend((0..24).map(|k| lo * (hi / lo).powf(k as f64 / 23.0)));
    g
}

fn argmin(betas: &[f64], rho: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for i in 0..betas.len() {
        if !rho[i].is_finite() {
            continue;
        }
        best = match best {
            None => Some(i),
            Some(b) if rho[i] < rho[b] || (rho[i] == rho[b] && betas[i] < betas[b]) => Some(i),
            keep => keep,
        };
    }
    best
}

fn evaluate(factory: &dyn Fn(f64) -> Result<f64>, betas: &[f64]) -> Vec<f64> {
    betas
        .iter()
        .map(|&b| match factory(b) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("amplification factor at beta = {b} failed: {e}");
                f64::NAN
            }
        })
        .collect()
}

/// Evaluates `rho` on `grid`, then refines linearly (25 points) inside the
/// interval bracketing the coarse minimum. `rho_of` maps β to the
/// amplification factor.
pub fn optimize_beta_with(rho_of: &dyn Fn(f64) -> Result<f64>, grid: &[f64], refine: bool) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    if grid.is_empty() || grid.iter().any(|b| !(*b >= 0.0)) {
        return Err(Error::Config("beta grid must be nonempty and non-negative".into()));
    }
    let mut betas = grid.to_vec();
    betas.sort_by(f64::total_cmp);
    betas.dedup();
    let mut rho = evaluate(rho_of, &betas);
    let i = argmin(&betas, &rho).ok_or_else(|| Error::Eigen("amplification factor not finite anywhere on the grid".into()))?;
    if refine && betas.len() > 1 {
        let lo = betas[i.saturating_sub(1)];
        let hi = betas[(i + 1).min(betas.len() - 1)];
        let fine: Vec<f64> = (0..25)
            .map(|k| lo + (hi - lo) * k as f64 / 24.0)
            .filter(|b| !betas.iter().any(|c| (c - b).abs() <= 1e-12 * (1.0 + b.abs())))
            .collect();
        let rf = evaluate(rho_of, &fine);
        let mut all: Vec<(f64, f64)> = betas.into_iter().zip(rho).chain(fine.into_iter().zip(rf)).collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        betas = all.iter().map(|p| p.0).collect();
        rho = all.iter().map(|p| p.1).collect();
    }
    let i = argmin(&betas, &rho).unwrap();
    Ok((betas, rho, i))
}

/// Sign changes of `rho − 1` along the grid.
pub fn crossings(betas: &[f64], rho: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 1..betas.len() {
        let (a, b) = (rho[k - 1] - 1.0, rho[k] - 1.0);
        if a.is_finite() && b.is_finite() && a * b < 0.0 {
            out.push(betas[k - 1] + (betas[k] - betas[k - 1]) * a / (a - b));
        }
    }
    out
}

/// Full sweep on a coupled system: coarse grid over `[0, 50/h]` then
/// refinement, or the given grid without refinement.
pub fn optimize_beta(sys: &CoupledSystem, grid: Option<&[f64]>, label: &str) -> Result<AmplificationReport> {
    let h = sys.nonlocal.cloud.h;
    let rho_of = |b: f64| amplification_factor(&sys.with_beta(b)?);
    let coarse = coarse_grid(h);
    let (betas, rho, i) = match grid {
        Some(g) => optimize_beta_with(&rho_of, g, false)?,
        None => optimize_beta_with(&rho_of, &coarse, true)?,
    };
    Ok(AmplificationReport {
        label: label.to_string(),
        h,
        delta: sys.nonlocal.cloud.delta,
        dt: sys.dt,
        alpha_nl: sys.nonlocal.alpha,
        alpha_l: sys.local.alpha,
        dofs: StateLayout::of(sys).len(),
        crossings: crossings(&betas, &rho),
        beta_star: betas[i],
        rho_star: rho[i],
        betas,
        rho,
    })
}
