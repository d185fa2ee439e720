//! Sparse direct solver: reverse Cuthill–McKee ordering followed by a banded
//! LU factorization with partial pivoting (column-major LAPACK band layout).

use super::CsrMatrix;
use crate::error::{Error, Result};
use std::collections::VecDeque;

/// Reverse Cuthill–McKee permutation; `perm[new] = old`.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let adj = a.symmetric_adjacency();
    let n = adj.len();
    let degree: Vec<usize> = adj.iter().map(|v| v.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(&adj, &degree, seed);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut nbrs = Vec::new();
        while let Some(v) = queue.pop_front() {
            order.push(v);
            nbrs.clear();
            nbrs.extend(adj[v].iter().copied().filter(|&w| !visited[w]));
            nbrs.sort_by_key(|&w| (degree[w], w));
            for &w in &nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(adj: &[Vec<usize>], start: usize) -> (Vec<usize>, usize) {
    let mut level = vec![usize::MAX; adj.len()];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut last = start;
    while let Some(v) = queue.pop_front() {
        last = v;
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    let depth = level[last];
    (level, depth)
}

// George–Liu heuristic: walk to the far end of the level structure until the
// eccentricity stops growing.
fn pseudo_peripheral(adj: &[Vec<usize>], degree: &[usize], seed: usize) -> usize {
    let mut current = seed;
    let (mut level, mut depth) = bfs_levels(adj, current);
    for _ in 0..8 {
        let candidate = (0..adj.len())
            .filter(|&v| level[v] == depth)
            .min_by_key(|&v| (degree[v], v))
            .unwrap_or(current);
        let (l2, d2) = bfs_levels(adj, candidate);
        if d2 <= depth {
            break;
        }
        current = candidate;
        level = l2;
        depth = d2;
    }
    current
}

/// LU factors of a permuted sparse matrix held in band storage.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
    perm: Vec<usize>,
    original: CsrMatrix,
    norm_inf: f64,
}

impl BandLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Dimension(format!("sparse solve needs a square matrix, got {}x{}", a.nrows(), a.ncols())));
        }
        a.check_finite()?;
        let n = a.nrows();
        let perm = rcm_ordering(a);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let (mut kl, mut ku) = (0usize, 0usize);
        for (i, j, _) in a.triplets() {
            let (pi, pj) = (inv[i], inv[j]);
            if pi > pj {
                kl = kl.max(pi - pj);
            } else {
                ku = ku.max(pj - pi);
            }
        }
        let kv = kl + ku;
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![0.0; ldab * n];
        for (i, j, v) in a.triplets() {
            let (pi, pj) = (inv[i], inv[j]);
            ab[kv + pi - pj + pj * ldab] += v;
        }
        let norm_inf = (0..n).map(|i| a.row(i).1.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let mut lu = BandLu { n, kl, ku, ldab, ab, ipiv: vec![0; n], perm, original: a.clone(), norm_inf };
        lu.factor_in_place()?;
        Ok(lu)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        self.kl + self.ku + i - j + j * self.ldab
    }

    fn factor_in_place(&mut self) -> Result<()> {
        let n = self.n;
        let kl = self.kl;
        let kv = kl + self.ku;
        let ldab = self.ldab;
        let tiny = self.norm_inf.max(1.0) * f64::EPSILON * 1e-3;
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let col = j * ldab + kv;
            let mut jp = 0;
            let mut best = self.ab[col].abs();
            for i in 1..=km {
                let v = self.ab[col + i].abs();
                if v > best {
                    best = v;
                    jp = i;
                }
            }
            self.ipiv[j] = j + jp;
            if !(best > tiny) {
                return Err(Error::Singular { pivot: self.perm[j], value: best });
            }
            ju = ju.max((j + self.ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let a = self.idx(j, c);
                    let b = self.idx(j + jp, c);
                    self.ab.swap(a, b);
                }
            }
            let pivot = self.ab[col];
            for i in 1..=km {
                self.ab[col + i] /= pivot;
            }
            for c in j + 1..=ju {
                let top = self.idx(j, c);
                let a = self.ab[top];
                if a != 0.0 {
                    for i in 1..=km {
                        self.ab[top + i] -= self.ab[col + i] * a;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Lower and upper bandwidth after reordering.
    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    fn solve_permuted(&self, b: &mut [f64]) {
        let n = self.n;
        for j in 0..n {
            let l = self.ipiv[j];
            if l != j {
                b.swap(l, j);
            }
            let bj = b[j];
            if bj != 0.0 {
                let lm = self.kl.min(n - 1 - j);
                let col = self.idx(j, j);
                for i in 1..=lm {
                    b[j + i] -= self.ab[col + i] * bj;
                }
            }
        }
        let kv = self.kl + self.ku;
        for j in (0..n).rev() {
            let d = self.idx(j, j);
            b[j] /= self.ab[d];
            let bj = b[j];
            if bj != 0.0 {
                let lo = j.saturating_sub(kv);
                for i in lo..j {
                    b[i] -= self.ab[self.idx(i, j)] * bj;
                }
            }
        }
    }

    /// Solves without residual verification.
    pub fn solve_unchecked(&self, b: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        self.solve_permuted(&mut y);
        let mut x = vec![0.0; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    /// Solves `A x = b`, applies iterative refinement, and verifies the
    /// normwise backward error against `tol`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::Dimension(format!("rhs length {} for {} unknowns", b.len(), self.n)));
        }
        let mut x = self.solve_unchecked(b);
        let mut err = self.backward_error(&x, b);
        for _ in 0..2 {
            if err <= 1e-14 {
                break;
            }
            let ax = self.original.matvec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            let dx = self.solve_unchecked(&r);
            let cand: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + d).collect();
            let e2 = self.backward_error(&cand, b);
            if e2 < err {
                x = cand;
                err = e2;
            } else {
                break;
            }
        }
        if !(err <= 1e-11) {
            return Err(Error::Residual { residual: err, tolerance: 1e-11 });
        }
        Ok(x)
    }

    /// `‖Ax − b‖∞ / (‖A‖∞‖x‖∞ + ‖b‖∞)`.
    pub fn backward_error(&self, x: &[f64], b: &[f64]) -> f64 {
        let ax = self.original.matvec(x);
        let r = ax.iter().zip(b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let xn = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let bn = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let denom = self.norm_inf * xn + bn;
        if denom == 0.0 {
            if r == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            r / denom
        }
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.original
    }
}

/// One-shot sparse solve.
pub fn sparse_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    BandLu::factor(a)?.solve(b)
}
