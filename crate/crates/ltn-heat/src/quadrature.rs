//! Gauss–Legendre rules and a vector-valued adaptive integrator.

use std::sync::OnceLock;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            return (vec![0.0], vec![2.0]);
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

pub(crate) fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

fn panel<const N: usize, F: FnMut(f64) -> [f64; N]>(f: &mut F, a: f64, b: f64) -> [f64; N] {
    let (xs, ws) = gl16();
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut acc = [0.0; N];
    for (x, w) in xs.iter().zip(ws) {
        let v = f(c + h * x);
        for k in 0..N {
            acc[k] += w * h * v[k];
        }
    }
    acc
}

/// Adaptive bisection with 16-point panels. `scale[k]` multiplies component
/// `k` before comparing against the absolute tolerance `tol`. Returns the
/// integral and the largest unresolved scaled error.
pub(crate) fn adaptive<const N: usize, F: FnMut(f64) -> [f64; N]>(
    f: &mut F,
    a: f64,
    b: f64,
    scale: &[f64; N],
    tol: f64,
) -> ([f64; N], f64) {
    let whole = panel(f, a, b);
    let mut total = [0.0; N];
    let mut worst = 0.0f64;
    recurse(f, a, b, whole, scale, tol, 0, &mut total, &mut worst);
    (total, worst)
}

#[allow(clippy::too_many_arguments)]
fn recurse<const N: usize, F: FnMut(f64) -> [f64; N]>(
    f: &mut F,
    a: f64,
    b: f64,
    whole: [f64; N],
    scale: &[f64; N],
    tol: f64,
    depth: usize,
    total: &mut [f64; N],
    worst: &mut f64,
) {
    let m = 0.5 * (a + b);
    let left = panel(f, a, m);
    let right = panel(f, m, b);
    let err = (0..N).map(|k| ((left[k] + right[k] - whole[k]) * scale[k]).abs()).fold(0.0, f64::max);
    if err <= tol.max(4e-15) || depth >= 40 || (b - a) < 1e-15 {
        if err > tol.max(4e-15) {
            *worst = worst.max(err);
        }
        for k in 0..N {
            total[k] += left[k] + right[k];
        }
        return;
    }
    recurse(f, a, m, left, scale, tol * 0.5, depth + 1, total, worst);
    recurse(f, m, b, right, scale, tol * 0.5, depth + 1, total, worst);
}
