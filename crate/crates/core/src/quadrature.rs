//! Gauss–Legendre rules and composite panel integration.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

/// Nodes (ascending) and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Newton iteration on the three-term recurrence, seeded with Tricomi's
/// asymptotic guess. Cost is `O(n²)`, which stays well under a second for the
/// node counts the oscillation bound asks for.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let half = n.div_ceil(2);
    let nf = n as f64;
    let pairs: Vec<(f64, f64)> = (0..half)
        .into_par_iter()
        .map(|i| {
            // i-th largest root
            let theta = PI * (i as f64 + 0.75) / (nf + 0.5);
            let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d.is_finite() {
                dp = d;
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect();
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for (i, &(x, w)) in pairs.iter().enumerate() {
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| half * v).collect(),
    )
}

/// Composite Gauss–Legendre integral over consecutive panels `breaks[i]..breaks[i+1]`.
pub fn integrate_panels(breaks: &[f64], order: usize, f: impl Fn(f64) -> Complex64 + Sync) -> Complex64 {
    let (x, w) = gauss_legendre(order);
    breaks
        .par_windows(2)
        .map(|p| {
            let (mid, half) = (0.5 * (p[0] + p[1]), 0.5 * (p[1] - p[0]));
            x.iter()
                .zip(&w)
                .map(|(t, wt)| f(mid + half * t) * (half * wt))
                .sum::<Complex64>()
        })
        .sum()
}
