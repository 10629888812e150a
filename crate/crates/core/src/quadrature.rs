//! Gauss-Legendre rules and adaptive composite integration.

use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
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
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, dp)
}

/// Nodes and weights.
pub type Rule = (Vec<f64>, Vec<f64>);

/// Cached rule, shared across threads.
pub fn rule(n: usize) -> &'static Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard.entry(n).or_insert_with(|| Box::leak(Box::new(gauss_legendre(n))))
}

/// Nodes and weights of an `n`-point rule mapped to `[a, b]`.
pub fn mapped(n: usize, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let (x, w) = rule(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter().zip(w).map(move |(&t, &wt)| (mid + half * t, half * wt))
}

fn panel_sum<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, n: usize) -> (Complex64, f64) {
    mapped(n, a, b).fold((Complex64::new(0.0, 0.0), 0.0), |(s, m), (x, w)| {
        let v = f(x) * w;
        (s + v, m + v.norm())
    })
}

/// Adaptive Gauss-Legendre integration of a complex integrand over `[a, b]`.
///
/// The interval is first cut at `breaks` (points strictly inside `(a, b)`)
/// and into panels no wider than `max_panel`. Each panel compares a 16-point
/// rule against two 16-point half-panel rules and bisects until the
/// difference drops below its share of `tol`. Returns `None` if the
/// bisection depth is exhausted.
pub fn integrate_adaptive<F>(f: F, a: f64, b: f64, breaks: &[f64], max_panel: f64, tol: f64) -> Option<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let mut cuts = Vec::with_capacity(breaks.len() + 2);
    cuts.push(a);
    cuts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    let mut total = Complex64::new(0.0, 0.0);
    let length = b - a;
    for seg in cuts.windows(2) {
        let (s0, s1) = (seg[0], seg[1]);
        let panels = ((s1 - s0) / max_panel).ceil().max(1.0) as usize;
        let h = (s1 - s0) / panels as f64;
        for p in 0..panels {
            let p0 = s0 + p as f64 * h;
            let p1 = if p + 1 == panels { s1 } else { p0 + h };
            total += adapt(&f, p0, p1, tol * (p1 - p0) / length, 0)?;
        }
    }
    Some(total)
}

const ADAPT_NODES: usize = 16;

fn adapt<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Option<Complex64> {
    let (whole, _) = panel_sum(f, a, b, ADAPT_NODES);
    let mid = 0.5 * (a + b);
    let (left, lmag) = panel_sum(f, a, mid, ADAPT_NODES);
    let (right, rmag) = panel_sum(f, mid, b, ADAPT_NODES);
    let halves = left + right;
    // rounding floor relative to the magnitude of the summed terms
    if (halves - whole).norm() <= tol.max(1e-14 * (lmag + rmag)) {
        return Some(halves);
    }
    if depth >= 40 {
        return None;
    }
    Some(adapt(f, a, mid, 0.5 * tol, depth + 1)? + adapt(f, mid, b, 0.5 * tol, depth + 1)?)
}
