//! Special functions used by the exact Fourier transforms.

use std::f64::consts::PI;

/// Normalized sinc, `sin(pi t) / (pi t)` with `sinc(0) = 1`.
pub fn sinc(t: f64) -> f64 {
    let x = PI * t;
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Legendre polynomials `P_0(t), ..., P_n(t)` by the three-term recurrence.
pub fn legendre_values(degree: usize, t: f64, out: &mut [f64]) {
    debug_assert!(out.len() > degree);
    out[0] = 1.0;
    if degree == 0 {
        return;
    }
    out[1] = t;
    for n in 1..degree {
        let nf = n as f64;
        out[n + 1] = ((2.0 * nf + 1.0) * t * out[n] - nf * out[n - 1]) / (nf + 1.0);
    }
}

/// Spherical Bessel functions `j_0(x), ..., j_nmax(x)`.
///
/// Power series for `|x| < 0.5`, upward recurrence when `|x| >= nmax`, and
/// Miller's downward recurrence normalized against the closed forms of `j_0`
/// and `j_1` otherwise.
pub fn spherical_bessel_j(nmax: usize, x: f64, out: &mut [f64]) {
    debug_assert!(out.len() > nmax);
    let ax = x.abs();
    if ax == 0.0 {
        out[..=nmax].fill(0.0);
        out[0] = 1.0;
    } else if ax < 0.5 {
        series(nmax, ax, out);
    } else if ax >= nmax as f64 {
        upward(nmax, ax, out);
    } else {
        miller(nmax, ax, out);
    }
    if x < 0.0 {
        for v in out[..=nmax].iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
    }
}

fn series(nmax: usize, x: f64, out: &mut [f64]) {
    let h = -0.5 * x * x;
    // leading factor x^n / (2n+1)!!
    let mut lead = 1.0;
    for (n, slot) in out[..=nmax].iter_mut().enumerate() {
        if n > 0 {
            lead *= x / (2 * n + 1) as f64;
        }
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..40 {
            term *= h / (k as f64 * (2 * n + 2 * k + 1) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        *slot = lead * sum;
    }
}

fn upward(nmax: usize, x: f64, out: &mut [f64]) {
    let (s, c) = x.sin_cos();
    out[0] = s / x;
    if nmax == 0 {
        return;
    }
    out[1] = s / (x * x) - c / x;
    for n in 1..nmax {
        out[n + 1] = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
    }
}

fn miller(nmax: usize, x: f64, out: &mut [f64]) {
    let start = nmax + 20 + (40.0 * (nmax as f64 + x)).sqrt() as usize;
    let mut above = 0.0;
    let mut cur = 1e-280;
    let mut buf = vec![0.0; start + 1];
    buf[start] = cur;
    for n in (1..=start).rev() {
        let below = (2 * n + 1) as f64 / x * cur - above;
        above = cur;
        cur = below;
        buf[n - 1] = cur;
        if cur.abs() > 1e250 {
            for v in buf[n - 1..].iter_mut() {
                *v *= 1e-250;
            }
            above *= 1e-250;
            cur *= 1e-250;
        }
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    let scale = if j0.abs() >= j1.abs() { j0 / buf[0] } else { j1 / buf[1] };
    for (o, b) in out[..=nmax].iter_mut().zip(&buf) {
        *o = b * scale;
    }
}
