//! Fourier transforms `f^(omega) = int_0^1 f(x) e^{-2 pi i omega x} dx` of
//! basis functions (exact) and of test functions (adaptive quadrature).

use crate::error::{Error, Result};
use crate::quadrature::{self, integrate_adaptive};
use crate::sampling::{SampleSet, WeightVector};
use crate::spaces::{BasisKind, OrthoBasis, PiecewiseBasis};
use crate::special::{sinc, spherical_bessel_j};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Transform of the indicator of `[a, b)`:
/// `(b - a) e^{-pi i omega (a + b)} sinc(omega (b - a))`.
pub fn interval_exponential(a: f64, b: f64, omega: f64) -> Complex64 {
    let h = b - a;
    Complex64::from_polar(h * sinc(omega * h), -PI * omega * (a + b))
}

/// `(-i)^n`
fn neg_i_pow(n: usize) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// Transforms of the normalized Legendre polynomials `q_0..q_deg` of one
/// piece `[a, b)`, written into `out`.
///
/// `q_n^(omega) = sqrt((2n+1) h) e^{-2 pi i omega c} (-i)^n j_n(pi omega h)`
/// with `c` the midpoint; the `n = 0` term is the interval exponential
/// scaled by `1/sqrt(h)`, and higher degrees follow from the spherical
/// Bessel recurrence.
pub fn legendre_piece_transform(a: f64, b: f64, degree: usize, omega: f64, out: &mut [Complex64], scratch: &mut [f64]) {
    let h = b - a;
    out[0] = interval_exponential(a, b, omega) / h.sqrt();
    if degree == 0 {
        return;
    }
    spherical_bessel_j(degree, PI * omega * h, scratch);
    let phase = Complex64::from_polar(1.0, -PI * omega * (a + b));
    for n in 1..=degree {
        out[n] = phase * neg_i_pow(n) * (((2 * n + 1) as f64 * h).sqrt() * scratch[n]);
    }
}

fn piece_row_transforms(p: &PiecewiseBasis, omega: f64, row: &mut [Complex64]) {
    let mut scratch = vec![0.0; p.max_degree() + 1];
    for i in 0..p.pieces() {
        let (a, b) = p.piece_bounds(i);
        let off = p.offsets()[i];
        let deg = p.degrees()[i];
        legendre_piece_transform(a, b, deg, omega, &mut row[off..off + deg + 1], &mut scratch);
    }
}

/// `phi_m^(omega)` for every basis function.
pub fn basis_transform(basis: &OrthoBasis, omega: f64) -> Vec<Complex64> {
    match basis.kind() {
        BasisKind::Trig { m } => {
            let m = *m as i64;
            (-m..=m)
                .map(|k| interval_exponential(0.0, 1.0, omega - k as f64))
                .collect()
        }
        BasisKind::Piecewise(p) => {
            let mut row = vec![Complex64::new(0.0, 0.0); p.coeffs().nrows()];
            piece_row_transforms(p, omega, &mut row);
            let c = p.coeffs();
            (0..c.ncols())
                .map(|j| c.column(j).iter().zip(&row).map(|(cv, r)| r * *cv).sum())
                .collect()
        }
    }
}

/// Matrix with rows `basis_transform(omega_n)`.
pub fn transform_matrix(basis: &OrthoBasis, omegas: &[f64]) -> DMatrix<Complex64> {
    match basis.kind() {
        BasisKind::Trig { m } => {
            let m = *m as i64;
            DMatrix::from_fn(omegas.len(), (2 * m + 1) as usize, |r, c| {
                interval_exponential(0.0, 1.0, omegas[r] - (c as i64 - m) as f64)
            })
        }
        BasisKind::Piecewise(p) => {
            let rows = p.coeffs().nrows();
            let raw: Vec<Vec<Complex64>> = omegas
                .par_iter()
                .map(|&w| {
                    let mut row = vec![Complex64::new(0.0, 0.0); rows];
                    piece_row_transforms(p, w, &mut row);
                    row
                })
                .collect();
            let re = DMatrix::from_fn(omegas.len(), rows, |r, c| raw[r][c].re);
            let im = DMatrix::from_fn(omegas.len(), rows, |r, c| raw[r][c].im);
            let are = re * p.coeffs();
            let aim = im * p.coeffs();
            DMatrix::from_fn(omegas.len(), p.coeffs().ncols(), |r, c| {
                Complex64::new(are[(r, c)], aim[(r, c)])
            })
        }
    }
}

/// Expression tree for test functions on `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    X,
    Const(f64),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    /// `1` for `x >= at`, `0` otherwise.
    Step(f64),
}

impl Expr {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::X => x,
            Expr::Const(c) => *c,
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Neg(a) => -a.eval(x),
            Expr::Pow(a, k) => a.eval(x).powi(*k),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
            Expr::Exp(a) => a.eval(x).exp(),
            Expr::Step(at) => {
                if x >= *at {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn collect_steps(&self, out: &mut Vec<f64>) {
        match self {
            Expr::Step(at) => out.push(*at),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.collect_steps(out);
                b.collect_steps(out);
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => a.collect_steps(out),
            Expr::X | Expr::Const(_) => {}
        }
    }
}

/// A real test function on `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// `x^2 + x sin(4 pi x) - exp(x/2) cos(3 pi x)^2`.
    BuiltinFig1,
    /// Power series in `x` on each piece `[breaks[p], breaks[p+1])`.
    PiecewisePolyCoeffs { breaks: Vec<f64>, coeffs: Vec<Vec<f64>> },
    Expression {
        expr: Expr,
        #[serde(default)]
        jumps: Vec<f64>,
    },
}

pub fn fig1(x: f64) -> f64 {
    let c = (3.0 * PI * x).cos();
    x * x + x * (4.0 * PI * x).sin() - (0.5 * x).exp() * c * c
}

impl FunctionSpec {
    pub fn constant(c: f64) -> Self {
        FunctionSpec::Expression {
            expr: Expr::Const(c),
            jumps: vec![],
        }
    }

    /// Unit jump at `at`: `0` on `[0, at)`, `1` on `[at, 1)`.
    pub fn step(at: f64) -> Self {
        FunctionSpec::Expression {
            expr: Expr::Step(at),
            jumps: vec![at],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let FunctionSpec::PiecewisePolyCoeffs { breaks, coeffs } = self {
            if breaks.len() != coeffs.len() + 1
                || breaks.first() != Some(&0.0)
                || breaks.last() != Some(&1.0)
                || breaks.windows(2).any(|w| w[1] <= w[0])
            {
                return Err(Error::invalid(
                    "piecewise polynomial needs increasing breaks from 0 to 1, one coefficient list per piece",
                ));
            }
        }
        Ok(())
    }

    /// Parses `fig1`, `step:<at>`, `const:<c>`, or a JSON object.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "fig1" {
            return Ok(FunctionSpec::BuiltinFig1);
        }
        if let Some(at) = s.strip_prefix("step:") {
            let at: f64 = at
                .parse()
                .map_err(|_| Error::invalid(format!("bad step location '{at}'")))?;
            return Ok(Self::step(at));
        }
        if let Some(c) = s.strip_prefix("const:") {
            let c: f64 = c.parse().map_err(|_| Error::invalid(format!("bad constant '{c}'")))?;
            return Ok(Self::constant(c));
        }
        let f: FunctionSpec = serde_json::from_str(s)?;
        f.validate()?;
        Ok(f)
    }
}

/// Anything that can be evaluated on `[0, 1)` and integrated piecewise.
pub trait Signal: Sync {
    fn value(&self, x: f64) -> Complex64;
    /// Interior points where the function may be discontinuous.
    fn jumps(&self) -> Vec<f64>;
}

impl Signal for FunctionSpec {
    fn value(&self, x: f64) -> Complex64 {
        let v = match self {
            FunctionSpec::BuiltinFig1 => fig1(x),
            FunctionSpec::PiecewisePolyCoeffs { breaks, coeffs } => {
                let p = breaks
                    .partition_point(|&b| b <= x)
                    .saturating_sub(1)
                    .min(coeffs.len() - 1);
                coeffs[p].iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
            FunctionSpec::Expression { expr, .. } => expr.eval(x),
        };
        Complex64::new(v, 0.0)
    }

    fn jumps(&self) -> Vec<f64> {
        match self {
            FunctionSpec::BuiltinFig1 => vec![],
            FunctionSpec::PiecewisePolyCoeffs { breaks, .. } => breaks[1..breaks.len() - 1].to_vec(),
            FunctionSpec::Expression { expr, jumps } => {
                let mut j = jumps.clone();
                expr.collect_steps(&mut j);
                j.sort_by(f64::total_cmp);
                j.dedup();
                j
            }
        }
    }
}

/// `sum_m coeffs[m] phi_m` as a signal.
pub struct SpaceMember<'a> {
    pub basis: &'a OrthoBasis,
    pub coeffs: &'a [Complex64],
}

impl Signal for SpaceMember<'_> {
    fn value(&self, x: f64) -> Complex64 {
        self.basis.combine(self.coeffs, x)
    }

    fn jumps(&self) -> Vec<f64> {
        let b = self.basis.breaks();
        b[1..b.len() - 1].to_vec()
    }
}

/// Sampled transform values together with their frequencies and weights.
#[derive(Debug, Clone)]
pub struct FourierData {
    pub samples: SampleSet,
    pub values: Vec<Complex64>,
    pub weights: WeightVector,
}

impl FourierData {
    pub fn new(samples: SampleSet, values: Vec<Complex64>, weights: WeightVector) -> Result<Self> {
        if values.len() != samples.len() || weights.len() != samples.len() {
            return Err(Error::invalid(format!(
                "{} samples, {} values, {} weights",
                samples.len(),
                values.len(),
                weights.len()
            )));
        }
        Ok(Self {
            samples,
            values,
            weights,
        })
    }

    /// Data with the midpoint weights of the sample set.
    pub fn with_default_weights(samples: SampleSet, values: Vec<Complex64>) -> Result<Self> {
        let w = samples.weights();
        Self::new(samples, values, w)
    }
}

const SAMPLE_TOL: f64 = 1e-12;

/// Transform of a signal at one frequency by adaptive Gauss-Legendre
/// quadrature, panels no wider than `1/(4|omega| + 1)`.
pub fn transform_of<S: Signal + ?Sized>(f: &S, omega: f64) -> Result<Complex64> {
    let jumps = f.jumps();
    let kernel = |x: f64| f.value(x) * Complex64::from_polar(1.0, -TAU * omega * x);
    integrate_adaptive(kernel, 0.0, 1.0, &jumps, 1.0 / (4.0 * omega.abs() + 1.0), SAMPLE_TOL)
        .ok_or(Error::Quadrature { omega })
}

pub fn sample_function<S: Signal + ?Sized>(f: &S, s: &SampleSet) -> Result<FourierData> {
    let values = s
        .points()
        .par_iter()
        .map(|&w| transform_of(f, w))
        .collect::<Result<Vec<_>>>()?;
    FourierData::with_default_weights(s.clone(), values)
}

fn error_panel(basis: &OrthoBasis) -> f64 {
    let m = basis.max_frequency() as f64;
    (1.0 / (m + 1.0)).min(0.125)
}

/// `int_0^1 |h|^2` by composite Gauss-Legendre on panels cut at `cuts`,
/// halving the panels until two passes agree. Comparing whole sums rather
/// than single panels keeps pointwise rounding in `h` from stalling it.
fn squared_norm<F: Fn(f64) -> Complex64 + Sync>(h: F, cuts: &[f64], panel: f64, nodes: usize) -> Option<f64> {
    let mut breaks = vec![0.0];
    breaks.extend(cuts.iter().copied().filter(|&c| c > 0.0 && c < 1.0));
    breaks.push(1.0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let pass = |panel: f64| -> f64 {
        breaks
            .par_windows(2)
            .map(|seg| {
                let panels = ((seg[1] - seg[0]) / panel).ceil().max(1.0) as usize;
                let w = (seg[1] - seg[0]) / panels as f64;
                (0..panels)
                    .map(|k| {
                        let a = seg[0] + k as f64 * w;
                        quadrature::mapped(nodes, a, a + w)
                            .map(|(x, wt)| h(x).norm_sqr() * wt)
                            .sum::<f64>()
                    })
                    .sum::<f64>()
            })
            .collect::<Vec<_>>()
            .iter()
            .sum()
    };
    let mut prev = pass(panel);
    let mut panel = panel;
    for _ in 0..8 {
        panel *= 0.5;
        let next = pass(panel);
        if (next - prev).abs() <= (1e-10 * next).max(1e-20) {
            return Some(next);
        }
        prev = next;
    }
    None
}

/// `||f - g||` over `(0, 1)` with `g = sum_m coeffs[m] phi_m`.
pub fn l2_error<S: Signal + ?Sized>(f: &S, basis: &OrthoBasis, coeffs: &[Complex64]) -> Result<f64> {
    let mut cuts = f.jumps();
    cuts.extend(basis.breaks());
    let nodes = 2 * basis.poly_degree() + 24;
    squared_norm(
        |x| f.value(x) - basis.combine(coeffs, x),
        &cuts,
        error_panel(basis),
        nodes,
    )
    .map(f64::sqrt)
    .ok_or(Error::Quadrature { omega: 0.0 })
}

/// Coefficients of the orthogonal projection of `f` onto the space.
pub fn project<S: Signal + ?Sized>(f: &S, basis: &OrthoBasis) -> Vec<Complex64> {
    let mut cuts = f.jumps();
    cuts.extend(basis.breaks());
    cuts.push(0.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let nodes = basis.poly_degree() + 40;
    let panel = error_panel(basis);
    let dim = basis.dim();
    let mut acc = vec![Complex64::new(0.0, 0.0); dim];
    let mut vals = vec![Complex64::new(0.0, 0.0); dim];
    for seg in cuts.windows(2) {
        let panels = ((seg[1] - seg[0]) / panel).ceil().max(1.0) as usize;
        let h = (seg[1] - seg[0]) / panels as f64;
        for k in 0..panels {
            let a = seg[0] + k as f64 * h;
            for (x, w) in quadrature::mapped(nodes, a, a + h) {
                basis.evaluate_into(x, &mut vals);
                let fx = f.value(x);
                for (c, v) in acc.iter_mut().zip(&vals) {
                    *c += fx * v.conj() * w;
                }
            }
        }
    }
    acc
}

/// `||f - P f||`, the best-approximation error from the space.
pub fn best_approximation_error<S: Signal + ?Sized>(f: &S, basis: &OrthoBasis) -> Result<f64> {
    let c = project(f, basis);
    l2_error(f, basis, &c)
}

/// `||f||` over `(0, 1)`.
pub fn l2_norm<S: Signal + ?Sized>(f: &S) -> Result<f64> {
    squared_norm(|x| f.value(x), &f.jumps(), 0.125, 24)
        .map(f64::sqrt)
        .ok_or(Error::Quadrature { omega: 0.0 })
}
