use super::bspline::{bspline_values, clamped_uniform_knots};
use super::{uniform_breaks, SpaceSpec};
use crate::error::{Error, Result};
use crate::quadrature;
use crate::special::legendre_values;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::TAU;

/// Functions stored as coefficients in normalized Legendre polynomials on a
/// partition of `[0, 1)`.
///
/// Piece `p` covers `[breaks[p], breaks[p+1])` and carries polynomials up to
/// `degrees[p]`. Rows `offsets[p]..offsets[p+1]` of `coeffs` hold the
/// coefficients of every basis function (one column each) against
/// `q_n(x) = sqrt((2n+1)/h) P_n(2(x-a)/h - 1)`, which are orthonormal on the
/// piece. Column inner products of `coeffs` are therefore `L^2(0,1)` inner
/// products.
#[derive(Debug, Clone)]
pub struct PiecewiseBasis {
    breaks: Vec<f64>,
    degrees: Vec<usize>,
    offsets: Vec<usize>,
    coeffs: DMatrix<f64>,
}

impl PiecewiseBasis {
    fn new(breaks: Vec<f64>, degrees: Vec<usize>, coeffs: DMatrix<f64>) -> Self {
        let mut offsets = Vec::with_capacity(degrees.len() + 1);
        offsets.push(0);
        for d in &degrees {
            offsets.push(offsets.last().unwrap() + d + 1);
        }
        debug_assert_eq!(*offsets.last().unwrap(), coeffs.nrows());
        Self {
            breaks,
            degrees,
            offsets,
            coeffs,
        }
    }

    fn identity(breaks: Vec<f64>, degrees: Vec<usize>) -> Self {
        let rows: usize = degrees.iter().map(|d| d + 1).sum();
        Self::new(breaks, degrees, DMatrix::identity(rows, rows))
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn coeffs(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    pub fn pieces(&self) -> usize {
        self.degrees.len()
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn piece_bounds(&self, p: usize) -> (f64, f64) {
        (self.breaks[p], self.breaks[p + 1])
    }

    /// Piece containing `x` under the half-open convention.
    pub fn piece_of(&self, x: f64) -> usize {
        self.breaks
            .partition_point(|&b| b <= x)
            .saturating_sub(1)
            .min(self.pieces() - 1)
    }

    /// Normalized Legendre values `q_0..q_deg` on piece `p` at local
    /// coordinate `t` in `[-1, 1]`.
    pub fn local_legendre(&self, p: usize, t: f64, out: &mut [f64]) {
        let deg = self.degrees[p];
        let h = self.breaks[p + 1] - self.breaks[p];
        legendre_values(deg, t, out);
        for (n, v) in out[..=deg].iter_mut().enumerate() {
            *v *= ((2 * n + 1) as f64 / h).sqrt();
        }
    }

    /// Values of every basis function on piece `p` at local coordinate `t`.
    pub fn eval_local(&self, p: usize, t: f64, out: &mut [f64]) {
        let mut q = vec![0.0; self.degrees[p] + 1];
        self.local_legendre(p, t, &mut q);
        let rows = self.coeffs.rows(self.offsets[p], q.len());
        for (j, o) in out.iter_mut().enumerate() {
            *o = rows.column(j).iter().zip(&q).map(|(c, v)| c * v).sum();
        }
    }

    pub fn eval(&self, x: f64, out: &mut [f64]) {
        let p = self.piece_of(x);
        let (a, b) = self.piece_bounds(p);
        self.eval_local(p, 2.0 * (x - a) / (b - a) - 1.0, out);
    }
}

#[derive(Debug, Clone)]
pub enum BasisKind {
    /// `e^{2 pi i m x}`, `m = -M..=M` in increasing order.
    Trig {
        m: usize,
    },
    Piecewise(PiecewiseBasis),
}

/// An orthonormal basis of a reconstruction space.
#[derive(Debug, Clone)]
pub struct OrthoBasis {
    spec: Option<SpaceSpec>,
    jumps: Vec<f64>,
    kind: BasisKind,
}

impl OrthoBasis {
    pub fn new(spec: &SpaceSpec) -> Result<Self> {
        spec.validate()?;
        let kind = match spec {
            SpaceSpec::Trig { m } => BasisKind::Trig { m: *m },
            SpaceSpec::Legendre { m } => BasisKind::Piecewise(PiecewiseBasis::identity(vec![0.0, 1.0], vec![*m])),
            SpaceSpec::PiecewisePoly { knots, degrees } => {
                BasisKind::Piecewise(PiecewiseBasis::identity(super::with_ends(knots), degrees.clone()))
            }
            SpaceSpec::PiecewiseConst { l } => {
                BasisKind::Piecewise(PiecewiseBasis::identity(uniform_breaks(*l), vec![0; *l]))
            }
            SpaceSpec::Spline { d, l } => BasisKind::Piecewise(spline_basis(*d, *l)?),
        };
        Ok(Self {
            spec: Some(spec.clone()),
            jumps: spec.jump_knots(),
            kind,
        })
    }

    /// Orthonormal basis for the span of the given piecewise functions.
    ///
    /// `columns` holds one function per column in the normalized Legendre
    /// coordinates of the partition `breaks`/`degrees`. `jumps` lists the
    /// interior points where the functions may be discontinuous.
    pub fn from_piecewise(
        breaks: Vec<f64>,
        degrees: Vec<usize>,
        columns: DMatrix<f64>,
        jumps: Vec<f64>,
    ) -> Result<Self> {
        if breaks.len() != degrees.len() + 1 || breaks[0] != 0.0 || *breaks.last().unwrap() != 1.0 {
            return Err(Error::invalid(
                "partition must run from 0 to 1 with one degree per piece",
            ));
        }
        if breaks.windows(2).any(|w| w[1] - w[0] <= 1e-14) {
            return Err(Error::invalid("partition breaks must be strictly increasing"));
        }
        let rows: usize = degrees.iter().map(|d| d + 1).sum();
        if columns.nrows() != rows || columns.ncols() == 0 {
            return Err(Error::invalid("coefficient matrix does not match the partition"));
        }
        let q = orthonormal_columns(columns)?;
        Ok(Self {
            spec: None,
            jumps,
            kind: BasisKind::Piecewise(PiecewiseBasis::new(breaks, degrees, q)),
        })
    }

    pub fn spec(&self) -> Option<&SpaceSpec> {
        self.spec.as_ref()
    }

    pub fn kind(&self) -> &BasisKind {
        &self.kind
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            BasisKind::Trig { m } => 2 * m + 1,
            BasisKind::Piecewise(p) => p.coeffs.ncols(),
        }
    }

    /// All polynomial kinds have real basis functions.
    pub fn is_real(&self) -> bool {
        matches!(self.kind, BasisKind::Piecewise(_))
    }

    /// Values of every basis function at `x` in `[0, 1)`.
    pub fn evaluate(&self, x: f64) -> Result<Vec<Complex64>> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::invalid(format!("evaluation point {x} outside [0, 1)")));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.evaluate_into(x, &mut out);
        Ok(out)
    }

    pub(crate) fn evaluate_into(&self, x: f64, out: &mut [Complex64]) {
        match &self.kind {
            BasisKind::Trig { m } => {
                let m = *m as i64;
                for (o, k) in out.iter_mut().zip(-m..=m) {
                    *o = Complex64::from_polar(1.0, TAU * k as f64 * x);
                }
            }
            BasisKind::Piecewise(p) => {
                let mut vals = vec![0.0; out.len()];
                p.eval(x, &mut vals);
                for (o, v) in out.iter_mut().zip(vals) {
                    *o = Complex64::new(v, 0.0);
                }
            }
        }
    }

    /// Value of `sum_m coeffs[m] phi_m(x)`.
    pub fn combine(&self, coeffs: &[Complex64], x: f64) -> Complex64 {
        let mut vals = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.evaluate_into(x, &mut vals);
        vals.iter().zip(coeffs).map(|(v, c)| v * c).sum()
    }

    /// Breakpoints of the polynomial pieces (just `[0, 1]` for trig).
    pub fn breaks(&self) -> Vec<f64> {
        match &self.kind {
            BasisKind::Trig { .. } => vec![0.0, 1.0],
            BasisKind::Piecewise(p) => p.breaks.clone(),
        }
    }

    pub(crate) fn poly_degree(&self) -> usize {
        match &self.kind {
            BasisKind::Trig { .. } => 0,
            BasisKind::Piecewise(p) => p.max_degree(),
        }
    }

    pub(crate) fn max_frequency(&self) -> usize {
        match &self.kind {
            BasisKind::Trig { m } => *m,
            BasisKind::Piecewise(_) => 0,
        }
    }

    /// Quadrature on `[0, 1)` exact for every product of two members of
    /// `self` and/or `other` (accurate to rounding when trig factors occur).
    pub fn joint_quadrature(&self, other: &OrthoBasis) -> Vec<(f64, f64)> {
        let mut cuts = self.breaks();
        cuts.extend(other.breaks());
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        let freq = 2 * self.max_frequency().max(other.max_frequency());
        let poly_nodes = self.poly_degree().max(other.poly_degree()) + 1;
        let (nodes, max_panel) = if freq > 0 {
            (poly_nodes + 24, 1.0 / (freq as f64 + 1.0))
        } else {
            (poly_nodes, 1.0)
        };
        let mut out = Vec::new();
        for seg in cuts.windows(2) {
            let panels = ((seg[1] - seg[0]) / max_panel).ceil().max(1.0) as usize;
            let h = (seg[1] - seg[0]) / panels as f64;
            for k in 0..panels {
                let a = seg[0] + k as f64 * h;
                let b = if k + 1 == panels { seg[1] } else { a + h };
                out.extend(quadrature::mapped(nodes, a, b));
            }
        }
        out
    }

    /// Basis values on a quadrature grid, one row per node.
    pub fn sample_matrix(&self, grid: &[(f64, f64)]) -> DMatrix<Complex64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(grid.len(), dim);
        let mut row = vec![Complex64::new(0.0, 0.0); dim];
        for (i, (x, _)) in grid.iter().enumerate() {
            self.evaluate_into(*x, &mut row);
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    /// Gram matrix by quadrature; the identity for a valid basis.
    pub fn gram(&self) -> DMatrix<Complex64> {
        let grid = self.joint_quadrature(self);
        let v = self.sample_matrix(&grid);
        let mut weighted = v.clone();
        for (i, (_, w)) in grid.iter().enumerate() {
            weighted.row_mut(i).scale_mut(*w);
        }
        v.adjoint() * weighted
    }
}

/// Orthonormal columns spanning the same space, by Householder QR.
fn orthonormal_columns(columns: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let ncols = columns.ncols();
    if columns.nrows() < ncols {
        return Err(Error::invalid("more functions than the partition can hold"));
    }
    let scale = columns.norm().max(f64::MIN_POSITIVE);
    let qr = columns.qr();
    let r = qr.r();
    let dmax = (0..ncols).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..ncols).any(|i| r[(i, i)].abs() <= 1e-12 * dmax.max(1e-300 * scale)) {
        return Err(Error::invalid("basis functions are linearly dependent"));
    }
    Ok(qr.q())
}

fn spline_basis(degree: usize, cells: usize) -> Result<PiecewiseBasis> {
    let knots = clamped_uniform_knots(degree, cells);
    let breaks = uniform_breaks(cells);
    let degrees = vec![degree; cells];
    let n_basis = cells + degree;
    let per = degree + 1;
    let mut c = DMatrix::zeros(cells * per, n_basis);
    let mut q = vec![0.0; per];
    for p in 0..cells {
        let (a, b) = (breaks[p], breaks[p + 1]);
        let h = b - a;
        // degree+1 Gauss nodes integrate B-spline x Legendre (degree 2d) exactly
        for (x, w) in quadrature::mapped(per, a, b) {
            let t = 2.0 * (x - a) / h - 1.0;
            legendre_values(degree, t, &mut q);
            for (n, v) in q.iter_mut().enumerate() {
                *v *= ((2 * n + 1) as f64 / h).sqrt();
            }
            let (first, vals) = bspline_values(&knots, degree, x);
            for (i, bv) in vals.iter().enumerate() {
                for (n, qv) in q.iter().enumerate() {
                    c[(p * per + n, first + i)] += w * bv * qv;
                }
            }
        }
    }
    Ok(PiecewiseBasis::new(breaks, degrees, orthonormal_columns(c)?))
}

/// Gram matrix of derivatives of `q_0..q_degree` on a piece of length `h`:
/// `sqrt((2n+1)(2m+1)) * 2/h^2 * k(k+1)` with `k = min(n, m)` when `n + m`
/// is even, zero otherwise.
pub fn legendre_derivative_gram(degree: usize, h: f64) -> DMatrix<f64> {
    DMatrix::from_fn(degree + 1, degree + 1, |n, m| {
        if (n + m) % 2 == 1 {
            return 0.0;
        }
        let k = n.min(m) as f64;
        (((2 * n + 1) * (2 * m + 1)) as f64).sqrt() * 2.0 / (h * h) * k * (k + 1.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_identity(g: &DMatrix<Complex64>, tol: f64) {
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - e).norm() < tol, "gram[{i},{j}] = {}", g[(i, j)]);
            }
        }
    }

    #[test]
    fn gram_identity_all_kinds() {
        let specs = [
            SpaceSpec::Trig { m: 6 },
            SpaceSpec::Legendre { m: 12 },
            SpaceSpec::PiecewisePoly {
                knots: vec![0.3, 0.7],
                degrees: vec![3, 5, 2],
            },
            SpaceSpec::Spline { d: 3, l: 8 },
            SpaceSpec::Spline { d: 1, l: 2 },
            SpaceSpec::Spline { d: 0, l: 3 },
            SpaceSpec::PiecewiseConst { l: 16 },
        ];
        for spec in &specs {
            let b = spec.build_basis().unwrap();
            assert_eq!(b.dim(), spec.dimension(), "{spec}");
            assert_identity(&b.gram(), 1e-12);
        }
    }

    #[test]
    fn piecewise_const_values() {
        let b = SpaceSpec::PiecewiseConst { l: 2 }.build_basis().unwrap();
        let v = b.evaluate(0.25).unwrap();
        assert!((v[0].re - 2f64.sqrt()).abs() < 1e-15 && v[1].norm() == 0.0);
        // half-open cells
        let v = b.evaluate(0.5).unwrap();
        assert!(v[0].norm() == 0.0 && (v[1].re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn legendre_closed_form() {
        let b = SpaceSpec::Legendre { m: 1 }.build_basis().unwrap();
        let v = b.evaluate(0.5).unwrap();
        assert!((v[0].re - 1.0).abs() < 1e-15 && v[1].norm() < 1e-15);
        let v = b.evaluate(0.9).unwrap();
        assert!((v[1].re - 3f64.sqrt() * 0.8).abs() < 1e-14);
    }

    #[test]
    fn trig_at_zero() {
        let b = SpaceSpec::Trig { m: 1 }.build_basis().unwrap();
        for v in b.evaluate(0.0).unwrap() {
            assert!((v - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn evaluate_rejects_outside() {
        let b = SpaceSpec::Legendre { m: 2 }.build_basis().unwrap();
        assert!(b.evaluate(1.0).is_err());
        assert!(b.evaluate(-0.1).is_err());
    }

    #[test]
    fn hat_space_is_continuous_piecewise_linear() {
        let b = SpaceSpec::Spline { d: 1, l: 2 }.build_basis().unwrap();
        // every member is continuous at 1/2 and linear on each half
        for j in 0..3 {
            let left = b.evaluate(0.5 - 1e-9).unwrap()[j].re;
            let right = b.evaluate(0.5).unwrap()[j].re;
            assert!((left - right).abs() < 1e-7);
            let f = |x: f64| b.evaluate(x).unwrap()[j].re;
            assert!((f(0.1) + f(0.3) - 2.0 * f(0.2)).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_gram_matches_quadrature() {
        let h = 0.37;
        let deg = 7;
        let d = legendre_derivative_gram(deg, h);
        // derivative of q_n via finite rule: q_n'(x) = sqrt((2n+1)/h) (2/h) P_n'(t)
        let (nodes, weights) = crate::quadrature::gauss_legendre(deg + 2);
        let dp = |n: usize, t: f64| -> f64 {
            // P_n'(t) = sum over k = n-1, n-3, ... of (2k+1) P_k(t)
            let mut p = vec![0.0; n + 1];
            legendre_values(n, t, &mut p);
            (0..n).rev().step_by(2).map(|k| (2 * k + 1) as f64 * p[k]).sum()
        };
        for n in 0..=deg {
            for m in 0..=deg {
                let s: f64 = nodes
                    .iter()
                    .zip(&weights)
                    .map(|(&t, &w)| {
                        let scale = ((2 * n + 1) as f64 / h).sqrt() * ((2 * m + 1) as f64 / h).sqrt() * 4.0 / (h * h);
                        0.5 * h * w * scale * dp(n, t) * dp(m, t)
                    })
                    .sum();
                assert!(
                    (s - d[(n, m)]).abs() < 1e-9 * (1.0 + s.abs()),
                    "{n},{m}: {s} vs {}",
                    d[(n, m)]
                );
            }
        }
    }

    #[test]
    fn custom_span() {
        let cols = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let b = OrthoBasis::from_piecewise(vec![0.0, 1.0], vec![1], cols, vec![]).unwrap();
        assert_eq!(b.dim(), 1);
        let v = b.evaluate(0.0).unwrap()[0].re.abs();
        assert!((v - 3f64.sqrt()).abs() < 1e-14);
        let dep = DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 2.0, 0.0]);
        assert!(OrthoBasis::from_piecewise(vec![0.0, 1.0], vec![1], dep, vec![]).is_err());
    }
}
