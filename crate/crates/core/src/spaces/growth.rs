//! Derivative growth `gamma` and sup-norm growth `zeta` of a space, taken
//! over the subintervals between its jump knots.
//!
//! On each subinterval the restriction of the space is represented by an
//! orthonormal set of piecewise Legendre coordinates `U`. Then `gamma^2` is
//! the largest eigenvalue of `U^T D U` (`D` the derivative Gram matrix) and
//! `zeta^2` is the maximum of the reproducing-kernel diagonal
//! `sum_r psi_r(x)^2`.

use super::basis::{legendre_derivative_gram, BasisKind, OrthoBasis, PiecewiseBasis};
use super::{with_ends, SpaceSpec};
use crate::error::Result;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthConstants {
    pub gamma: f64,
    pub zeta: f64,
}

pub fn gamma(spec: &SpaceSpec) -> Result<f64> {
    Ok(gamma_of(&spec.build_basis()?))
}

pub fn zeta(spec: &SpaceSpec) -> Result<f64> {
    Ok(zeta_of(&spec.build_basis()?))
}

pub fn growth_constants(spec: &SpaceSpec) -> Result<GrowthConstants> {
    let b = spec.build_basis()?;
    Ok(GrowthConstants {
        gamma: gamma_of(&b),
        zeta: zeta_of(&b),
    })
}

pub fn gamma_of(basis: &OrthoBasis) -> f64 {
    match basis.kind() {
        BasisKind::Trig { m } => trig_gamma(basis, *m),
        BasisKind::Piecewise(p) => restrictions(p, basis.jumps())
            .iter()
            .map(|r| r.gamma(p))
            .fold(0.0, f64::max),
    }
}

pub fn zeta_of(basis: &OrthoBasis) -> f64 {
    match basis.kind() {
        BasisKind::Trig { .. } => {
            let mut vals = vec![Complex64::new(0.0, 0.0); basis.dim()];
            let mut kernel = |t: f64| -> f64 {
                basis.evaluate_into((0.5 * (t + 1.0)).min(1.0 - f64::EPSILON), &mut vals);
                vals.iter().map(|v| v.norm_sqr()).sum()
            };
            sup_on_piece(&mut kernel, 2e-10).sqrt()
        }
        BasisKind::Piecewise(p) => restrictions(p, basis.jumps())
            .iter()
            .map(|r| r.zeta(p))
            .fold(0.0, f64::max),
    }
}

/// Largest generalized eigenvalue of (derivative Gram, Gram) for
/// `e^{2 pi i k x}`, `|k| <= m`, both assembled by quadrature.
fn trig_gamma(basis: &OrthoBasis, m: usize) -> f64 {
    let grid = basis.joint_quadrature(basis);
    let mut v = basis.sample_matrix(&grid);
    for (i, (_, w)) in grid.iter().enumerate() {
        v.row_mut(i).scale_mut(w.sqrt());
    }
    let mut dv = v.clone();
    for (j, k) in (-(m as i64)..=m as i64).enumerate() {
        dv.column_mut(j).scale_mut(TAU * k as f64);
    }
    let g = v.adjoint() * &v;
    let d = dv.adjoint() * &dv;
    let Some(chol) = g.cholesky() else {
        return f64::NAN;
    };
    let l = chol.l();
    let linv = l.clone().try_inverse().expect("Cholesky factor is invertible");
    let h = &linv * d * linv.adjoint();
    let h = (&h + h.adjoint()).scale(0.5);
    h.symmetric_eigenvalues().max().max(0.0).sqrt()
}

/// Restriction of the space to one jump-free subinterval.
struct Restriction {
    pieces: Vec<usize>,
    /// Orthonormal coordinates, rows ordered as the concatenated pieces.
    frame: DMatrix<f64>,
}

fn restrictions(p: &PiecewiseBasis, jumps: &[f64]) -> Vec<Restriction> {
    let w = with_ends(jumps);
    let mut out = Vec::new();
    for seg in w.windows(2) {
        let pieces: Vec<usize> = (0..p.pieces())
            .filter(|&i| {
                let (a, b) = p.piece_bounds(i);
                let mid = 0.5 * (a + b);
                mid > seg[0] && mid < seg[1]
            })
            .collect();
        if pieces.is_empty() {
            continue;
        }
        let rows: usize = pieces.iter().map(|&i| p.degrees()[i] + 1).sum();
        let mut r = DMatrix::zeros(rows, p.coeffs().ncols());
        let mut at = 0;
        for &i in &pieces {
            let n = p.degrees()[i] + 1;
            r.rows_mut(at, n).copy_from(&p.coeffs().rows(p.offsets()[i], n));
            at += n;
        }
        let svd = r.svd(true, false);
        let smax = svd.singular_values.max();
        if smax < 1e-14 {
            // every basis function vanishes here
            continue;
        }
        let u = svd.u.expect("left singular vectors requested");
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&k| svd.singular_values[k] > 1e-10 * smax)
            .collect();
        let frame = DMatrix::from_fn(rows, keep.len(), |i, j| u[(i, keep[j])]);
        out.push(Restriction { pieces, frame });
    }
    out
}

impl Restriction {
    fn rows_of(&self, p: &PiecewiseBasis) -> Vec<(usize, usize, usize)> {
        let mut at = 0;
        self.pieces
            .iter()
            .map(|&i| {
                let n = p.degrees()[i] + 1;
                let r = (i, at, n);
                at += n;
                r
            })
            .collect()
    }

    fn gamma(&self, p: &PiecewiseBasis) -> f64 {
        let rows = self.frame.nrows();
        let mut d = DMatrix::zeros(rows, rows);
        for (i, at, n) in self.rows_of(p) {
            let (a, b) = p.piece_bounds(i);
            d.view_mut((at, at), (n, n))
                .copy_from(&legendre_derivative_gram(n - 1, b - a));
        }
        let h = self.frame.transpose() * d * &self.frame;
        let h = 0.5 * (&h + h.transpose());
        h.symmetric_eigenvalues().max().max(0.0).sqrt()
    }

    fn zeta(&self, p: &PiecewiseBasis) -> f64 {
        let mut best = 0.0f64;
        for (i, at, n) in self.rows_of(p) {
            let block = self.frame.rows(at, n).into_owned();
            let (a, b) = p.piece_bounds(i);
            let mut q = vec![0.0; n];
            let mut kernel = |t: f64| -> f64 {
                p.local_legendre(i, t, &mut q);
                let v = block.tr_mul(&nalgebra::DVector::from_column_slice(&q));
                v.norm_squared()
            };
            best = best.max(sup_on_piece(&mut kernel, 1e-10 * 2.0 / (b - a)));
        }
        best.sqrt()
    }
}

const GRID: usize = 64;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximum of `f` on `[-1, 1]`: Chebyshev-Lobatto grid, then golden-section
/// refinement around every grid local maximum.
fn sup_on_piece<F: FnMut(f64) -> f64>(f: &mut F, tol: f64) -> f64 {
    let ts: Vec<f64> = (0..GRID)
        .map(|i| -(std::f64::consts::PI * i as f64 / (GRID - 1) as f64).cos())
        .collect();
    let vals: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    let mut best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for i in 0..GRID {
        let left = if i > 0 { vals[i - 1] } else { f64::NEG_INFINITY };
        let right = if i + 1 < GRID { vals[i + 1] } else { f64::NEG_INFINITY };
        if vals[i] < left || vals[i] < right {
            continue;
        }
        let lo = ts[i.saturating_sub(1)];
        let hi = ts[(i + 1).min(GRID - 1)];
        best = best.max(golden_max(f, lo, hi, tol));
    }
    best
}

fn golden_max<F: FnMut(f64) -> f64>(f: &mut F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    f1.max(f2).max(f(lo)).max(f(hi))
}
