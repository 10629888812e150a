//! Weighted least-squares reconstruction and the frame constants that
//! control its stability.

use crate::error::{Error, Result};
use crate::fourier::{transform_matrix, FourierData};
use crate::sampling::SampleSet;
use crate::spaces::{OrthoBasis, SpaceSpec};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

/// Relative singular-value cutoff below which the system is rank deficient.
pub const RANK_TOL: f64 = 1e-12;

/// `A[n][m] = phi_m^(omega_n)`.
pub fn design_matrix(basis: &OrthoBasis, s: &SampleSet) -> DMatrix<Complex64> {
    transform_matrix(basis, s.points())
}

fn scale_rows(a: &mut DMatrix<Complex64>, weights: &[f64]) {
    for (i, w) in weights.iter().enumerate() {
        a.row_mut(i).scale_mut(w.sqrt());
    }
}

/// `A* W A`, the matrix of the sampling quadratic form on the space.
pub fn weighted_gram(basis: &OrthoBasis, s: &SampleSet) -> DMatrix<Complex64> {
    let mut a = design_matrix(basis, s);
    scale_rows(&mut a, &s.weights().values);
    gram_of_columns(&a)
}

/// `A^* A` through real products, Hermitian by construction.
pub(crate) fn gram_of_columns(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let re = a.map(|c| c.re);
    let im = a.map(|c| c.im);
    let g_re = re.tr_mul(&re) + im.tr_mul(&im);
    let cross = re.tr_mul(&im);
    let n = a.ncols();
    DMatrix::from_fn(n, n, |i, j| {
        let sym = 0.5 * (g_re[(i, j)] + g_re[(j, i)]);
        Complex64::new(sym, cross[(i, j)] - cross[(j, i)])
    })
}

pub(crate) fn min_eigenvalue(h: DMatrix<Complex64>) -> f64 {
    if h.nrows() == 0 {
        return 0.0;
    }
    h.symmetric_eigenvalues().min().max(0.0)
}

/// Lower frame constant `C1(N, M)`: the smallest eigenvalue of `A* W A`
/// (equivalently `sigma_min(W^{1/2} A)^2`). Zero when `N < dim`.
pub fn frame_c1(basis: &OrthoBasis, s: &SampleSet) -> f64 {
    if s.len() < basis.dim() {
        return 0.0;
    }
    min_eigenvalue(weighted_gram(basis, s))
}

/// Stability quantities for a (space, samples) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameConstants {
    pub c1: f64,
    /// `(1 + delta)^2`, an upper bound for the upper frame constant.
    pub c2_bound: f64,
    /// `sqrt(c2_bound / c1)`, infinite when `c1 = 0`.
    pub c_ratio: f64,
    pub delta: f64,
    /// The `epsilon` for which `(1 + delta)/(1 - epsilon - delta)` equals
    /// `c_ratio`, when it lies in `(0, 1 - delta)`.
    pub epsilon_implied: Option<f64>,
}

impl FrameConstants {
    pub fn from_c1(c1: f64, delta: f64) -> Self {
        let c2_bound = (1.0 + delta).powi(2);
        let c_ratio = if c1 > 0.0 {
            (1.0 + delta) / c1.sqrt()
        } else {
            f64::INFINITY
        };
        let eps = 1.0 - delta - (1.0 + delta) / c_ratio;
        let epsilon_implied = (c_ratio.is_finite() && eps > 0.0 && eps < 1.0 - delta).then_some(eps);
        Self {
            c1,
            c2_bound,
            c_ratio,
            delta,
            epsilon_implied,
        }
    }

    /// The density hypothesis `delta < 1` holds.
    pub fn is_dense(&self) -> bool {
        self.delta < 1.0
    }
}

pub fn stability_constant(basis: &OrthoBasis, s: &SampleSet) -> FrameConstants {
    FrameConstants::from_c1(frame_c1(basis, s), s.density())
}

/// A reconstruction `f_{N,M}` in the orthonormal basis of its space.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub space: Option<SpaceSpec>,
    pub coefficients: Vec<Complex64>,
    /// Weighted misfit `sqrt(sum_n mu_n |b_n - (A a)_n|^2)`.
    pub residual: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

impl Serialize for Reconstruction {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let coeffs: Vec<[f64; 2]> = self.coefficients.iter().map(|c| [c.re, c.im]).collect();
        let mut st = ser.serialize_struct("Reconstruction", 5)?;
        st.serialize_field("space", &self.space)?;
        st.serialize_field("coefficients", &coeffs)?;
        st.serialize_field("residual", &self.residual)?;
        st.serialize_field("sigma_min", &self.sigma_min)?;
        st.serialize_field("sigma_max", &self.sigma_max)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Reconstruction {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            space: Option<SpaceSpec>,
            coefficients: Vec<[f64; 2]>,
            residual: f64,
            sigma_min: f64,
            sigma_max: f64,
        }
        let r = Raw::deserialize(de)?;
        Ok(Reconstruction {
            space: r.space,
            coefficients: r.coefficients.iter().map(|c| Complex64::new(c[0], c[1])).collect(),
            residual: r.residual,
            sigma_min: r.sigma_min,
            sigma_max: r.sigma_max,
        })
    }
}

/// Solves `min_a sum_n mu_n |b_n - (A a)_n|^2` by a column-pivoted QR
/// factorization of `W^{1/2} A`. The singular values of the scaled matrix
/// are recorded; a relative gap below [`RANK_TOL`] is reported as
/// [`Error::Unstable`].
pub fn reconstruct(basis: &OrthoBasis, data: &FourierData) -> Result<Reconstruction> {
    let n = data.samples.len();
    let dim = basis.dim();
    if data.values.len() != n || data.weights.len() != n {
        return Err(Error::invalid("data lengths disagree"));
    }
    let mut a = design_matrix(basis, &data.samples);
    scale_rows(&mut a, &data.weights.values);
    let rhs = DVector::from_iterator(
        n,
        data.values.iter().zip(&data.weights.values).map(|(b, w)| b * w.sqrt()),
    );
    if n < dim {
        return Err(Error::Unstable {
            sigma_min: 0.0,
            sigma_max: a.norm(),
        });
    }
    let sv = a.clone().svd(false, false).singular_values;
    let sigma_max = sv.max();
    let sigma_min = sv.min();
    if sigma_min.is_nan() || sigma_min < RANK_TOL * sigma_max || sigma_max == 0.0 {
        return Err(Error::Unstable { sigma_min, sigma_max });
    }

    let qr = a.clone().col_piv_qr();
    let mut qtb = rhs.clone();
    qr.q_tr_mul(&mut qtb);
    let r = qr.r();
    let mut z = qtb.rows(0, dim).into_owned();
    let solved = r.columns(0, dim).solve_upper_triangular_mut(&mut z);
    let coeffs = if solved {
        qr.p().inv_permute_rows(&mut z);
        z
    } else {
        // pivoted QR broke down despite the singular-value check
        a.clone()
            .svd(true, true)
            .solve(&rhs, RANK_TOL * sigma_max)
            .map_err(|_| Error::Unstable { sigma_min, sigma_max })?
            .column(0)
            .into_owned()
    };
    let misfit = &rhs - &a * &coeffs;
    Ok(Reconstruction {
        space: basis.spec().cloned(),
        coefficients: coeffs.iter().copied().collect(),
        residual: misfit.norm(),
        sigma_min,
        sigma_max,
    })
}

impl Reconstruction {
    /// Values `f_{N,M}(x)` on a grid.
    pub fn evaluate_grid(&self, basis: &OrthoBasis, xs: &[f64]) -> Vec<Complex64> {
        xs.iter().map(|&x| basis.combine(&self.coefficients, x)).collect()
    }
}
