//! Reconstruction spaces of `L^2(0, 1)`.
//!
//! Every space other than the trigonometric one is stored as coefficients in
//! shifted, normalized Legendre polynomials on a partition of `[0, 1)`.
//! Subintervals are half-open, `[a, b)`.

mod basis;
mod bspline;
mod growth;

pub use basis::{legendre_derivative_gram, BasisKind, OrthoBasis, PiecewiseBasis};
pub use bspline::bspline_values;
pub use growth::{gamma, gamma_of, growth_constants, zeta, zeta_of, GrowthConstants};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

const KNOT_SEPARATION: f64 = 1e-14;

/// Descriptor of a reconstruction space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceJson", into = "SpaceJson")]
pub enum SpaceSpec {
    /// `span{ e^{2 pi i m x} : |m| <= m }`.
    Trig { m: usize },
    /// Algebraic polynomials of degree at most `m`.
    Legendre { m: usize },
    /// Independent polynomials of degree `degrees[j]` on `[w_j, w_{j+1})`.
    PiecewisePoly { knots: Vec<f64>, degrees: Vec<usize> },
    /// Splines of degree `d` with maximal smoothness on `l` uniform cells.
    Spline { d: usize, l: usize },
    /// Step functions on `l` uniform cells.
    PiecewiseConst { l: usize },
}

impl SpaceSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            SpaceSpec::Trig { .. } => "trig",
            SpaceSpec::Legendre { .. } => "legendre",
            SpaceSpec::PiecewisePoly { .. } => "piecewise_poly",
            SpaceSpec::Spline { .. } => "spline",
            SpaceSpec::PiecewiseConst { .. } => "piecewise_const",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SpaceSpec::PiecewisePoly { knots, degrees } => {
                if degrees.len() != knots.len() + 1 {
                    return Err(Error::invalid(format!(
                        "piecewise_poly needs {} degrees for {} knots, got {}",
                        knots.len() + 1,
                        knots.len(),
                        degrees.len()
                    )));
                }
                let mut prev = 0.0;
                for &w in knots.iter().chain(std::iter::once(&1.0)) {
                    if !w.is_finite() || w - prev <= KNOT_SEPARATION {
                        return Err(Error::invalid(format!(
                            "knots must be strictly increasing inside (0, 1) and separated by more than {KNOT_SEPARATION:e}"
                        )));
                    }
                    prev = w;
                }
                Ok(())
            }
            SpaceSpec::Spline { l, .. } | SpaceSpec::PiecewiseConst { l } if *l == 0 => {
                Err(Error::invalid("cell count must be at least 1"))
            }
            _ => Ok(()),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            SpaceSpec::Trig { m } => 2 * m + 1,
            SpaceSpec::Legendre { m } => m + 1,
            SpaceSpec::PiecewisePoly { degrees, .. } => degrees.iter().map(|d| d + 1).sum(),
            SpaceSpec::Spline { d, l } => l + d,
            SpaceSpec::PiecewiseConst { l } => *l,
        }
    }

    /// Interior points where members may jump; the `w` of `H^1_w(0, 1)`.
    pub fn jump_knots(&self) -> Vec<f64> {
        match self {
            SpaceSpec::Trig { .. } | SpaceSpec::Legendre { .. } => Vec::new(),
            SpaceSpec::PiecewisePoly { knots, .. } => knots.clone(),
            SpaceSpec::Spline { d, .. } if *d > 0 => Vec::new(),
            SpaceSpec::Spline { l, .. } | SpaceSpec::PiecewiseConst { l } => uniform_breaks(*l)[1..*l].to_vec(),
        }
    }

    /// Shortest subinterval between consecutive jump knots (including 0 and 1).
    pub fn eta(&self) -> f64 {
        min_gap(&self.jump_knots())
    }

    /// Longest subinterval between consecutive jump knots.
    pub fn h(&self) -> f64 {
        let w = with_ends(&self.jump_knots());
        w.windows(2).map(|p| p[1] - p[0]).fold(0.0, f64::max)
    }

    pub fn build_basis(&self) -> Result<OrthoBasis> {
        OrthoBasis::new(self)
    }
}

pub(crate) fn uniform_breaks(l: usize) -> Vec<f64> {
    (0..=l).map(|i| i as f64 / l as f64).collect()
}

pub(crate) fn with_ends(knots: &[f64]) -> Vec<f64> {
    let mut w = Vec::with_capacity(knots.len() + 2);
    w.push(0.0);
    w.extend_from_slice(knots);
    w.push(1.0);
    w
}

pub(crate) fn min_gap(knots: &[f64]) -> f64 {
    let w = with_ends(knots);
    w.windows(2).map(|p| p[1] - p[0]).fold(f64::INFINITY, f64::min)
}

/// Flat JSON form `{kind, knots[], degrees[], d, l, m}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpaceJson {
    kind: String,
    #[serde(default)]
    knots: Vec<f64>,
    #[serde(default)]
    degrees: Vec<usize>,
    #[serde(default)]
    d: Option<usize>,
    #[serde(default)]
    l: Option<usize>,
    #[serde(default)]
    m: Option<usize>,
}

impl From<SpaceSpec> for SpaceJson {
    fn from(s: SpaceSpec) -> Self {
        let mut j = SpaceJson {
            kind: s.kind_name().to_string(),
            knots: Vec::new(),
            degrees: Vec::new(),
            d: None,
            l: None,
            m: None,
        };
        match s {
            SpaceSpec::Trig { m } | SpaceSpec::Legendre { m } => j.m = Some(m),
            SpaceSpec::PiecewisePoly { knots, degrees } => {
                j.knots = knots;
                j.degrees = degrees;
            }
            SpaceSpec::Spline { d, l } => {
                j.d = Some(d);
                j.l = Some(l);
            }
            SpaceSpec::PiecewiseConst { l } => j.l = Some(l),
        }
        j
    }
}

impl TryFrom<SpaceJson> for SpaceSpec {
    type Error = Error;

    fn try_from(j: SpaceJson) -> Result<Self> {
        let need = |v: Option<usize>, name: &str| {
            v.ok_or_else(|| Error::invalid(format!("space kind '{}' requires field '{name}'", j.kind)))
        };
        let spec = match j.kind.as_str() {
            "trig" => SpaceSpec::Trig { m: need(j.m, "m")? },
            "legendre" => SpaceSpec::Legendre { m: need(j.m, "m")? },
            "piecewise_poly" => SpaceSpec::PiecewisePoly {
                knots: j.knots.clone(),
                degrees: j.degrees.clone(),
            },
            "spline" => SpaceSpec::Spline {
                d: need(j.d, "d")?,
                l: need(j.l, "l")?,
            },
            "piecewise_const" => SpaceSpec::PiecewiseConst { l: need(j.l, "l")? },
            other => return Err(Error::invalid(format!("unknown space kind '{other}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceSpec::Trig { m } => write!(f, "trig:{m}"),
            SpaceSpec::Legendre { m } => write!(f, "legendre:{m}"),
            SpaceSpec::Spline { d, l } => write!(f, "spline:{d}:{l}"),
            SpaceSpec::PiecewiseConst { l } => write!(f, "piecewise_const:{l}"),
            SpaceSpec::PiecewisePoly { knots, degrees } => {
                let k: Vec<String> = knots.iter().map(|w| w.to_string()).collect();
                let d: Vec<String> = degrees.iter().map(|m| m.to_string()).collect();
                write!(f, "piecewise_poly:{}:{}", k.join(","), d.join(","))
            }
        }
    }
}

/// Parses the compact command-line form:
/// `trig:M`, `legendre:M`, `spline:D:L` (degree `D`; `spline_order:D+1:L` is the
/// same space), `piecewise_const:L` (alias `pconst:L`)
/// and `piecewise_poly:w1,w2:M0,M1,M2` (alias `pwpoly`; empty knot list allowed).
impl FromStr for SpaceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || Error::invalid(format!("cannot parse space '{s}'"));
        let int = |p: &str| p.trim().parse::<usize>().map_err(|_| bad());
        let spec = match parts.as_slice() {
            ["trig", m] => SpaceSpec::Trig { m: int(m)? },
            ["legendre", m] => SpaceSpec::Legendre { m: int(m)? },
            ["spline", d, l] => SpaceSpec::Spline { d: int(d)?, l: int(l)? },
            ["spline_order", k, l] => SpaceSpec::Spline {
                d: int(k)?.checked_sub(1).ok_or_else(bad)?,
                l: int(l)?,
            },
            ["piecewise_const" | "pconst", l] => SpaceSpec::PiecewiseConst { l: int(l)? },
            ["piecewise_poly" | "pwpoly", knots, degrees] => {
                let knots = knots
                    .split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()?;
                let degrees = degrees.split(',').map(int).collect::<Result<Vec<_>>>()?;
                SpaceSpec::PiecewisePoly { knots, degrees }
            }
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}
