//! Stability-limited dimension search over bandwidths and the resulting
//! scaling ratios and error curves.

use crate::analysis::linear_fit;
use crate::error::{Error, Result};
use crate::fourier::{l2_error, sample_function, FunctionSpec};
use crate::sampling::{generate, SampleSet, SchemeKind, SchemeSpec};
use crate::solver::{reconstruct, stability_constant};
use crate::spaces::SpaceSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// A family of spaces indexed by one integer: trig and Legendre degree, or
/// the number of spline subintervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceFamily {
    Trig,
    Legendre,
    Spline { d: usize },
}

impl SpaceFamily {
    pub fn space(&self, index: usize) -> SpaceSpec {
        match *self {
            SpaceFamily::Trig => SpaceSpec::Trig { m: index },
            SpaceFamily::Legendre => SpaceSpec::Legendre { m: index },
            SpaceFamily::Spline { d } => SpaceSpec::Spline { d, l: index },
        }
    }

    pub fn dimension(&self, index: usize) -> usize {
        self.space(index).dimension()
    }

    /// Largest index whose dimension does not exceed `n`.
    pub fn max_index(&self, n: usize) -> usize {
        match *self {
            SpaceFamily::Trig => n.saturating_sub(1) / 2,
            SpaceFamily::Legendre => n.saturating_sub(1),
            SpaceFamily::Spline { d } => n.saturating_sub(d),
        }
    }

    /// `M/K`, `M/sqrt(K)` or `M d^2/K`.
    pub fn ratio(&self, index: usize, k: f64) -> f64 {
        let m = index as f64;
        match *self {
            SpaceFamily::Trig => m / k,
            SpaceFamily::Legendre => m / k.sqrt(),
            SpaceFamily::Spline { d } => m * (d * d) as f64 / k,
        }
    }

    /// Expected exponent of the selected index against `K`.
    pub fn expected_slope(&self) -> f64 {
        match self {
            SpaceFamily::Legendre => 0.5,
            _ => 1.0,
        }
    }
}

impl fmt::Display for SpaceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceFamily::Trig => f.write_str("trig"),
            SpaceFamily::Legendre => f.write_str("legendre"),
            SpaceFamily::Spline { d } => write!(f, "spline:{d}"),
        }
    }
}

impl FromStr for SpaceFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "trig" => Ok(SpaceFamily::Trig),
            "legendre" => Ok(SpaceFamily::Legendre),
            other => {
                let bad = || Error::invalid(format!("unknown space family '{other}'"));
                if let Some(order) = other.strip_prefix("spline_order:") {
                    // order counts coefficients per cell, one more than the degree
                    let order: usize = order.parse().map_err(|_| bad())?;
                    return order.checked_sub(1).map(|d| SpaceFamily::Spline { d }).ok_or_else(bad);
                }
                let d = other
                    .strip_prefix("spline:")
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(bad)?;
                Ok(SpaceFamily::Spline { d })
            }
        }
    }
}

/// Knobs shared by every sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    /// Target density `delta_0`.
    pub delta_max: f64,
    /// Oversampling for jittered schemes.
    pub oversample: f64,
    pub theta: f64,
    pub threshold: f64,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            delta_max: 0.9,
            oversample: 1.2,
            theta: 0.1,
            threshold: 3.0,
            seed: 7,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_max > 0.0 && self.oversample >= 1.0 && self.threshold > 0.0) {
            return Err(Error::invalid("need delta_max > 0, oversample >= 1 and threshold > 0"));
        }
        if !(0.0..1.0).contains(&self.theta) {
            return Err(Error::invalid("theta must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Scheme for bandwidth `k` whose density does not exceed `delta_max`.
///
/// Uniform uses `N = ceil(2K/delta_0)`, jittered oversamples that by
/// `oversample` (with `theta` small enough to stay below `delta_0`), and
/// log sampling searches for the least `N` meeting the target.
pub fn choose_scheme(kind: SchemeKind, k: f64, cfg: &SweepConfig) -> Result<SchemeSpec> {
    cfg.validate()?;
    let base = 2.0 * k / cfg.delta_max;
    match kind {
        SchemeKind::Uniform => Ok(SchemeSpec::uniform(base.ceil().max(1.0) as usize, k)),
        SchemeKind::Jittered => {
            let n = (base * cfg.oversample).ceil().max(2.0) as usize;
            Ok(SchemeSpec::jittered(n, k, cfg.theta, cfg.seed))
        }
        SchemeKind::Log => {
            let dense = |n: usize| -> Result<bool> { Ok(generate(&SchemeSpec::log(n, k))?.density() <= cfg.delta_max) };
            let mut lo = (base.ceil() as usize).max(2);
            if dense(lo)? {
                return Ok(SchemeSpec::log(lo, k));
            }
            let mut hi = lo * 2;
            while !dense(hi)? {
                lo = hi;
                hi *= 2;
                if hi > 1 << 24 {
                    return Err(Error::invalid("log sampling cannot reach the density target"));
                }
            }
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if dense(mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok(SchemeSpec::log(hi, k))
        }
    }
}

/// Stability constant of one family member, memoized by index.
struct Probe<'a> {
    family: SpaceFamily,
    samples: &'a SampleSet,
    cache: BTreeMap<usize, f64>,
}

impl Probe<'_> {
    fn c_ratio(&mut self, index: usize) -> Result<f64> {
        if let Some(c) = self.cache.get(&index) {
            return Ok(*c);
        }
        let c = if self.family.dimension(index) > self.samples.len() {
            f64::INFINITY
        } else {
            let basis = self.family.space(index).build_basis()?;
            stability_constant(&basis, self.samples).c_ratio
        };
        self.cache.insert(index, c);
        Ok(c)
    }
}

/// The selected index with the constants on both sides of the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableChoice {
    pub index: usize,
    pub c_ratio: f64,
    /// `c_ratio` at `index + 1` (infinite when the space outgrows `N`).
    pub c_ratio_next: f64,
}

/// Largest index with `C(N, M) <= threshold`, by exponential then binary
/// search. Relies on the constant growing with the index.
pub fn max_stable_dimension(family: SpaceFamily, samples: &SampleSet, threshold: f64) -> Result<StableChoice> {
    let mut probe = Probe {
        family,
        samples,
        cache: BTreeMap::new(),
    };
    let ok = |p: &mut Probe, i: usize| -> Result<bool> { Ok(p.c_ratio(i)? <= threshold) };
    if !ok(&mut probe, 1)? {
        return Err(Error::BandwidthTooSmall { threshold });
    }
    let cap = family.max_index(samples.len());
    let mut lo = 1;
    let mut hi = 2;
    while hi <= cap && ok(&mut probe, hi)? {
        lo = hi;
        hi *= 2;
    }
    let mut hi = hi.min(cap + 1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(&mut probe, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(StableChoice {
        index: lo,
        c_ratio: probe.c_ratio(lo)?,
        c_ratio_next: probe.c_ratio(lo + 1)?,
    })
}

/// One bandwidth of a scaling sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub k: f64,
    pub n: usize,
    pub m: usize,
    pub ratio: f64,
    pub c_ratio: f64,
    pub delta: f64,
}

/// `count` log-spaced bandwidths from `lo` to `hi`.
pub fn log_k_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| match i {
            0 => lo,
            i if i == count - 1 => hi,
            i => (a + (b - a) * i as f64 / (count - 1) as f64).exp(),
        })
        .collect()
}

pub fn default_k_grid() -> Vec<f64> {
    log_k_grid(5.0, 200.0, 20)
}

fn scaling_row(family: SpaceFamily, kind: SchemeKind, k: f64, cfg: &SweepConfig) -> Result<ScalingRow> {
    let spec = choose_scheme(kind, k, cfg)?;
    let s = generate(&spec)?;
    let choice = max_stable_dimension(family, &s, cfg.threshold)?;
    Ok(ScalingRow {
        k,
        n: s.len(),
        m: choice.index,
        ratio: family.ratio(choice.index, k),
        c_ratio: choice.c_ratio,
        delta: s.density(),
    })
}

pub fn scaling_table(family: SpaceFamily, kind: SchemeKind, ks: &[f64], cfg: &SweepConfig) -> Result<Vec<ScalingRow>> {
    ks.par_iter().map(|&k| scaling_row(family, kind, k, cfg)).collect()
}

/// Reconstruction error at one bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub k: f64,
    pub n: usize,
    pub m: usize,
    pub error: f64,
}

/// Errors of `f_{N,M}` at the dimensions chosen in `rows`.
pub fn errors_for(
    f: &FunctionSpec,
    family: SpaceFamily,
    kind: SchemeKind,
    rows: &[ScalingRow],
    cfg: &SweepConfig,
) -> Result<Vec<ErrorRow>> {
    rows.par_iter()
        .map(|row| {
            let s = generate(&choose_scheme(kind, row.k, cfg)?)?;
            let basis = family.space(row.m).build_basis()?;
            let data = sample_function(f, &s)?;
            let rec = reconstruct(&basis, &data)?;
            Ok(ErrorRow {
                k: row.k,
                n: row.n,
                m: row.m,
                error: l2_error(f, &basis, &rec.coefficients)?,
            })
        })
        .collect()
}

pub fn error_curve(
    f: &FunctionSpec,
    family: SpaceFamily,
    kind: SchemeKind,
    ks: &[f64],
    cfg: &SweepConfig,
) -> Result<Vec<ErrorRow>> {
    let rows = scaling_table(family, kind, ks, cfg)?;
    errors_for(f, family, kind, &rows, cfg)
}

/// Slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly).0
}

/// Standard deviation over mean.
pub fn coefficient_of_variation(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean
}

/// One family's curve within a panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series<R> {
    pub family: SpaceFamily,
    pub rows: Vec<R>,
}

/// Ratio panels (jittered, log) and error panels (jittered, log).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure1 {
    pub ratios: Vec<(SchemeKind, Vec<Series<ScalingRow>>)>,
    pub errors: Vec<(SchemeKind, Vec<Series<ErrorRow>>)>,
}

pub fn figure1_families() -> Vec<SpaceFamily> {
    vec![
        SpaceFamily::Trig,
        SpaceFamily::Legendre,
        SpaceFamily::Spline { d: 1 },
        SpaceFamily::Spline { d: 2 },
        SpaceFamily::Spline { d: 3 },
    ]
}

pub fn figure1(f: &FunctionSpec, families: &[SpaceFamily], ks: &[f64], cfg: &SweepConfig) -> Result<Figure1> {
    let mut ratios = Vec::new();
    let mut errors = Vec::new();
    for kind in [SchemeKind::Jittered, SchemeKind::Log] {
        let mut rs = Vec::new();
        let mut es = Vec::new();
        for &family in families {
            let rows = scaling_table(family, kind, ks, cfg)?;
            es.push(Series {
                family,
                rows: errors_for(f, family, kind, &rows, cfg)?,
            });
            rs.push(Series { family, rows });
        }
        ratios.push((kind, rs));
        errors.push((kind, es));
    }
    Ok(Figure1 { ratios, errors })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_frequencies_select_full_trig_degree() {
        let pts: Vec<f64> = (-10..=10).map(|k| k as f64).collect();
        let s = SampleSet::new(pts, 10.5).unwrap();
        let c = max_stable_dimension(SpaceFamily::Trig, &s, 3.0).unwrap();
        assert_eq!(c.index, 10);
        assert!((c.c_ratio - 2.0).abs() < 1e-10);
        assert!(c.c_ratio_next.is_infinite());
    }

    #[test]
    fn infinite_threshold_caps_at_sample_count() {
        let s = generate(&SchemeSpec::jittered(30, 10.0, 0.2, 3)).unwrap();
        let c = max_stable_dimension(SpaceFamily::Legendre, &s, f64::INFINITY).unwrap();
        assert_eq!(c.index, 29);
        let c = max_stable_dimension(SpaceFamily::Spline { d: 2 }, &s, f64::INFINITY).unwrap();
        assert_eq!(SpaceFamily::Spline { d: 2 }.dimension(c.index), 30);
    }

    #[test]
    fn selection_is_maximal() {
        let cfg = SweepConfig::default();
        for family in [SpaceFamily::Trig, SpaceFamily::Legendre, SpaceFamily::Spline { d: 2 }] {
            let s = generate(&choose_scheme(SchemeKind::Jittered, 20.0, &cfg).unwrap()).unwrap();
            let c = max_stable_dimension(family, &s, 3.0).unwrap();
            assert!(c.c_ratio <= 3.0 && c.c_ratio_next > 3.0, "{family}: {c:?}");
        }
    }

    #[test]
    fn too_small_bandwidth_is_reported() {
        let s = SampleSet::new(vec![-0.1, 0.1], 0.2).unwrap();
        assert!(matches!(
            max_stable_dimension(SpaceFamily::Legendre, &s, 1.01),
            Err(Error::BandwidthTooSmall { .. })
        ));
    }

    #[test]
    fn chosen_schemes_meet_density() {
        let cfg = SweepConfig::default();
        for k in [5.0, 37.0, 200.0] {
            for kind in [SchemeKind::Uniform, SchemeKind::Jittered, SchemeKind::Log] {
                let spec = choose_scheme(kind, k, &cfg).unwrap();
                let s = generate(&spec).unwrap();
                assert!(s.density() <= cfg.delta_max, "{kind:?} {k}: {}", s.density());
            }
            let log = choose_scheme(SchemeKind::Log, k, &cfg).unwrap();
            let fewer = generate(&SchemeSpec::log(log.n - 1, k)).unwrap();
            assert!(fewer.density() > cfg.delta_max);
        }
    }

    #[test]
    fn k_grid_endpoints() {
        let g = default_k_grid();
        assert_eq!(g.len(), 20);
        assert_eq!((g[0], g[19]), (5.0, 200.0));
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn family_parsing() {
        for f in figure1_families() {
            assert_eq!(f.to_string().parse::<SpaceFamily>().unwrap(), f);
        }
        assert!("spline".parse::<SpaceFamily>().is_err());
        assert_eq!(
            "spline_order:4".parse::<SpaceFamily>().unwrap(),
            SpaceFamily::Spline { d: 3 }
        );
        assert!("spline_order:0".parse::<SpaceFamily>().is_err());
    }

    #[test]
    fn fit_helpers() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(0.5)).collect();
        assert!((loglog_slope(&x, &y) - 0.5).abs() < 1e-12);
        assert_eq!(coefficient_of_variation(&[2.0, 2.0]), 0.0);
    }

    #[test]
    fn trig_member_error_is_tiny() {
        let f = FunctionSpec::Expression {
            expr: crate::fourier::Expr::Cos(Box::new(crate::fourier::Expr::Mul(
                Box::new(crate::fourier::Expr::Const(10.0 * std::f64::consts::PI)),
                Box::new(crate::fourier::Expr::X),
            ))),
            jumps: vec![],
        };
        let cfg = SweepConfig::default();
        let rows = error_curve(&f, SpaceFamily::Trig, SchemeKind::Jittered, &[10.0, 14.0], &cfg).unwrap();
        for r in rows {
            assert!(r.m >= 5 && r.error <= 1e-8, "{r:?}");
        }
    }
}
