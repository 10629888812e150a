//! Nonuniform frequency sets: generation, density and quadrature weights.
//!
//! Both the density and the weights use the wrap-around ghost points
//! `omega_0 = omega_N - 2K` and `omega_{N+1} = omega_1 + 2K`.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use serde::{Deserialize, Serialize};

/// Strictly increasing frequencies inside `[-K, K]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    points: Vec<f64>,
    bandwidth: f64,
}

impl SampleSet {
    pub fn new(points: Vec<f64>, bandwidth: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("sample set must contain at least one point"));
        }
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::invalid(format!("bandwidth must be positive, got {bandwidth}")));
        }
        if let Some(w) = points
            .windows(2)
            .position(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(Error::invalid(format!(
                "sample points must be strictly increasing (index {} -> {})",
                w,
                w + 1
            )));
        }
        if let Some(p) = points.iter().find(|p| p.is_nan() || p.abs() > bandwidth) {
            return Err(Error::invalid(format!(
                "sample point {p} lies outside [-{bandwidth}, {bandwidth}]"
            )));
        }
        Ok(Self { points, bandwidth })
    }

    /// Smallest bandwidth that contains every point.
    pub fn with_tight_bandwidth(points: Vec<f64>) -> Result<Self> {
        let k = points.iter().fold(0.0f64, |m, p| m.max(p.abs()));
        Self::new(points, if k > 0.0 { k } else { 0.5 })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn ghosts(&self) -> (f64, f64) {
        let n = self.points.len();
        (
            self.points[n - 1] - 2.0 * self.bandwidth,
            self.points[0] + 2.0 * self.bandwidth,
        )
    }

    /// Largest consecutive gap including the two ghost gaps; the smallest
    /// `delta` for which the set is `delta`-dense at its bandwidth.
    pub fn density(&self) -> f64 {
        let (lo, hi) = self.ghosts();
        let n = self.points.len();
        let mut delta = (self.points[0] - lo).max(hi - self.points[n - 1]);
        for w in self.points.windows(2) {
            delta = delta.max(w[1] - w[0]);
        }
        delta
    }

    /// Midpoint weights `mu_n = (omega_{n+1} - omega_{n-1}) / 2`.
    pub fn weights(&self) -> WeightVector {
        let (lo, hi) = self.ghosts();
        let n = self.points.len();
        let at = |i: isize| -> f64 {
            if i < 0 {
                lo
            } else if i as usize >= n {
                hi
            } else {
                self.points[i as usize]
            }
        };
        let values = (0..n as isize).map(|i| 0.5 * (at(i + 1) - at(i - 1))).collect();
        WeightVector { values }
    }

    pub fn negated(&self) -> Self {
        Self {
            points: self.points.iter().rev().map(|p| -p).collect(),
            bandwidth: self.bandwidth,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub values: Vec<f64>,
}

impl WeightVector {
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Uniform,
    Jittered,
    Log,
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(SchemeKind::Uniform),
            "jittered" => Ok(SchemeKind::Jittered),
            "log" => Ok(SchemeKind::Log),
            other => Err(Error::invalid(format!("unknown sampling scheme '{other}'"))),
        }
    }
}

/// Parameters of a generated sampling pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub kind: SchemeKind,
    pub n: usize,
    pub k: f64,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SchemeSpec {
    pub fn uniform(n: usize, k: f64) -> Self {
        Self {
            kind: SchemeKind::Uniform,
            n,
            k,
            theta: 0.0,
            seed: 0,
        }
    }

    pub fn jittered(n: usize, k: f64, theta: f64, seed: u64) -> Self {
        Self {
            kind: SchemeKind::Jittered,
            n,
            k,
            theta,
            seed,
        }
    }

    pub fn log(n: usize, k: f64) -> Self {
        Self {
            kind: SchemeKind::Log,
            n,
            k,
            theta: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(Error::invalid(format!("bandwidth K must be positive, got {}", self.k)));
        }
        let min_n = if self.kind == SchemeKind::Uniform { 1 } else { 2 };
        if self.n < min_n {
            return Err(Error::invalid(format!("scheme needs N >= {min_n}, got {}", self.n)));
        }
        if !(0.0..1.0).contains(&self.theta) {
            return Err(Error::invalid(format!(
                "jitter fraction must lie in [0, 1), got {}",
                self.theta
            )));
        }
        Ok(())
    }
}

/// Builds the sample set described by `spec`.
///
/// * uniform: midpoint grid `-K + (n - 1/2) 2K/N`.
/// * jittered: the midpoint grid plus independent offsets uniform on
///   `[-theta K/N, theta K/N]`.
/// * log: a geometric progression from `K/N` to `K` mirrored about zero,
///   with `N/2` points per side (plus the origin when `N` is odd).
pub fn generate(spec: &SchemeSpec) -> Result<SampleSet> {
    spec.validate()?;
    let n = spec.n;
    let k = spec.k;
    let step = 2.0 * k / n as f64;
    let midpoint = |i: usize| -k + (i as f64 + 0.5) * step;
    let points = match spec.kind {
        SchemeKind::Uniform => (0..n).map(midpoint).collect(),
        SchemeKind::Jittered => {
            let mut rng = SplitMix64::new(spec.seed);
            let amp = spec.theta * k / n as f64;
            (0..n).map(|i| midpoint(i) + amp * rng.uniform(-1.0, 1.0)).collect()
        }
        SchemeKind::Log => {
            let per_side = n / 2;
            let positive: Vec<f64> = if per_side == 1 {
                vec![k]
            } else {
                let span = (per_side - 1) as f64;
                let ratio_ln = (n as f64).ln();
                (0..per_side)
                    .map(|j| k * ((j as f64 - span) / span * ratio_ln).exp())
                    .collect()
            };
            let mut pts: Vec<f64> = positive.iter().rev().map(|p| -p).collect();
            if n % 2 == 1 {
                pts.push(0.0);
            }
            pts.extend(positive);
            pts
        }
    };
    SampleSet::new(points, k)
}
