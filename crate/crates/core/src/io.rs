//! CSV exchange formats. Headers are mandatory and numbers are written in
//! shortest round-trip form so reruns are byte-identical.

use crate::analysis::ResidualCurve;
use crate::error::{Error, Result};
use crate::experiments::{ErrorRow, ScalingRow};
use crate::fourier::FourierData;
use crate::sampling::{SampleSet, WeightVector};
use num_complex::Complex64;
use std::io::{Read, Write};

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line: 0,
            message: format!("{other:?}"),
        },
    }
}

/// Shortest round-trip text, switching to exponent form for tiny or huge
/// magnitudes.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn write_rows<W: Write>(w: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut out = writer(w);
    out.write_record(header).map_err(csv_err)?;
    for r in rows {
        out.write_record(&r).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_samples<W: Write>(w: W, s: &SampleSet) -> Result<()> {
    write_rows(w, &["omega"], s.points().iter().map(|p| vec![num(*p)]))
}

pub fn write_fourier<W: Write>(w: W, d: &FourierData) -> Result<()> {
    let rows = d
        .samples
        .points()
        .iter()
        .zip(&d.values)
        .zip(&d.weights.values)
        .map(|((o, v), mu)| vec![num(*o), num(v.re), num(v.im), num(*mu)]);
    write_rows(w, &["omega", "re", "im", "weight"], rows)
}

pub fn write_residual<W: Write>(w: W, c: &ResidualCurve) -> Result<()> {
    write_rows(
        w,
        &["z", "e"],
        c.z.iter().zip(&c.e).map(|(z, e)| vec![num(*z), num(*e)]),
    )
}

/// Scaling rows, optionally prefixed with a label column `space`.
pub fn write_scaling<W: Write>(w: W, rows: &[(Option<String>, ScalingRow)]) -> Result<()> {
    let labelled = rows.iter().any(|r| r.0.is_some());
    let mut header = vec!["k", "n", "m", "ratio", "c_ratio"];
    if labelled {
        header.insert(0, "space");
    }
    let body = rows.iter().map(|(label, r)| {
        let mut v = vec![num(r.k), r.n.to_string(), r.m.to_string(), num(r.ratio), num(r.c_ratio)];
        if labelled {
            v.insert(0, label.clone().unwrap_or_default());
        }
        v
    });
    write_rows(w, &header, body)
}

pub fn write_errors<W: Write>(w: W, rows: &[(Option<String>, ErrorRow)]) -> Result<()> {
    let labelled = rows.iter().any(|r| r.0.is_some());
    let mut header = vec!["k", "n", "m", "error"];
    if labelled {
        header.insert(0, "space");
    }
    let body = rows.iter().map(|(label, r)| {
        let mut v = vec![num(r.k), r.n.to_string(), r.m.to_string(), num(r.error)];
        if labelled {
            v.insert(0, label.clone().unwrap_or_default());
        }
        v
    });
    write_rows(w, &header, body)
}

/// Function values `x,re,im`.
pub fn write_grid<W: Write>(w: W, xs: &[f64], values: &[Complex64]) -> Result<()> {
    write_rows(
        w,
        &["x", "re", "im"],
        xs.iter().zip(values).map(|(x, v)| vec![num(*x), num(v.re), num(v.im)]),
    )
}

/// Fourier samples read from `omega,re,im[,weight]`.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub data: FourierData,
    /// Whether the weights came from the file rather than the midpoint rule.
    pub weights_from_file: bool,
}

fn parse_field(rec: &csv::StringRecord, i: usize, name: &str, line: u64) -> Result<f64> {
    let raw = rec.get(i).ok_or_else(|| Error::Parse {
        line,
        message: format!("missing column '{name}'"),
    })?;
    let v: f64 = raw.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("'{raw}' is not a number in column '{name}'"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite value in column '{name}'"),
        });
    }
    Ok(v)
}

/// Reads external measurements. Rows may come in any order; they are sorted
/// by frequency. Without `bandwidth` the tightest `K = max |omega|` is used.
pub fn read_fourier<R: Read>(r: R, bandwidth: Option<f64>) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(r);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(io), Some(ir), Some(ii)) = (col("omega"), col("re"), col("im")) else {
        return Err(Error::Parse {
            line: 1,
            message: "header must contain omega, re, im".into(),
        });
    };
    let iw = col("weight");
    let mut rows: Vec<(f64, Complex64, Option<f64>, u64)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::Parse {
                line,
                message: e.to_string(),
            }
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let omega = parse_field(&rec, io, "omega", line)?;
        let v = Complex64::new(parse_field(&rec, ir, "re", line)?, parse_field(&rec, ii, "im", line)?);
        let w = match iw {
            Some(i) => {
                let w = parse_field(&rec, i, "weight", line)?;
                if w <= 0.0 {
                    return Err(Error::Parse {
                        line,
                        message: "weights must be positive".into(),
                    });
                }
                Some(w)
            }
            None => None,
        };
        rows.push((omega, v, w, line));
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no data rows".into(),
        });
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::Parse {
            line: w[1].3,
            message: format!("duplicate frequency {}", w[1].0),
        });
    }
    let points: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let samples = match bandwidth {
        Some(k) => SampleSet::new(points, k)?,
        None => SampleSet::with_tight_bandwidth(points)?,
    };
    let values = rows.iter().map(|r| r.1).collect();
    let weights_from_file = iw.is_some();
    let data = if weights_from_file {
        FourierData::new(
            samples,
            values,
            WeightVector {
                values: rows.iter().map(|r| r.2.unwrap()).collect(),
            },
        )?
    } else {
        FourierData::with_default_weights(samples, values)?
    };
    Ok(Ingested {
        data,
        weights_from_file,
    })
}
