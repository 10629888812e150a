//! Command-line front end. `run` returns the process exit code: 0 on
//! success, 1 for usage or input errors, 2 for numerical instability.

use crate::analysis::{gap_of, residual_curve, stability_report, verify_lemma2, z_grid};
use crate::error::{Error, Result};
use crate::experiments::{
    default_k_grid, figure1, figure1_families, log_k_grid, scaling_table, ErrorRow, ScalingRow, Series, SpaceFamily,
    SweepConfig,
};
use crate::fourier::{sample_function, FourierData, FunctionSpec, Signal, SpaceMember};
use crate::io;
use crate::plot::LinePlot;
use crate::sampling::{generate, SchemeKind, SchemeSpec};
use crate::solver::{reconstruct, FrameConstants, Reconstruction};
use crate::spaces::{OrthoBasis, SpaceSpec};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "nugs",
    version,
    about = "Reconstruct functions on (0,1) from nonuniform Fourier samples"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON file with default values for any flag; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for output files.
    #[arg(long, global = true, env = "NUGS_OUT_DIR")]
    out_dir: Option<PathBuf>,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Seed for jittered sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Least-squares reconstruction from a CSV file or synthetic samples.
    Reconstruct {
        #[command(flatten)]
        data: DataArgs,
        /// Number of points in the output grid on [0, 1).
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Frame constants, residual and growth constants for a space and sample set.
    Stability {
        #[command(flatten)]
        data: DataArgs,
        /// Also report the gap to piecewise constants on L cells.
        #[arg(long)]
        l: Option<usize>,
    },
    /// Band residual E(z) on a grid of z.
    Residual {
        /// Space: trig:M, legendre:M, spline:D:L, pconst:L or pwpoly:KNOTS:DEGREES.
        #[arg(long)]
        space: Option<String>,
        /// Largest z (default 40).
        #[arg(long)]
        zmax: Option<f64>,
        /// Number of grid points (default 80).
        #[arg(long)]
        points: Option<usize>,
    },
    /// Gap from piecewise constants on L cells (or from another space) to a space.
    Gap {
        /// Space: trig:M, legendre:M, spline:D:L, pconst:L or pwpoly:KNOTS:DEGREES.
        #[arg(long)]
        space: Option<String>,
        /// Number of piecewise-constant cells.
        #[arg(long)]
        l: Option<usize>,
        /// Measure G(against, space) instead.
        #[arg(long)]
        against: Option<String>,
    },
    /// Largest stable dimension across a range of bandwidths.
    Scaling {
        /// Space family: trig, legendre or spline:D.
        #[arg(long)]
        space: Option<String>,
        /// jittered or log.
        #[arg(long)]
        scheme: Option<String>,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Ratio and error panels for jittered and log sampling.
    Figure1 {
        /// Test function for the error panels (default fig1).
        #[arg(long)]
        function: Option<String>,
        #[command(flatten)]
        sweep: SweepArgs,
    },
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Space: trig:M, legendre:M, spline:D:L, pconst:L or pwpoly:KNOTS:DEGREES.
    #[arg(long)]
    space: Option<String>,
    /// CSV with columns omega,re,im[,weight].
    #[arg(long)]
    input: Option<PathBuf>,
    /// Test function: fig1, step:A, const:C, member:FILE.json, @FILE.json or inline JSON.
    #[arg(long)]
    function: Option<String>,
    /// uniform, jittered or log.
    #[arg(long)]
    scheme: Option<String>,
    /// Number of generated samples.
    #[arg(long)]
    n: Option<usize>,
    /// Bandwidth K (optional with --input; defaults to max |omega|).
    #[arg(long)]
    k: Option<f64>,
    /// Jitter fraction.
    #[arg(long)]
    theta: Option<f64>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Run a single bandwidth.
    #[arg(long)]
    k: Option<f64>,
    /// Smallest bandwidth of the log-spaced grid (default 5).
    #[arg(long)]
    k_min: Option<f64>,
    /// Largest bandwidth (default 200).
    #[arg(long)]
    k_max: Option<f64>,
    /// Number of bandwidths (default 20).
    #[arg(long)]
    k_count: Option<usize>,
    /// Target sampling density (default 0.9).
    #[arg(long)]
    delta_max: Option<f64>,
    /// Largest accepted stability ratio (default 3).
    #[arg(long)]
    threshold: Option<f64>,
}

/// Either the compact text form or the full JSON object.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
enum Loose<T> {
    Text(String),
    Value(T),
}

/// Contents of `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    space: Option<Loose<SpaceSpec>>,
    against: Option<String>,
    function: Option<Loose<FunctionSpec>>,
    input: Option<PathBuf>,
    scheme: Option<String>,
    n: Option<usize>,
    k: Option<f64>,
    theta: Option<f64>,
    seed: Option<u64>,
    grid: Option<usize>,
    l: Option<usize>,
    zmax: Option<f64>,
    points: Option<usize>,
    k_min: Option<f64>,
    k_max: Option<f64>,
    k_count: Option<usize>,
    delta_max: Option<f64>,
    threshold: Option<f64>,
    out_dir: Option<PathBuf>,
    jobs: Option<usize>,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Unstable { .. } | Error::BandwidthTooSmall { .. } | Error::Quadrature { .. } => 2,
        _ => 1,
    }
}

/// Parses `args` (including the program name) and executes the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
        None => ConfigFile::default(),
    };
    let jobs = cli.jobs.or(file.jobs);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::invalid("--jobs must be at least 1"));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| Error::invalid(e.to_string()))?;
    let ctx = Context {
        out_dir: cli
            .out_dir
            .clone()
            .or(file.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from(".")),
        seed: cli.seed.or(file.seed).unwrap_or(SweepConfig::default().seed),
        file,
    };
    pool.install(|| ctx.dispatch(cli.command))
}

struct Context {
    out_dir: PathBuf,
    seed: u64,
    file: ConfigFile,
}

/// A test signal: a function description or a stored reconstruction.
enum Source {
    Spec(FunctionSpec),
    Member(OrthoBasis, Vec<Complex64>),
}

impl Signal for Source {
    fn value(&self, x: f64) -> Complex64 {
        match self {
            Source::Spec(f) => f.value(x),
            Source::Member(b, c) => SpaceMember { basis: b, coeffs: c }.value(x),
        }
    }

    fn jumps(&self) -> Vec<f64> {
        match self {
            Source::Spec(f) => f.jumps(),
            Source::Member(b, c) => SpaceMember { basis: b, coeffs: c }.jumps(),
        }
    }
}

fn parse_function(s: &str) -> Result<Source> {
    if let Some(path) = s.strip_prefix("member:") {
        let rec: Reconstruction = serde_json::from_str(&fs::read_to_string(path)?)?;
        let space = rec
            .space
            .ok_or_else(|| Error::invalid("stored reconstruction has no space"))?;
        let basis = space.build_basis()?;
        if rec.coefficients.len() != basis.dim() {
            return Err(Error::invalid("coefficient count does not match the stored space"));
        }
        return Ok(Source::Member(basis, rec.coefficients));
    }
    if let Some(path) = s.strip_prefix('@') {
        return Ok(Source::Spec(FunctionSpec::parse(&fs::read_to_string(path)?)?));
    }
    Ok(Source::Spec(FunctionSpec::parse(s)?))
}

#[derive(Debug, Serialize)]
struct Diagnostics {
    n: usize,
    k: f64,
    dim: usize,
    delta: f64,
    c1: f64,
    c2_bound: f64,
    c_ratio: f64,
    epsilon_implied: Option<f64>,
    residual: f64,
    sigma_min: f64,
    sigma_max: f64,
    weights: &'static str,
    warnings: Vec<String>,
}

impl Context {
    fn out(&self, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out_dir)?;
        Ok(self.out_dir.join(name))
    }

    fn create(&self, name: &str) -> Result<(BufWriter<File>, PathBuf)> {
        let p = self.out(name)?;
        Ok((BufWriter::new(File::create(&p)?), p))
    }

    fn write_text(&self, name: &str, text: &str) -> Result<PathBuf> {
        let p = self.out(name)?;
        fs::write(&p, text)?;
        Ok(p)
    }

    fn write_json<T: Serialize>(&self, name: &str, v: &T) -> Result<PathBuf> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.write_text(name, &s)
    }

    fn space(&self, flag: Option<String>) -> Result<SpaceSpec> {
        match (flag, &self.file.space) {
            (Some(s), _) => s.parse(),
            (None, Some(Loose::Text(s))) => s.parse(),
            (None, Some(Loose::Value(v))) => Ok(v.clone()),
            (None, None) => Err(Error::invalid("--space is required")),
        }
    }

    fn function(&self, flag: Option<String>) -> Result<Option<Source>> {
        match (flag, &self.file.function) {
            (Some(s), _) => parse_function(&s).map(Some),
            (None, Some(Loose::Text(s))) => parse_function(s).map(Some),
            (None, Some(Loose::Value(f))) => Ok(Some(Source::Spec(f.clone()))),
            (None, None) => Ok(None),
        }
    }

    fn scheme_kind(&self, flag: Option<String>) -> Result<Option<SchemeKind>> {
        flag.or(self.file.scheme.clone()).map(|s| s.parse()).transpose()
    }

    /// Samples from `--input`, or synthesized from `--function` and a scheme.
    fn data(&self, a: DataArgs) -> Result<(FourierData, bool)> {
        let k = a.k.or(self.file.k);
        if let Some(path) = a.input.or(self.file.input.clone()) {
            let got = io::read_fourier(File::open(&path)?, k)?;
            return Ok((got.data, got.weights_from_file));
        }
        let f = self
            .function(a.function)?
            .ok_or_else(|| Error::invalid("either --input or --function is required"))?;
        let kind = self.scheme_kind(a.scheme)?.unwrap_or(SchemeKind::Jittered);
        let n =
            a.n.or(self.file.n)
                .ok_or_else(|| Error::invalid("--n is required for synthetic data"))?;
        let k = k.ok_or_else(|| Error::invalid("--k is required for synthetic data"))?;
        let theta = a
            .theta
            .or(self.file.theta)
            .unwrap_or(if kind == SchemeKind::Jittered { 0.1 } else { 0.0 });
        let spec = SchemeSpec {
            kind,
            n,
            k,
            theta,
            seed: self.seed,
        };
        let s = generate(&spec)?;
        Ok((sample_function(&f, &s)?, false))
    }

    fn sweep(&self, a: &SweepArgs) -> Result<(Vec<f64>, SweepConfig)> {
        let f = &self.file;
        let ks = match a.k.or(f.k) {
            Some(k) => vec![k],
            None => match (a.k_min.or(f.k_min), a.k_max.or(f.k_max), a.k_count.or(f.k_count)) {
                (None, None, None) => default_k_grid(),
                (lo, hi, count) => {
                    let (lo, hi, count) = (lo.unwrap_or(5.0), hi.unwrap_or(200.0), count.unwrap_or(20));
                    if !(lo > 0.0 && hi >= lo && count >= 1) {
                        return Err(Error::invalid("need 0 < k-min <= k-max and k-count >= 1"));
                    }
                    log_k_grid(lo, hi, count)
                }
            },
        };
        let mut cfg = SweepConfig {
            seed: self.seed,
            ..SweepConfig::default()
        };
        if let Some(d) = a.delta_max.or(f.delta_max) {
            cfg.delta_max = d;
        }
        if let Some(t) = a.threshold.or(f.threshold) {
            cfg.threshold = t;
        }
        cfg.validate()?;
        Ok((ks, cfg))
    }

    fn dispatch(&self, cmd: Command) -> Result<()> {
        match cmd {
            Command::Reconstruct { data, grid } => self.cmd_reconstruct(data, grid),
            Command::Stability { data, l } => self.cmd_stability(data, l),
            Command::Residual { space, zmax, points } => self.cmd_residual(space, zmax, points),
            Command::Gap { space, l, against } => self.cmd_gap(space, l, against),
            Command::Scaling { space, scheme, sweep } => self.cmd_scaling(space, scheme, sweep),
            Command::Figure1 { function, sweep } => self.cmd_figure1(function, sweep),
        }
    }

    fn cmd_reconstruct(&self, a: DataArgs, grid: Option<usize>) -> Result<()> {
        let space = self.space(a.space.clone())?;
        let basis = space.build_basis()?;
        let (data, weights_from_file) = self.data(a)?;
        let rec = reconstruct(&basis, &data)?;
        let s = &data.samples;
        let frame = FrameConstants::from_c1(rec.sigma_min * rec.sigma_min, s.density());
        let mut warnings = Vec::new();
        if !frame.is_dense() {
            warnings.push(format!(
                "sample set is not delta-dense for delta < 1 (delta = {})",
                frame.delta
            ));
        }
        let diag = Diagnostics {
            n: s.len(),
            k: s.bandwidth(),
            dim: basis.dim(),
            delta: frame.delta,
            c1: frame.c1,
            c2_bound: frame.c2_bound,
            c_ratio: frame.c_ratio,
            epsilon_implied: frame.epsilon_implied,
            residual: rec.residual,
            sigma_min: rec.sigma_min,
            sigma_max: rec.sigma_max,
            weights: if weights_from_file { "file" } else { "midpoint" },
            warnings,
        };
        let count = grid.or(self.file.grid).unwrap_or(256);
        if count == 0 {
            return Err(Error::invalid("--grid must be positive"));
        }
        let xs: Vec<f64> = (0..count).map(|i| i as f64 / count as f64).collect();
        let values = rec.evaluate_grid(&basis, &xs);
        let coeff_path = self.write_json("coefficients.json", &rec)?;
        let (w, grid_path) = self.create("reconstruction.csv")?;
        io::write_grid(w, &xs, &values)?;
        let diag_path = self.write_json("diagnostics.json", &diag)?;
        for w in &diag.warnings {
            eprintln!("warning: {w}");
        }
        println!(
            "space {space}: N = {}, K = {}, delta = {}, c_ratio = {}",
            diag.n, diag.k, diag.delta, diag.c_ratio
        );
        println!("wrote {}", coeff_path.display());
        println!("wrote {}", grid_path.display());
        println!("wrote {}", diag_path.display());
        Ok(())
    }

    fn cmd_stability(&self, a: DataArgs, l: Option<usize>) -> Result<()> {
        let space = self.space(a.space.clone())?;
        let basis = space.build_basis()?;
        let s =
            if a.input.is_some() || self.file.input.is_some() || a.function.is_some() || self.file.function.is_some() {
                self.data(a)?.0.samples
            } else {
                let kind = self.scheme_kind(a.scheme)?.unwrap_or(SchemeKind::Jittered);
                let n = a.n.or(self.file.n).ok_or_else(|| Error::invalid("--n is required"))?;
                let k = a.k.or(self.file.k).ok_or_else(|| Error::invalid("--k is required"))?;
                let theta = a
                    .theta
                    .or(self.file.theta)
                    .unwrap_or(if kind == SchemeKind::Jittered { 0.1 } else { 0.0 });
                generate(&SchemeSpec {
                    kind,
                    n,
                    k,
                    theta,
                    seed: self.seed,
                })?
            };
        let report = stability_report(&basis, &s, l.or(self.file.l))?;
        let path = self.write_json("stability.json", &report)?;
        println!("{}", serde_json::to_string_pretty(&report)?);
        eprintln!("wrote {}", path.display());
        Ok(())
    }

    fn cmd_residual(&self, space: Option<String>, zmax: Option<f64>, points: Option<usize>) -> Result<()> {
        let space = self.space(space)?;
        let zmax = zmax.or(self.file.zmax).unwrap_or(40.0);
        let points = points.or(self.file.points).unwrap_or(80);
        if points == 0 {
            return Err(Error::invalid("--points must be positive"));
        }
        let curve = residual_curve(&space.build_basis()?, &z_grid(zmax, points))?;
        let (w, csv_path) = self.create("residual.csv")?;
        io::write_residual(w, &curve)?;
        let plot = LinePlot {
            title: format!("band residual, {space}"),
            x_label: "z".into(),
            y_label: "E(z)".into(),
            log_x: false,
            log_y: true,
            series: vec![(
                space.to_string(),
                curve.z.iter().copied().zip(curve.e.iter().copied()).collect(),
            )],
        };
        let svg_path = self.write_text("residual.svg", &plot.to_svg())?;
        println!("wrote {}", csv_path.display());
        println!("wrote {}", svg_path.display());
        Ok(())
    }

    fn cmd_gap(&self, space: Option<String>, l: Option<usize>, against: Option<String>) -> Result<()> {
        let space = self.space(space)?;
        if let Some(u) = against.or(self.file.against.clone()) {
            let u: SpaceSpec = u.parse()?;
            let g = gap_of(&u.build_basis()?, &space.build_basis()?);
            println!("{}", serde_json::json!({ "u": u, "v": space, "g": g }));
            return Ok(());
        }
        let l = l.or(self.file.l).ok_or_else(|| Error::invalid("--l is required"))?;
        let report = verify_lemma2(&space, l)?;
        if !report.precondition {
            eprintln!("warning: 1/L > eta = {}; the bound is not claimed", report.eta);
        }
        let path = self.write_json("gap.json", &report)?;
        println!("{}", serde_json::to_string_pretty(&report)?);
        eprintln!("wrote {}", path.display());
        Ok(())
    }

    fn cmd_scaling(&self, space: Option<String>, scheme: Option<String>, sweep: SweepArgs) -> Result<()> {
        let family: SpaceFamily = match space {
            Some(s) => s.parse()?,
            None => match &self.file.space {
                Some(Loose::Text(s)) => s.parse()?,
                _ => return Err(Error::invalid("--space is required (trig, legendre or spline:D)")),
            },
        };
        let kind = self.scheme_kind(scheme)?.unwrap_or(SchemeKind::Jittered);
        let (ks, cfg) = self.sweep(&sweep)?;
        let rows = scaling_table(family, kind, &ks, &cfg)?;
        let labelled: Vec<(Option<String>, ScalingRow)> = rows.iter().map(|r| (None, *r)).collect();
        let (w, csv_path) = self.create("scaling.csv")?;
        io::write_scaling(w, &labelled)?;
        let plot = ratio_plot(
            &format!("stable dimension, {kind:?} sampling"),
            &[Series { family, rows }],
        );
        let svg_path = self.write_text("scaling.svg", &plot.to_svg())?;
        println!("wrote {}", csv_path.display());
        println!("wrote {}", svg_path.display());
        Ok(())
    }

    fn cmd_figure1(&self, function: Option<String>, sweep: SweepArgs) -> Result<()> {
        let f = match self.function(function)? {
            None => FunctionSpec::BuiltinFig1,
            Some(Source::Spec(f)) => f,
            Some(Source::Member(..)) => return Err(Error::invalid("figure1 takes a function description")),
        };
        let (ks, cfg) = self.sweep(&sweep)?;
        let fig = figure1(&f, &figure1_families(), &ks, &cfg)?;
        let mut written = Vec::new();
        for (i, (kind, series)) in fig.ratios.iter().enumerate() {
            let name = format!("figure1_panel{}_ratio_{}", i + 1, scheme_name(*kind));
            let rows: Vec<(Option<String>, ScalingRow)> = series
                .iter()
                .flat_map(|s| s.rows.iter().map(move |r| (Some(s.family.to_string()), *r)))
                .collect();
            let (w, p) = self.create(&format!("{name}.csv"))?;
            io::write_scaling(w, &rows)?;
            written.push(p);
            let plot = ratio_plot(&format!("ratios, {} sampling", scheme_name(*kind)), series);
            written.push(self.write_text(&format!("{name}.svg"), &plot.to_svg())?);
        }
        for (i, (kind, series)) in fig.errors.iter().enumerate() {
            let name = format!("figure1_panel{}_error_{}", i + 3, scheme_name(*kind));
            let rows: Vec<(Option<String>, ErrorRow)> = series
                .iter()
                .flat_map(|s| s.rows.iter().map(move |r| (Some(s.family.to_string()), *r)))
                .collect();
            let (w, p) = self.create(&format!("{name}.csv"))?;
            io::write_errors(w, &rows)?;
            written.push(p);
            let plot = LinePlot {
                title: format!("L2 error, {} sampling", scheme_name(*kind)),
                x_label: "K".into(),
                y_label: "error".into(),
                log_x: true,
                log_y: true,
                series: series
                    .iter()
                    .map(|s| (s.family.to_string(), s.rows.iter().map(|r| (r.k, r.error)).collect()))
                    .collect(),
            };
            written.push(self.write_text(&format!("{name}.svg"), &plot.to_svg())?);
        }
        for p in written {
            println!("wrote {}", p.display());
        }
        Ok(())
    }
}

fn scheme_name(kind: SchemeKind) -> &'static str {
    match kind {
        SchemeKind::Uniform => "uniform",
        SchemeKind::Jittered => "jittered",
        SchemeKind::Log => "log",
    }
}

fn ratio_plot(title: &str, series: &[Series<ScalingRow>]) -> LinePlot {
    LinePlot {
        title: title.into(),
        x_label: "K".into(),
        y_label: "ratio".into(),
        log_x: true,
        log_y: false,
        series: series
            .iter()
            .map(|s| (s.family.to_string(), s.rows.iter().map(|r| (r.k, r.ratio)).collect()))
            .collect(),
    }
}
