//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use nugs::analysis::{crossing, residual, residual_of, verify_lemma1, verify_lemma2};
use nugs::experiments::{
    choose_scheme, default_k_grid, errors_for, loglog_slope, scaling_table, SpaceFamily, SweepConfig,
};
use nugs::fourier::{best_approximation_error, l2_error, sample_function, FunctionSpec, SpaceMember};
use nugs::rng::SplitMix64;
use nugs::sampling::{generate, SampleSet, SchemeKind, SchemeSpec};
use nugs::solver::{reconstruct, stability_constant};
use nugs::spaces::{gamma, zeta, SpaceSpec};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pwpoly(knots: &[f64], degrees: &[usize]) -> SpaceSpec {
    SpaceSpec::PiecewisePoly {
        knots: knots.to_vec(),
        degrees: degrees.to_vec(),
    }
}

fn random_unit(dim: usize, rng: &mut SplitMix64) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..dim).map(|_| Complex64::new(rng.normal(), rng.normal())).collect();
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|c| c / norm).collect()
}

fn exactness() -> Check {
    let start = Instant::now();
    let spaces = [
        SpaceSpec::Trig { m: 8 },
        SpaceSpec::Legendre { m: 8 },
        pwpoly(&[0.3, 0.7], &[3, 3, 3]),
        SpaceSpec::Spline { d: 3, l: 8 },
        SpaceSpec::PiecewiseConst { l: 16 },
    ];
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for spec in &spaces {
        let basis = spec.build_basis().map_err(|e| e.to_string())?;
        for jittered in [false, true] {
            let mut k: f64 = 4.0;
            let s = loop {
                let n = (5.0 * k).ceil() as usize;
                let scheme = if jittered {
                    SchemeSpec::jittered(n, k, 0.4, 1)
                } else {
                    SchemeSpec::uniform(n, k)
                };
                let s = generate(&scheme).map_err(|e| e.to_string())?;
                if stability_constant(&basis, &s).c_ratio <= 3.0 {
                    break s;
                }
                k *= 1.5;
                ensure(k < 1e4, || format!("{spec}: no stable bandwidth found"))?;
            };
            let mut rng = SplitMix64::new(cases as u64 + 100);
            for _ in 0..5 {
                let a0 = random_unit(basis.dim(), &mut rng);
                // transforms by quadrature, independent of the closed forms in the solver
                let data = sample_function(
                    &SpaceMember {
                        basis: &basis,
                        coeffs: &a0,
                    },
                    &s,
                )
                .map_err(|e| e.to_string())?;
                let rec = reconstruct(&basis, &data).map_err(|e| e.to_string())?;
                let err = rec
                    .coefficients
                    .iter()
                    .zip(&a0)
                    .map(|(x, y)| (x - y).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                worst = worst.max(err);
                cases += 1;
                ensure(err <= 1e-8, || {
                    format!(
                        "{spec} ({}): relative error {err:e}",
                        if jittered { "jittered" } else { "uniform" }
                    )
                })?;
            }
        }
    }
    let t = start.elapsed();
    ensure(t <= Duration::from_secs(60), || format!("took {t:?}"))?;
    Ok(format!(
        "{cases} members, max relative coefficient error {worst:.2e} <= 1e-8, {:.1}s",
        t.as_secs_f64()
    ))
}

fn quasi_optimality() -> Check {
    let start = Instant::now();
    let eps: f64 = 0.5;
    let cfg = SweepConfig {
        delta_max: 0.4,
        seed: 11,
        ..SweepConfig::default()
    };
    let spaces = [
        SpaceSpec::Trig { m: 3 },
        SpaceSpec::Trig { m: 6 },
        SpaceSpec::Legendre { m: 4 },
        SpaceSpec::Legendre { m: 8 },
        SpaceSpec::Spline { d: 1, l: 6 },
        SpaceSpec::Spline { d: 3, l: 6 },
        pwpoly(&[0.4], &[2, 3]),
        pwpoly(&[0.25, 0.6], &[1, 2, 1]),
        SpaceSpec::PiecewiseConst { l: 4 },
        SpaceSpec::PiecewiseConst { l: 10 },
    ];
    let functions = [
        FunctionSpec::BuiltinFig1,
        FunctionSpec::step(0.37),
        FunctionSpec::PiecewisePolyCoeffs {
            breaks: vec![0.0, 0.55, 1.0],
            coeffs: vec![vec![1.0, -2.0, 0.0, 3.0], vec![0.5, 0.0, -1.0]],
        },
    ];
    let mut triples = 0;
    let mut min_slack = f64::INFINITY;
    let mut max_ratio: f64 = 0.0;
    for spec in &spaces {
        let basis = spec.build_basis().map_err(|e| e.to_string())?;
        let z = crossing(&basis, (eps * (2.0 - eps)).sqrt(), 2000.0)
            .ok_or_else(|| format!("{spec}: residual never small"))?;
        let k = (z + 0.5).ceil();
        let e = residual_of(&basis, k - 0.5).map_err(|e| e.to_string())?;
        ensure(e * e <= eps * (2.0 - eps), || {
            format!("{spec}: E^2 = {} at K = {k}", e * e)
        })?;
        for kind in [SchemeKind::Uniform, SchemeKind::Jittered, SchemeKind::Log] {
            let s = generate(&choose_scheme(kind, k, &cfg).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            let delta = s.density();
            ensure(delta <= 0.4 * (1.0 + 1e-12), || {
                format!("{spec} {kind:?}: delta = {delta}")
            })?;
            let bound = (1.0 + delta) / (1.0 - eps - delta);
            for f in &functions {
                let data = sample_function(f, &s).map_err(|e| e.to_string())?;
                let rec = reconstruct(&basis, &data).map_err(|e| e.to_string())?;
                let err = l2_error(f, &basis, &rec.coefficients).map_err(|e| e.to_string())?;
                let best = best_approximation_error(f, &basis).map_err(|e| e.to_string())?;
                let slack = bound * best - err;
                min_slack = min_slack.min(slack);
                if best > 1e-12 {
                    max_ratio = max_ratio.max(err / best);
                }
                ensure(slack >= -1e-8, || {
                    format!("{spec} {kind:?} K={k}: error {err:e} > {bound} x {best:e}")
                })?;
            }
            triples += 1;
        }
    }
    let t = start.elapsed();
    ensure(t <= Duration::from_secs(300), || format!("took {t:?}"))?;
    Ok(format!(
        "{triples} triples x {} functions, worst error/best ratio {max_ratio:.3}, min slack {min_slack:.2e}, {:.1}s",
        functions.len(),
        t.as_secs_f64()
    ))
}

fn lemma2() -> Check {
    let hand = verify_lemma2(&SpaceSpec::Legendre { m: 1 }, 2).map_err(|e| e.to_string())?;
    ensure((hand.g - 0.5).abs() <= 1e-10, || {
        format!("gap(S_2, legendre:1) = {}", hand.g)
    })?;
    ensure((hand.bound - 0.5513).abs() < 5e-5, || {
        format!("hand bound {}", hand.bound)
    })?;
    let pairs = [
        (SpaceSpec::Legendre { m: 1 }, 2),
        (SpaceSpec::Legendre { m: 1 }, 5),
        (SpaceSpec::Legendre { m: 3 }, 4),
        (SpaceSpec::Legendre { m: 3 }, 16),
        (SpaceSpec::Legendre { m: 6 }, 32),
        (SpaceSpec::Trig { m: 1 }, 4),
        (SpaceSpec::Trig { m: 2 }, 8),
        (SpaceSpec::Trig { m: 4 }, 32),
        (SpaceSpec::Spline { d: 1, l: 4 }, 8),
        (SpaceSpec::Spline { d: 2, l: 3 }, 6),
        (SpaceSpec::Spline { d: 3, l: 5 }, 20),
        (SpaceSpec::Spline { d: 0, l: 4 }, 8),
        (SpaceSpec::PiecewiseConst { l: 3 }, 6),
        (SpaceSpec::PiecewiseConst { l: 4 }, 4),
        (SpaceSpec::PiecewiseConst { l: 5 }, 7),
        (pwpoly(&[1.0 / 3.0], &[2, 2]), 9),
        (pwpoly(&[0.5], &[1, 3]), 4),
        (pwpoly(&[0.3, 0.7], &[2, 1, 2]), 4),
        (pwpoly(&[0.2], &[0, 4]), 10),
        (pwpoly(&[0.45], &[3, 3]), 3),
    ];
    let mut min_slack = f64::INFINITY;
    for (spec, l) in &pairs {
        let r = verify_lemma2(spec, *l).map_err(|e| e.to_string())?;
        ensure(r.precondition, || format!("{spec}, L = {l}: 1/L > eta"))?;
        ensure(r.g <= r.bound, || {
            format!("{spec}, L = {l}: gap {} > bound {}", r.g, r.bound)
        })?;
        min_slack = min_slack.min(r.slack());
    }
    Ok(format!(
        "{} pairs, min slack {min_slack:.3e}; gap(S_2, sqrt3(2x-1)) = {:.12}, bound {:.4}",
        pairs.len(),
        hand.g,
        hand.bound
    ))
}

fn lemma1() -> Check {
    let mut rng = SplitMix64::new(2024);
    let mut min_slack = f64::INFINITY;
    for i in 0..20 {
        let pick = |r: &mut SplitMix64, lo: usize, hi: usize| lo + (r.next_u64() % (hi - lo + 1) as u64) as usize;
        let t = match i % 5 {
            0 => SpaceSpec::Trig {
                m: pick(&mut rng, 0, 6),
            },
            1 => SpaceSpec::Legendre {
                m: pick(&mut rng, 0, 8),
            },
            2 => SpaceSpec::Spline {
                d: pick(&mut rng, 1, 3),
                l: pick(&mut rng, 1, 8),
            },
            3 => SpaceSpec::PiecewiseConst {
                l: pick(&mut rng, 1, 12),
            },
            _ => {
                let w = rng.uniform(0.1, 0.9);
                pwpoly(&[w], &[pick(&mut rng, 0, 4), pick(&mut rng, 0, 4)])
            }
        };
        let l = pick(&mut rng, 1, 32);
        let z = rng.uniform(0.5, 40.0);
        let r = verify_lemma1(&t, l, z).map_err(|e| e.to_string())?;
        ensure(r.slack() >= -1e-10, || format!("{t}, L = {l}, z = {z}: {r:?}"))?;
        min_slack = min_slack.min(r.slack());
    }
    Ok(format!("20 triples, min slack {min_slack:.3e}"))
}

fn growth() -> Check {
    let mut worst_trig: f64 = 0.0;
    for m in 1..=16 {
        let g = gamma(&SpaceSpec::Trig { m }).map_err(|e| e.to_string())?;
        let rel = (g - TAU * m as f64).abs() / (TAU * m as f64);
        worst_trig = worst_trig.max(rel);
        ensure(rel <= 1e-8, || format!("gamma(trig:{m}) = {g}"))?;
    }
    let mut worst_zeta: f64 = 0.0;
    let mut markov_violations = Vec::new();
    for m in 0..=20 {
        let spec = SpaceSpec::Legendre { m };
        if m >= 1 {
            let g = gamma(&spec).map_err(|e| e.to_string())?;
            let markov = 2f64.sqrt() * (m * m) as f64;
            if g > markov {
                markov_violations.push(format!("M={m}: {g:.6} > {markov:.6}"));
            }
        }
        let z = zeta(&spec).map_err(|e| e.to_string())?;
        worst_zeta = worst_zeta.max((z - (m + 1) as f64).abs());
        ensure((z - (m + 1) as f64).abs() <= 1e-8, || {
            format!("zeta(legendre:{m}) = {z}")
        })?;
    }
    ensure(markov_violations.is_empty(), || {
        format!(
            "gamma(legendre, M) <= sqrt2 M^2 violated at {}",
            markov_violations.join(", ")
        )
    })?;
    Ok(format!(
        "trig gamma rel err {worst_trig:.1e}; legendre gamma <= sqrt2 M^2 for M <= 20; zeta abs err {worst_zeta:.1e}"
    ))
}

fn families() -> [SpaceFamily; 5] {
    [
        SpaceFamily::Trig,
        SpaceFamily::Legendre,
        SpaceFamily::Spline { d: 1 },
        SpaceFamily::Spline { d: 2 },
        SpaceFamily::Spline { d: 3 },
    ]
}

fn scaling() -> Check {
    let start = Instant::now();
    let cfg = SweepConfig::default();
    let ks = default_k_grid();
    let mut parts = Vec::new();
    for kind in [SchemeKind::Jittered, SchemeKind::Log] {
        for family in families() {
            let rows = scaling_table(family, kind, &ks, &cfg).map_err(|e| e.to_string())?;
            let m: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
            let slope = loglog_slope(&ks, &m);
            let want = family.expected_slope();
            ensure((slope - want).abs() <= 0.15, || {
                format!("{kind:?} {family}: slope {slope:.3}, expected {want} +- 0.15")
            })?;
            ensure(rows.iter().all(|r| r.c_ratio <= 3.0), || {
                format!("{kind:?} {family}: selected C above 3")
            })?;
            parts.push(format!(
                "{}/{family} {slope:.2}",
                if kind == SchemeKind::Log { "log" } else { "jit" }
            ));
        }
    }
    let t = start.elapsed();
    ensure(t <= Duration::from_secs(600), || format!("took {t:?}"))?;
    Ok(format!("slopes {}; {:.1}s", parts.join(", "), t.as_secs_f64()))
}

fn error_curves() -> Check {
    let cfg = SweepConfig::default();
    let ks = default_k_grid();
    let f = FunctionSpec::BuiltinFig1;
    let mut parts = Vec::new();
    for kind in [SchemeKind::Jittered, SchemeKind::Log] {
        let curve = |family: SpaceFamily| -> Result<Vec<f64>, String> {
            let rows = scaling_table(family, kind, &ks, &cfg).map_err(|e| e.to_string())?;
            Ok(errors_for(&f, family, kind, &rows, &cfg)
                .map_err(|e| e.to_string())?
                .iter()
                .map(|r| r.error)
                .collect())
        };
        let spline = curve(SpaceFamily::Spline { d: 3 })?;
        let legendre = curve(SpaceFamily::Legendre)?;
        let last = ks.len() - 1;
        ensure(spline[0] < legendre[0], || {
            format!(
                "{kind:?}: at K = 5 spline {:e} >= legendre {:e}",
                spline[0], legendre[0]
            )
        })?;
        ensure(legendre[last] < spline[last], || {
            format!(
                "{kind:?}: at K = 200 legendre {:e} >= spline {:e}",
                legendre[last], spline[last]
            )
        })?;
        for (name, c) in [("spline:3", &spline), ("legendre", &legendre)] {
            let drop = (c[0] / c[last]).log10();
            ensure(drop >= 3.0, || format!("{kind:?} {name}: only {drop:.2} decades"))?;
        }
        parts.push(format!(
            "{kind:?}: K=5 spline {:.2e} < legendre {:.2e}, K=200 legendre {:.2e} < spline {:.2e}",
            spline[0], legendre[0], legendre[last], spline[last]
        ));
    }
    Ok(parts.join("; "))
}

/// `Si(x)` by its power series.
fn sine_integral(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    for k in 1..60 {
        let k = k as f64;
        term *= -x * x / ((2.0 * k) * (2.0 * k + 1.0));
        sum += term / (2.0 * k + 1.0);
    }
    sum
}

fn residual_pin() -> Check {
    let oracle = (1.0 - 2.0 / PI * (sine_integral(PI) - 2.0 / PI)).sqrt();
    let e = residual(&SpaceSpec::PiecewiseConst { l: 1 }, 0.5).map_err(|e| e.to_string())?;
    ensure((e - 0.4757).abs() <= 5e-4, || format!("E = {e}"))?;
    ensure((e - oracle).abs() <= 1e-10, || {
        format!("E = {e}, sine-integral oracle {oracle}")
    })?;
    Ok(format!("E(S_1, 1/2) = {e:.10}, oracle {oracle:.10}"))
}

fn telescoping() -> Check {
    let mut rng = SplitMix64::new(99);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = 1 + (rng.next_u64() % 500) as usize;
        let k = rng.uniform(0.1, 500.0);
        let mut pts: Vec<f64> = (0..n).map(|_| rng.uniform(-k, k)).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let s = SampleSet::new(pts, k).map_err(|e| e.to_string())?;
        let rel = (s.weights().sum() - 2.0 * k).abs() / (2.0 * k);
        worst = worst.max(rel);
        ensure(rel <= 1e-12, || format!("N = {n}, K = {k}: relative defect {rel:e}"))?;
    }
    Ok(format!("100 sets, max relative defect {worst:.1e}"))
}

fn main() {
    let checks: [Criterion; 9] = [
        ("exactness on every space and scheme", exactness),
        ("quasi-optimality bound (1+delta)/(1-eps-delta)", quasi_optimality),
        ("gap bound against piecewise constants", lemma2),
        ("residual triangle inequality", lemma1),
        ("growth constants", growth),
        ("stable-dimension scaling slopes", scaling),
        ("error-curve crossover", error_curves),
        ("residual closed form at z = 1/2", residual_pin),
        ("weight telescoping", telescoping),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
