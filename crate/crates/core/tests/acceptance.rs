//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always reach the console; exits nonzero if
//! any criterion fails.

mod common;

use std::collections::HashSet;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use pdfcube::cube::{CubeGeometry, PointId};
use pdfcube::datagen::ground_truth_labels;
use pdfcube::distfit::{fit_all, fit_best, fit_with_kind, Distribution, DistributionKind, KindSet};
use pdfcube::dtree::{self, DecisionTreeModel, Hyperparams, LabeledPoint};
use pdfcube::grouping::KeyMode;
use pdfcube::pipeline::{run_slice, Method, RunConfig, RunSummary};
use pdfcube::sampling::{percentage_distance, slice_features, SamplingConfig};
use pdfcube::special::{erf, regularized_incomplete_beta, regularized_lower_incomplete_gamma};
use pdfcube::stats::{
    average_error, central_moment, mean, sample_std, slice_averages, Histogram, PointStats,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = fn() -> Outcome;

fn within(limit: Duration, took: Duration, detail: String) -> Outcome {
    if took <= limit {
        Outcome::Pass(format!("{detail} [{:.2}s]", took.as_secs_f64()))
    } else {
        Outcome::Fail(format!("{detail}; took {:.2}s > {:.0}s", took.as_secs_f64(), limit.as_secs_f64()))
    }
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

fn fail(msg: String) -> Outcome {
    Outcome::Fail(msg)
}

fn random_vector(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = rng.random_range(2..300);
    let offset = rng.random_range(-50.0..500.0);
    let scale = 10f64.powf(rng.random_range(-2.0..3.0));
    match rng.random_range(0..4) {
        // nonnegative integers, so the geometric family applies too
        0 => (0..n).map(|_| (rng.random::<f64>() * 8.0).floor()).collect(),
        1 => (0..n).map(|_| scale * rng.random::<f64>() + 0.01).collect(),
        2 => (0..n).map(|_| offset + scale * (rng.random::<f64>() - 0.5)).collect(),
        _ => (0..n).map(|_| scale * (-rng.random::<f64>().max(1e-12).ln())).collect(),
    }
}

fn c1_formulas() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut stats = Vec::new();
    let mut errors = Vec::new();
    let mut checked_eq5 = 0;
    for i in 0..1000 {
        let v = random_vector(&mut rng);
        let m = mean(&v).unwrap();
        if !rel_close(m, naive_mean(&v), 1e-12) {
            return fail(format!("mean mismatch on input {i}: {m} vs {}", naive_mean(&v)));
        }
        let s = sample_std(&v).unwrap();
        if !(rel_close(s, naive_sample_std(&v), 1e-12) || (s - naive_sample_std(&v)).abs() < 1e-12) {
            return fail(format!("sample_std mismatch on input {i}"));
        }
        for order in 2..=5 {
            let c = central_moment(&v, order).unwrap();
            let o = naive_moment(&v, order);
            // conditioning of the sum plus a few ulps of error in the mean
            let m = naive_mean(&v);
            let abs_pow = |p: i32| v.iter().map(|x| (x - m).abs().powi(p)).sum::<f64>();
            let tol = 1e-12 * abs_pow(order as i32)
                + order as f64 * abs_pow(order as i32 - 1) * 4.0 * f64::EPSILON * m.abs();
            if !(rel_close(c, o, 1e-12) || (c - o).abs() <= tol) {
                return fail(format!("central_moment({order}) mismatch on input {i}: {c} vs {o}"));
            }
        }
        let bins = [1, 7, 100][i % 3];
        if let Ok(h) = Histogram::new(&v, bins) {
            if h.freqs() != naive_histogram(&v, bins).as_slice() {
                return fail(format!("histogram mismatch on input {i}"));
            }
            let table = fit_all(&v, KindSet::Ten.kinds(), bins).unwrap();
            for (_, fit) in table.entries() {
                if let Some(f) = fit {
                    let o = oracle_error(&v, &f.dist, bins);
                    if (f.error - o).abs() > 1e-9 {
                        return fail(format!("histogram error mismatch on input {i} for {}: {} vs {o}", f.dist.label(), f.error));
                    }
                    errors.push(f.error);
                    checked_eq5 += 1;
                }
            }
        }
        stats.push(PointStats { mean: m, std: s });
    }
    let (am, asd) = slice_averages(&stats).unwrap();
    let om = naive_mean(&stats.iter().map(|s| s.mean).collect::<Vec<_>>());
    let os = naive_mean(&stats.iter().map(|s| s.std).collect::<Vec<_>>());
    if !rel_close(am, om, 1e-12) || !rel_close(asd, os, 1e-12) {
        return fail(format!("slice averages mismatch: ({am}, {asd}) vs ({om}, {os})"));
    }
    let e = average_error(&errors).unwrap();
    if !rel_close(e, naive_mean(&errors), 1e-12) {
        return fail("average error mismatch".into());
    }
    within(
        Duration::from_secs(10),
        t.elapsed(),
        format!("1000 inputs, {checked_eq5} histogram-error comparisons"),
    )
}

fn c2_special() -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for r in table("erf.csv") {
        worst = worst.max((erf(r[0]) - r[1]).abs());
    }
    for r in table("gamma_p.csv") {
        worst = worst.max((regularized_lower_incomplete_gamma(r[0], r[1]).unwrap() - r[2]).abs());
    }
    for r in table("beta_i.csv") {
        worst = worst.max((regularized_incomplete_beta(r[0], r[1], r[2]).unwrap() - r[3]).abs());
    }
    if worst > 1e-12 {
        return fail(format!("max abs deviation {worst:e} > 1e-12"));
    }
    within(Duration::from_secs(10), t.elapsed(), format!("600 reference values, max abs deviation {worst:.1e}"))
}

fn c3_recovery() -> Outcome {
    let t = Instant::now();
    let fx = generated((4, 16, 16), 1000, 4, 0.0, 7);
    let reader = fx.handle.reader().unwrap();
    let geom = *fx.handle.geometry();
    let mut per_family = [0usize; 10];
    let mut correct = 0;
    let mut argmin_violations = 0;
    for id in 0..geom.total_points() as u64 {
        let v = reader.read_point(PointId(id)).unwrap();
        let truth = fx.truth.get(PointId(id)).unwrap().kind();
        per_family[truth.index()] += 1;
        if fit_best(&v, KindSet::Four.kinds(), 100).unwrap().dist.kind() == Some(truth) {
            correct += 1;
        }
        let best10 = fit_best(&v, KindSet::Ten.kinds(), 100).unwrap();
        if let Some(true_fit) = fit_all(&v, KindSet::Ten.kinds(), 100).unwrap().get(truth) {
            if best10.error > true_fit.error {
                argmin_violations += 1;
            }
        }
    }
    let n = geom.total_points();
    let rate = correct as f64 / n as f64;
    let min_family = per_family[..4].iter().min().copied().unwrap();
    let detail = format!(
        "4-types recovery {correct}/{n} = {:.3}, min points per family {min_family}, 10-types argmin violations {argmin_violations}",
        rate
    );
    if rate < 0.95 || min_family < 200 || argmin_violations > 0 {
        return fail(detail);
    }
    within(Duration::from_secs(180), t.elapsed(), detail)
}

fn run_to_file(fx: &Fixture, slice: usize, mut cfg: RunConfig, model: Option<&DecisionTreeModel>, name: &str) -> (RunSummary, Vec<u8>) {
    let path = fx.path().join(name);
    cfg.results_path = Some(path.clone());
    let s = run_slice(&fx.handle, slice, &cfg, model).unwrap();
    (s, fs::read(&path).unwrap())
}

fn c4_grouping() -> Outcome {
    let t = Instant::now();
    let fx = generated((2, 20, 20), 60, 2, 0.5, 11);
    let mut cfg = RunConfig::new(Method::Baseline, KindSet::Four);
    cfg.window_lines = 5;
    cfg.key_mode = KeyMode::Strict;
    let (base, base_bytes) = run_to_file(&fx, 1, cfg.clone(), None, "baseline.csv");
    cfg.method = Method::Grouping;
    let (grp, grp_bytes) = run_to_file(&fx, 1, cfg, None, "grouping.csv");
    let ratio = grp.fit_invocations as f64 / base.fit_invocations as f64;
    let detail = format!(
        "byte-identical: {}, fit invocations {}/{} = {ratio:.3}",
        base_bytes == grp_bytes,
        grp.fit_invocations,
        base.fit_invocations
    );
    if base_bytes != grp_bytes || ratio > 0.6 {
        return fail(detail);
    }
    within(Duration::from_secs(120), t.elapsed(), detail)
}

fn c5_reuse() -> Outcome {
    let t = Instant::now();
    // 4 lines of 6 points, windows of 2 lines; the second window repeats
    // several vectors of the first
    let geom = CubeGeometry::new(6, 4, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fresh = |rng: &mut ChaCha8Rng| -> Vec<f32> { (0..40).map(|_| rng.random_range(1.0f32..9.0)).collect() };
    let mut points: Vec<Vec<f32>> = (0..12).map(|_| fresh(&mut rng)).collect();
    for i in 0..12 {
        points.push(if i % 3 == 0 { fresh(&mut rng) } else { points[(i * 5) % 12].clone() });
    }
    let distinct: HashSet<Vec<u32>> = points.iter().map(|p| p.iter().map(|v| v.to_bits()).collect()).collect();
    let (_dir, handle) = handmade(geom, &points);
    let mut cfg = RunConfig::new(Method::Reuse, KindSet::Four);
    cfg.window_lines = 2;
    cfg.key_mode = KeyMode::Strict;
    let s = run_slice(&handle, 0, &cfg, None).unwrap();
    let detail = format!(
        "fit invocations {} vs distinct keys {}, reuse hits {}",
        s.fit_invocations,
        distinct.len(),
        s.reuse_hits
    );
    if s.fit_invocations != distinct.len() as u64 || s.reuse_hits == 0 {
        return fail(detail);
    }
    within(Duration::from_secs(120), t.elapsed(), detail)
}

fn labels_of(fx: &Fixture) -> Vec<LabeledPoint> {
    (0..fx.handle.geometry().slice_count())
        .flat_map(|z| ground_truth_labels(&fx.truth, z).unwrap())
        .collect()
}

fn c6_ml_gap() -> Outcome {
    let t = Instant::now();
    let fx = generated((8, 24, 24), 1000, 8, 0.3, 21);
    let labels = labels_of(&fx);
    let (train, test) = dtree::split_labels(&labels, 0.7, 3).unwrap();
    let model = dtree::train(&train, Hyperparams::new(10, 32).unwrap(), 3).unwrap();
    let model_error = dtree::model_error(&model, &test).unwrap();
    let mut worst_gap = f64::NEG_INFINITY;
    for slice in [1, 4] {
        let mut cfg = RunConfig::new(Method::Baseline, KindSet::Ten);
        cfg.window_lines = 8;
        let base = run_slice(&fx.handle, slice, &cfg, None).unwrap();
        cfg.method = Method::Ml;
        let ml = run_slice(&fx.handle, slice, &cfg, Some(&model)).unwrap();
        worst_gap = worst_gap.max(ml.average_error - base.average_error);
        if ml.average_error < base.average_error {
            return fail(format!("ML beat the per-point argmin on slice {slice}"));
        }
    }
    let detail = format!("held-out model error {model_error:.4}, worst ML-Baseline gap {worst_gap:.4}");
    if model_error > 0.05 || worst_gap > 0.02 {
        return fail(detail);
    }
    within(Duration::from_secs(180), t.elapsed(), detail)
}

fn c7_superset() -> Outcome {
    let datasets = [
        generated((4, 10, 10), 200, 4, 0.3, 1),
        generated((2, 8, 12), 30, 2, 0.0, 2),
        generated((3, 6, 6), 2, 3, 0.5, 3),
    ];
    let mut compared = 0;
    for fx in &datasets {
        for slice in 0..fx.handle.geometry().slice_count() {
            let four = run_slice(&fx.handle, slice, &RunConfig::new(Method::Baseline, KindSet::Four), None).unwrap();
            let ten = run_slice(&fx.handle, slice, &RunConfig::new(Method::Baseline, KindSet::Ten), None).unwrap();
            if ten.average_error > four.average_error {
                return fail(format!("10-types {} > 4-types {}", ten.average_error, four.average_error));
            }
            compared += 1;
        }
    }
    Outcome::Pass(format!("{compared} slices over 3 datasets"))
}

fn c8_determinism() -> Outcome {
    let fx = generated((2, 12, 12), 40, 2, 0.4, 8);
    let model = dtree::train(&labels_of(&fx), Hyperparams::new(6, 16).unwrap(), 0).unwrap();
    for method in Method::ALL {
        let mut reference: Option<(Vec<u8>, f64)> = None;
        for threads in [1, 2, 8] {
            let mut cfg = RunConfig::new(method, KindSet::Four);
            cfg.window_lines = 5;
            cfg.threads = threads;
            cfg.key_mode = KeyMode::Strict;
            let m = method.uses_ml().then_some(&model);
            let (s, bytes) = run_to_file(&fx, 1, cfg, m, &format!("{method}-{threads}.csv"));
            match &reference {
                None => reference = Some((bytes, s.average_error)),
                Some((b, e)) => {
                    if *b != bytes || *e != s.average_error {
                        return fail(format!("{method} differs at {threads} threads"));
                    }
                }
            }
        }
    }
    Outcome::Pass("6 methods x threads {1, 2, 8} byte-identical".into())
}

fn c9_sampling() -> Outcome {
    let fx = generated((2, 100, 100), 100, 2, 0.3, 9);
    let model = dtree::train(&labels_of(&fx), Hyperparams::new(8, 32).unwrap(), 0).unwrap();
    let features = |rate: f64| {
        let mut c = SamplingConfig::new(rate);
        c.seed = 17;
        c.threads = 1;
        slice_features(&fx.handle, 1, &c, &model).unwrap()
    };
    // warm the page cache so every rate reads from memory
    let census = features(1.0);
    let sampled = features(0.1);
    let distance = percentage_distance(&sampled.type_percentages, &census.type_percentages).unwrap();
    let full_load = (0..3).map(|_| features(1.0).loading_seconds).fold(f64::INFINITY, f64::min);
    let small_load = (0..3).map(|_| features(0.01).loading_seconds).fold(f64::INFINITY, f64::min);
    let ratio = full_load / small_load;
    let detail = format!(
        "{} points, distance at rate 0.1 = {distance:.4}, loading rate 1 / rate 0.01 = {ratio:.1}x",
        census.sampled_count
    );
    if census.sampled_count < 10_000 || distance > 0.05 || ratio < 10.0 {
        return fail(detail);
    }
    Outcome::Pass(detail)
}

fn c10_speedup() -> Outcome {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let fx = generated((1, 250, 200), 50, 1, 0.0, 10);
    let time = |threads: usize| {
        let mut cfg = RunConfig::new(Method::Baseline, KindSet::Four);
        cfg.threads = threads;
        cfg.window_lines = 25;
        run_slice(&fx.handle, 0, &cfg, None).unwrap().computation_seconds
    };
    let one = time(1);
    let eight = time(8);
    let speedup = one / eight;
    let detail = format!("50000 points, fitting speedup 8 vs 1 threads = {speedup:.2}x on {cores} cores");
    if cores < 8 {
        Outcome::Skip(format!("{detail}; needs an 8-core machine (informational)"))
    } else if speedup >= 4.0 {
        Outcome::Pass(detail)
    } else {
        fail(detail)
    }
}

fn c11_edges() -> Outcome {
    // constant vector
    let f = fit_best(&[3.5; 20], KindSet::Ten.kinds(), 100).unwrap();
    if f.dist != (Distribution::PointMass { value: 3.5 }) || f.error != 0.0 {
        return fail(format!("constant vector gave {f:?}"));
    }
    // two observations
    for v in [[1.0, 2.0], [0.0, 3.0], [-2.0, 5.0], [1e-3, 1e3]] {
        let table = fit_all(&v, KindSet::Ten.kinds(), 100).unwrap();
        for (k, fit) in table.entries() {
            if let Some(f) = fit {
                if !f.dist.is_valid() || !(0.0..=2.0 + 1e-12).contains(&f.error) {
                    return fail(format!("n = 2 fit of {k} on {v:?} is {f:?}"));
                }
            }
        }
        if fit_best(&v, KindSet::Ten.kinds(), 100).is_err() {
            return fail(format!("n = 2 best fit failed on {v:?}"));
        }
    }
    // nonpositive samples
    let v = [-1.0, 0.0, 2.0, 3.5, 1.0];
    let table = fit_all(&v, KindSet::Ten.kinds(), 100).unwrap();
    for k in [DistributionKind::LogNormal, DistributionKind::Gamma, DistributionKind::Weibull, DistributionKind::Exponential] {
        if table.get(k).is_some() {
            return fail(format!("{k} applied to a sample with nonpositive values"));
        }
        if fit_with_kind(&v, k, 100, KindSet::Ten.kinds()).map(|f| !f.fallback).unwrap_or(true) {
            return fail(format!("requesting {k} on nonpositive data did not fall back"));
        }
    }
    // and a whole run over such points plus a constant point
    let geom = CubeGeometry::new(3, 1, 1).unwrap();
    let points = vec![
        vec![-1.0f32, 0.0, 2.0, 3.5, 1.0],
        vec![4.0f32; 5],
        vec![0.5f32, 1.5, 2.5, 0.25, 9.0],
    ];
    let (dir, handle) = handmade(geom, &points);
    let mut cfg = RunConfig::new(Method::Baseline, KindSet::Ten);
    cfg.results_path = Some(dir.path().join("edge.csv"));
    let s = run_slice(&handle, 0, &cfg, None).unwrap();
    let out = fs::read_to_string(dir.path().join("edge.csv")).unwrap();
    let constant_line = out.lines().nth(1).unwrap();
    if s.point_count != 3 || !constant_line.starts_with("1,1,0,PointMass,4,") || !constant_line.ends_with(",0") {
        return fail(format!("edge-case run produced {out:?}"));
    }
    Outcome::Pass("point mass, n = 2 for all families, nonpositive data inapplicable without abort".into())
}

fn main() {
    let checks: [(u32, &str, Check); 11] = [
        (1, "formula oracles", c1_formulas),
        (2, "special functions", c2_special),
        (3, "fit-family recovery", c3_recovery),
        (4, "grouping equivalence", c4_grouping),
        (5, "reuse", c5_reuse),
        (6, "ML error gap", c6_ml_gap),
        (7, "10-types <= 4-types", c7_superset),
        (8, "determinism", c8_determinism),
        (9, "sampling fidelity", c9_sampling),
        (10, "parallel speedup (soft)", c10_speedup),
        (11, "degenerate and edge cases", c11_edges),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, check) in checks {
        if !filter.is_empty() && !filter.iter().any(|f| match f.parse::<u32>() {
            Ok(n) => n == id,
            Err(_) => name.contains(f.as_str()),
        }) {
            continue;
        }
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Outcome::Fail(format!("panicked: {msg}"))
            });
        match outcome {
            Outcome::Pass(d) => println!("acceptance {id:>2} {name}: PASS - {d}"),
            Outcome::Skip(d) => println!("acceptance {id:>2} {name}: SKIP - {d}"),
            Outcome::Fail(d) => {
                failed += 1;
                println!("acceptance {id:>2} {name}: FAIL - {d}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
