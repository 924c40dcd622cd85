//! Fixtures and independent reference implementations shared by the
//! integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use pdfcube::cube::CubeGeometry;
use pdfcube::datagen::{generate, GenConfig, GroundTruth, LayerSpec};
use pdfcube::distfit::Distribution;
use pdfcube::io::{write_run, DatasetHandle};
use statrs::distribution::{
    Cauchy, ContinuousCDF, DiscreteCDF, Exp, Gamma, Geometric, LogNormal, Normal, StudentsT,
    Uniform, Weibull,
};
use tempfile::TempDir;

pub struct Fixture {
    pub dir: TempDir,
    pub handle: DatasetHandle,
    pub truth: GroundTruth,
}

impl Fixture {
    pub fn path(&self) -> &Path {
        self.dir.path()
    }
}

/// Generated dataset with `layers` default-cycle layers; `dims` is
/// `(slices, lines, points_per_line)`.
pub fn generated(dims: (usize, usize, usize), runs: usize, layers: usize, dup: f64, seed: u64) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let geom = CubeGeometry::new(dims.2, dims.1, dims.0).unwrap();
    let mut cfg = GenConfig::new(geom, runs, seed);
    cfg.layers = LayerSpec::default_cycle(layers);
    cfg.duplicate_fraction = dup;
    let (handle, truth) = generate(&cfg, dir.path()).unwrap();
    Fixture { dir, handle, truth }
}

/// Writes hand-made run files. `points[i]` holds the observations of point
/// `i`, one per run.
pub fn handmade(geom: CubeGeometry, points: &[Vec<f32>]) -> (TempDir, DatasetHandle) {
    assert_eq!(points.len(), geom.total_points());
    let runs = points[0].len();
    let dir = tempfile::tempdir().unwrap();
    let mut paths: Vec<PathBuf> = Vec::new();
    for r in 0..runs {
        let values: Vec<f32> = points.iter().map(|p| p[r]).collect();
        let path = dir.path().join(format!("run_{r:05}.spcb"));
        write_run(&path, &geom, &values).unwrap();
        paths.push(path);
    }
    let handle = DatasetHandle::open(paths).unwrap();
    (dir, handle)
}

pub fn naive_mean(v: &[f64]) -> f64 {
    let mut s = 0.0;
    for x in v {
        s += x;
    }
    let m = s / v.len() as f64;
    // second pass removes most of the rounding left by the first
    let mut r = 0.0;
    for x in v {
        r += x - m;
    }
    m + r / v.len() as f64
}

pub fn naive_sample_std(v: &[f64]) -> f64 {
    let m = naive_mean(v);
    let mut s = 0.0;
    for x in v {
        s += (x - m) * (x - m);
    }
    (s / (v.len() - 1) as f64).sqrt()
}

/// Unnormalized central moment by repeated multiplication.
pub fn naive_moment(v: &[f64], order: u32) -> f64 {
    let m = naive_mean(v);
    let mut s = 0.0;
    for x in v {
        let d = x - m;
        let mut p = 1.0;
        for _ in 0..order {
            p *= d;
        }
        s += p;
    }
    s
}

fn edge(min: f64, max: f64, bins: usize, k: usize) -> f64 {
    if k >= bins {
        max
    } else {
        min + (max - min) * k as f64 / bins as f64
    }
}

/// Bin counts by scanning every interval `[e_k, e_{k+1})`, last one closed.
pub fn naive_histogram(v: &[f64], bins: usize) -> Vec<u64> {
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut freqs = vec![0u64; bins];
    for &x in v {
        for k in 0..bins {
            let lo = edge(min, max, bins, k);
            let hi = edge(min, max, bins, k + 1);
            let last = k + 1 == bins;
            if x >= lo && (x < hi || (last && x <= hi)) {
                freqs[k] += 1;
                break;
            }
        }
    }
    freqs
}

/// `P(X <= x)` from statrs, with closed forms where statrs has no family.
pub fn oracle_cdf(d: &Distribution, x: f64) -> f64 {
    match *d {
        Distribution::Normal { mean, std } => Normal::new(mean, std).unwrap().cdf(x),
        Distribution::LogNormal { log_mean, log_std } => LogNormal::new(log_mean, log_std).unwrap().cdf(x),
        Distribution::Exponential { rate } => Exp::new(rate).unwrap().cdf(x),
        Distribution::Uniform { low, high } => Uniform::new(low, high).unwrap().cdf(x),
        Distribution::Cauchy { location, scale } => Cauchy::new(location, scale).unwrap().cdf(x),
        Distribution::Gamma { shape, rate } => gamma_cdf_oracle(shape, rate, x),
        Distribution::Geometric { p } => {
            // statrs counts trials (support 1, 2, ...); ours counts failures
            if x < 0.0 {
                0.0
            } else {
                Geometric::new(p).unwrap().cdf(x.floor() as u64 + 1)
            }
        }
        Distribution::Logistic { location, scale } => 1.0 / (1.0 + (-(x - location) / scale).exp()),
        Distribution::StudentT { location, scale, df } => StudentsT::new(location, scale, df).unwrap().cdf(x),
        Distribution::Weibull { shape, scale } => {
            // statrs forms scale^shape, which overflows for very large shapes
            if scale.powf(shape).is_finite() {
                Weibull::new(shape, scale).unwrap().cdf(x)
            } else if x <= 0.0 {
                0.0
            } else {
                -(-(x / scale).powf(shape)).exp_m1()
            }
        }
        Distribution::PointMass { value } => f64::from(u8::from(x >= value)),
    }
}

/// Gamma CDF. statrs loses accuracy for very large shapes, so those are
/// integrated by quadrature of the density written without cancellation.
pub fn gamma_cdf_oracle(shape: f64, rate: f64, x: f64) -> f64 {
    if shape < 1000.0 {
        return Gamma::new(shape, rate).unwrap().cdf(x);
    }
    let a = shape;
    let t = rate * x;
    let width = 50.0 * a.sqrt();
    let lo = (a - width).max(0.0);
    let hi = t.min(a + width);
    if hi <= lo {
        return if t <= lo { 0.0 } else { 1.0 };
    }
    // t^(a-1) e^-t / Γ(a) with ln Γ(a) from Stirling's series
    let r = 1.0 / a;
    let stirling = r / 12.0 - r.powi(3) / 360.0 + r.powi(5) / 1260.0 - r.powi(7) / 1680.0;
    let density = |s: f64| {
        let u = (s - a) / a;
        let l1pmx = if u.abs() < 0.1 {
            let mut acc = 0.0;
            for k in (2..40).rev() {
                let c = if k % 2 == 0 { -1.0 / k as f64 } else { 1.0 / k as f64 };
                acc = acc * u + c;
            }
            acc * u * u
        } else {
            u.ln_1p() - u
        };
        (a * l1pmx + 0.5 * (a / (2.0 * std::f64::consts::PI)).ln() - stirling).exp() / s
    };
    let panels = ((hi - lo) / a.sqrt() * 8.0).ceil().max(1.0) as usize;
    integrate(density, lo, hi, panels).min(1.0)
}

/// `P(X < x)`.
pub fn oracle_cdf_below(d: &Distribution, x: f64) -> f64 {
    match *d {
        Distribution::Geometric { .. } => {
            if x <= 0.0 {
                0.0
            } else {
                oracle_cdf(d, x.ceil() - 1.0)
            }
        }
        _ => oracle_cdf(d, x),
    }
}

/// Histogram error `sum_k |f_k / n - P(bin k)|` from the brute-force
/// histogram and the statrs CDFs.
pub fn oracle_error(v: &[f64], d: &Distribution, bins: usize) -> f64 {
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let freqs = naive_histogram(v, bins);
    let n = v.len() as f64;
    let mut err = 0.0;
    for k in 0..bins {
        let lo = oracle_cdf_below(d, edge(min, max, bins, k));
        let hi = if k + 1 == bins {
            oracle_cdf(d, max)
        } else {
            oracle_cdf_below(d, edge(min, max, bins, k + 1))
        };
        err += (freqs[k] as f64 / n - (hi - lo).max(0.0)).abs();
    }
    err
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss–Legendre integral of `f` over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let rule = gauss_legendre(20);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for &(x, w) in &rule {
            total += w * f(mid + 0.5 * h * x);
        }
    }
    total * 0.5 * h
}

/// Rows of a frozen reference table (header skipped).
pub fn table(name: &str) -> Vec<Vec<f64>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name);
    std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}
