//! Candidate distribution families, parameter estimation, CDF evaluation and
//! best-fit selection by histogram error.
//!
//! Every family is scored the same way: the sample is binned into `L` equal
//! intervals over `[min, max]` and the fitted model's probability of each
//! interval is compared with the empirical fraction (see
//! [`empirical_vs_model_error`]). The fit with the smallest error wins; ties
//! go to the family listed first in [`DistributionKind::ALL`].

use std::cell::OnceCell;
use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::special::{erfc, gamma, incomplete_beta_unchecked, ln_gamma, lower_gamma_unchecked};
use crate::stats::{compensated_sum, empirical_vs_model_error, min_max, Histogram};

/// The candidate distribution families, in tie-breaking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DistributionKind {
    Normal,
    LogNormal,
    Exponential,
    Uniform,
    Cauchy,
    Gamma,
    Geometric,
    Logistic,
    StudentT,
    Weibull,
}

impl DistributionKind {
    pub const ALL: [DistributionKind; 10] = [
        DistributionKind::Normal,
        DistributionKind::LogNormal,
        DistributionKind::Exponential,
        DistributionKind::Uniform,
        DistributionKind::Cauchy,
        DistributionKind::Gamma,
        DistributionKind::Geometric,
        DistributionKind::Logistic,
        DistributionKind::StudentT,
        DistributionKind::Weibull,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            DistributionKind::Normal => "Normal",
            DistributionKind::LogNormal => "LogNormal",
            DistributionKind::Exponential => "Exponential",
            DistributionKind::Uniform => "Uniform",
            DistributionKind::Cauchy => "Cauchy",
            DistributionKind::Gamma => "Gamma",
            DistributionKind::Geometric => "Geometric",
            DistributionKind::Logistic => "Logistic",
            DistributionKind::StudentT => "StudentT",
            DistributionKind::Weibull => "Weibull",
        }
    }
}

impl fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistributionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DistributionKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown distribution kind '{s}'")))
    }
}

/// The two candidate sets used throughout: four common families or all ten.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KindSet {
    Four,
    Ten,
}

impl KindSet {
    pub fn kinds(self) -> &'static [DistributionKind] {
        const FOUR: [DistributionKind; 4] = [
            DistributionKind::Normal,
            DistributionKind::LogNormal,
            DistributionKind::Exponential,
            DistributionKind::Uniform,
        ];
        match self {
            KindSet::Four => &FOUR,
            KindSet::Ten => &DistributionKind::ALL,
        }
    }

    pub fn contains(self, kind: DistributionKind) -> bool {
        self.kinds().contains(&kind)
    }

    pub fn label(self) -> &'static str {
        match self {
            KindSet::Four => "4-types",
            KindSet::Ten => "10-types",
        }
    }
}

impl FromStr for KindSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "4" | "4-types" => Ok(KindSet::Four),
            "10" | "10-types" => Ok(KindSet::Ten),
            _ => Err(Error::InvalidArgument(format!(
                "kind set must be 4 or 10, got '{s}'"
            ))),
        }
    }
}

/// A fully parameterized distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Normal { mean: f64, std: f64 },
    LogNormal { log_mean: f64, log_std: f64 },
    Exponential { rate: f64 },
    Uniform { low: f64, high: f64 },
    Cauchy { location: f64, scale: f64 },
    Gamma { shape: f64, rate: f64 },
    /// Number of failures before the first success.
    Geometric { p: f64 },
    Logistic { location: f64, scale: f64 },
    StudentT { location: f64, scale: f64, df: f64 },
    Weibull { shape: f64, scale: f64 },
    /// Degenerate sample where every observation is equal.
    PointMass { value: f64 },
}

impl Distribution {
    /// `None` for [`Distribution::PointMass`], which is not a candidate family.
    pub fn kind(&self) -> Option<DistributionKind> {
        use DistributionKind as K;
        Some(match self {
            Distribution::Normal { .. } => K::Normal,
            Distribution::LogNormal { .. } => K::LogNormal,
            Distribution::Exponential { .. } => K::Exponential,
            Distribution::Uniform { .. } => K::Uniform,
            Distribution::Cauchy { .. } => K::Cauchy,
            Distribution::Gamma { .. } => K::Gamma,
            Distribution::Geometric { .. } => K::Geometric,
            Distribution::Logistic { .. } => K::Logistic,
            Distribution::StudentT { .. } => K::StudentT,
            Distribution::Weibull { .. } => K::Weibull,
            Distribution::PointMass { .. } => return None,
        })
    }

    pub fn label(&self) -> &'static str {
        self.kind().map_or("PointMass", DistributionKind::name)
    }

    /// Parameters in persisted order; unused slots are `None`.
    pub fn params(&self) -> [Option<f64>; 3] {
        match *self {
            Distribution::Normal { mean, std } => [Some(mean), Some(std), None],
            Distribution::LogNormal { log_mean, log_std } => [Some(log_mean), Some(log_std), None],
            Distribution::Exponential { rate } => [Some(rate), None, None],
            Distribution::Uniform { low, high } => [Some(low), Some(high), None],
            Distribution::Cauchy { location, scale } => [Some(location), Some(scale), None],
            Distribution::Gamma { shape, rate } => [Some(shape), Some(rate), None],
            Distribution::Geometric { p } => [Some(p), None, None],
            Distribution::Logistic { location, scale } => [Some(location), Some(scale), None],
            Distribution::StudentT {
                location,
                scale,
                df,
            } => [Some(location), Some(scale), Some(df)],
            Distribution::Weibull { shape, scale } => [Some(shape), Some(scale), None],
            Distribution::PointMass { value } => [Some(value), None, None],
        }
    }

    /// Rebuilds a distribution from its label and persisted parameters,
    /// validating parameter ranges.
    pub fn from_params(label: &str, params: [Option<f64>; 3]) -> Result<Self> {
        let need = |i: usize| {
            params[i].ok_or_else(|| {
                Error::InvalidArgument(format!("{label} needs parameter {}", i + 1))
            })
        };
        let dist = if label == "PointMass" {
            Distribution::PointMass { value: need(0)? }
        } else {
            match label.parse::<DistributionKind>()? {
                DistributionKind::Normal => Distribution::Normal {
                    mean: need(0)?,
                    std: need(1)?,
                },
                DistributionKind::LogNormal => Distribution::LogNormal {
                    log_mean: need(0)?,
                    log_std: need(1)?,
                },
                DistributionKind::Exponential => Distribution::Exponential { rate: need(0)? },
                DistributionKind::Uniform => Distribution::Uniform {
                    low: need(0)?,
                    high: need(1)?,
                },
                DistributionKind::Cauchy => Distribution::Cauchy {
                    location: need(0)?,
                    scale: need(1)?,
                },
                DistributionKind::Gamma => Distribution::Gamma {
                    shape: need(0)?,
                    rate: need(1)?,
                },
                DistributionKind::Geometric => Distribution::Geometric { p: need(0)? },
                DistributionKind::Logistic => Distribution::Logistic {
                    location: need(0)?,
                    scale: need(1)?,
                },
                DistributionKind::StudentT => Distribution::StudentT {
                    location: need(0)?,
                    scale: need(1)?,
                    df: need(2)?,
                },
                DistributionKind::Weibull => Distribution::Weibull {
                    shape: need(0)?,
                    scale: need(1)?,
                },
            }
        };
        if dist.is_valid() {
            Ok(dist)
        } else {
            Err(Error::InvalidArgument(format!(
                "parameters out of range for {label}: {params:?}"
            )))
        }
    }

    pub fn is_valid(&self) -> bool {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        let fin = |v: f64| v.is_finite();
        match *self {
            Distribution::Normal { mean, std } => fin(mean) && pos(std),
            Distribution::LogNormal { log_mean, log_std } => fin(log_mean) && pos(log_std),
            Distribution::Exponential { rate } => pos(rate),
            Distribution::Uniform { low, high } => fin(low) && fin(high) && high > low,
            Distribution::Cauchy { location, scale }
            | Distribution::Logistic { location, scale } => fin(location) && pos(scale),
            Distribution::Gamma { shape, rate } => pos(shape) && pos(rate),
            Distribution::Geometric { p } => p > 0.0 && p <= 1.0,
            Distribution::StudentT {
                location,
                scale,
                df,
            } => fin(location) && pos(scale) && pos(df),
            Distribution::Weibull { shape, scale } => pos(shape) && pos(scale),
            Distribution::PointMass { value } => fin(value),
        }
    }

    /// Cumulative distribution function `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Distribution::Geometric { p } => {
                if x < 0.0 {
                    0.0
                } else {
                    geometric_tail(p, x.floor() + 1.0)
                }
            }
            Distribution::PointMass { value } => {
                if x >= value {
                    1.0
                } else {
                    0.0
                }
            }
            _ => self.continuous_cdf(x),
        }
    }

    /// `P(X < x)`; differs from [`cdf`](Self::cdf) only at atoms of discrete
    /// distributions.
    pub fn cdf_below(&self, x: f64) -> f64 {
        match *self {
            Distribution::Geometric { p } => {
                if x <= 0.0 {
                    0.0
                } else {
                    geometric_tail(p, x.ceil())
                }
            }
            Distribution::PointMass { value } => {
                if x > value {
                    1.0
                } else {
                    0.0
                }
            }
            _ => self.continuous_cdf(x),
        }
    }

    fn continuous_cdf(&self, x: f64) -> f64 {
        let c = match *self {
            Distribution::Normal { mean, std } => normal_cdf((x - mean) / std),
            Distribution::LogNormal { log_mean, log_std } => {
                if x <= 0.0 {
                    0.0
                } else {
                    normal_cdf((x.ln() - log_mean) / log_std)
                }
            }
            Distribution::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Distribution::Uniform { low, high } => ((x - low) / (high - low)).clamp(0.0, 1.0),
            Distribution::Cauchy { location, scale } => {
                0.5 + ((x - location) / scale).atan() / PI
            }
            Distribution::Gamma { shape, rate } => lower_gamma_unchecked(shape, rate * x),
            Distribution::Logistic { location, scale } => {
                1.0 / (1.0 + (-(x - location) / scale).exp())
            }
            Distribution::StudentT {
                location,
                scale,
                df,
            } => student_t_cdf((x - location) / scale, df),
            Distribution::Weibull { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-(x / scale).powf(shape)).exp_m1()
                }
            }
            Distribution::Geometric { .. } | Distribution::PointMass { .. } => {
                unreachable!("discrete distributions handled by caller")
            }
        };
        c.clamp(0.0, 1.0)
    }

    /// Probability density; for [`Distribution::Geometric`] the mass function
    /// at integer points.
    pub fn density(&self, x: f64) -> f64 {
        match *self {
            Distribution::Normal { mean, std } => {
                let z = (x - mean) / std;
                (-0.5 * z * z).exp() / (std * (2.0 * PI).sqrt())
            }
            Distribution::LogNormal { log_mean, log_std } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let z = (x.ln() - log_mean) / log_std;
                (-0.5 * z * z).exp() / (x * log_std * (2.0 * PI).sqrt())
            }
            Distribution::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Distribution::Uniform { low, high } => {
                if (low..=high).contains(&x) {
                    1.0 / (high - low)
                } else {
                    0.0
                }
            }
            Distribution::Cauchy { location, scale } => {
                let t = (x - location) / scale;
                1.0 / (PI * scale * (1.0 + t * t))
            }
            Distribution::Gamma { shape, rate } => {
                if x <= 0.0 {
                    return 0.0;
                }
                (shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - ln_gamma(shape)).exp()
            }
            Distribution::Geometric { p } => {
                if x < 0.0 || x.fract() != 0.0 {
                    0.0
                } else {
                    p * (1.0 - p).powf(x)
                }
            }
            Distribution::Logistic { location, scale } => {
                let e = (-(x - location).abs() / scale).exp();
                e / (scale * (1.0 + e) * (1.0 + e))
            }
            Distribution::StudentT {
                location,
                scale,
                df,
            } => {
                let t = (x - location) / scale;
                let ln_norm = ln_gamma(0.5 * (df + 1.0))
                    - ln_gamma(0.5 * df)
                    - 0.5 * (df * PI).ln()
                    - scale.ln();
                (ln_norm - 0.5 * (df + 1.0) * (t * t / df).ln_1p()).exp()
            }
            Distribution::Weibull { shape, scale } => {
                if x < 0.0 {
                    return 0.0;
                }
                let r = x / scale;
                shape / scale * r.powf(shape - 1.0) * (-r.powf(shape)).exp()
            }
            Distribution::PointMass { value } => {
                if x == value {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
        }
    }
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// `1 - (1 - p)^k`.
fn geometric_tail(p: f64, k: f64) -> f64 {
    if p >= 1.0 {
        return 1.0;
    }
    -(k * (-p).ln_1p()).exp_m1()
}

fn student_t_cdf(t: f64, df: f64) -> f64 {
    let t2 = t * t;
    if t2 < df {
        // near the center: P(|T| < |t|) = I_{t²/(ν+t²)}(1/2, ν/2)
        let inner = incomplete_beta_unchecked(0.5, 0.5 * df, t2 / (df + t2));
        0.5 + 0.5 * inner.copysign(t)
    } else {
        let tail = 0.5 * incomplete_beta_unchecked(0.5 * df, 0.5, df / (df + t2));
        if t < 0.0 {
            tail
        } else {
            1.0 - tail
        }
    }
}

/// Summary quantities of a sample, computed once and shared by every
/// estimator.
pub struct Sample<'a> {
    values: &'a [f64],
    mean: f64,
    std: f64,
    min: f64,
    max: f64,
    sorted: OnceCell<Vec<f64>>,
    logs: OnceCell<Option<(f64, f64)>>,
}

impl<'a> Sample<'a> {
    pub fn new(values: &'a [f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooFewValues {
                needed: 2,
                actual: values.len(),
            });
        }
        let stats = crate::stats::PointStats::from_values(values)?;
        let (min, max) = min_max(values);
        Ok(Self {
            values,
            mean: stats.mean,
            std: stats.std,
            min,
            max,
            sorted: OnceCell::new(),
            logs: OnceCell::new(),
        })
    }

    pub fn values(&self) -> &[f64] {
        self.values
    }

    pub fn is_degenerate(&self) -> bool {
        self.max == self.min
    }

    fn n(&self) -> f64 {
        self.values.len() as f64
    }

    fn sorted(&self) -> &[f64] {
        self.sorted.get_or_init(|| {
            let mut s = self.values.to_vec();
            s.sort_by(f64::total_cmp);
            s
        })
    }

    /// Mean and sample std of `ln(x)`, or `None` if any value is non-positive.
    fn log_stats(&self) -> Option<(f64, f64)> {
        *self.logs.get_or_init(|| {
            if self.min <= 0.0 {
                return None;
            }
            let logs: Vec<f64> = self.values.iter().map(|v| v.ln()).collect();
            crate::stats::PointStats::from_values(&logs)
                .ok()
                .map(|s| (s.mean, s.std))
        })
    }

    /// Sample quantile with linear interpolation between order statistics.
    fn quantile(&self, p: f64) -> f64 {
        let s = self.sorted();
        let h = (s.len() - 1) as f64 * p;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(s.len() - 1);
        s[lo] + (h - lo as f64) * (s[hi] - s[lo])
    }

    /// Plain (non-excess) kurtosis from population moments.
    fn kurtosis(&self) -> f64 {
        let m = self.mean;
        let m2 = compensated_sum(self.values.iter().map(|&v| (v - m).powi(2))) / self.n();
        let m4 = compensated_sum(self.values.iter().map(|&v| (v - m).powi(4))) / self.n();
        m4 / (m2 * m2)
    }
}

/// Estimates the parameters of `kind` from the sample, or `None` when the
/// sample lies outside the family's support.
pub fn estimate(kind: DistributionKind, values: &[f64]) -> Result<Option<Distribution>> {
    let sample = Sample::new(values)?;
    Ok(estimate_from(kind, &sample))
}

pub fn estimate_from(kind: DistributionKind, s: &Sample<'_>) -> Option<Distribution> {
    let dist = match kind {
        DistributionKind::Normal => Distribution::Normal {
            mean: s.mean,
            std: s.std,
        },
        DistributionKind::LogNormal => {
            let (log_mean, log_std) = s.log_stats()?;
            Distribution::LogNormal { log_mean, log_std }
        }
        DistributionKind::Exponential => {
            if s.min < 0.0 || s.mean <= 0.0 {
                return None;
            }
            Distribution::Exponential { rate: 1.0 / s.mean }
        }
        DistributionKind::Uniform => Distribution::Uniform {
            low: s.min,
            high: s.max,
        },
        DistributionKind::Cauchy => Distribution::Cauchy {
            location: s.quantile(0.5),
            scale: 0.5 * (s.quantile(0.75) - s.quantile(0.25)),
        },
        DistributionKind::Gamma => {
            if s.min <= 0.0 {
                return None;
            }
            let var = s.std * s.std;
            Distribution::Gamma {
                shape: s.mean * s.mean / var,
                rate: s.mean / var,
            }
        }
        DistributionKind::Geometric => {
            let integral = s
                .values
                .iter()
                .all(|&v| v >= 0.0 && (v - v.round()).abs() <= 1e-6);
            if !integral {
                return None;
            }
            Distribution::Geometric {
                p: 1.0 / (1.0 + s.mean),
            }
        }
        DistributionKind::Logistic => Distribution::Logistic {
            location: s.mean,
            scale: s.std * 3f64.sqrt() / PI,
        },
        DistributionKind::StudentT => {
            let kappa = s.kurtosis();
            if !(kappa > 3.0) {
                return None;
            }
            let df = ((4.0 * kappa - 6.0) / (kappa - 3.0)).clamp(2.1, 200.0);
            Distribution::StudentT {
                location: s.mean,
                scale: s.std * ((df - 2.0) / df).sqrt(),
                df,
            }
        }
        DistributionKind::Weibull => {
            if s.min <= 0.0 {
                return None;
            }
            weibull_mle(s).or_else(|| weibull_moments(s))?
        }
    };
    dist.is_valid().then_some(dist)
}

/// Maximum-likelihood Weibull fit; shape found by bracketed Newton steps on
/// the profile score equation.
fn weibull_mle(s: &Sample<'_>) -> Option<Distribution> {
    const TOL: f64 = 1e-10;
    const MAX_ITER: usize = 100;

    // work with y = x / max so y^k never overflows
    let logs: Vec<f64> = s.values.iter().map(|&v| (v / s.max).ln()).collect();
    let mean_log = logs.iter().sum::<f64>() / s.n();
    let score = |k: f64| {
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for &l in &logs {
            let w = (k * l).exp();
            s0 += w;
            s1 += w * l;
            s2 += w * l * l;
        }
        let f = s1 / s0 - 1.0 / k - mean_log;
        let df = (s2 * s0 - s1 * s1) / (s0 * s0) + 1.0 / (k * k);
        (f, df, s0)
    };

    let cv = s.std / s.mean;
    let mut k = cv.powf(-1.086).clamp(0.05, 500.0);
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    for _ in 0..MAX_ITER {
        let (f, dfk, s0) = score(k);
        if !f.is_finite() {
            return None;
        }
        if f < 0.0 {
            lo = k;
        } else {
            hi = k;
        }
        let mut next = k - f / dfk;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * k };
        }
        if (next - k).abs() <= TOL * k {
            let scale = s.max * (s0 / s.n()).powf(1.0 / k);
            return Some(Distribution::Weibull { shape: next, scale });
        }
        k = next;
    }
    None
}

fn weibull_moments(s: &Sample<'_>) -> Option<Distribution> {
    let shape = (s.std / s.mean).powf(-1.086);
    let scale = s.mean / gamma(1.0 + 1.0 / shape);
    Some(Distribution::Weibull { shape, scale })
}

/// Probability the model assigns to each histogram interval. The last
/// interval is right-closed, matching the histogram.
pub fn interval_probs(dist: &Distribution, hist: &Histogram) -> Vec<f64> {
    let l = hist.bin_count();
    let mut cum: Vec<f64> = (0..l).map(|k| dist.cdf_below(hist.edge(k))).collect();
    cum.push(dist.cdf(hist.max()));
    cum.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect()
}

/// Histogram error of `dist` against the sample binned in `hist`.
pub fn fit_error(dist: &Distribution, hist: &Histogram) -> f64 {
    empirical_vs_model_error(hist, &interval_probs(dist, hist))
        .expect("interval_probs matches histogram length")
}

/// A fitted distribution and its histogram error against the fitting sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedPdf {
    pub dist: Distribution,
    pub error: f64,
    /// Set when a requested family was inapplicable and the best fit over the
    /// candidate set was used instead.
    pub fallback: bool,
}

/// Per-family fits of one sample, in candidate order.
#[derive(Debug, Clone)]
pub struct FitTable {
    entries: Vec<(DistributionKind, Option<FittedPdf>)>,
    degenerate: Option<FittedPdf>,
}

impl FitTable {
    pub fn entries(&self) -> &[(DistributionKind, Option<FittedPdf>)] {
        &self.entries
    }

    pub fn get(&self, kind: DistributionKind) -> Option<&FittedPdf> {
        self.entries
            .iter()
            .find(|(k, _)| *k == kind)
            .and_then(|(_, f)| f.as_ref())
    }
}

/// Fits every applicable family of `kinds` to the sample.
pub fn fit_all(values: &[f64], kinds: &[DistributionKind], bins: usize) -> Result<FitTable> {
    let sample = Sample::new(values)?;
    if kinds.is_empty() {
        return Err(Error::EmptyInput("candidate kind set"));
    }
    if sample.is_degenerate() {
        return Ok(FitTable {
            entries: Vec::new(),
            degenerate: Some(point_mass(&sample)),
        });
    }
    let hist = Histogram::with_range(values, bins, sample.min, sample.max)?;
    let entries = kinds
        .iter()
        .map(|&k| {
            let fit = estimate_from(k, &sample).map(|dist| FittedPdf {
                error: fit_error(&dist, &hist),
                dist,
                fallback: false,
            });
            (k, fit)
        })
        .collect();
    Ok(FitTable {
        entries,
        degenerate: None,
    })
}

fn point_mass(sample: &Sample<'_>) -> FittedPdf {
    FittedPdf {
        dist: Distribution::PointMass { value: sample.min },
        error: 0.0,
        fallback: false,
    }
}

/// Smallest-error fit over `kinds`, ties broken by [`DistributionKind`] order.
///
/// A constant sample yields a point mass with error 0. If no family applies,
/// a uniform over the sample range is returned with `fallback` set.
pub fn fit_best(values: &[f64], kinds: &[DistributionKind], bins: usize) -> Result<FittedPdf> {
    let table = fit_all(values, kinds, bins)?;
    Ok(best_of(&table, values, bins))
}

fn best_of(table: &FitTable, values: &[f64], bins: usize) -> FittedPdf {
    if let Some(pm) = table.degenerate {
        return pm;
    }
    let mut ranked: Vec<&FittedPdf> = table.entries.iter().filter_map(|(_, f)| f.as_ref()).collect();
    ranked.sort_by_key(|f| f.dist.kind());
    let best = ranked.into_iter().fold(None::<&FittedPdf>, |best, f| match best {
        Some(b) if b.error <= f.error => Some(b),
        _ => Some(f),
    });
    match best {
        Some(b) => *b,
        None => {
            let (low, high) = min_max(values);
            let dist = Distribution::Uniform { low, high };
            let hist = Histogram::with_range(values, bins, low, high)
                .expect("non-degenerate sample has a valid histogram");
            FittedPdf {
                error: fit_error(&dist, &hist),
                dist,
                fallback: true,
            }
        }
    }
}

/// Fits one requested family. When the family does not apply to the sample,
/// falls back to [`fit_best`] over `fallback_kinds` and flags the result.
pub fn fit_with_kind(
    values: &[f64],
    kind: DistributionKind,
    bins: usize,
    fallback_kinds: &[DistributionKind],
) -> Result<FittedPdf> {
    let table = fit_all(values, &[kind], bins)?;
    if let Some(pm) = table.degenerate {
        return Ok(pm);
    }
    match table.get(kind) {
        Some(f) => Ok(*f),
        None => {
            let mut f = fit_best(values, fallback_kinds, bins)?;
            f.fallback = true;
            Ok(f)
        }
    }
}
