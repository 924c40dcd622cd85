//! Per-point and per-slice statistics, histograms and the histogram error
//! metric used to score a fitted distribution.

use crate::error::{Error, Result};

/// Default number of histogram intervals used by the error metric.
pub const DEFAULT_BINS: usize = 100;

/// Mean and sample standard deviation of one point's observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointStats {
    pub mean: f64,
    pub std: f64,
}

impl PointStats {
    /// Computes both statistics; requires at least two values.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let mean = mean(values)?;
        let std = std_about(values, mean)?;
        Ok(Self { mean, std })
    }
}

/// Arithmetic mean with Neumaier-compensated summation.
pub fn mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("mean of empty observation set"));
    }
    Ok(compensated_sum(values.iter().copied()) / values.len() as f64)
}

/// Sample standard deviation with the `n - 1` denominator.
pub fn sample_std(values: &[f64]) -> Result<f64> {
    let m = mean(values)?;
    std_about(values, m)
}

fn std_about(values: &[f64], mean: f64) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::TooFewValues {
            needed: 2,
            actual: values.len(),
        });
    }
    // exact zero for constant vectors, independent of rounding in `mean`
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return Ok(0.0);
    }
    let ss = compensated_sum(values.iter().map(|&v| (v - mean) * (v - mean)));
    Ok((ss / (values.len() - 1) as f64).sqrt())
}

/// Unnormalized central moment `sum((x - mean)^order)`.
pub fn central_moment(values: &[f64], order: u32) -> Result<f64> {
    if order < 2 {
        return Err(Error::InvalidArgument(format!(
            "central moment order must be >= 2, got {order}"
        )));
    }
    let m = mean(values)?;
    Ok(compensated_sum(values.iter().map(|&v| (v - m).powi(order as i32))))
}

pub(crate) fn compensated_sum(iter: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in iter {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Equal-width histogram over `[min, max]` with a right-closed last bin.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    min: f64,
    max: f64,
    freqs: Vec<u64>,
    total: u64,
}

impl Histogram {
    /// Bins `values` into `bins` intervals spanning the sample range.
    ///
    /// Returns [`Error::InvalidArgument`] for a degenerate sample whose
    /// minimum equals its maximum; callers treat that case separately.
    pub fn new(values: &[f64], bins: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("histogram of empty observation set"));
        }
        let (min, max) = min_max(values);
        Self::with_range(values, bins, min, max)
    }

    pub(crate) fn with_range(values: &[f64], bins: usize, min: f64, max: f64) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidArgument("histogram needs at least one bin".into()));
        }
        if !(max > min) {
            return Err(Error::InvalidArgument(format!(
                "degenerate sample: min = max = {min}"
            )));
        }
        let mut hist = Histogram {
            min,
            max,
            freqs: vec![0; bins],
            total: values.len() as u64,
        };
        let width = max - min;
        for &v in values {
            let mut k = (((v - min) / width) * bins as f64) as usize;
            k = k.min(bins - 1);
            // settle against the exact edge values used for interval probabilities
            while k + 1 < bins && v >= hist.edge(k + 1) {
                k += 1;
            }
            while k > 0 && v < hist.edge(k) {
                k -= 1;
            }
            hist.freqs[k] += 1;
        }
        Ok(hist)
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn bin_count(&self) -> usize {
        self.freqs.len()
    }

    pub fn freqs(&self) -> &[u64] {
        &self.freqs
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Lower edge of bin `k` (0-based); `edge(L)` is the maximum.
    pub fn edge(&self, k: usize) -> f64 {
        let l = self.freqs.len();
        if k >= l {
            self.max
        } else {
            self.min + (self.max - self.min) * k as f64 / l as f64
        }
    }
}

pub(crate) fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// Sum over intervals of `|freq_k / n - model_prob_k|`.
///
/// The divisor is the observation count, so the empirical fractions sum to
/// one and the result lies in `[0, 2]` whenever the model probabilities sum
/// to at most one.
pub fn empirical_vs_model_error(hist: &Histogram, interval_probs: &[f64]) -> Result<f64> {
    if interval_probs.len() != hist.bin_count() {
        return Err(Error::LengthMismatch {
            left: hist.bin_count(),
            right: interval_probs.len(),
        });
    }
    let n = hist.total() as f64;
    Ok(hist
        .freqs()
        .iter()
        .zip(interval_probs)
        .map(|(&f, &p)| (f as f64 / n - p).abs())
        .sum())
}

/// Average mean and average standard deviation over a collection of points.
pub fn slice_averages<'a, I>(stats: I) -> Result<(f64, f64)>
where
    I: IntoIterator<Item = &'a PointStats>,
{
    let mut count = 0usize;
    let mut means = Vec::new();
    let mut stds = Vec::new();
    for s in stats {
        count += 1;
        means.push(s.mean);
        stds.push(s.std);
    }
    if count == 0 {
        return Err(Error::EmptyInput("slice averages over no points"));
    }
    Ok((
        compensated_sum(means.into_iter()) / count as f64,
        compensated_sum(stds.into_iter()) / count as f64,
    ))
}

/// Mean of per-point errors over a slice.
pub fn average_error(errors: &[f64]) -> Result<f64> {
    if errors.is_empty() {
        return Err(Error::EmptyInput("average error over no points"));
    }
    Ok(compensated_sum(errors.iter().copied()) / errors.len() as f64)
}
