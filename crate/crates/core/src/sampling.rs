//! Slice features from a sample of points: average statistics and the share
//! of each predicted distribution family.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cube::PointId;
use crate::distfit::DistributionKind;
use crate::dtree::DecisionTreeModel;
use crate::error::{Error, Result};
use crate::grouping::{group_window, KeyMode};
use crate::io::{load_points, load_window, DatasetHandle, LoadOptions, PointRecord};
use crate::pipeline::with_pool;
use crate::stats::{slice_averages, PointStats};

const KMEANS_MAX_ITERS: usize = 50;
const KMEANS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampler {
    #[default]
    Random,
    KMeans,
}

impl FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" => Ok(Sampler::Random),
            "kmeans" | "k-means" => Ok(Sampler::KMeans),
            _ => Err(Error::InvalidArgument(format!("unknown sampler '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    pub rate: f64,
    pub sampler: Sampler,
    pub seed: u64,
    pub group_before_predict: bool,
    /// Loading and prediction threads; 0 means one per core.
    pub threads: usize,
}

impl SamplingConfig {
    pub fn new(rate: f64) -> Self {
        Self {
            rate,
            sampler: Sampler::Random,
            seed: 0,
            group_before_predict: false,
            threads: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceFeatures {
    pub avg_mean: f64,
    pub avg_std: f64,
    /// Fraction of sampled points per family, indexed by kind order.
    pub type_percentages: [f64; 10],
    pub sampled_count: usize,
    pub loading_seconds: f64,
    pub prediction_seconds: f64,
}

impl SliceFeatures {
    pub fn percentage(&self, kind: DistributionKind) -> f64 {
        self.type_percentages[kind.index()]
    }
}

impl fmt::Display for SliceFeatures {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "sampled_count={},avg_mean={},avg_std={}",
            self.sampled_count, self.avg_mean, self.avg_std
        )?;
        for k in DistributionKind::ALL {
            write!(f, ",pct_{k}={}", self.percentage(k))?;
        }
        write!(
            f,
            ",loading_seconds={},prediction_seconds={}",
            self.loading_seconds, self.prediction_seconds
        )
    }
}

fn sample_size(n: usize, rate: f64) -> Result<usize> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidArgument(format!("sampling rate must be in (0, 1], got {rate}")));
    }
    if n == 0 {
        return Err(Error::EmptyInput("points to sample"));
    }
    Ok(((rate * n as f64).ceil() as usize).clamp(1, n))
}

/// `ceil(rate * N)` ids drawn uniformly without replacement, ascending.
pub fn random_sample(ids: &[PointId], rate: f64, seed: u64) -> Result<Vec<PointId>> {
    let k = sample_size(ids.len(), rate)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<PointId> = index::sample(&mut rng, ids.len(), k)
        .into_iter()
        .map(|i| ids[i])
        .collect();
    picked.sort_unstable();
    Ok(picked)
}

/// Clusters `(mean, std)` after z-scoring into `ceil(rate * N)` groups and
/// returns the point closest to each centroid, ascending.
pub fn kmeans_sample(stats: &[(PointId, PointStats)], rate: f64, seed: u64) -> Result<Vec<PointId>> {
    let k = sample_size(stats.len(), rate)?;
    if k >= stats.len() {
        let mut all: Vec<PointId> = stats.iter().map(|s| s.0).collect();
        all.sort_unstable();
        all.dedup();
        return Ok(all);
    }
    let pts = standardize(stats);
    let mut centroids = farthest_point_init(&pts, k, seed);
    let mut assign = vec![0usize; pts.len()];
    for _ in 0..KMEANS_MAX_ITERS {
        assign = assign_nearest(&pts, &centroids);
        let mut sums = vec![(0.0, 0.0, 0usize); k];
        for (p, &c) in pts.iter().zip(&assign) {
            sums[c].0 += p[0];
            sums[c].1 += p[1];
            sums[c].2 += 1;
        }
        let mut shift: f64 = 0.0;
        for (c, s) in centroids.iter_mut().zip(&sums) {
            if s.2 > 0 {
                let next = [s.0 / s.2 as f64, s.1 / s.2 as f64];
                shift = shift.max(dist2(c, &next).sqrt());
                *c = next;
            }
        }
        if shift < KMEANS_TOL {
            assign = assign_nearest(&pts, &centroids);
            break;
        }
    }

    let mut chosen = vec![false; pts.len()];
    let mut out = Vec::with_capacity(k);
    for (c, centroid) in centroids.iter().enumerate() {
        let nearest = |restrict: bool| {
            (0..pts.len())
                .filter(|&i| !chosen[i] && (!restrict || assign[i] == c))
                .min_by(|&a, &b| {
                    dist2(&pts[a], centroid)
                        .total_cmp(&dist2(&pts[b], centroid))
                        .then(stats[a].0.cmp(&stats[b].0))
                })
        };
        if let Some(i) = nearest(true).or_else(|| nearest(false)) {
            chosen[i] = true;
            out.push(stats[i].0);
        }
    }
    out.sort_unstable();
    Ok(out)
}

fn standardize(stats: &[(PointId, PointStats)]) -> Vec<[f64; 2]> {
    let n = stats.len() as f64;
    let col = |f: fn(&PointStats) -> f64| {
        let m = stats.iter().map(|s| f(&s.1)).sum::<f64>() / n;
        let var = stats.iter().map(|s| (f(&s.1) - m).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        (m, if sd > 0.0 { sd } else { 1.0 })
    };
    let (mm, ms) = col(|s| s.mean);
    let (sm, ss) = col(|s| s.std);
    stats
        .iter()
        .map(|s| [(s.1.mean - mm) / ms, (s.1.std - sm) / ss])
        .collect()
}

fn dist2(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// First centroid drawn with the seed; each next one is the point farthest
/// from all centroids so far (lowest index on ties).
fn farthest_point_init(pts: &[[f64; 2]], k: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.random_range(0..pts.len());
    let mut centroids = vec![pts[first]];
    let mut used = vec![false; pts.len()];
    used[first] = true;
    let mut nearest: Vec<f64> = pts.iter().map(|p| dist2(p, &pts[first])).collect();
    while centroids.len() < k {
        let mut best = None::<usize>;
        for i in 0..pts.len() {
            if !used[i] && best.is_none_or(|b| nearest[i] > nearest[b]) {
                best = Some(i);
            }
        }
        let b = best.expect("k < N leaves unused points");
        used[b] = true;
        centroids.push(pts[b]);
        for (d, p) in nearest.iter_mut().zip(pts) {
            *d = d.min(dist2(p, &pts[b]));
        }
    }
    centroids
}

/// Index of the closest centroid per point, lowest index on ties.
pub(crate) fn assign_nearest(pts: &[[f64; 2]], centroids: &[[f64; 2]]) -> Vec<usize> {
    pts.par_iter()
        .map(|p| {
            let mut best = 0;
            let mut bd = f64::INFINITY;
            for (c, cen) in centroids.iter().enumerate() {
                let d = dist2(p, cen);
                if d < bd {
                    bd = d;
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Euclidean distance between two type-percentage vectors.
pub fn percentage_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt())
}

/// Estimates slice features from sampled points.
///
/// Random sampling reads only the sampled points. K-means needs the
/// statistics of every point, so it loads the whole slice first.
pub fn slice_features(
    handle: &DatasetHandle,
    slice_index: usize,
    config: &SamplingConfig,
    model: &DecisionTreeModel,
) -> Result<SliceFeatures> {
    let geom = handle.geometry();
    let ids: Vec<PointId> = geom.slice_ids(slice_index)?.map(PointId).collect();
    sample_size(ids.len(), config.rate)?;
    let reader = handle.reader()?;
    let opts = LoadOptions::default();

    with_pool(config.threads, || -> Result<SliceFeatures> {
        let t0 = Instant::now();
        let records: Vec<PointRecord> = match config.sampler {
            Sampler::Random => {
                let picked = random_sample(&ids, config.rate, config.seed)?;
                load_points(&reader, &picked, &opts)?
            }
            Sampler::KMeans => {
                let window = crate::cube::WindowSpec {
                    slice_index,
                    first_line: 0,
                    line_count: geom.lines_per_slice(),
                };
                let all = load_window(&reader, &window, &opts)?;
                let stats: Vec<(PointId, PointStats)> = all.iter().map(|r| (r.id, r.stats)).collect();
                let picked = kmeans_sample(&stats, config.rate, config.seed)?;
                let first = ids[0].0;
                picked
                    .into_iter()
                    .map(|id| all[(id.0 - first) as usize].clone())
                    .collect()
            }
        };
        let loading_seconds = t0.elapsed().as_secs_f64();

        let t1 = Instant::now();
        let mut counts = [0usize; 10];
        if config.group_before_predict {
            for g in group_window(&records, KeyMode::default()) {
                let s = g.representative.stats;
                counts[model.predict(s.mean, s.std).index()] += g.member_ids.len();
            }
        } else {
            let kinds: Vec<DistributionKind> = records
                .par_iter()
                .map(|r| model.predict(r.stats.mean, r.stats.std))
                .collect();
            for k in kinds {
                counts[k.index()] += 1;
            }
        }
        let (avg_mean, avg_std) = slice_averages(records.iter().map(|r| &r.stats))?;
        let n = records.len() as f64;
        Ok(SliceFeatures {
            avg_mean,
            avg_std,
            type_percentages: counts.map(|c| c as f64 / n),
            sampled_count: records.len(),
            loading_seconds,
            prediction_seconds: t1.elapsed().as_secs_f64(),
        })
    })?
}
