//! Synthetic layered ensemble generator with known ground truth.
//!
//! The cube is cut along `z` into bands, one per layer. Every point in a
//! layer draws its observations from the layer's family; the family's mean
//! moves with `spatial_gradient * (x + y)` so point statistics vary across a
//! layer while the family stays fixed.
//!
//! Values are derived from `(seed, point)` through a dedicated ChaCha stream
//! per point, read sequentially across runs, so output never depends on
//! generation order or thread count.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Exp, LogNormal, Normal};
use rayon::prelude::*;

use crate::cube::{CubeGeometry, PointId};
use crate::distfit::{Distribution, DistributionKind};
use crate::dtree::LabeledPoint;
use crate::error::{Error, Result};
use crate::io::{DatasetHandle, RunWriter, RUN_EXTENSION};
use crate::stats::PointStats;

pub const GROUND_TRUTH_FILE: &str = "ground_truth.csv";
pub const LABELS_FILE: &str = "labels.csv";

const DUPLICATE_STREAM_BIT: u64 = 1 << 63;

/// One horizontal layer of the synthetic model.
///
/// `base_location` is the mean of the layer's distribution at `x + y = 0`.
/// `base_scale` is the standard deviation for Normal and Uniform layers and
/// the log-scale shape for LogNormal layers; Exponential layers ignore it
/// (their spread equals their mean).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerSpec {
    pub layer_index: usize,
    pub kind: DistributionKind,
    pub base_location: f64,
    pub base_scale: f64,
}

impl LayerSpec {
    /// Layers cycling Normal, LogNormal, Exponential, Uniform with means
    /// 1000, 2000, ... so every layer occupies its own band of means.
    pub fn default_cycle(count: usize) -> Vec<LayerSpec> {
        const CYCLE: [DistributionKind; 4] = [
            DistributionKind::Normal,
            DistributionKind::LogNormal,
            DistributionKind::Exponential,
            DistributionKind::Uniform,
        ];
        (0..count)
            .map(|i| {
                let kind = CYCLE[i % 4];
                let base_location = 1000.0 * (i + 1) as f64;
                let base_scale = match kind {
                    DistributionKind::LogNormal => 0.5,
                    DistributionKind::Exponential => 1.0,
                    // a narrow normal is hard to tell from a lognormal
                    DistributionKind::Normal => 0.25 * base_location,
                    _ => 0.1 * base_location,
                };
                LayerSpec {
                    layer_index: i,
                    kind,
                    base_location,
                    base_scale,
                }
            })
            .collect()
    }

    /// The distribution drawn from at a point whose mean is shifted by `shift`.
    pub fn distribution_at(&self, shift: f64) -> Distribution {
        let m = self.base_location + shift;
        let s = self.base_scale;
        match self.kind {
            DistributionKind::Normal => Distribution::Normal { mean: m, std: s },
            DistributionKind::LogNormal => Distribution::LogNormal {
                log_mean: m.ln() - 0.5 * s * s,
                log_std: s,
            },
            DistributionKind::Exponential => Distribution::Exponential { rate: 1.0 / m },
            DistributionKind::Uniform => Distribution::Uniform {
                low: m - 3f64.sqrt() * s,
                high: m + 3f64.sqrt() * s,
            },
            other => unreachable!("generator does not produce {other}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub geometry: CubeGeometry,
    pub layers: Vec<LayerSpec>,
    pub run_count: usize,
    pub seed: u64,
    pub duplicate_fraction: f64,
    pub spatial_gradient: f64,
}

impl GenConfig {
    pub fn new(geometry: CubeGeometry, run_count: usize, seed: u64) -> Self {
        Self {
            geometry,
            layers: LayerSpec::default_cycle(16),
            run_count,
            seed,
            duplicate_fraction: 0.3,
            spatial_gradient: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.layers.is_empty() {
            return bad("at least one layer required".into());
        }
        if self.run_count < 2 {
            return bad(format!("need at least 2 runs, got {}", self.run_count));
        }
        if !(0.0..=1.0).contains(&self.duplicate_fraction) {
            return bad(format!(
                "duplicate fraction {} outside [0, 1]",
                self.duplicate_fraction
            ));
        }
        if !self.spatial_gradient.is_finite() {
            return bad("spatial gradient must be finite".into());
        }
        let max_xy = (self.geometry.points_per_line() - 1 + self.geometry.lines_per_slice() - 1) as f64;
        let shifts = [0.0, self.spatial_gradient * max_xy];
        for layer in &self.layers {
            if !matches!(
                layer.kind,
                DistributionKind::Normal
                    | DistributionKind::LogNormal
                    | DistributionKind::Exponential
                    | DistributionKind::Uniform
            ) {
                return bad(format!("layer {} has unsupported kind {}", layer.layer_index, layer.kind));
            }
            if !(layer.base_scale > 0.0) {
                return bad(format!("layer {} scale must be > 0", layer.layer_index));
            }
            for shift in shifts {
                if !layer.distribution_at(shift).is_valid() {
                    return bad(format!(
                        "layer {} ({}) has non-positive mean {} inside the cube",
                        layer.layer_index,
                        layer.kind,
                        layer.base_location + shift
                    ));
                }
            }
        }
        Ok(())
    }

    /// Layer index of slice `z`: equal-depth bands, the last one absorbing the
    /// remainder.
    pub fn layer_of_slice(&self, z: usize) -> usize {
        let depth = (self.geometry.slice_count() / self.layers.len()).max(1);
        (z / depth).min(self.layers.len() - 1)
    }
}

/// True generating distribution and realized statistics of one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthEntry {
    pub dist: Distribution,
    pub stats: PointStats,
    pub duplicate_of: Option<PointId>,
}

impl TruthEntry {
    pub fn kind(&self) -> DistributionKind {
        self.dist.kind().expect("generated distributions are candidate families")
    }
}

#[derive(Debug, Clone)]
pub struct GroundTruth {
    geometry: CubeGeometry,
    entries: Vec<TruthEntry>,
}

impl GroundTruth {
    pub fn geometry(&self) -> &CubeGeometry {
        &self.geometry
    }

    pub fn get(&self, id: PointId) -> Option<&TruthEntry> {
        self.entries.get(id.index())
    }

    pub fn entries(&self) -> &[TruthEntry] {
        &self.entries
    }

    /// Writes `point_id,kind,param1,param2` lines.
    pub fn write_sidecar(&self, path: &Path) -> Result<()> {
        let mut out = create_text(path)?;
        for (i, e) in self.entries.iter().enumerate() {
            let [p1, p2, _] = e.dist.params();
            writeln!(out, "{i},{},{},{}", e.dist.label(), fmt_opt(p1), fmt_opt(p2))
                .map_err(|err| Error::io(path, err))?;
        }
        out.flush().map_err(|err| Error::io(path, err))
    }

    /// Writes `point_id,mean,std,kind` training labels for every point.
    pub fn write_labels(&self, path: &Path) -> Result<()> {
        let mut out = create_text(path)?;
        for (i, e) in self.entries.iter().enumerate() {
            writeln!(out, "{i},{},{},{}", e.stats.mean, e.stats.std, e.dist.label())
                .map_err(|err| Error::io(path, err))?;
        }
        out.flush().map_err(|err| Error::io(path, err))
    }
}

fn create_text(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Labeled `(mean, std, kind)` triples for every point of a slice.
pub fn ground_truth_labels(gt: &GroundTruth, slice_index: usize) -> Result<Vec<LabeledPoint>> {
    let ids = gt.geometry.slice_ids(slice_index)?;
    Ok(ids
        .map(|id| {
            let e = &gt.entries[id as usize];
            LabeledPoint {
                mean: e.stats.mean,
                std: e.stats.std,
                kind: e.kind(),
            }
        })
        .collect())
}

pub fn run_file_name(run: usize) -> String {
    format!("run_{run:05}.{RUN_EXTENSION}")
}

/// Generates the ensemble into `out_dir`: one run file per run, the ground
/// truth sidecar and the labels file.
pub fn generate(config: &GenConfig, out_dir: &Path) -> Result<(DatasetHandle, GroundTruth)> {
    config.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let geom = config.geometry;
    let n = config.run_count;
    let paths: Vec<PathBuf> = (0..n).map(|r| out_dir.join(run_file_name(r))).collect();
    let mut writers = paths
        .iter()
        .map(|p| RunWriter::create(p, &geom))
        .collect::<Result<Vec<_>>>()?;

    let mut entries = Vec::with_capacity(geom.total_points());
    let ppl = geom.points_per_line();
    let mut run_buf = vec![0f32; geom.points_per_slice()];
    for z in 0..geom.slice_count() {
        let layer = &config.layers[config.layer_of_slice(z)];
        let lines: Vec<(Vec<f32>, Vec<TruthEntry>)> = (0..geom.lines_per_slice())
            .into_par_iter()
            .map(|y| generate_line(config, layer, y, z))
            .collect::<Result<_>>()?;
        for r in 0..n {
            for (y, (vals, _)) in lines.iter().enumerate() {
                for x in 0..ppl {
                    run_buf[y * ppl + x] = vals[x * n + r];
                }
            }
            writers[r].write_values(&run_buf)?;
        }
        entries.extend(lines.into_iter().flat_map(|(_, t)| t));
    }
    for w in writers {
        w.finish()?;
    }

    let gt = GroundTruth {
        geometry: geom,
        entries,
    };
    gt.write_sidecar(&out_dir.join(GROUND_TRUTH_FILE))?;
    gt.write_labels(&out_dir.join(LABELS_FILE))?;
    Ok((DatasetHandle::open(paths)?, gt))
}

/// Values for one line, point-major (`points_per_line * run_count`).
fn generate_line(
    config: &GenConfig,
    layer: &LayerSpec,
    y: usize,
    z: usize,
) -> Result<(Vec<f32>, Vec<TruthEntry>)> {
    let geom = &config.geometry;
    let ppl = geom.points_per_line();
    let n = config.run_count;
    let line_start = geom.point_id(0, y, z)?;

    let mut dup = vec![false; ppl];
    let dup_count = ((config.duplicate_fraction * ppl as f64).floor() as usize).min(ppl - 1);
    if dup_count > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(DUPLICATE_STREAM_BIT | (line_start.0 / ppl as u64));
        for i in index::sample(&mut rng, ppl - 1, dup_count) {
            dup[i + 1] = true;
        }
    }

    let mut values = vec![0f32; ppl * n];
    let mut truth: Vec<TruthEntry> = Vec::with_capacity(ppl);
    for x in 0..ppl {
        let id = PointId(line_start.0 + x as u64);
        if dup[x] {
            values.copy_within((x - 1) * n..x * n, x * n);
            let mut src = truth[x - 1];
            src.duplicate_of = Some(src.duplicate_of.unwrap_or(PointId(id.0 - 1)));
            truth.push(src);
            continue;
        }
        let dist = layer.distribution_at(config.spatial_gradient * (x + y) as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(id.0);
        let out = &mut values[x * n..(x + 1) * n];
        draw_into(&dist, &mut rng, out);
        let as_f64: Vec<f64> = out.iter().map(|&v| v as f64).collect();
        truth.push(TruthEntry {
            dist,
            stats: PointStats::from_values(&as_f64)?,
            duplicate_of: None,
        });
    }
    Ok((values, truth))
}

fn draw_into(dist: &Distribution, rng: &mut ChaCha8Rng, out: &mut [f32]) {
    match *dist {
        Distribution::Normal { mean, std } => {
            let d = Normal::new(mean, std).expect("validated parameters");
            out.iter_mut().for_each(|v| *v = d.sample(rng) as f32);
        }
        Distribution::LogNormal { log_mean, log_std } => {
            let d = LogNormal::new(log_mean, log_std).expect("validated parameters");
            out.iter_mut().for_each(|v| *v = d.sample(rng) as f32);
        }
        Distribution::Exponential { rate } => {
            let d = Exp::new(rate).expect("validated parameters");
            out.iter_mut().for_each(|v| *v = d.sample(rng) as f32);
        }
        Distribution::Uniform { low, high } => {
            out.iter_mut()
                .for_each(|v| *v = rng.random_range(low..high) as f32);
        }
        _ => unreachable!("generator only draws the four layer families"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> GenConfig {
        let mut c = GenConfig::new(CubeGeometry::new(100, 2, 4).unwrap(), 5, 11);
        c.layers = LayerSpec::default_cycle(4);
        c
    }

    #[test]
    fn default_layers_cycle_four_kinds() {
        let layers = LayerSpec::default_cycle(16);
        let order = [
            DistributionKind::Normal,
            DistributionKind::LogNormal,
            DistributionKind::Exponential,
            DistributionKind::Uniform,
        ];
        for (i, l) in layers.iter().enumerate() {
            assert_eq!(l.kind, order[i % 4]);
        }
    }

    #[test]
    fn layer_bands() {
        let mut c = GenConfig::new(CubeGeometry::new(2, 2, 501).unwrap(), 2, 0);
        assert_eq!(c.layer_of_slice(0), 0);
        assert_eq!(c.layer_of_slice(31), 1);
        assert_eq!(c.layer_of_slice(500), 15);
        c.geometry = CubeGeometry::new(2, 2, 8).unwrap();
        assert_eq!(c.layer_of_slice(7), 7);
    }

    #[test]
    fn invalid_configs() {
        let mut c = small_config();
        c.run_count = 1;
        assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
        let mut c = small_config();
        c.layers.clear();
        assert!(c.validate().is_err());
        let mut c = small_config();
        c.spatial_gradient = -100.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn half_duplicates_per_line() {
        let mut c = small_config();
        c.duplicate_fraction = 0.5;
        let (vals, truth) = generate_line(&c, &c.layers[0], 0, 0).unwrap();
        let dups = truth.iter().filter(|t| t.duplicate_of.is_some()).count();
        assert_eq!(dups, 50);
        for (x, t) in truth.iter().enumerate() {
            if t.duplicate_of.is_some() {
                assert_eq!(vals[x * 5..(x + 1) * 5], vals[(x - 1) * 5..x * 5]);
            }
        }
    }
}
