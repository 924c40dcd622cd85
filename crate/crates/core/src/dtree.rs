//! Decision-tree classifier from point statistics `(mean, std)` to a
//! distribution family.
//!
//! Training is greedy CART with Gini impurity. Split candidates per feature
//! are fixed up front as equal-frequency quantile boundaries (`max_bins - 1`
//! of them), so `max_bins` bounds the resolution of every split.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::distfit::DistributionKind;
use crate::error::{Error, Result};

/// Samples used to place quantile boundaries on large training sets.
const QUANTILE_SAMPLE: usize = 10_000;
/// Validation-error plateau within which the smaller hyperparameters win.
pub const TUNE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledPoint {
    pub mean: f64,
    pub std: f64,
    pub kind: DistributionKind,
}

impl LabeledPoint {
    fn feature(&self, f: Feature) -> f64 {
        match f {
            Feature::Mean => self.mean,
            Feature::Std => self.std,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feature {
    Mean = 0,
    Std = 1,
}

impl Feature {
    const BOTH: [Feature; 2] = [Feature::Mean, Feature::Std];

    fn from_index(i: usize) -> Option<Self> {
        match i {
            0 => Some(Feature::Mean),
            1 => Some(Feature::Std),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Hyperparams {
    pub depth: usize,
    pub max_bins: usize,
}

impl Hyperparams {
    pub fn new(depth: usize, max_bins: usize) -> Result<Self> {
        if depth < 1 || max_bins < 2 {
            return Err(Error::InvalidArgument(format!(
                "need depth >= 1 and max_bins >= 2, got depth {depth}, max_bins {max_bins}"
            )));
        }
        Ok(Self { depth, max_bins })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    /// Goes left when `feature < threshold`.
    Split {
        feature: Feature,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        kind: DistributionKind,
    },
}

/// A trained tree, nodes stored in preorder with the root at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTreeModel {
    nodes: Vec<Node>,
    hyperparams: Hyperparams,
}

impl DecisionTreeModel {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn hyperparams(&self) -> Hyperparams {
        self.hyperparams
    }

    /// A tree that answers `kind` for every input.
    pub fn constant(kind: DistributionKind) -> Self {
        Self {
            nodes: vec![Node::Leaf { kind }],
            hyperparams: Hyperparams {
                depth: 1,
                max_bins: 2,
            },
        }
    }

    pub fn predict(&self, mean: f64, std: f64) -> DistributionKind {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { kind } => return kind,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let v = match feature {
                        Feature::Mean => mean,
                        Feature::Std => std,
                    };
                    i = if v < threshold { left } else { right };
                }
            }
        }
    }

    /// Number of split levels on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Kinds that some leaf can return, in kind order.
    pub fn classes(&self) -> Vec<DistributionKind> {
        let mut out: Vec<_> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf { kind } => Some(*kind),
                _ => None,
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Text form: a `#` hyperparameter line, then one node per line in
    /// preorder, `split <feature> <threshold>` or `leaf <kind>`.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "# depth={} max_bins={}\n",
            self.hyperparams.depth, self.hyperparams.max_bins
        );
        for n in &self.nodes {
            match n {
                Node::Split {
                    feature, threshold, ..
                } => writeln!(s, "split {} {threshold}", *feature as usize),
                Node::Leaf { kind } => writeln!(s, "leaf {kind}"),
            }
            .expect("writing to String");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut hyperparams = None;
        let mut lines = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(comment) = line.strip_prefix('#') {
                if hyperparams.is_none() {
                    hyperparams = parse_hyperparams(comment);
                }
            } else if !line.is_empty() {
                lines.push((no + 1, line));
            }
        }
        let mut nodes = Vec::with_capacity(lines.len());
        let mut pos = 0;
        parse_subtree(&lines, &mut pos, &mut nodes)?;
        if pos != lines.len() {
            return Err(Error::Parse {
                location: format!("line {}", lines[pos].0),
                reason: "trailing nodes after a complete tree".into(),
            });
        }
        let mut model = Self {
            nodes,
            hyperparams: Hyperparams {
                depth: 1,
                max_bins: 2,
            },
        };
        model.hyperparams = hyperparams.unwrap_or(Hyperparams {
            depth: model.depth().max(1),
            max_bins: 2,
        });
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text).map_err(|e| match e {
            Error::Parse { location, reason } => Error::Parse {
                location: format!("{}: {location}", path.display()),
                reason,
            },
            other => other,
        })
    }
}

fn parse_hyperparams(comment: &str) -> Option<Hyperparams> {
    let mut depth = None;
    let mut bins = None;
    for tok in comment.split_whitespace() {
        if let Some(v) = tok.strip_prefix("depth=") {
            depth = v.parse().ok();
        } else if let Some(v) = tok.strip_prefix("max_bins=") {
            bins = v.parse().ok();
        }
    }
    Hyperparams::new(depth?, bins?).ok()
}

fn parse_subtree(lines: &[(usize, &str)], pos: &mut usize, nodes: &mut Vec<Node>) -> Result<usize> {
    let Some(&(no, line)) = lines.get(*pos) else {
        return Err(Error::Parse {
            location: "end of model".into(),
            reason: "incomplete tree".into(),
        });
    };
    let err = |reason: String| Error::Parse {
        location: format!("line {no}"),
        reason,
    };
    *pos += 1;
    let idx = nodes.len();
    let parts: Vec<&str> = line.split_whitespace().collect();
    match parts.as_slice() {
        ["leaf", kind] => {
            nodes.push(Node::Leaf {
                kind: kind.parse().map_err(|e: Error| err(e.to_string()))?,
            });
        }
        ["split", feature, threshold] => {
            let feature = feature
                .parse::<usize>()
                .ok()
                .and_then(Feature::from_index)
                .ok_or_else(|| err(format!("bad feature '{feature}'")))?;
            let threshold: f64 = threshold
                .parse()
                .ok()
                .filter(|t: &f64| t.is_finite())
                .ok_or_else(|| err(format!("bad threshold '{threshold}'")))?;
            nodes.push(Node::Leaf {
                kind: DistributionKind::Normal,
            });
            let left = parse_subtree(lines, pos, nodes)?;
            let right = parse_subtree(lines, pos, nodes)?;
            nodes[idx] = Node::Split {
                feature,
                threshold,
                left,
                right,
            };
        }
        _ => return Err(err(format!("unrecognized node '{line}'"))),
    }
    Ok(idx)
}

/// Reads labels, one per line as `point_id,mean,std,kind` or `mean,std,kind`.
pub fn read_labels(path: &Path) -> Result<Vec<LabeledPoint>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_labels(&text).map_err(|e| match e {
        Error::Parse { location, reason } => Error::Parse {
            location: format!("{}: {location}", path.display()),
            reason,
        },
        other => other,
    })
}

pub fn parse_labels(text: &str) -> Result<Vec<LabeledPoint>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: String| Error::Parse {
            location: format!("line {}", no + 1),
            reason,
        };
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let tail = match cols.len() {
            3 => &cols[..],
            4 => &cols[1..],
            n => return Err(err(format!("expected 3 or 4 columns, got {n}"))),
        };
        let num = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("bad number '{s}'")))
        };
        out.push(LabeledPoint {
            mean: num(tail[0])?,
            std: num(tail[1])?,
            kind: tail[2].parse().map_err(|e: Error| err(e.to_string()))?,
        });
    }
    Ok(out)
}

pub fn write_labels(path: &Path, labels: &[LabeledPoint]) -> Result<()> {
    let mut s = String::new();
    for l in labels {
        writeln!(s, "{},{},{}", l.mean, l.std, l.kind).expect("writing to String");
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

type ClassCounts = [usize; 10];

fn counts_of<'a>(labels: impl Iterator<Item = &'a LabeledPoint>) -> ClassCounts {
    let mut c = [0; 10];
    for l in labels {
        c[l.kind.index()] += 1;
    }
    c
}

fn gini(counts: &ClassCounts, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

/// Most frequent class; ties go to the earlier kind.
fn majority(counts: &ClassCounts) -> DistributionKind {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    DistributionKind::ALL[best]
}

/// Equal-frequency boundaries between distinct values, at most
/// `max_bins - 1` of them, ascending.
pub fn quantile_thresholds(values: &[f64], max_bins: usize) -> Vec<f64> {
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len();
    let mut out: Vec<f64> = Vec::new();
    for i in 1..max_bins {
        let mut k = (i * m / max_bins).max(1);
        while k < m && s[k - 1] == s[k] {
            k += 1;
        }
        if k >= m {
            break;
        }
        let mid = 0.5 * (s[k - 1] + s[k]);
        let t = if mid > s[k - 1] { mid } else { s[k] };
        if out.last().is_none_or(|&last| t > last) {
            out.push(t);
        }
    }
    out
}

/// Trains a tree. `seed` selects the subsample used to place quantile
/// boundaries when there are more than 10 000 labels.
pub fn train(labels: &[LabeledPoint], hp: Hyperparams, seed: u64) -> Result<DecisionTreeModel> {
    if labels.is_empty() {
        return Err(Error::EmptyInput("training labels"));
    }
    Hyperparams::new(hp.depth, hp.max_bins)?;
    let thresholds: Vec<Vec<f64>> = Feature::BOTH
        .iter()
        .map(|&f| {
            let mut vals: Vec<f64> = labels.iter().map(|l| l.feature(f)).collect();
            if vals.len() > QUANTILE_SAMPLE {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                vals.shuffle(&mut rng);
                vals.truncate(QUANTILE_SAMPLE);
            }
            quantile_thresholds(&vals, hp.max_bins)
        })
        .collect();

    let mut nodes = Vec::new();
    let idx: Vec<usize> = (0..labels.len()).collect();
    build(labels, &thresholds, idx, hp.depth, &mut nodes);
    Ok(DecisionTreeModel {
        nodes,
        hyperparams: hp,
    })
}

fn build(
    labels: &[LabeledPoint],
    thresholds: &[Vec<f64>],
    idx: Vec<usize>,
    depth_left: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let counts = counts_of(idx.iter().map(|&i| &labels[i]));
    let me = nodes.len();
    nodes.push(Node::Leaf {
        kind: majority(&counts),
    });
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    if depth_left == 0 || pure || idx.len() < 2 {
        return me;
    }
    let Some((feature, threshold)) = best_split(labels, thresholds, &idx, &counts) else {
        return me;
    };
    let (l, r): (Vec<usize>, Vec<usize>) = idx
        .into_iter()
        .partition(|&i| labels[i].feature(feature) < threshold);
    let left = build(labels, thresholds, l, depth_left - 1, nodes);
    let right = build(labels, thresholds, r, depth_left - 1, nodes);
    nodes[me] = Node::Split {
        feature,
        threshold,
        left,
        right,
    };
    me
}

/// Candidate with the largest Gini decrease; earlier feature and smaller
/// threshold win ties. `None` when no candidate improves purity.
fn best_split(
    labels: &[LabeledPoint],
    thresholds: &[Vec<f64>],
    idx: &[usize],
    parent: &ClassCounts,
) -> Option<(Feature, f64)> {
    let n = idx.len();
    let parent_gini = gini(parent, n);
    let mut best: Option<(f64, Feature, f64)> = None;
    for (fi, &feature) in Feature::BOTH.iter().enumerate() {
        let mut order: Vec<(f64, usize)> = idx
            .iter()
            .map(|&i| (labels[i].feature(feature), labels[i].kind.index()))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left = [0usize; 10];
        let mut nl = 0;
        for &t in &thresholds[fi] {
            while nl < n && order[nl].0 < t {
                left[order[nl].1] += 1;
                nl += 1;
            }
            if nl == 0 || nl == n {
                continue;
            }
            let mut right = *parent;
            for (r, l) in right.iter_mut().zip(&left) {
                *r -= l;
            }
            let weighted = (nl as f64 * gini(&left, nl) + (n - nl) as f64 * gini(&right, n - nl))
                / n as f64;
            let gain = parent_gini - weighted;
            if gain > 1e-12 && best.is_none_or(|(g, _, _)| gain > g) {
                best = Some((gain, feature, t));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}

/// Fraction of labels the model gets wrong.
pub fn model_error(model: &DecisionTreeModel, labels: &[LabeledPoint]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptyInput("labels for model error"));
    }
    let wrong = labels
        .iter()
        .filter(|l| model.predict(l.mean, l.std) != l.kind)
        .count();
    Ok(wrong as f64 / labels.len() as f64)
}

/// Seeded random partition; the first part holds `round(fraction * n)` labels.
pub fn split_labels(
    labels: &[LabeledPoint],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<LabeledPoint>, Vec<LabeledPoint>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split fraction must be in (0, 1), got {fraction}"
        )));
    }
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = (fraction * labels.len() as f64).round() as usize;
    if cut == 0 || cut == labels.len() {
        return Err(Error::InvalidArgument(format!(
            "split of {} labels at {fraction} leaves an empty partition",
            labels.len()
        )));
    }
    let (a, b) = order.split_at(cut);
    Ok((
        a.iter().map(|&i| labels[i]).collect(),
        b.iter().map(|&i| labels[i]).collect(),
    ))
}

#[derive(Debug, Clone)]
pub struct TuneOutcome {
    pub hyperparams: Hyperparams,
    pub validation_error: f64,
    /// Validation error of every grid cell, depth-major.
    pub grid: Vec<(Hyperparams, f64)>,
}

/// Grid search on a seeded train/validation split. Returns the smallest
/// `(depth, max_bins)` whose validation error is within [`TUNE_TOLERANCE`]
/// of the grid minimum.
pub fn tune(
    labels: &[LabeledPoint],
    depth_grid: &[usize],
    bins_grid: &[usize],
    split_fraction: f64,
    seed: u64,
) -> Result<TuneOutcome> {
    if depth_grid.is_empty() || bins_grid.is_empty() {
        return Err(Error::EmptyInput("hyperparameter grid"));
    }
    let (train_set, validation) = split_labels(labels, split_fraction, seed)?;
    let mut grid = Vec::with_capacity(depth_grid.len() * bins_grid.len());
    for &depth in depth_grid {
        for &max_bins in bins_grid {
            let hp = Hyperparams::new(depth, max_bins)?;
            let model = train(&train_set, hp, seed)?;
            grid.push((hp, model_error(&model, &validation)?));
        }
    }
    let min = grid.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
    let (hyperparams, validation_error) = grid
        .iter()
        .filter(|g| g.1 <= min + TUNE_TOLERANCE)
        .min_by_key(|g| (g.0.depth, g.0.max_bins))
        .copied()
        .expect("grid is nonempty");
    Ok(TuneOutcome {
        hyperparams,
        validation_error,
        grid,
    })
}
