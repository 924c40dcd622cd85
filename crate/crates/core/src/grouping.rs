//! Work deduplication: points with identical statistics share one fit, and
//! fits are reused across windows of a slice run.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;

use crate::cube::PointId;
use crate::distfit::FittedPdf;
use crate::error::{Error, Result};
use crate::io::PointRecord;
use crate::stats::PointStats;

/// How `(mean, std)` is quantized before comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantizer {
    /// Round to this many significant decimal digits.
    SignificantDigits(u32),
    /// Snap to a grid of this spacing, merging near-equal statistics.
    Tolerance(f64),
}

impl Default for Quantizer {
    fn default() -> Self {
        Quantizer::SignificantDigits(9)
    }
}

impl Quantizer {
    fn quantize(self, v: f64) -> i64 {
        match self {
            Quantizer::SignificantDigits(d) => {
                let prec = d.max(1) as usize - 1;
                let rounded: f64 = format!("{v:.prec$e}").parse().unwrap_or(v);
                // +0.0 and -0.0 compare equal
                if rounded == 0.0 {
                    0
                } else {
                    rounded.to_bits() as i64
                }
            }
            Quantizer::Tolerance(eps) => (v / eps).round() as i64,
        }
    }
}

/// How points are matched for grouping and reuse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KeyMode {
    /// Quantized `(mean, std)`; different vectors with equal statistics merge.
    Stats(Quantizer),
    /// Hash of the full observation vector; only identical vectors merge.
    Strict,
}

impl Default for KeyMode {
    fn default() -> Self {
        KeyMode::Stats(Quantizer::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupKey {
    Stats { mean_q: i64, std_q: i64 },
    Content { hash: u64, len: usize },
}

impl GroupKey {
    pub fn from_stats(stats: &PointStats, q: Quantizer) -> Self {
        GroupKey::Stats {
            mean_q: q.quantize(stats.mean),
            std_q: q.quantize(stats.std),
        }
    }

    pub fn from_values(values: &[f64]) -> Self {
        let mut h = DefaultHasher::new();
        for v in values {
            v.to_bits().hash(&mut h);
        }
        GroupKey::Content {
            hash: h.finish(),
            len: values.len(),
        }
    }

    pub fn for_record(record: &PointRecord, mode: KeyMode) -> Self {
        match mode {
            KeyMode::Stats(q) => Self::from_stats(&record.stats, q),
            KeyMode::Strict => Self::from_values(&record.values),
        }
    }
}

/// Points sharing a key; the member with the smallest id represents them.
#[derive(Debug, Clone)]
pub struct PointGroup<'a> {
    pub key: GroupKey,
    pub representative: &'a PointRecord,
    pub member_ids: Vec<PointId>,
}

/// Partitions records by key. Groups are ordered by representative id and
/// member ids ascend, whatever the input order or thread count.
pub fn group_window(records: &[PointRecord], mode: KeyMode) -> Vec<PointGroup<'_>> {
    const SHARD: usize = 4096;
    let partial = records
        .par_chunks(SHARD)
        .enumerate()
        .map(|(c, chunk)| {
            let mut m: HashMap<GroupKey, Vec<usize>> = HashMap::new();
            for (i, r) in chunk.iter().enumerate() {
                m.entry(GroupKey::for_record(r, mode))
                    .or_default()
                    .push(c * SHARD + i);
            }
            m
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                a.entry(k).or_default().extend(v);
            }
            a
        });

    let mut groups: Vec<PointGroup<'_>> = partial
        .into_iter()
        .map(|(key, idx)| {
            let mut member_ids: Vec<PointId> = idx.iter().map(|&i| records[i].id).collect();
            member_ids.sort_unstable();
            member_ids.dedup();
            let rep = idx
                .iter()
                .map(|&i| &records[i])
                .min_by_key(|r| r.id)
                .expect("groups are nonempty");
            PointGroup {
                key,
                representative: rep,
                member_ids,
            }
        })
        .collect();
    groups.sort_by_key(|g| g.representative.id);
    groups
}

/// Maps every member of every group to its group's fit.
pub fn expand_results(
    groups: &[PointGroup<'_>],
    fits: &HashMap<GroupKey, FittedPdf>,
) -> Result<BTreeMap<PointId, FittedPdf>> {
    let mut out = BTreeMap::new();
    for g in groups {
        let fit = fits.get(&g.key).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "no fit for group represented by point {}",
                g.representative.id
            ))
        })?;
        for &id in &g.member_ids {
            out.insert(id, *fit);
        }
    }
    Ok(out)
}

/// Cross-window memo of fits. The first fit stored for a key wins.
#[derive(Debug, Default)]
pub struct ReuseCache {
    entries: Mutex<HashMap<GroupKey, FittedPdf>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl ReuseCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the cached fit (`true`) or runs `fit_fn`, stores and returns
    /// its result (`false`).
    pub fn get_or_fit<F>(&self, key: GroupKey, fit_fn: F) -> Result<(FittedPdf, bool)>
    where
        F: FnOnce() -> Result<FittedPdf>,
    {
        if let Some(f) = self.entries.lock().expect("cache lock").get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok((*f, true));
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let fitted = fit_fn()?;
        let mut map = self.entries.lock().expect("cache lock");
        Ok((*map.entry(key).or_insert(fitted), false))
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        self.entries.lock().expect("cache lock").clear();
        self.hits.store(0, Ordering::Relaxed);
        self.misses.store(0, Ordering::Relaxed);
    }
}
