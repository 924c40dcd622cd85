//! Slice runs: windowed loading, per-method point selection, parallel
//! fitting, result persistence and the window-size tuner.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;

use crate::cube::{CubeGeometry, PointId, WindowSpec};
use crate::distfit::{fit_best, fit_with_kind, FittedPdf, KindSet};
use crate::dtree::DecisionTreeModel;
use crate::error::{Error, Result};
use crate::grouping::{group_window, GroupKey, KeyMode, ReuseCache};
use crate::io::{load_window, DatasetHandle, DatasetReader, LoadOptions, PointRecord};
use crate::stats::{average_error, DEFAULT_BINS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Baseline,
    Grouping,
    Reuse,
    Ml,
    GroupingMl,
    ReuseMl,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Baseline,
        Method::Grouping,
        Method::Reuse,
        Method::Ml,
        Method::GroupingMl,
        Method::ReuseMl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::Grouping => "grouping",
            Method::Reuse => "reuse",
            Method::Ml => "ml",
            Method::GroupingMl => "grouping-ml",
            Method::ReuseMl => "reuse-ml",
        }
    }

    pub fn uses_ml(self) -> bool {
        matches!(self, Method::Ml | Method::GroupingMl | Method::ReuseMl)
    }

    /// Grouping and Reuse variants deduplicate points inside a window.
    pub fn groups_points(self) -> bool {
        !matches!(self, Method::Baseline | Method::Ml)
    }

    pub fn reuses_fits(self) -> bool {
        matches!(self, Method::Reuse | Method::ReuseMl)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method '{s}'")))
    }
}

/// Maximum points loading at once: every core of every worker busy.
pub fn loading_parallelism_cap(workers: usize, cores_per_worker: usize) -> usize {
    workers.max(1) * cores_per_worker.max(1)
}

/// Runs `f` on a dedicated pool of `threads` workers (0 means one per core).
pub fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start {threads} threads: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub method: Method,
    pub kind_set: KindSet,
    pub window_lines: usize,
    pub threads: usize,
    pub bins: usize,
    pub key_mode: KeyMode,
    /// Points loading at once; `None` loads each window in one batch.
    pub load_cap: Option<usize>,
    /// Per-point result file, rewritten by the run.
    pub results_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(method: Method, kind_set: KindSet) -> Self {
        Self {
            method,
            kind_set,
            window_lines: 25,
            threads: 0,
            bins: DEFAULT_BINS,
            key_mode: KeyMode::default(),
            load_cap: None,
            results_path: None,
        }
    }

    /// Checks the configuration against the model before any data is read.
    pub fn validate(&self, model: Option<&DecisionTreeModel>) -> Result<()> {
        if self.window_lines == 0 {
            return Err(Error::InvalidConfig("window_lines must be >= 1".into()));
        }
        if self.bins == 0 {
            return Err(Error::InvalidConfig("bins must be >= 1".into()));
        }
        match (self.method.uses_ml(), model) {
            (true, None) => Err(Error::InvalidConfig(format!(
                "method {} needs a trained model",
                self.method
            ))),
            (false, Some(_)) => Err(Error::InvalidConfig(format!(
                "method {} does not use a model",
                self.method
            ))),
            (true, Some(m)) => {
                let extra: Vec<String> = m
                    .classes()
                    .into_iter()
                    .filter(|k| !self.kind_set.contains(*k))
                    .map(|k| k.to_string())
                    .collect();
                if extra.is_empty() {
                    Ok(())
                } else {
                    Err(Error::Model(format!(
                        "model predicts {} outside the {} candidate set",
                        extra.join(", "),
                        self.kind_set.label()
                    )))
                }
            }
            (false, None) => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub method: Method,
    pub kind_set: KindSet,
    pub slice_index: usize,
    pub point_count: usize,
    pub average_error: f64,
    pub fit_invocations: u64,
    pub reuse_hits: u64,
    pub group_count: u64,
    /// Points whose requested family was inapplicable.
    pub fallbacks: u64,
    pub loading_seconds: f64,
    pub computation_seconds: f64,
    pub window_lines: usize,
    pub threads: usize,
    pub results_path: Option<PathBuf>,
    pub model_path: Option<PathBuf>,
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "method={},types={},slice={},points={},average_error={},fit_invocations={},\
             reuse_hits={},group_count={},fallbacks={},loading_seconds={},\
             computation_seconds={},window_lines={},threads={},results={},model={}",
            self.method,
            self.kind_set.label(),
            self.slice_index,
            self.point_count,
            self.average_error,
            self.fit_invocations,
            self.reuse_hits,
            self.group_count,
            self.fallbacks,
            self.loading_seconds,
            self.computation_seconds,
            self.window_lines,
            self.threads,
            self.results_path.as_deref().map(Path::display).map(|d| d.to_string()).unwrap_or_default(),
            self.model_path.as_deref().map(Path::display).map(|d| d.to_string()).unwrap_or_default(),
        )
    }
}

impl FromStr for RunSummary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut fields: HashMap<&str, &str> = HashMap::new();
        for part in s.trim().split(',') {
            let (k, v) = part.split_once('=').ok_or_else(|| parse_err(format!("field '{part}' lacks '='")))?;
            fields.insert(k, v);
        }
        let get = |k: &str| fields.get(k).copied().ok_or_else(|| parse_err(format!("missing field '{k}'")));
        fn num<T: FromStr>(k: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| parse_err(format!("bad value '{v}' for {k}")))
        }
        let path = |k: &str| -> Result<Option<PathBuf>> {
            Ok(Some(get(k)?).filter(|v| !v.is_empty()).map(PathBuf::from))
        };
        let kind_set = match get("types")? {
            "4-types" => KindSet::Four,
            "10-types" => KindSet::Ten,
            other => other.parse()?,
        };
        Ok(RunSummary {
            method: get("method")?.parse()?,
            kind_set,
            slice_index: num("slice", get("slice")?)?,
            point_count: num("points", get("points")?)?,
            average_error: num("average_error", get("average_error")?)?,
            fit_invocations: num("fit_invocations", get("fit_invocations")?)?,
            reuse_hits: num("reuse_hits", get("reuse_hits")?)?,
            group_count: num("group_count", get("group_count")?)?,
            fallbacks: num("fallbacks", get("fallbacks")?)?,
            loading_seconds: num("loading_seconds", get("loading_seconds")?)?,
            computation_seconds: num("computation_seconds", get("computation_seconds")?)?,
            window_lines: num("window_lines", get("window_lines")?)?,
            threads: num("threads", get("threads")?)?,
            results_path: path("results")?,
            model_path: path("model")?,
        })
    }
}

fn parse_err(reason: String) -> Error {
    Error::Parse {
        location: "run summary".into(),
        reason,
    }
}

/// One line of the per-point result file.
pub fn format_result_line(geom: &CubeGeometry, id: PointId, fit: &FittedPdf) -> Result<String> {
    let (x, y, _) = geom.coords(id)?;
    let [p1, p2, p3] = fit.dist.params().map(|p| p.map(|v| v.to_string()).unwrap_or_default());
    Ok(format!("{id},{x},{y},{},{p1},{p2},{p3},{}", fit.dist.label(), fit.error))
}

/// Per-window outcome, ordered by point id.
struct WindowFits {
    fits: Vec<(PointId, FittedPdf)>,
    groups: u64,
}

struct Fitter<'a> {
    config: &'a RunConfig,
    model: Option<&'a DecisionTreeModel>,
    cache: ReuseCache,
    invocations: AtomicU64,
}

impl Fitter<'_> {
    fn fit_record(&self, r: &PointRecord) -> Result<FittedPdf> {
        self.invocations.fetch_add(1, Ordering::Relaxed);
        let kinds = self.config.kind_set.kinds();
        let res = match self.model {
            Some(m) if self.config.method.uses_ml() => {
                let kind = m.predict(r.stats.mean, r.stats.std);
                fit_with_kind(&r.values, kind, self.config.bins, kinds)
            }
            _ => fit_best(&r.values, kinds, self.config.bins),
        };
        res.map_err(|e| Error::PointLoad {
            id: r.id,
            source: Box::new(e),
        })
    }

    fn fit_window(&self, records: &[PointRecord]) -> Result<WindowFits> {
        let method = self.config.method;
        if !method.groups_points() {
            let fits = records
                .par_iter()
                .map(|r| Ok((r.id, self.fit_record(r)?)))
                .collect::<Result<Vec<_>>>()?;
            return Ok(WindowFits { fits, groups: 0 });
        }
        let groups = group_window(records, self.config.key_mode);
        let group_fits: Vec<(GroupKey, FittedPdf)> = groups
            .par_iter()
            .map(|g| {
                let fit = if method.reuses_fits() {
                    self.cache.get_or_fit(g.key, || self.fit_record(g.representative))?.0
                } else {
                    self.fit_record(g.representative)?
                };
                Ok((g.key, fit))
            })
            .collect::<Result<_>>()?;
        let mut fits = Vec::with_capacity(records.len());
        for (g, (_, fit)) in groups.iter().zip(&group_fits) {
            fits.extend(g.member_ids.iter().map(|&id| (id, *fit)));
        }
        fits.sort_unstable_by_key(|f| f.0);
        Ok(WindowFits {
            fits,
            groups: groups.len() as u64,
        })
    }
}

/// Fits every point of a slice with the configured method.
///
/// Windows are processed in order; each is loaded, reduced to the points
/// that need fitting, fitted in parallel and appended to the result file
/// before the next one starts. Results do not depend on `threads`.
pub fn run_slice(
    handle: &DatasetHandle,
    slice_index: usize,
    config: &RunConfig,
    model: Option<&DecisionTreeModel>,
) -> Result<RunSummary> {
    config.validate(model)?;
    let geom = handle.geometry();
    let windows = geom.windows_for_slice(slice_index, config.window_lines)?;
    let mut out = match &config.results_path {
        Some(p) => Some(BufWriter::new(File::create(p).map_err(|e| Error::io(p, e))?)),
        None => None,
    };
    let threads = effective_threads(config.threads);
    let fitter = Fitter {
        config,
        model,
        cache: ReuseCache::new(),
        invocations: AtomicU64::new(0),
    };

    let reader = handle.reader()?;
    let opts = LoadOptions {
        max_in_flight: config.load_cap.unwrap_or(usize::MAX),
        tracker: None,
    };
    let mut errors = Vec::with_capacity(geom.points_per_slice());
    let mut groups = 0;
    let mut fallbacks = 0;
    let mut loading = 0.0;
    let mut computation = 0.0;
    with_pool(threads, || -> Result<()> {
        for w in &windows {
            let t0 = Instant::now();
            let records = load_window(&reader, w, &opts)?;
            let t1 = Instant::now();
            let wf = fitter.fit_window(&records)?;
            computation += t1.elapsed().as_secs_f64();
            loading += (t1 - t0).as_secs_f64();
            drop(records);
            groups += wf.groups;
            if let Some(out) = out.as_mut() {
                persist(out, geom, &wf.fits, config.results_path.as_deref())?;
            }
            for (_, f) in &wf.fits {
                errors.push(f.error);
                fallbacks += u64::from(f.fallback);
            }
        }
        Ok(())
    })??;

    let average_error = average_error(&errors)?;
    Ok(RunSummary {
        method: config.method,
        kind_set: config.kind_set,
        slice_index,
        point_count: errors.len(),
        average_error,
        fit_invocations: fitter.invocations.load(Ordering::Relaxed),
        reuse_hits: fitter.cache.hits(),
        group_count: groups,
        fallbacks,
        loading_seconds: loading,
        computation_seconds: computation,
        window_lines: config.window_lines,
        threads,
        results_path: config.results_path.clone(),
        model_path: None,
    })
}

fn effective_threads(requested: usize) -> usize {
    if requested > 0 {
        requested
    } else {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    }
}

fn persist(
    out: &mut BufWriter<File>,
    geom: &CubeGeometry,
    fits: &[(PointId, FittedPdf)],
    path: Option<&Path>,
) -> Result<()> {
    let path = path.unwrap_or(Path::new("results"));
    for (id, fit) in fits {
        writeln!(out, "{}", format_result_line(geom, *id, fit)?).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Measured average per-line time of each candidate window size.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowTuning {
    pub best: usize,
    pub measurements: Vec<(usize, f64)>,
}

/// Picks the candidate with the smallest probe result, ties to the smaller
/// size. `probe(lines, probe_windows)` returns average seconds per line.
pub fn tune_window_with<F>(candidates: &[usize], probe_windows: usize, mut probe: F) -> Result<WindowTuning>
where
    F: FnMut(usize, usize) -> Result<f64>,
{
    if candidates.is_empty() {
        return Err(Error::EmptyInput("window size candidates"));
    }
    if probe_windows == 0 {
        return Err(Error::InvalidArgument("probe_windows must be >= 1".into()));
    }
    let mut sizes = candidates.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let mut measurements = Vec::with_capacity(sizes.len());
    for &lines in &sizes {
        if lines == 0 {
            return Err(Error::InvalidArgument("window size candidates must be >= 1".into()));
        }
        measurements.push((lines, probe(lines, probe_windows)?));
    }
    let best = measurements
        .iter()
        .fold(None::<(usize, f64)>, |best, &(l, t)| match best {
            Some((_, bt)) if bt <= t => best,
            _ => Some((l, t)),
        })
        .expect("at least one candidate")
        .0;
    Ok(WindowTuning { best, measurements })
}

/// Runs the first `probe_windows` windows of each candidate size and
/// returns the size with the lowest average computation time per line.
pub fn tune_window(
    handle: &DatasetHandle,
    slice_index: usize,
    config: &RunConfig,
    model: Option<&DecisionTreeModel>,
    candidates: &[usize],
    probe_windows: usize,
) -> Result<WindowTuning> {
    config.validate(model)?;
    let geom = handle.geometry();
    geom.check_slice(slice_index)?;
    let reader = handle.reader()?;
    let threads = effective_threads(config.threads);
    tune_window_with(candidates, probe_windows, |lines, count| {
        let windows: Vec<WindowSpec> = geom
            .windows_for_slice(slice_index, lines)?
            .into_iter()
            .take(count)
            .collect();
        probe_windows_time(&reader, config, model, &windows, threads)
    })
}

fn probe_windows_time(
    reader: &DatasetReader<'_>,
    config: &RunConfig,
    model: Option<&DecisionTreeModel>,
    windows: &[WindowSpec],
    threads: usize,
) -> Result<f64> {
    let fitter = Fitter {
        config,
        model,
        cache: ReuseCache::new(),
        invocations: AtomicU64::new(0),
    };
    let opts = LoadOptions {
        max_in_flight: config.load_cap.unwrap_or(usize::MAX),
        tracker: None,
    };
    with_pool(threads, || -> Result<f64> {
        let mut secs = 0.0;
        let mut lines = 0;
        for w in windows {
            let records = load_window(reader, w, &opts)?;
            let t = Instant::now();
            fitter.fit_window(&records)?;
            secs += t.elapsed().as_secs_f64();
            lines += w.line_count;
        }
        Ok(secs / lines.max(1) as f64)
    })?
}
