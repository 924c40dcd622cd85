//! Command-line front end. Data records go to `out`, diagnostics to `err`.
//!
//! Exit status: 0 on success, 1 on invalid arguments or configuration,
//! 2 on I/O or file-format failures.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::cube::CubeGeometry;
use crate::datagen::{generate, GenConfig, LayerSpec, GROUND_TRUTH_FILE, LABELS_FILE};
use crate::distfit::KindSet;
use crate::dtree::{self, DecisionTreeModel, Hyperparams};
use crate::error::{Error, Result};
use crate::grouping::KeyMode;
use crate::io::DatasetHandle;
use crate::pipeline::{run_slice, tune_window, Method, RunConfig, RunSummary};
use crate::sampling::{slice_features, Sampler, SamplingConfig};
use crate::stats::DEFAULT_BINS;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;

/// Header of the comparison CSV written by `report`.
pub const REPORT_HEADER: &str = "method,types,slice,points,window_lines,threads,loading_seconds,\
computation_seconds,total_seconds,average_error,fit_invocations,reuse_hits,group_count";

#[derive(Debug, Parser)]
#[command(name = "pdfcube", version, about = "Per-point PDF fitting over ensemble volumes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic layered ensemble and its ground truth.
    Generate(GenerateArgs),
    /// Fit a PDF to every point of a slice.
    Fit(FitArgs),
    /// Estimate slice features from sampled points.
    Features(FeaturesArgs),
    /// Train a decision tree on labeled statistics.
    TrainTree(TrainArgs),
    /// Grid-search tree hyperparameters.
    TuneTree(TuneTreeArgs),
    /// Measure candidate window sizes and pick the fastest.
    TuneWindow(TuneWindowArgs),
    /// Collect run summaries into a comparison CSV.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    out: PathBuf,
    /// Cube size as SLICESxLINESxPOINTS, e.g. 8x16x16.
    #[arg(long)]
    dims: String,
    #[arg(long, default_value_t = 100)]
    runs: usize,
    #[arg(long, default_value_t = 16)]
    layers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "dup-frac", default_value_t = 0.3)]
    dup_frac: f64,
}

#[derive(Debug, Args)]
struct SliceArgs {
    /// Run directory, list file, or single run file.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    slice: usize,
    #[arg(long, env = "PDFCUBE_THREADS", default_value_t = 0)]
    threads: usize,
}

#[derive(Debug, Args)]
struct MethodArgs {
    #[arg(long, default_value = "baseline")]
    method: String,
    /// Candidate set: 4 or 10 families.
    #[arg(long, default_value = "4")]
    types: String,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    /// Group by identical observation vectors instead of statistics.
    #[arg(long)]
    strict_group: bool,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    slice: SliceArgs,
    #[command(flatten)]
    method: MethodArgs,
    #[arg(long, default_value_t = 25)]
    window_lines: usize,
    /// Per-point result file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FeaturesArgs {
    #[command(flatten)]
    slice: SliceArgs,
    #[arg(long, default_value_t = 0.1)]
    rate: f64,
    #[arg(long, default_value = "random")]
    sampler: String,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Group sampled points before prediction.
    #[arg(long)]
    group: bool,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value_t = 10)]
    depth: usize,
    #[arg(long, default_value_t = 32)]
    max_bins: usize,
    /// Training fraction; the rest measures model error.
    #[arg(long, default_value_t = 0.7)]
    split: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TuneTreeArgs {
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,8,10,12")]
    depth_grid: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64")]
    bins_grid: Vec<usize>,
    #[arg(long, default_value_t = 0.7)]
    split: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to save a model trained on all labels with the chosen values.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TuneWindowArgs {
    #[command(flatten)]
    slice: SliceArgs,
    #[command(flatten)]
    method: MethodArgs,
    #[arg(long, value_delimiter = ',', default_value = "5,10,25,50")]
    candidates: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    probe_windows: usize,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long)]
    summaries: PathBuf,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{e}");
                EXIT_INVALID
            } else {
                let _ = write!(out, "{e}");
                EXIT_OK
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_io() {
                EXIT_IO
            } else {
                EXIT_INVALID
            }
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let line = match cmd {
        Command::Generate(a) => cmd_generate(a, err)?,
        Command::Fit(a) => cmd_fit(a)?,
        Command::Features(a) => cmd_features(a)?,
        Command::TrainTree(a) => cmd_train(a)?,
        Command::TuneTree(a) => cmd_tune_tree(a)?,
        Command::TuneWindow(a) => cmd_tune_window(a)?,
        Command::Report(a) => cmd_report(a)?,
    };
    if !line.is_empty() {
        writeln!(out, "{line}").map_err(|e| Error::io("<stdout>", e))?;
    }
    Ok(())
}

/// Parses `SLICESxLINESxPOINTS`.
pub fn parse_dims(s: &str) -> Result<CubeGeometry> {
    let parts: Vec<&str> = s.trim().split(['x', 'X']).collect();
    let nums: Vec<usize> = parts
        .iter()
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidArgument(format!("bad --dims '{s}', expected ZxYxX")))?;
    match nums.as_slice() {
        [z, y, x] => CubeGeometry::new(*x, *y, *z),
        _ => Err(Error::InvalidArgument(format!("bad --dims '{s}', expected ZxYxX"))),
    }
}

fn cmd_generate(a: GenerateArgs, err: &mut dyn Write) -> Result<String> {
    let geometry = parse_dims(&a.dims)?;
    let mut config = GenConfig::new(geometry, a.runs, a.seed);
    if a.layers == 0 {
        return Err(Error::InvalidArgument("--layers must be >= 1".into()));
    }
    config.layers = LayerSpec::default_cycle(a.layers);
    config.duplicate_fraction = a.dup_frac;
    config.validate()?;
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let (handle, _) = generate(&config, &a.out)?;
    let _ = writeln!(
        err,
        "wrote {} runs, {} and {} to {}",
        handle.run_count(),
        GROUND_TRUTH_FILE,
        LABELS_FILE,
        a.out.display()
    );
    Ok(format!(
        "runs={},slices={},lines={},points_per_line={},seed={},out={}",
        handle.run_count(),
        geometry.slice_count(),
        geometry.lines_per_slice(),
        geometry.points_per_line(),
        a.seed,
        a.out.display()
    ))
}

fn run_config(m: &MethodArgs, threads: usize) -> Result<(RunConfig, Option<DecisionTreeModel>)> {
    let method: Method = m.method.parse()?;
    let kind_set: KindSet = m.types.parse()?;
    let model = match &m.model {
        Some(p) => Some(DecisionTreeModel::load(p)?),
        None => None,
    };
    let mut config = RunConfig::new(method, kind_set);
    config.threads = threads;
    config.bins = m.bins;
    if m.strict_group {
        config.key_mode = KeyMode::Strict;
    }
    config.validate(model.as_ref())?;
    Ok((config, model))
}

fn cmd_fit(a: FitArgs) -> Result<String> {
    let (mut config, model) = run_config(&a.method, a.slice.threads)?;
    config.window_lines = a.window_lines;
    config.results_path = a.out;
    config.validate(model.as_ref())?;
    let handle = DatasetHandle::from_path(&a.slice.data)?;
    let mut summary: RunSummary = run_slice(&handle, a.slice.slice, &config, model.as_ref())?;
    summary.model_path = a.method.model;
    Ok(summary.to_string())
}

fn cmd_features(a: FeaturesArgs) -> Result<String> {
    let mut config = SamplingConfig::new(a.rate);
    config.sampler = a.sampler.parse::<Sampler>()?;
    config.seed = a.seed;
    config.group_before_predict = a.group;
    config.threads = a.slice.threads;
    if !(a.rate > 0.0 && a.rate <= 1.0) {
        return Err(Error::InvalidArgument(format!("--rate must be in (0, 1], got {}", a.rate)));
    }
    let model = DecisionTreeModel::load(&a.model)?;
    let handle = DatasetHandle::from_path(&a.slice.data)?;
    Ok(slice_features(&handle, a.slice.slice, &config, &model)?.to_string())
}

fn cmd_train(a: TrainArgs) -> Result<String> {
    let hp = Hyperparams::new(a.depth, a.max_bins)?;
    if !(a.split > 0.0 && a.split < 1.0) {
        return Err(Error::InvalidArgument(format!("--split must be in (0, 1), got {}", a.split)));
    }
    let labels = dtree::read_labels(&a.labels)?;
    let (train, test) = dtree::split_labels(&labels, a.split, a.seed)?;
    let model = dtree::train(&train, hp, a.seed)?;
    let error = dtree::model_error(&model, &test)?;
    model.save(&a.out)?;
    Ok(format!(
        "depth={},max_bins={},train_size={},test_size={},model_error={},model={}",
        hp.depth,
        hp.max_bins,
        train.len(),
        test.len(),
        error,
        a.out.display()
    ))
}

fn cmd_tune_tree(a: TuneTreeArgs) -> Result<String> {
    for &d in &a.depth_grid {
        for &b in &a.bins_grid {
            Hyperparams::new(d, b)?;
        }
    }
    let labels = dtree::read_labels(&a.labels)?;
    let outcome = dtree::tune(&labels, &a.depth_grid, &a.bins_grid, a.split, a.seed)?;
    let mut line = format!(
        "depth={},max_bins={},validation_error={}",
        outcome.hyperparams.depth, outcome.hyperparams.max_bins, outcome.validation_error
    );
    if let Some(path) = &a.out {
        dtree::train(&labels, outcome.hyperparams, a.seed)?.save(path)?;
        line.push_str(&format!(",model={}", path.display()));
    }
    Ok(line)
}

fn cmd_tune_window(a: TuneWindowArgs) -> Result<String> {
    let (config, model) = run_config(&a.method, a.slice.threads)?;
    let handle = DatasetHandle::from_path(&a.slice.data)?;
    let t = tune_window(
        &handle,
        a.slice.slice,
        &config,
        model.as_ref(),
        &a.candidates,
        a.probe_windows,
    )?;
    let measured: Vec<String> = t
        .measurements
        .iter()
        .map(|(l, s)| format!("{l}:{s}"))
        .collect();
    Ok(format!("window_lines={},measurements={}", t.best, measured.join(";")))
}

/// Builds the comparison CSV from every summary line of every file in `dir`,
/// files in name order.
pub fn build_report(dir: &Path) -> Result<String> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
        .collect::<Result<_>>()?;
    files.retain(|p| p.is_file());
    files.sort();
    let mut csv = String::from(REPORT_HEADER);
    csv.push('\n');
    for f in files {
        let text = fs::read_to_string(&f).map_err(|e| Error::io(&f, e))?;
        for (no, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let s = line.parse::<RunSummary>().map_err(|e| Error::Parse {
                location: format!("{}:{}", f.display(), no + 1),
                reason: e.to_string(),
            })?;
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                s.method,
                s.kind_set.label(),
                s.slice_index,
                s.point_count,
                s.window_lines,
                s.threads,
                s.loading_seconds,
                s.computation_seconds,
                s.loading_seconds + s.computation_seconds,
                s.average_error,
                s.fit_invocations,
                s.reuse_hits,
                s.group_count
            ));
        }
    }
    Ok(csv)
}

fn cmd_report(a: ReportArgs) -> Result<String> {
    let csv = build_report(&a.summaries)?;
    match a.out {
        Some(p) => {
            fs::write(&p, csv).map_err(|e| Error::io(&p, e))?;
            Ok(String::new())
        }
        None => Ok(csv.trim_end().to_string()),
    }
}
