//! Binary run files (one per simulation run) and parallel point loading.
//!
//! Layout of a run file, all integers little-endian `u32`:
//!
//! ```text
//! [0..4)   magic "SPCB"
//! [4..8)   format version (1)
//! [8..12)  slice_count
//! [12..16) lines_per_slice
//! [16..20) points_per_line
//! [20..)   payload: f32 little-endian, one per point, in linear id order
//! ```
//!
//! A point's value lives at `20 + 4 * id`, so every read is a single
//! positional read.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::os::unix::fs::FileExt;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::cube::{CubeGeometry, PointId, WindowSpec};
use crate::error::{Error, Result};
use crate::stats::PointStats;

pub const MAGIC: [u8; 4] = *b"SPCB";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: u64 = 20;
/// File extension used when discovering run files in a directory.
pub const RUN_EXTENSION: &str = "spcb";

/// Total size in bytes of a run file for `geom`.
pub fn run_file_len(geom: &CubeGeometry) -> u64 {
    HEADER_LEN + 4 * geom.total_points() as u64
}

pub fn encode_header(geom: &CubeGeometry) -> Result<[u8; HEADER_LEN as usize]> {
    let dim = |v: usize| {
        u32::try_from(v).map_err(|_| Error::InvalidGeometry(format!("dimension {v} exceeds u32")))
    };
    let mut h = [0u8; HEADER_LEN as usize];
    h[0..4].copy_from_slice(&MAGIC);
    h[4..8].copy_from_slice(&FORMAT_VERSION.to_le_bytes());
    h[8..12].copy_from_slice(&dim(geom.slice_count())?.to_le_bytes());
    h[12..16].copy_from_slice(&dim(geom.lines_per_slice())?.to_le_bytes());
    h[16..20].copy_from_slice(&dim(geom.points_per_line())?.to_le_bytes());
    Ok(h)
}

pub fn decode_header(bytes: &[u8; HEADER_LEN as usize], path: &Path) -> Result<CubeGeometry> {
    let corrupt = |reason: String| Error::CorruptFile {
        path: path.to_path_buf(),
        reason,
    };
    if bytes[0..4] != MAGIC {
        return Err(corrupt(format!("bad magic {:?}", &bytes[0..4])));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let version = word(4);
    if version != FORMAT_VERSION as usize {
        return Err(corrupt(format!("unsupported version {version}")));
    }
    CubeGeometry::new(word(16), word(12), word(8)).map_err(|e| corrupt(e.to_string()))
}

/// Streams one run file: header first, then payload values in id order.
pub struct RunWriter {
    path: PathBuf,
    out: BufWriter<File>,
    expected: usize,
    written: usize,
}

impl RunWriter {
    pub fn create(path: impl Into<PathBuf>, geom: &CubeGeometry) -> Result<Self> {
        let path = path.into();
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = BufWriter::with_capacity(1 << 16, file);
        out.write_all(&encode_header(geom)?)
            .map_err(|e| Error::io(&path, e))?;
        Ok(Self {
            path,
            out,
            expected: geom.total_points(),
            written: 0,
        })
    }

    pub fn write_values(&mut self, values: &[f32]) -> Result<()> {
        if self.written + values.len() > self.expected {
            return Err(Error::DimensionMismatch {
                expected: self.expected,
                actual: self.written + values.len(),
            });
        }
        for v in values {
            self.out
                .write_all(&v.to_le_bytes())
                .map_err(|e| Error::io(&self.path, e))?;
        }
        self.written += values.len();
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        if self.written != self.expected {
            return Err(Error::DimensionMismatch {
                expected: self.expected,
                actual: self.written,
            });
        }
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Writes a full volume as one run file.
pub fn write_run(path: impl AsRef<Path>, geom: &CubeGeometry, values: &[f32]) -> Result<()> {
    if values.len() != geom.total_points() {
        return Err(Error::DimensionMismatch {
            expected: geom.total_points(),
            actual: values.len(),
        });
    }
    let mut w = RunWriter::create(path.as_ref(), geom)?;
    w.write_values(values)?;
    w.finish()
}

fn read_geometry(path: &Path) -> Result<CubeGeometry> {
    let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut header = [0u8; HEADER_LEN as usize];
    f.read_exact(&mut header).map_err(|e| Error::CorruptFile {
        path: path.to_path_buf(),
        reason: format!("short header: {e}"),
    })?;
    let geom = decode_header(&header, path)?;
    let len = f.metadata().map_err(|e| Error::io(path, e))?.len();
    if len != run_file_len(&geom) {
        return Err(Error::CorruptFile {
            path: path.to_path_buf(),
            reason: format!("length {len}, header implies {}", run_file_len(&geom)),
        });
    }
    Ok(geom)
}

/// An ordered ensemble of run files sharing one geometry.
#[derive(Debug, Clone)]
pub struct DatasetHandle {
    run_paths: Vec<PathBuf>,
    geometry: CubeGeometry,
}

impl DatasetHandle {
    /// Validates every header against the first one.
    pub fn open(run_paths: Vec<PathBuf>) -> Result<Self> {
        let first = run_paths
            .first()
            .ok_or(Error::EmptyInput("dataset has no run files"))?;
        let geometry = read_geometry(first)?;
        for p in &run_paths[1..] {
            let g = read_geometry(p)?;
            if g != geometry {
                return Err(Error::CorruptFile {
                    path: p.clone(),
                    reason: format!("geometry {g:?} differs from {geometry:?}"),
                });
            }
        }
        Ok(Self {
            run_paths,
            geometry,
        })
    }

    /// Opens all `*.spcb` files in `dir`, ordered by file name.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut paths = Vec::new();
        for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            if path.is_file() && path.extension().is_some_and(|e| e == RUN_EXTENSION) {
                paths.push(path);
            }
        }
        paths.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
        Self::open(paths)
    }

    /// Opens the runs listed one per line in `list`; relative entries resolve
    /// against the list file's directory. Blank lines are skipped.
    pub fn from_list_file(list: impl AsRef<Path>) -> Result<Self> {
        let list = list.as_ref();
        let base = list.parent().unwrap_or(Path::new("."));
        let f = File::open(list).map_err(|e| Error::io(list, e))?;
        let mut paths = Vec::new();
        for line in BufReader::new(f).lines() {
            let line = line.map_err(|e| Error::io(list, e))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let p = Path::new(line);
            paths.push(if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            });
        }
        Self::open(paths)
    }

    /// Directory of runs or an explicit list file.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if path.is_dir() {
            Self::from_dir(path)
        } else {
            Self::from_list_file(path)
        }
    }

    pub fn geometry(&self) -> &CubeGeometry {
        &self.geometry
    }

    pub fn run_count(&self) -> usize {
        self.run_paths.len()
    }

    pub fn run_paths(&self) -> &[PathBuf] {
        &self.run_paths
    }

    /// Opens every run file for positional reads.
    pub fn reader(&self) -> Result<DatasetReader<'_>> {
        let files = self
            .run_paths
            .iter()
            .map(|p| File::open(p).map_err(|e| Error::io(p, e)))
            .collect::<Result<Vec<_>>>()?;
        Ok(DatasetReader {
            handle: self,
            files,
        })
    }

    /// Reads one point from every run. Opens the files for this call only;
    /// use [`DatasetReader`] for repeated access.
    pub fn read_point(&self, id: PointId) -> Result<Vec<f64>> {
        self.reader()?.read_point(id)
    }
}

/// Open run files. Positional reads carry no cursor state, so one reader is
/// shared by all loading threads.
pub struct DatasetReader<'a> {
    handle: &'a DatasetHandle,
    files: Vec<File>,
}

impl DatasetReader<'_> {
    pub fn handle(&self) -> &DatasetHandle {
        self.handle
    }

    fn check_id(&self, id: PointId) -> Result<()> {
        let total = self.handle.geometry.total_points();
        if id.index() >= total {
            return Err(Error::OutOfBounds {
                axis: "linear index",
                value: id.index(),
                limit: total,
            });
        }
        Ok(())
    }

    /// The observation vector of one point, ordered by run.
    pub fn read_point(&self, id: PointId) -> Result<Vec<f64>> {
        self.check_id(id)?;
        let offset = HEADER_LEN + 4 * id.0;
        let mut buf = [0u8; 4];
        self.files
            .iter()
            .zip(&self.handle.run_paths)
            .map(|(f, path)| {
                f.read_exact_at(&mut buf, offset).map_err(|e| short_read(path, e))?;
                Ok(f32::from_le_bytes(buf) as f64)
            })
            .collect()
    }

    /// Reads `count` consecutive points starting at `start`, returning
    /// point-major values (`count * run_count`).
    fn read_strip(&self, start: u64, count: usize) -> Result<Vec<f64>> {
        let runs = self.files.len();
        let mut out = vec![0.0f64; count * runs];
        let mut bytes = vec![0u8; count * 4];
        let offset = HEADER_LEN + 4 * start;
        for (r, (f, path)) in self.files.iter().zip(&self.handle.run_paths).enumerate() {
            f.read_exact_at(&mut bytes, offset).map_err(|e| short_read(path, e))?;
            for (p, chunk) in bytes.chunks_exact(4).enumerate() {
                out[p * runs + r] = f32::from_le_bytes(chunk.try_into().unwrap()) as f64;
            }
        }
        Ok(out)
    }
}

fn short_read(path: &Path, e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::CorruptFile {
            path: path.to_path_buf(),
            reason: "short read".into(),
        }
    } else {
        Error::io(path, e)
    }
}

/// A loaded point: its id, statistics and raw observations.
#[derive(Debug, Clone, PartialEq)]
pub struct PointRecord {
    pub id: PointId,
    pub stats: PointStats,
    pub values: Vec<f64>,
}

impl PointRecord {
    pub fn from_values(id: PointId, values: Vec<f64>) -> Result<Self> {
        let stats = PointStats::from_values(&values).map_err(|e| Error::PointLoad {
            id,
            source: Box::new(e),
        })?;
        Ok(Self { id, stats, values })
    }
}

/// Counts points currently being loaded and remembers the peak.
#[derive(Debug, Default)]
pub struct InFlightTracker {
    current: AtomicUsize,
    peak: AtomicUsize,
}

impl InFlightTracker {
    fn enter(&self, n: usize) {
        let now = self.current.fetch_add(n, Ordering::SeqCst) + n;
        self.peak.fetch_max(now, Ordering::SeqCst);
    }

    fn exit(&self, n: usize) {
        self.current.fetch_sub(n, Ordering::SeqCst);
    }

    pub fn peak(&self) -> usize {
        self.peak.load(Ordering::SeqCst)
    }
}

/// Loading-stage scheduling limits.
#[derive(Debug, Clone, Copy)]
pub struct LoadOptions<'t> {
    /// Upper bound on points being read at any instant.
    pub max_in_flight: usize,
    pub tracker: Option<&'t InFlightTracker>,
}

impl Default for LoadOptions<'_> {
    fn default() -> Self {
        Self {
            max_in_flight: usize::MAX,
            tracker: None,
        }
    }
}

/// Loads every point of a window and computes its statistics.
///
/// Runs on the current rayon pool. Points are processed in batches of at
/// most `max_in_flight`; each batch is split into contiguous strips read with
/// one positional read per run file. Output is ordered by point id and does
/// not depend on the number of threads.
pub fn load_window(
    reader: &DatasetReader<'_>,
    window: &WindowSpec,
    opts: &LoadOptions<'_>,
) -> Result<Vec<PointRecord>> {
    let geom = reader.handle.geometry();
    let ids = window.point_ids(geom)?;
    let total = (ids.end - ids.start) as usize;
    let batch = opts.max_in_flight.clamp(1, total.max(1));
    let threads = rayon::current_num_threads().max(1);
    let mut records = Vec::with_capacity(total);
    let mut start = ids.start;
    while start < ids.end {
        let len = batch.min((ids.end - start) as usize);
        let strip = len.div_ceil(threads);
        let strips: Vec<(u64, usize)> = (0..len)
            .step_by(strip)
            .map(|off| (start + off as u64, strip.min(len - off)))
            .collect();
        let loaded: Vec<Vec<PointRecord>> = strips
            .into_par_iter()
            .map(|(s, n)| load_strip(reader, s, n, opts.tracker))
            .collect::<Result<_>>()?;
        records.extend(loaded.into_iter().flatten());
        start += len as u64;
    }
    Ok(records)
}

fn load_strip(
    reader: &DatasetReader<'_>,
    start: u64,
    count: usize,
    tracker: Option<&InFlightTracker>,
) -> Result<Vec<PointRecord>> {
    if let Some(t) = tracker {
        t.enter(count);
    }
    let result = reader
        .read_strip(start, count)
        .map_err(|e| Error::PointLoad {
            id: PointId(start),
            source: Box::new(e),
        })
        .and_then(|flat| {
            let runs = reader.files.len();
            flat.chunks_exact(runs.max(1))
                .take(count)
                .enumerate()
                .map(|(i, v)| PointRecord::from_values(PointId(start + i as u64), v.to_vec()))
                .collect()
        });
    if let Some(t) = tracker {
        t.exit(count);
    }
    result
}

/// Loads an arbitrary set of points with one positional read per point and
/// run, in parallel on the current rayon pool. Output follows `ids` order.
pub fn load_points(
    reader: &DatasetReader<'_>,
    ids: &[PointId],
    opts: &LoadOptions<'_>,
) -> Result<Vec<PointRecord>> {
    let batch = opts.max_in_flight.max(1);
    let mut records = Vec::with_capacity(ids.len());
    for chunk in ids.chunks(batch) {
        let loaded: Vec<PointRecord> = chunk
            .par_iter()
            .map(|&id| {
                if let Some(t) = opts.tracker {
                    t.enter(1);
                }
                let r = reader
                    .read_point(id)
                    .map_err(|e| Error::PointLoad {
                        id,
                        source: Box::new(e),
                    })
                    .and_then(|v| PointRecord::from_values(id, v));
                if let Some(t) = opts.tracker {
                    t.exit(1);
                }
                r
            })
            .collect::<Result<_>>()?;
        records.extend(loaded);
    }
    Ok(records)
}
