//! Times a few window sizes and picks the fastest per line.
use pdfcube::cube::CubeGeometry;
use pdfcube::datagen::{generate, GenConfig, LayerSpec};
use pdfcube::distfit::KindSet;
use pdfcube::pipeline::{tune_window, Method, RunConfig};

fn main() -> pdfcube::error::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut cfg = GenConfig::new(CubeGeometry::new(50, 60, 1)?, 40, 9);
    cfg.layers = LayerSpec::default_cycle(1);
    let (handle, _) = generate(&cfg, dir.path())?;

    let run = RunConfig::new(Method::Grouping, KindSet::Four);
    let t = tune_window(&handle, 0, &run, None, &[2, 5, 10, 20], 2)?;
    for (lines, secs) in &t.measurements {
        println!("{lines:>3} lines per window: {:.3} ms per line", secs * 1e3);
    }
    println!("chosen: {} lines", t.best);
    Ok(())
}
