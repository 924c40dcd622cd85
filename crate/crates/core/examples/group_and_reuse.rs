//! Grouping and cross-window reuse against the baseline on data with
//! duplicated points.
use pdfcube::cube::CubeGeometry;
use pdfcube::datagen::{generate, GenConfig, LayerSpec};
use pdfcube::distfit::KindSet;
use pdfcube::pipeline::{run_slice, Method, RunConfig};

fn main() -> pdfcube::error::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut cfg = GenConfig::new(CubeGeometry::new(20, 20, 1)?, 60, 11);
    cfg.layers = LayerSpec::default_cycle(1);
    cfg.duplicate_fraction = 0.5;
    let (handle, _) = generate(&cfg, dir.path())?;

    for method in [Method::Baseline, Method::Grouping, Method::Reuse] {
        let mut run = RunConfig::new(method, KindSet::Four);
        run.window_lines = 5;
        let s = run_slice(&handle, 0, &run, None)?;
        println!(
            "{:<9} fits {:>3}  groups {:>3}  reuse hits {:>3}  average error {:.5}",
            method.name(),
            s.fit_invocations,
            s.group_count,
            s.reuse_hits,
            s.average_error
        );
    }
    Ok(())
}
