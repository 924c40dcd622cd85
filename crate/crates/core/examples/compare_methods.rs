//! Runs all six methods on one slice and prints a comparison table.
use pdfcube::cube::CubeGeometry;
use pdfcube::datagen::{generate, ground_truth_labels, GenConfig, LayerSpec};
use pdfcube::distfit::KindSet;
use pdfcube::dtree::{train, Hyperparams};
use pdfcube::pipeline::{run_slice, Method, RunConfig};

fn main() -> pdfcube::error::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut cfg = GenConfig::new(CubeGeometry::new(30, 30, 4)?, 100, 4);
    cfg.layers = LayerSpec::default_cycle(2);
    cfg.duplicate_fraction = 0.3;
    let (handle, truth) = generate(&cfg, dir.path())?;
    // slices 0-1 come from the first layer and 2-3 from the second; the
    // tree learns from one slice of each and is applied to slice 3
    let mut labels = ground_truth_labels(&truth, 0)?;
    labels.extend(ground_truth_labels(&truth, 2)?);
    let model = train(&labels, Hyperparams::new(8, 32)?, 0)?;

    println!("{:<12} {:>8} {:>6} {:>10} {:>10}", "method", "fits", "hits", "error", "compute s");
    for method in Method::ALL {
        let run = RunConfig::new(method, KindSet::Four);
        let m = method.uses_ml().then_some(&model);
        let s = run_slice(&handle, 3, &run, m)?;
        println!(
            "{:<12} {:>8} {:>6} {:>10.5} {:>10.4}",
            method.name(),
            s.fit_invocations,
            s.reuse_hits,
            s.average_error,
            s.computation_seconds
        );
    }
    Ok(())
}
