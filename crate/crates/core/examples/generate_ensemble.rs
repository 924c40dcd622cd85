//! Writes a small layered ensemble and inspects it.
//!
//! cargo run --example generate_ensemble
use pdfcube::cube::{CubeGeometry, PointId};
use pdfcube::datagen::{generate, GenConfig, LayerSpec};

fn main() -> pdfcube::error::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    // 4 slices of 8 lines with 10 points per line, 50 runs
    let geom = CubeGeometry::new(10, 8, 4)?;
    let mut cfg = GenConfig::new(geom, 50, 7);
    cfg.layers = LayerSpec::default_cycle(4);
    cfg.duplicate_fraction = 0.25;
    let (handle, truth) = generate(&cfg, dir.path())?;

    println!("{} run files in {}", handle.run_count(), dir.path().display());
    for z in 0..geom.slice_count() {
        let id = geom.point_id(0, 0, z)?;
        let entry = truth.get(id).expect("every point has ground truth");
        println!("slice {z}: layer {} draws from {:?}", cfg.layer_of_slice(z), entry.dist);
    }
    let values = handle.read_point(PointId(0))?;
    println!("point 0 holds {} values, first {:.4}", values.len(), values[0]);
    Ok(())
}
