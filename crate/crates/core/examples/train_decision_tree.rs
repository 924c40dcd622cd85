//! Learns which family fits a point from its mean and std, using the
//! generator's ground truth as labels.
use pdfcube::cube::CubeGeometry;
use pdfcube::datagen::{generate, ground_truth_labels, GenConfig, LayerSpec};
use pdfcube::dtree::{model_error, split_labels, train, tune, Hyperparams};

fn main() -> pdfcube::error::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut cfg = GenConfig::new(CubeGeometry::new(16, 16, 4)?, 40, 5);
    cfg.layers = LayerSpec::default_cycle(4);
    let (_, truth) = generate(&cfg, dir.path())?;
    let mut labels = Vec::new();
    for z in 0..4 {
        labels.extend(ground_truth_labels(&truth, z)?);
    }

    let (train_set, test_set) = split_labels(&labels, 0.7, 1)?;
    let model = train(&train_set, Hyperparams::new(6, 32)?, 1)?;
    println!("depth {} tree, held-out error {:.4}", model.depth(), model_error(&model, &test_set)?);

    let tuned = tune(&labels, &[1, 2, 4, 8], &[4, 16, 64], 0.7, 1)?;
    println!("tuned {:?}, validation error {:.4}", tuned.hyperparams, tuned.validation_error);
    print!("{}", model.to_text().lines().take(6).collect::<Vec<_>>().join("\n"));
    println!("\n...");
    Ok(())
}
