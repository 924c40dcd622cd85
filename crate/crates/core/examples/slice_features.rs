//! Estimates slice-level features from a sample of points, compared with
//! the full slice.
use pdfcube::cube::CubeGeometry;
use pdfcube::datagen::{generate, ground_truth_labels, GenConfig, LayerSpec};
use pdfcube::distfit::DistributionKind;
use pdfcube::dtree::{train, Hyperparams};
use pdfcube::sampling::{percentage_distance, slice_features, Sampler, SamplingConfig};

fn main() -> pdfcube::error::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut cfg = GenConfig::new(CubeGeometry::new(40, 40, 4)?, 50, 2);
    cfg.layers = LayerSpec::default_cycle(2);
    let (handle, truth) = generate(&cfg, dir.path())?;
    // slices 0-1 come from the first layer and 2-3 from the second; the
    // tree learns from one slice of each and is applied to slice 3
    let mut labels = ground_truth_labels(&truth, 0)?;
    labels.extend(ground_truth_labels(&truth, 2)?);
    let model = train(&labels, Hyperparams::new(8, 32)?, 0)?;

    let full = slice_features(&handle, 3, &SamplingConfig::new(1.0), &model)?;
    for (rate, sampler) in [(0.05, Sampler::Random), (0.05, Sampler::KMeans), (0.01, Sampler::Random)] {
        let mut sc = SamplingConfig::new(rate);
        sc.sampler = sampler;
        let f = slice_features(&handle, 3, &sc, &model)?;
        println!(
            "{sampler:?} at {rate}: {} points, avg mean {:.3} (full {:.3}), distance {:.4}",
            f.sampled_count,
            f.avg_mean,
            full.avg_mean,
            percentage_distance(&f.type_percentages, &full.type_percentages)?
        );
    }
    println!("predicted LogNormal share of the full slice: {:.1}%", 100.0 * full.percentage(DistributionKind::LogNormal));
    Ok(())
}
