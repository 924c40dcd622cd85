//! Fits every candidate family to a gamma sample and ranks them by
//! histogram error.
use pdfcube::distfit::{fit_all, fit_best, KindSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

fn main() -> pdfcube::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = Gamma::new(4.0, 0.5).unwrap();
    let values: Vec<f64> = (0..2000).map(|_| g.sample(&mut rng)).collect();

    let table = fit_all(&values, KindSet::Ten.kinds(), 100)?;
    let mut ranked: Vec<_> = table.entries().iter().filter_map(|(k, f)| f.map(|f| (*k, f))).collect();
    ranked.sort_by(|a, b| a.1.error.total_cmp(&b.1.error));
    for (kind, fit) in &ranked {
        println!("{:<12} error {:.4}  {:?}", kind.name(), fit.error, fit.dist);
    }
    let best = fit_best(&values, KindSet::Four.kinds(), 100)?;
    println!("best of the four common families: {:?}", best.dist);
    Ok(())
}
