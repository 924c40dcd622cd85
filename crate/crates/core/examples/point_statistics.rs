//! Per-point statistics and histogram of one sample.
use pdfcube::stats::{central_moment, mean, sample_std, Histogram, PointStats};

fn main() -> pdfcube::error::Result<()> {
    let values = [2.1, 2.4, 1.9, 3.3, 2.8, 2.2, 2.0, 4.1, 2.6, 2.5];
    println!("mean {:.4}, sample std {:.4}", mean(&values)?, sample_std(&values)?);
    for k in 2..=4 {
        println!("sum of (x - mean)^{k} = {:.5}", central_moment(&values, k)?);
    }
    let s = PointStats::from_values(&values)?;
    println!("{s:?}");

    let h = Histogram::new(&values, 5)?;
    for k in 0..h.bin_count() {
        println!("[{:.2}, {:.2}) {}", h.edge(k), h.edge(k + 1), "#".repeat(h.freqs()[k] as usize));
    }
    Ok(())
}
