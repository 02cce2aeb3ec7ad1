//! Imbalance-aware metrics for a majority-only predictor and a scored one.

use kan_imbalance::metrics::{bundle_from_counts, confusion, roc_auc};

fn main() -> kan_imbalance::Result<()> {
    let mut y = vec![1u8; 10];
    y.extend(vec![0u8; 90]);

    let lazy = bundle_from_counts(&confusion(&y, &vec![0; y.len()])?);
    let accuracy = 90.0 / 100.0;
    println!("all-majority: accuracy {accuracy:.2}, {lazy:?}");

    let scores: Vec<f64> = y.iter().enumerate().map(|(i, &l)| if l == 1 { 0.4 + 0.05 * (i % 10) as f64 } else { (i % 13) as f64 / 20.0 }).collect();
    let predicted: Vec<u8> = scores.iter().map(|&s| u8::from(s > 0.5)).collect();
    let b = bundle_from_counts(&confusion(&y, &predicted)?);
    println!("thresholded: {b:?}");
    println!("rank AUC: {:.4}", roc_auc(&y, &scores)?);
    Ok(())
}
