//! Paired comparison of two methods across datasets.

use kan_imbalance::stats::{paired_test, wilcoxon_signed_rank, PairedSample};

fn main() -> kan_imbalance::Result<()> {
    let a = vec![0.71, 0.64, 0.80, 0.55, 0.92, 0.60, 0.77, 0.69, 0.58, 0.83];
    let b = vec![0.66, 0.65, 0.74, 0.50, 0.90, 0.52, 0.70, 0.70, 0.51, 0.79];
    let s = PairedSample::new(a, b)?;
    let w = wilcoxon_signed_rank(&s)?;
    println!("W+ = {}, W- = {}, p = {:.5} (exact: {})", w.w_plus, w.w_minus, w.p_value, w.exact);
    let t = paired_test(&s)?;
    println!("d_z = {:.3} over {} pairs", t.effect_size_d, t.n_effective);

    let all_positive = PairedSample::new((1..=10).map(f64::from).collect(), vec![0.0; 10])?;
    println!("ten positive differences: p = {}", wilcoxon_signed_rank(&all_positive)?.p_value);
    Ok(())
}
