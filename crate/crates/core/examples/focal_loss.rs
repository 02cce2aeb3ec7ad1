//! Cross-entropy against focal loss on easy and hard examples.

use kan_imbalance::losses::{cross_entropy, focal_loss, FocalParams};
use kan_imbalance::Matrix;

fn main() -> kan_imbalance::Result<()> {
    let labels = [1u8, 0, 1, 0];
    let logits = Matrix::from_rows(&[[0.0, 3.0], [2.5, 0.0], [0.0, -1.0], [0.2, 0.5]])?;
    let alpha = FocalParams::inverse_frequency(2.0, &[0, 0, 0, 0, 0, 0, 0, 0, 1, 1])?;
    println!("inverse-frequency alpha for a 8:2 split: {:?}", alpha.alpha);

    let (ce, _) = cross_entropy(&logits, &labels, [1.0, 1.0])?;
    println!("cross-entropy: {ce:.5}");
    for gamma in [0.0, 1.0, 2.0, 5.0] {
        let (fl, grad) = focal_loss(&logits, &labels, &FocalParams::new(gamma, [1.0, 1.0])?)?;
        println!("focal gamma={gamma}: {fl:.5}, dL/dz row 0 = {:?}", grad.row(0));
    }
    for i in 0..labels.len() {
        let z = Matrix::from_rows(&[logits.row(i)])?;
        let (c, _) = cross_entropy(&z, &labels[i..=i], [1.0, 1.0])?;
        let (f, _) = focal_loss(&z, &labels[i..=i], &FocalParams::new(2.0, [1.0, 1.0])?)?;
        println!("example {i}: focal/CE = {:.4}", f / c);
    }
    Ok(())
}
