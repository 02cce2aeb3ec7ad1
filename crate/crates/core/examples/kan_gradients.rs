//! Compares backpropagated KAN and MLP gradients with central differences.

use kan_imbalance::losses::{FocalParams, Loss};
use kan_imbalance::models::{init_kan, init_mlp, Classifier, GradientBuffer};
use kan_imbalance::Matrix;

fn max_gap<M: Classifier>(model: &M, x: &Matrix, y: &[u8], loss: &Loss) -> kan_imbalance::Result<f64> {
    let (logits, cache) = model.forward(x, true)?;
    let (_, dlogits) = loss.evaluate(&logits, y)?;
    let analytic = model.backward(&cache.expect("cache requested"), &dlogits)?.flatten();
    let base = model.parameters();
    let mut probe = model.clone();
    let h = 1e-6;
    let mut worst = 0.0f64;
    for i in 0..base.len() {
        let mut p = base.clone();
        p[i] += h;
        probe.set_parameters(&p)?;
        let up = loss.evaluate(&probe.logits(x)?, y)?.0;
        p[i] -= 2.0 * h;
        probe.set_parameters(&p)?;
        let down = loss.evaluate(&probe.logits(x)?, y)?.0;
        worst = worst.max((analytic[i] - (up - down) / (2.0 * h)).abs());
    }
    Ok(worst)
}

fn main() -> kan_imbalance::Result<()> {
    let x = Matrix::from_rows(&[[0.1, 0.5, 0.9], [0.7, 0.2, 0.4], [0.3, 0.3, 0.8], [0.95, 0.6, 0.05]])?;
    let y = [0, 1, 0, 1];
    let kan = init_kan(&[3, 4, 2], 3, 5, (0.0, 1.0), 0)?;
    let mlp = init_mlp(&[3, 4, 2], 0)?;
    println!("KAN parameters: {}, MLP parameters: {}", kan.parameter_count(), mlp.parameter_count());
    for loss in [Loss::unweighted_cross_entropy(), Loss::Focal(FocalParams::new(2.0, [0.25, 0.75])?)] {
        println!("{loss:?}");
        println!("  KAN max |analytic - numeric| = {:.2e}", max_gap(&kan, &x, &y, &loss)?);
        println!("  MLP max |analytic - numeric| = {:.2e}", max_gap(&mlp, &x, &y, &loss)?);
    }
    Ok(())
}
