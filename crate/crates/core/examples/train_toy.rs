//! Trains a KAN and an MLP on two noisy blobs.

use kan_imbalance::losses::Loss;
use kan_imbalance::metrics::evaluate_logits;
use kan_imbalance::models::{init_kan, init_mlp, Classifier};
use kan_imbalance::train::{train, TrainConfig};
use kan_imbalance::Matrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn blobs(n: usize, seed: u64) -> (Matrix, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.08).unwrap();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let label = u8::from(i % 5 == 0);
        let centre = if label == 1 { 0.7 } else { 0.3 };
        rows.push([centre + noise.sample(&mut rng), centre + noise.sample(&mut rng)]);
        labels.push(label);
    }
    (Matrix::from_rows(&rows).unwrap(), labels)
}

fn report<M: Classifier>(name: &str, model: M, x: &Matrix, y: &[u8], lr: f64) -> kan_imbalance::Result<()> {
    let cfg = TrainConfig::new(lr, 32, 100, Loss::unweighted_cross_entropy(), 0);
    let r = train(model, x, y, &cfg)?;
    let m = evaluate_logits(y, &r.final_model.logits(x)?)?;
    println!(
        "{name}: loss {:.4} -> {:.4}, balanced accuracy {:.3}, {:.3}s, {} bytes",
        r.epoch_losses[0],
        r.epoch_losses.last().unwrap(),
        m.balanced_accuracy,
        r.wall_time_seconds,
        r.model_memory_bytes
    );
    Ok(())
}

fn main() -> kan_imbalance::Result<()> {
    let (x, y) = blobs(200, 1);
    report("KAN", init_kan(&[2, 3, 2], 3, 5, (0.0, 1.0), 0)?, &x, &y, 0.01)?;
    report("MLP", init_mlp(&[2, 3, 2], 0)?, &x, &y, 0.01)
}
