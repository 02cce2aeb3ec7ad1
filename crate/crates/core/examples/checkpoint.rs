//! Saves a trained model to JSON and loads it back.

use kan_imbalance::losses::Loss;
use kan_imbalance::models::{init_kan, load_checkpoint, save_checkpoint, Classifier, LoadedModel};
use kan_imbalance::train::{train, TrainConfig};
use kan_imbalance::Matrix;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = Matrix::from_rows(&[[0.1, 0.2], [0.2, 0.1], [0.8, 0.9], [0.9, 0.7], [0.15, 0.3], [0.3, 0.2]])?;
    let y = [0, 0, 1, 1, 0, 0];
    let cfg = TrainConfig::new(0.01, 4, 50, Loss::unweighted_cross_entropy(), 0);
    let model = train(init_kan(&[2, 2, 2], 3, 5, (0.0, 1.0), 0)?, &x, &y, &cfg)?.final_model;

    let dir = std::env::temp_dir().join("kanimb-checkpoint-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("kan.json");
    save_checkpoint(&model, &path)?;
    let LoadedModel::Kan(back) = load_checkpoint(&path)? else {
        return Err("expected a KAN checkpoint".into());
    };
    println!("wrote {} ({} bytes)", path.display(), std::fs::metadata(&path)?.len());
    println!("logits identical after reload: {}", back.logits(&x)? == model.logits(&x)?);
    Ok(())
}
