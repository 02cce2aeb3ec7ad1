use kan_imbalance::losses::{FocalParams, Loss};
use kan_imbalance::metrics::{bundle_from_counts, confusion, predict_labels};
use kan_imbalance::models::{init_kan, init_mlp, Classifier};
use kan_imbalance::train::{default_batch_size, train, train_with_validation, EarlyStop, TrainConfig};
use kan_imbalance::{Error, Matrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Two well separated 2-D Gaussian blobs inside the unit square.
fn blobs(seed: u64, n: usize) -> (Matrix, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.06).unwrap();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let label = u8::from(i % 2 == 0);
        let c: f64 = if label == 1 { 0.72 } else { 0.28 };
        rows.push([
            (c + noise.sample(&mut rng)).clamp(0.0, 1.0),
            (c + noise.sample(&mut rng)).clamp(0.0, 1.0),
        ]);
        labels.push(label);
    }
    (Matrix::from_rows(&rows).unwrap(), labels)
}

fn balanced_accuracy<M: Classifier>(model: &M, x: &Matrix, y: &[u8]) -> f64 {
    let pred = predict_labels(&model.logits(x).unwrap());
    bundle_from_counts(&confusion(y, &pred).unwrap()).balanced_accuracy
}

#[test]
fn mlp_fits_separable_blobs() {
    let (x, y) = blobs(1, 40);
    let cfg = TrainConfig::new(0.01, default_batch_size(40), 200, Loss::unweighted_cross_entropy(), 5);
    let r = train(init_mlp(&[2, 8, 2], 5).unwrap(), &x, &y, &cfg).unwrap();
    assert_eq!(r.epochs_run, 200);
    assert_eq!(balanced_accuracy(&r.final_model, &x, &y), 1.0);
    assert!(r.epoch_losses.last().unwrap() < &r.epoch_losses[0]);
}

#[test]
fn kan_fits_separable_blobs() {
    let (x, y) = blobs(1, 40);
    let cfg = TrainConfig::new(0.00785, default_batch_size(40), 200, Loss::unweighted_cross_entropy(), 5);
    let r = train(init_kan(&[2, 4, 2], 3, 5, (0.0, 1.0), 5).unwrap(), &x, &y, &cfg).unwrap();
    assert_eq!(balanced_accuracy(&r.final_model, &x, &y), 1.0);
    assert!(r.epoch_losses.last().unwrap() < &r.epoch_losses[0]);
}

#[test]
fn focal_training_also_fits() {
    let (x, y) = blobs(2, 40);
    let loss = Loss::Focal(FocalParams::new(2.0, [0.5, 0.5]).unwrap());
    let cfg = TrainConfig::new(0.00785, 32, 200, loss, 1);
    let r = train(init_kan(&[2, 4, 2], 3, 5, (0.0, 1.0), 1).unwrap(), &x, &y, &cfg).unwrap();
    assert_eq!(balanced_accuracy(&r.final_model, &x, &y), 1.0);
}

#[test]
fn identical_inputs_give_identical_reports() {
    let (x, y) = blobs(3, 40);
    let cfg = TrainConfig::new(0.005, 8, 15, Loss::unweighted_cross_entropy(), 2);
    let a = train(init_kan(&[2, 3, 2], 2, 4, (0.0, 1.0), 9).unwrap(), &x, &y, &cfg).unwrap();
    let b = train(init_kan(&[2, 3, 2], 2, 4, (0.0, 1.0), 9).unwrap(), &x, &y, &cfg).unwrap();
    assert_eq!(a.epoch_losses, b.epoch_losses);
    assert_eq!(a.final_model.parameters(), b.final_model.parameters());
    let other = TrainConfig { seed: 3, ..cfg };
    let c = train(init_kan(&[2, 3, 2], 2, 4, (0.0, 1.0), 9).unwrap(), &x, &y, &other).unwrap();
    assert_ne!(a.epoch_losses, c.epoch_losses);
}

#[test]
fn one_epoch_takes_ceil_n_over_batch_steps() {
    let (x, y) = blobs(4, 37);
    let cfg = TrainConfig::new(0.01, 8, 1, Loss::unweighted_cross_entropy(), 0);
    let r = train(init_mlp(&[2, 2], 0).unwrap(), &x, &y, &cfg).unwrap();
    assert_eq!((r.epochs_run, r.steps), (1, 5));
    let zero = TrainConfig { max_epochs: 0, ..cfg.clone() };
    assert!(matches!(train(init_mlp(&[2, 2], 0).unwrap(), &x, &y, &zero), Err(Error::Config(_))));
    assert!(matches!(train(init_mlp(&[2, 2], 0).unwrap(), &x, &[0; 37], &cfg), Err(Error::DegenerateDataset(_))));
}

#[test]
fn divergence_reports_the_epoch() {
    let (x, y) = blobs(5, 20);
    let mut model = init_mlp(&[2, 2], 0).unwrap();
    let mut p = model.parameters();
    p[0] = f64::NAN;
    model.set_parameters(&p).unwrap();
    let cfg = TrainConfig::new(0.01, 4, 3, Loss::unweighted_cross_entropy(), 0);
    assert!(matches!(train(model, &x, &y, &cfg), Err(Error::NumericDivergence { epoch: 0 })));
}

#[test]
fn early_stopping_bounds_epochs() {
    let (x, y) = blobs(6, 60);
    // validation labels disagree with training, so fitting drives it down
    let (vx, vy) = blobs(7, 20);
    let vy: Vec<u8> = vy.iter().map(|l| 1 - l).collect();
    let mut cfg = TrainConfig::new(0.02, 16, 300, Loss::unweighted_cross_entropy(), 0);
    cfg.early_stop = Some(EarlyStop { patience: 5 });
    let r = train_with_validation(init_mlp(&[2, 8, 2], 1).unwrap(), &x, &y, Some((&vx, &vy)), &cfg).unwrap();
    assert!(r.epochs_run < 300, "{:?}", r.val_balanced_accuracy);
    assert_eq!(r.epochs_run, r.best_epoch + 5);
    assert_eq!(balanced_accuracy(&r.final_model, &vx, &vy), r.val_balanced_accuracy[r.best_epoch - 1]);
}

#[test]
fn validation_ties_do_not_stop_training() {
    let (x, y) = blobs(6, 60);
    let (vx, vy) = blobs(7, 20);
    let mut cfg = TrainConfig::new(0.02, 16, 60, Loss::unweighted_cross_entropy(), 0);
    cfg.early_stop = Some(EarlyStop { patience: 5 });
    let r = train_with_validation(init_mlp(&[2, 8, 2], 1).unwrap(), &x, &y, Some((&vx, &vy)), &cfg).unwrap();
    // separable blobs: validation accuracy plateaus at 1 and training runs on
    assert_eq!(r.val_balanced_accuracy.last(), Some(&1.0));
    assert_eq!(r.epochs_run, 60);
    assert_eq!(r.best_epoch, 60);
}

#[test]
fn kan_trains_slower_and_heavier_than_a_matched_mlp() {
    let (x, y) = blobs(8, 400);
    let cfg = TrainConfig::new(0.005, 32, 20, Loss::unweighted_cross_entropy(), 0);
    let k = train(init_kan(&[2, 6, 2], 3, 5, (0.0, 1.0), 0).unwrap(), &x, &y, &cfg).unwrap();
    let m = train(init_mlp(&[2, 6, 2], 0).unwrap(), &x, &y, &cfg).unwrap();
    assert!(k.wall_time_seconds > m.wall_time_seconds);
    assert!(k.model_memory_bytes > m.model_memory_bytes);
}

#[test]
fn training_log_has_one_row_per_epoch() {
    let dir = tempfile::tempdir().unwrap();
    let (x, y) = blobs(9, 30);
    let mut cfg = TrainConfig::new(0.01, 8, 4, Loss::unweighted_cross_entropy(), 0);
    cfg.log_path = Some(dir.path().join("log.csv"));
    train(init_mlp(&[2, 2], 0).unwrap(), &x, &y, &cfg).unwrap();
    let text = std::fs::read_to_string(dir.path().join("log.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "epoch,loss,val_balanced_accuracy");
    assert_eq!(lines.len(), 1 + 5);
}
