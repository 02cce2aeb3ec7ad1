//! Mini-batch Adam training with per-epoch shuffling, optional early
//! stopping on validation balanced accuracy, and resource accounting.

use std::fs::File;
use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::Loss;
use crate::matrix::Matrix;
use crate::metrics::{bundle_from_counts, confusion, predict_labels};
use crate::models::{parameter_memory, Classifier, GradientBuffer};
use crate::rng;

pub const DEFAULT_MAX_EPOCHS: usize = 300;
pub const DEFAULT_PATIENCE: usize = 30;
pub const DEFAULT_VALIDATION_FRACTION: f64 = 0.1;

/// 32 below 500 training rows, 64 otherwise.
pub fn default_batch_size(n_train: usize) -> usize {
    if n_train < 500 {
        32
    } else {
        64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn new(n_params: usize) -> Self {
        AdamState {
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
        }
    }
}

/// One bias-corrected Adam update at step `t` (1-based).
pub fn adam_step(
    params: &mut [f64],
    grads: &[f64],
    state: &mut AdamState,
    lr: f64,
    adam: &AdamParams,
    t: u64,
) -> Result<()> {
    if params.len() != grads.len() || state.m.len() != params.len() || state.v.len() != params.len() {
        return Err(Error::Shape(format!(
            "adam: {} parameters, {} gradients, {} moments",
            params.len(),
            grads.len(),
            state.m.len()
        )));
    }
    if t == 0 {
        return Err(Error::Config("adam step index starts at 1".into()));
    }
    let t = i32::try_from(t).unwrap_or(i32::MAX);
    let c1 = 1.0 - adam.beta1.powi(t);
    let c2 = 1.0 - adam.beta2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = adam.beta1 * state.m[i] + (1.0 - adam.beta1) * g;
        state.v[i] = adam.beta2 * state.v[i] + (1.0 - adam.beta2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + adam.epsilon);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EarlyStop {
    pub patience: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub adam: AdamParams,
    pub loss: Loss,
    pub seed: u64,
    /// Only used when validation data is supplied.
    pub early_stop: Option<EarlyStop>,
    /// Per-epoch CSV log (`epoch,loss,val_balanced_accuracy`).
    pub log_path: Option<PathBuf>,
}

impl TrainConfig {
    pub fn new(learning_rate: f64, batch_size: usize, max_epochs: usize, loss: Loss, seed: u64) -> Self {
        TrainConfig {
            learning_rate,
            batch_size,
            max_epochs,
            adam: AdamParams::default(),
            loss,
            seed,
            early_stop: None,
            log_path: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if self.batch_size < 1 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if self.max_epochs < 1 {
            return Err(Error::Config("max_epochs must be at least 1".into()));
        }
        if let Some(es) = self.early_stop {
            if es.patience < 1 {
                return Err(Error::Config("early-stopping patience must be at least 1".into()));
            }
        }
        if let Loss::Focal(p) = &self.loss {
            p.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport<M> {
    /// Entry 0 is the loss of the untrained model on the full training set;
    /// entry `e` is the mean mini-batch loss of epoch `e`.
    pub epoch_losses: Vec<f64>,
    /// Validation balanced accuracy after each epoch, when validating.
    pub val_balanced_accuracy: Vec<f64>,
    pub wall_time_seconds: f64,
    pub model_memory_bytes: usize,
    pub epochs_run: usize,
    /// Epoch whose parameters were kept (the last one without early stopping).
    pub best_epoch: usize,
    /// Optimizer steps taken.
    pub steps: u64,
    pub final_model: M,
}

fn check_data(features: &Matrix, labels: &[u8], what: &str) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if features.rows() != labels.len() {
        return Err(Error::Shape(format!(
            "{what}: {} rows but {} labels",
            features.rows(),
            labels.len()
        )));
    }
    Ok(())
}

fn balanced_accuracy<M: Classifier>(model: &M, features: &Matrix, labels: &[u8]) -> Result<f64> {
    let logits = model.logits(features)?;
    let counts = confusion(labels, &predict_labels(&logits))?;
    Ok(bundle_from_counts(&counts).balanced_accuracy)
}

fn diverged(e: Error, epoch: usize) -> Error {
    match e {
        Error::Numeric(_) => Error::NumericDivergence { epoch },
        other => other,
    }
}

pub fn train<M: Classifier>(model: M, features: &Matrix, labels: &[u8], config: &TrainConfig) -> Result<TrainReport<M>> {
    train_with_validation(model, features, labels, None, config)
}

/// Trains `model`; with validation data and `config.early_stop` set, stops
/// after `patience` epochs without a validation balanced accuracy at least
/// as good as the best so far and restores the best parameters. Ties count
/// as improvement, so a flat start (all-majority predictions on a small
/// validation fold) does not end training.
pub fn train_with_validation<M: Classifier>(
    mut model: M,
    features: &Matrix,
    labels: &[u8],
    validation: Option<(&Matrix, &[u8])>,
    config: &TrainConfig,
) -> Result<TrainReport<M>> {
    config.validate()?;
    check_data(features, labels, "training data")?;
    if !(labels.contains(&0) && labels.contains(&1)) {
        return Err(Error::DegenerateDataset("training data must contain both classes".into()));
    }
    if let Some((vx, vy)) = validation {
        check_data(vx, vy, "validation data")?;
    }
    let mut log = match &config.log_path {
        Some(p) => {
            let file = File::create(p).map_err(|e| Error::io(p, e))?;
            let mut w = csv::Writer::from_writer(file);
            w.write_record(["epoch", "loss", "val_balanced_accuracy"])?;
            Some(w)
        }
        None => None,
    };

    let initial = model.logits(features)?;
    let (loss0, _) = config.loss.evaluate(&initial, labels).map_err(|e| diverged(e, 0))?;
    if !loss0.is_finite() {
        return Err(Error::NumericDivergence { epoch: 0 });
    }
    let mut epoch_losses = vec![loss0];
    let mut val_history = Vec::new();
    if let Some(w) = log.as_mut() {
        w.write_record([String::from("0"), loss0.to_string(), String::new()])?;
    }

    let n = labels.len();
    let mut params = model.parameters();
    let mut state = AdamState::new(params.len());
    let mut order: Vec<usize> = (0..n).collect();
    let mut batch_labels = Vec::with_capacity(config.batch_size);
    let mut steps: u64 = 0;
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    let mut since_best = 0;
    let mut epochs_run = 0;

    let start = Instant::now();
    for epoch in 1..=config.max_epochs {
        order.sort_unstable();
        order.shuffle(&mut rng::stream(config.seed, &[rng::label::SHUFFLE, epoch as u64]));
        let mut weighted = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch = features.select_rows(chunk);
            batch_labels.clear();
            batch_labels.extend(chunk.iter().map(|&i| labels[i]));
            let (logits, cache) = model.forward(&batch, true)?;
            let (loss, dlogits) = config
                .loss
                .evaluate(&logits, &batch_labels)
                .map_err(|e| diverged(e, epoch))?;
            if !loss.is_finite() {
                return Err(Error::NumericDivergence { epoch });
            }
            weighted += loss * chunk.len() as f64;
            let cache = cache.expect("forward was asked for a cache");
            let grads = model.backward(&cache, &dlogits)?.flatten();
            steps += 1;
            adam_step(&mut params, &grads, &mut state, config.learning_rate, &config.adam, steps)?;
            if params.iter().any(|p| !p.is_finite()) {
                return Err(Error::NumericDivergence { epoch });
            }
            model.set_parameters(&params)?;
        }
        let epoch_loss = weighted / n as f64;
        epoch_losses.push(epoch_loss);
        epochs_run = epoch;

        let mut val_ba = None;
        if let Some((vx, vy)) = validation {
            let ba = balanced_accuracy(&model, vx, vy)?;
            val_history.push(ba);
            val_ba = Some(ba);
        }
        if let Some(w) = log.as_mut() {
            w.write_record([
                epoch.to_string(),
                epoch_loss.to_string(),
                val_ba.map(|v| v.to_string()).unwrap_or_default(),
            ])?;
        }
        if let (Some(es), Some(ba)) = (config.early_stop, val_ba) {
            match &best {
                Some((b, _, _)) if ba < *b => {
                    since_best += 1;
                    if since_best >= es.patience {
                        break;
                    }
                }
                _ => {
                    best = Some((ba, epoch, params.clone()));
                    since_best = 0;
                }
            }
        }
    }
    let mut best_epoch = epochs_run;
    if let Some((_, epoch, kept)) = best {
        if epoch != epochs_run {
            model.set_parameters(&kept)?;
        }
        best_epoch = epoch;
    }
    let wall_time_seconds = start.elapsed().as_secs_f64();
    if let Some(mut w) = log {
        w.flush().map_err(|e| Error::io(config.log_path.as_ref().unwrap(), e))?;
    }

    Ok(TrainReport {
        epoch_losses,
        val_balanced_accuracy: val_history,
        wall_time_seconds,
        model_memory_bytes: parameter_memory(&model, true),
        epochs_run,
        best_epoch,
        steps,
        final_model: model,
    })
}
