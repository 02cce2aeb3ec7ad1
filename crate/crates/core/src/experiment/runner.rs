use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{mpsc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, HyperParams, Strategy};
use crate::data::{binarize_ova, fit_scaler, read_keel, stratified_split, BinaryDataset, Manifest};
use crate::error::{Error, Result};
use crate::losses::{FocalParams, Loss};
use crate::matrix::Matrix;
use crate::metrics::{evaluate_logits, MetricBundle};
use crate::models::init_kan;
use crate::models::init_mlp;
use crate::models::{Architecture, Classifier};
use crate::resample::{smote_tomek, ResamplePlan};
use crate::rng;
use crate::train::{default_batch_size, train_with_validation, EarlyStop, TrainConfig};

pub const STATUS_OK: &str = "ok";

/// Spline domain of the first layer; features are min-max scaled into it.
pub const INPUT_DOMAIN: (f64, f64) = (0.0, 1.0);

/// One cell of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub dataset: String,
    pub architecture: Architecture,
    pub strategy: Strategy,
    pub seed: u64,
    pub metrics: MetricBundle,
    pub wall_time_s: f64,
    pub model_memory_bytes: usize,
    pub n_synthetic: usize,
    pub n_removed_tomek: usize,
    /// `ok`, or a short failure description.
    pub status: String,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// SHA-256 of the scaled test features.
    pub test_digest: Option<String>,
    pub hyperparameters: Option<HyperParams>,
    /// Seconds since the Unix epoch when the cell finished.
    pub timestamp: f64,
}

impl ExperimentResult {
    fn failed(cell: &Cell, hp: Option<HyperParams>, status: String) -> Self {
        let nan = f64::NAN;
        ExperimentResult {
            dataset: cell.dataset.clone(),
            architecture: cell.architecture,
            strategy: cell.strategy,
            seed: cell.seed,
            metrics: MetricBundle {
                precision: nan,
                recall: nan,
                specificity: nan,
                f1: nan,
                balanced_accuracy: nan,
                g_mean: nan,
                auc: nan,
            },
            wall_time_s: nan,
            model_memory_bytes: 0,
            n_synthetic: 0,
            n_removed_tomek: 0,
            status,
            epochs_run: 0,
            best_epoch: 0,
            n_train: 0,
            n_test: 0,
            test_digest: None,
            hyperparameters: hp,
            timestamp: now(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == STATUS_OK
    }

    /// A metric by name, or `wall_time_s` / `model_memory_bytes`.
    pub fn value(&self, name: &str) -> Option<f64> {
        match name {
            "wall_time_s" => Some(self.wall_time_s),
            "model_memory_bytes" => Some(self.model_memory_bytes as f64),
            other => self.metrics.get(other),
        }
    }
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub dataset: String,
    pub architecture: Architecture,
    pub strategy: Strategy,
    pub seed: u64,
}

/// Cells in canonical order: dataset, architecture, strategy, seed.
pub fn grid(config: &ExperimentConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    for d in &config.datasets {
        for &architecture in &config.architectures {
            for &strategy in &config.strategies {
                for &seed in &config.seeds {
                    cells.push(Cell {
                        dataset: d.clone(),
                        architecture,
                        strategy,
                        seed,
                    });
                }
            }
        }
    }
    cells
}

/// Scaled partitions of one dataset for one seed.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub fit_features: Matrix,
    pub fit_labels: Vec<u8>,
    pub validation: Option<(Matrix, Vec<u8>)>,
    pub test_features: Matrix,
    pub test_labels: Vec<u8>,
}

/// Split, scale on the training rows, and hold out a stratified validation
/// fold from the training rows when `validation_fraction > 0`.
pub fn prepare(ds: &BinaryDataset, config: &ExperimentConfig, seed: u64) -> Result<Prepared> {
    let split = stratified_split(&ds.labels, config.test_fraction, seed)?;
    let scaler = fit_scaler(&ds.features, &split.train_indices);
    let scaled = scaler.transform(&ds.features);
    let pick = |idx: &[usize]| -> (Matrix, Vec<u8>) {
        (scaled.select_rows(idx), idx.iter().map(|&i| ds.labels[i]).collect())
    };
    let (test_features, test_labels) = pick(&split.test_indices);
    let use_validation = config.validation_fraction > 0.0 && config.patience > 0;
    if !use_validation {
        let (fit_features, fit_labels) = pick(&split.train_indices);
        return Ok(Prepared {
            fit_features,
            fit_labels,
            validation: None,
            test_features,
            test_labels,
        });
    }
    let train_labels: Vec<u8> = split.train_indices.iter().map(|&i| ds.labels[i]).collect();
    let inner = stratified_split(
        &train_labels,
        config.validation_fraction,
        rng::derive_seed(seed, &[rng::label::VALIDATION]),
    )?;
    let to_outer = |idx: &[usize]| -> Vec<usize> { idx.iter().map(|&j| split.train_indices[j]).collect() };
    let (fit_features, fit_labels) = pick(&to_outer(&inner.train_indices));
    let validation = pick(&to_outer(&inner.test_indices));
    Ok(Prepared {
        fit_features,
        fit_labels,
        validation: Some(validation),
        test_features,
        test_labels,
    })
}

struct Fitted {
    metrics: MetricBundle,
    wall_time_s: f64,
    model_memory_bytes: usize,
    epochs_run: usize,
    best_epoch: usize,
}

fn fit_and_evaluate<M: Classifier>(
    model: M,
    x: &Matrix,
    y: &[u8],
    prepared: &Prepared,
    train_config: &TrainConfig,
    timing_lock: Option<&Mutex<()>>,
) -> Result<Fitted> {
    let validation = prepared.validation.as_ref().map(|(vx, vy)| (vx, vy.as_slice()));
    let report = {
        let _guard = timing_lock.map(|m| m.lock().unwrap_or_else(|p| p.into_inner()));
        train_with_validation(model, x, y, validation, train_config)?
    };
    let logits = report.final_model.logits(&prepared.test_features)?;
    Ok(Fitted {
        metrics: evaluate_logits(&prepared.test_labels, &logits)?,
        wall_time_s: report.wall_time_seconds,
        model_memory_bytes: report.model_memory_bytes,
        epochs_run: report.epochs_run,
        best_epoch: report.best_epoch,
    })
}

fn status_of(e: &Error) -> String {
    match e {
        Error::NumericDivergence { epoch } => format!("failed: numeric divergence at epoch {epoch}"),
        other => format!("failed: {other}"),
    }
}

fn log_path(config: &ExperimentConfig, cell: &Cell) -> Option<PathBuf> {
    config.verbose_logs.then(|| {
        config.out_dir.join("logs").join(format!(
            "{}_{}_{}_{}.csv",
            cell.dataset, cell.architecture, cell.strategy, cell.seed
        ))
    })
}

/// Runs one cell; failures are reported in the returned row's status.
pub fn run_cell(
    ds: &BinaryDataset,
    hp: &HyperParams,
    cell: &Cell,
    config: &ExperimentConfig,
    timing_lock: Option<&Mutex<()>>,
) -> ExperimentResult {
    match try_run_cell(ds, hp, cell, config, timing_lock) {
        Ok(r) => r,
        Err(e) => ExperimentResult::failed(cell, Some(hp.clone()), status_of(&e)),
    }
}

fn try_run_cell(
    ds: &BinaryDataset,
    hp: &HyperParams,
    cell: &Cell,
    config: &ExperimentConfig,
    timing_lock: Option<&Mutex<()>>,
) -> Result<ExperimentResult> {
    let prepared = prepare(ds, config, cell.seed)?;
    let digest_before = prepared.test_features.digest();

    let (mut n_synthetic, mut n_removed) = (0, 0);
    let resampled;
    let (x, y): (&Matrix, &[u8]) = if cell.strategy == Strategy::Resampled {
        let plan = ResamplePlan {
            k_neighbors: config.smote_k,
            target_ratio: config.target_ratio,
            seed: cell.seed,
        };
        resampled = smote_tomek(&prepared.fit_features, &prepared.fit_labels, &plan)?;
        n_synthetic = resampled.n_synthetic;
        n_removed = resampled.n_removed_by_tomek;
        (&resampled.features, &resampled.labels)
    } else {
        (&prepared.fit_features, &prepared.fit_labels)
    };

    let loss = match cell.strategy {
        Strategy::Focal => Loss::Focal(match config.focal_alpha {
            Some(alpha) => FocalParams::new(config.focal_gamma, alpha)?,
            None => FocalParams::inverse_frequency(config.focal_gamma, y)?,
        }),
        _ => Loss::unweighted_cross_entropy(),
    };
    let mut train_config = TrainConfig::new(
        hp.learning_rate,
        config.batch_size.unwrap_or_else(|| default_batch_size(y.len())),
        config.max_epochs,
        loss,
        cell.seed,
    );
    if config.patience > 0 {
        train_config.early_stop = Some(EarlyStop {
            patience: config.patience,
        });
    }
    train_config.log_path = log_path(config, cell);

    let widths = hp.widths(ds.features.cols());
    let fitted = match cell.architecture {
        Architecture::Kan => {
            let model = init_kan(&widths, hp.order, hp.grid_intervals, INPUT_DOMAIN, cell.seed)?;
            fit_and_evaluate(model, x, y, &prepared, &train_config, timing_lock)?
        }
        Architecture::Mlp => {
            let model = init_mlp(&widths, cell.seed)?;
            fit_and_evaluate(model, x, y, &prepared, &train_config, timing_lock)?
        }
    };

    let digest = prepared.test_features.digest();
    if digest != digest_before {
        return Err(Error::Config("test partition changed during the cell".into()));
    }
    Ok(ExperimentResult {
        dataset: cell.dataset.clone(),
        architecture: cell.architecture,
        strategy: cell.strategy,
        seed: cell.seed,
        metrics: fitted.metrics,
        wall_time_s: fitted.wall_time_s,
        model_memory_bytes: fitted.model_memory_bytes,
        n_synthetic,
        n_removed_tomek: n_removed,
        status: STATUS_OK.into(),
        epochs_run: fitted.epochs_run,
        best_epoch: fitted.best_epoch,
        n_train: y.len(),
        n_test: prepared.test_labels.len(),
        test_digest: Some(digest),
        hyperparameters: Some(hp.clone()),
        timestamp: now(),
    })
}

/// Parses and binarizes one manifest dataset.
pub fn load_dataset(manifest: &Manifest, name: &str) -> Result<BinaryDataset> {
    let raw = read_keel(manifest.path_of(name)?)?;
    let mut ds = binarize_ova(&raw)?;
    ds.name = name.to_string();
    Ok(ds)
}

/// Runs the whole grid and returns rows in canonical order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentResult>> {
    run_experiment_with(config, |_| Ok(()))
}

/// Like [`run_experiment`], calling `sink` on the calling thread as each
/// cell completes (in completion order). A sink error stops the run.
pub fn run_experiment_with<F>(config: &ExperimentConfig, mut sink: F) -> Result<Vec<ExperimentResult>>
where
    F: FnMut(&ExperimentResult) -> Result<()>,
{
    let manifest = Manifest::load(&config.manifest)?;
    config.validate_against(&manifest)?;
    if config.verbose_logs {
        let dir = config.out_dir.join("logs");
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    let datasets: Vec<(String, std::result::Result<BinaryDataset, String>, HyperParams)> = config
        .datasets
        .iter()
        .map(|name| {
            let ds = load_dataset(&manifest, name).map_err(|e| format!("failed: {e}"));
            if let Err(msg) = &ds {
                log::warn!("{name}: {msg}");
            }
            Ok((name.clone(), ds, config.hyperparameters_for(name)?))
        })
        .collect::<Result<_>>()?;
    let cells = grid(config);
    let lookup = |name: &str| datasets.iter().find(|(n, _, _)| n == name).expect("dataset loaded");
    let run_one = |cell: &Cell, lock: Option<&Mutex<()>>| -> ExperimentResult {
        let (_, ds, hp) = lookup(&cell.dataset);
        match ds {
            Ok(ds) => run_cell(ds, hp, cell, config, lock),
            Err(msg) => ExperimentResult::failed(cell, Some(hp.clone()), msg.clone()),
        }
    };
    let total = cells.len();
    let mut slots: Vec<Option<ExperimentResult>> = vec![None; total];

    if config.jobs <= 1 {
        for (i, cell) in cells.iter().enumerate() {
            let r = run_one(cell, None);
            log_progress(i + 1, total, &r);
            sink(&r)?;
            slots[i] = Some(r);
        }
    } else {
        let next = AtomicUsize::new(0);
        let stop = AtomicBool::new(false);
        let timing_lock = Mutex::new(());
        let lock = config.sequential_timing.then_some(&timing_lock);
        let (tx, rx) = mpsc::channel();
        let outcome = std::thread::scope(|scope| -> Result<()> {
            for _ in 0..config.jobs.min(total) {
                let tx = tx.clone();
                let (next, stop, cells, run_one) = (&next, &stop, &cells, &run_one);
                scope.spawn(move || loop {
                    if stop.load(Ordering::Relaxed) {
                        break;
                    }
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= cells.len() {
                        break;
                    }
                    if tx.send((i, run_one(&cells[i], lock))).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            let mut done = 0;
            for (i, r) in rx {
                done += 1;
                log_progress(done, total, &r);
                if let Err(e) = sink(&r) {
                    stop.store(true, Ordering::Relaxed);
                    return Err(e);
                }
                slots[i] = Some(r);
            }
            Ok(())
        });
        outcome?;
    }
    Ok(slots.into_iter().map(|r| r.expect("every cell ran")).collect())
}

fn log_progress(done: usize, total: usize, r: &ExperimentResult) {
    log::info!(
        "[{done}/{total}] {} {} {} seed {}: {} (bal. acc. {:.4}, {:.2}s)",
        r.dataset,
        r.architecture,
        r.strategy,
        r.seed,
        r.status,
        r.metrics.balanced_accuracy,
        r.wall_time_s
    );
}

/// Checks that every successful cell of a (dataset, seed) saw the same
/// test partition.
pub fn check_test_integrity(results: &[ExperimentResult]) -> Result<()> {
    let mut seen: std::collections::BTreeMap<(&str, u64), &str> = Default::default();
    for r in results.iter().filter(|r| r.is_ok()) {
        let Some(d) = r.test_digest.as_deref() else { continue };
        let prev = *seen.entry((r.dataset.as_str(), r.seed)).or_insert(d);
        if prev != d {
            return Err(Error::Config(format!(
                "test partition of {} seed {} differs between cells",
                r.dataset, r.seed
            )));
        }
    }
    Ok(())
}

/// Output directory check done before any training.
pub fn ensure_writable_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".write-probe");
    std::fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
    std::fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))?;
    Ok(())
}
