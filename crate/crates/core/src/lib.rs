//! Kolmogorov-Arnold networks for binary imbalanced tabular classification.
//!
//! The crate is organised bottom-up:
//!
//! - [`spline`]: uniform-grid B-spline knots, Cox-de Boor basis values and derivatives.
//! - [`models`]: KAN and MLP classifiers with cached forward passes and exact backward passes.
//! - [`losses`]: two-class softmax, (weighted) cross-entropy and focal loss.
//! - [`train`]: mini-batch Adam training with early stopping and resource accounting.
//! - [`resample`]: SMOTE, Tomek links and the combined SMOTE-Tomek pipeline.
//! - [`metrics`]: confusion counts, imbalance-aware metric bundles and rank AUC.
//! - [`stats`]: exact Wilcoxon signed-rank test and paired Cohen's d.
//! - [`data`]: KEEL parsing, one-vs-all binarization, scaling and stratified splits.
//! - [`experiment`]: the strategy x architecture benchmark grid, aggregation and reports.
//!
//! The `examples/` directory has one runnable program per capability.

pub mod data;
pub mod error;
pub mod experiment;
pub mod losses;
pub mod matrix;
pub mod metrics;
pub mod models;
pub mod resample;
pub mod rng;
pub mod spline;
pub mod stats;
pub mod train;

pub use error::{Error, Result};
pub use matrix::Matrix;
