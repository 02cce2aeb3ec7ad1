//! The benchmark grid: datasets x architectures x strategies x seeds.
//!
//! Each cell parses, binarizes, splits and scales its dataset, optionally
//! resamples the training rows, trains, and evaluates on the untouched test
//! rows. Results are aggregated per arm and compared with paired tests.

pub mod aggregate;
pub mod comparisons;
pub mod config;
pub mod output;
pub mod runner;

pub use aggregate::{aggregate, dataset_medians, GroupSummary, Summary};
pub use comparisons::{statistical_report, Comparison, ComparisonRow, COMPARISONS};
pub use config::{default_hyperparameters, ExperimentConfig, HyperParams, Pairing, Strategy, BENCHMARK_DATASETS};
pub use output::{emit_reports, read_results_csv, render_report, write_results_csv, ReportFormat, ResultsWriter};
pub use runner::{
    check_test_integrity, ensure_writable_dir, grid, prepare, run_experiment, run_experiment_with, Cell,
    ExperimentResult,
};
