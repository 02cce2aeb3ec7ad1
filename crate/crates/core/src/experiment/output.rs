use std::fmt::Write as _;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::aggregate::{aggregate, Summary};
use super::comparisons::{statistical_report, ComparisonRow};
use super::config::{default_hyperparameters, ExperimentConfig, HyperParams, Pairing, Strategy};
use super::runner::{load_dataset, ExperimentResult};
use crate::data::Manifest;
use crate::error::{Error, Result};
use crate::metrics::MetricBundle;
use crate::models::Architecture;

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const REPORT_FILE: &str = "report.txt";

/// One line of `results.csv`, in column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub dataset: String,
    pub architecture: Architecture,
    pub strategy: Strategy,
    pub seed: u64,
    pub precision: f64,
    pub recall: f64,
    pub specificity: f64,
    pub f1: f64,
    pub balanced_accuracy: f64,
    pub g_mean: f64,
    pub auc: f64,
    pub wall_time_s: f64,
    pub model_memory_bytes: usize,
    pub n_synthetic: usize,
    pub n_removed_tomek: usize,
    pub status: String,
}

impl From<&ExperimentResult> for CsvRow {
    fn from(r: &ExperimentResult) -> Self {
        let m = &r.metrics;
        CsvRow {
            dataset: r.dataset.clone(),
            architecture: r.architecture,
            strategy: r.strategy,
            seed: r.seed,
            precision: m.precision,
            recall: m.recall,
            specificity: m.specificity,
            f1: m.f1,
            balanced_accuracy: m.balanced_accuracy,
            g_mean: m.g_mean,
            auc: m.auc,
            wall_time_s: r.wall_time_s,
            model_memory_bytes: r.model_memory_bytes,
            n_synthetic: r.n_synthetic,
            n_removed_tomek: r.n_removed_tomek,
            status: r.status.clone(),
        }
    }
}

impl From<CsvRow> for ExperimentResult {
    fn from(c: CsvRow) -> Self {
        ExperimentResult {
            dataset: c.dataset,
            architecture: c.architecture,
            strategy: c.strategy,
            seed: c.seed,
            metrics: MetricBundle {
                precision: c.precision,
                recall: c.recall,
                specificity: c.specificity,
                f1: c.f1,
                balanced_accuracy: c.balanced_accuracy,
                g_mean: c.g_mean,
                auc: c.auc,
            },
            wall_time_s: c.wall_time_s,
            model_memory_bytes: c.model_memory_bytes,
            n_synthetic: c.n_synthetic,
            n_removed_tomek: c.n_removed_tomek,
            status: c.status,
            epochs_run: 0,
            best_epoch: 0,
            n_train: 0,
            n_test: 0,
            test_digest: None,
            hyperparameters: None,
            timestamp: 0.0,
        }
    }
}

/// Appends rows to a results CSV as they arrive.
pub struct ResultsWriter {
    path: PathBuf,
    writer: csv::Writer<File>,
}

impl ResultsWriter {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        // header is written with the first row
        Ok(ResultsWriter {
            path,
            writer: csv::Writer::from_writer(file),
        })
    }

    pub fn append(&mut self, r: &ExperimentResult) -> Result<()> {
        self.writer.serialize(CsvRow::from(r))?;
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}

pub fn write_results_csv(path: impl AsRef<Path>, results: &[ExperimentResult]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    if results.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for r in results {
        w.serialize(CsvRow::from(r))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub const CSV_COLUMNS: [&str; 16] = [
    "dataset",
    "architecture",
    "strategy",
    "seed",
    "precision",
    "recall",
    "specificity",
    "f1",
    "balanced_accuracy",
    "g_mean",
    "auc",
    "wall_time_s",
    "model_memory_bytes",
    "n_synthetic",
    "n_removed_tomek",
    "status",
];

pub fn read_results_csv(path: impl AsRef<Path>) -> Result<Vec<ExperimentResult>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let headers = r.headers()?.clone();
    if headers.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(Error::Config(format!(
            "{}: unexpected columns {:?}",
            path.display(),
            headers.iter().collect::<Vec<_>>()
        )));
    }
    r.deserialize::<CsvRow>()
        .map(|row| Ok(ExperimentResult::from(row?)))
        .collect()
}

/// Per-dataset characteristics shown in the text report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub name: String,
    pub features: usize,
    pub instances: usize,
    pub minority: usize,
    pub majority: usize,
    pub imbalance_ratio: f64,
    pub expected_imbalance_ratio: f64,
}

pub fn dataset_rows(manifest: &Manifest, names: &[String]) -> Vec<DatasetRow> {
    names
        .iter()
        .filter_map(|n| {
            let entry = manifest.entry(n).ok()?;
            let ds = load_dataset(manifest, n).ok()?;
            Some(DatasetRow {
                name: n.clone(),
                features: ds.features.cols(),
                instances: ds.len(),
                minority: ds.minority_count,
                majority: ds.majority_count,
                imbalance_ratio: ds.imbalance_ratio,
                expected_imbalance_ratio: entry.expected_ir,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub package: String,
    pub version: String,
}

impl Default for Provenance {
    fn default() -> Self {
        Provenance {
            package: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryFile {
    pub provenance: Provenance,
    pub config: Option<ExperimentConfig>,
    pub n_cells: usize,
    pub n_failed: usize,
    pub conventions: Vec<String>,
    pub datasets: Vec<DatasetRow>,
    pub summary: Summary,
    pub comparisons: Vec<ComparisonRow>,
    pub cells: Vec<ExperimentResult>,
}

pub fn conventions() -> Vec<String> {
    vec![
        "precision, recall, specificity and F1 are 0 when their denominator is 0".into(),
        "hard predictions take the larger of the two logits".into(),
        "AUC is the rank statistic with average ranks, not clipped at 0.5".into(),
        "aggregates: seed-median per dataset, then mean and sd across datasets".into(),
        "model memory: trainable scalars x 8 bytes x 3 (Adam moments)".into(),
        "focal loss: gamma and alpha echoed in the config; alpha defaults to inverse class frequency".into(),
    ]
}

pub fn build_summary(
    results: &[ExperimentResult],
    config: Option<&ExperimentConfig>,
    datasets: Vec<DatasetRow>,
) -> SummaryFile {
    let pairing = config.map(|c| c.pairing).unwrap_or_default();
    SummaryFile {
        provenance: Provenance::default(),
        config: config.cloned(),
        n_cells: results.len(),
        n_failed: results.iter().filter(|r| !r.is_ok()).count(),
        conventions: conventions(),
        datasets,
        summary: aggregate(results),
        comparisons: statistical_report(results, pairing),
        cells: results.to_vec(),
    }
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.digits$}"),
        _ => "-".into(),
    }
}

/// Plain-text tables: datasets, hyperparameters, aggregates, tests.
pub fn render_text(s: &SummaryFile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", s.provenance.package, s.provenance.version);
    let _ = writeln!(out, "cells: {}  failed: {}\n", s.n_cells, s.n_failed);

    if !s.datasets.is_empty() {
        let _ = writeln!(out, "Datasets");
        let _ = writeln!(
            out,
            "{:<26} {:>8} {:>9} {:>8} {:>8} {:>8} {:>8}",
            "dataset", "features", "instances", "minority", "majority", "IR", "ref IR"
        );
        for d in &s.datasets {
            let _ = writeln!(
                out,
                "{:<26} {:>8} {:>9} {:>8} {:>8} {:>8.2} {:>8.2}",
                d.name, d.features, d.instances, d.minority, d.majority, d.imbalance_ratio, d.expected_imbalance_ratio
            );
        }
        out.push('\n');
    }

    let names: Vec<String> = match &s.config {
        Some(c) => c.datasets.clone(),
        None => {
            let mut v: Vec<String> = s.cells.iter().map(|r| r.dataset.clone()).collect();
            v.dedup();
            v
        }
    };
    let defaults = default_hyperparameters();
    let hp_of = |n: &str| -> Option<HyperParams> {
        match &s.config {
            Some(c) => c.hyperparameters_for(n).ok(),
            None => defaults.get(n).cloned(),
        }
    };
    let _ = writeln!(out, "Hyperparameters (KAN; the MLP shares the hidden widths)");
    let _ = writeln!(
        out,
        "{:<26} {:>6} {:<10} {:>3} {:>4} {:>9}",
        "dataset", "layers", "widths", "k", "grid", "lr"
    );
    for n in &names {
        if let Some(h) = hp_of(n) {
            let widths = h.hidden_widths.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(",");
            let _ = writeln!(
                out,
                "{:<26} {:>6} {:<10} {:>3} {:>4} {:>9.5}",
                n,
                h.hidden_widths.len(),
                format!("[{widths}]"),
                h.order,
                h.grid_intervals,
                h.learning_rate
            );
        }
    }
    out.push('\n');

    let _ = writeln!(out, "Aggregates (mean ± sd over datasets of seed-medians)");
    let _ = write!(out, "{:<14}", "arm");
    for m in MetricBundle::NAMES {
        let _ = write!(out, " {:>17}", m);
    }
    let _ = writeln!(out, " {:>12} {:>10}", "median time", "memory");
    for g in &s.summary.groups {
        let _ = write!(out, "{:<14}", format!("{}/{}", g.architecture, g.strategy));
        for m in MetricBundle::NAMES {
            let cell = format!(
                "{} ± {}",
                fmt_opt(g.mean.get(m).copied(), 4),
                fmt_opt(g.sd.get(m).copied(), 4)
            );
            let _ = write!(out, " {:>17}", cell);
        }
        let _ = writeln!(
            out,
            " {:>11}s {:>10}",
            fmt_opt(Some(g.median_wall_time_s), 3),
            fmt_opt(Some(g.median_model_memory_bytes), 0)
        );
    }
    out.push('\n');

    let pairing = s.comparisons.first().map(|c| c.pairing).unwrap_or_default();
    let _ = writeln!(
        out,
        "Paired tests (Wilcoxon signed-rank, paired Cohen's d; pairs: {})",
        match pairing {
            Pairing::DatasetMedian => "per-dataset seed-medians",
            Pairing::Seed => "per (dataset, seed)",
        }
    );
    let _ = writeln!(
        out,
        "{:<28} {:<18} {:>3} {:>8} {:>8} {:>10} {:>8}  verdict",
        "comparison", "quantity", "n", "p", "d", "ref p", "ref d"
    );
    for c in &s.comparisons {
        let ref_p = match c.alternate_reference_p {
            Some(alt) => format!("{}/{}", c.reference_p, alt),
            None => format!("{}", c.reference_p),
        };
        let _ = writeln!(
            out,
            "{:<28} {:<18} {:>3} {:>8} {:>8} {:>10} {:>8}  {}",
            c.name,
            c.quantity,
            c.n_pairs,
            fmt_opt(c.p_value, 4),
            fmt_opt(c.effect_size_d, 3),
            ref_p,
            c.reference_d,
            c.verdict
        );
    }
    out.push('\n');
    let _ = writeln!(out, "Conventions");
    for c in &s.conventions {
        let _ = writeln!(out, "- {c}");
    }
    out
}

/// Writes `results.csv`, `summary.json` and `report.txt` into `dir`.
pub fn emit_reports(
    dir: impl AsRef<Path>,
    results: &[ExperimentResult],
    config: Option<&ExperimentConfig>,
) -> Result<SummaryFile> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let datasets = match config {
        Some(c) => Manifest::load(&c.manifest)
            .map(|m| dataset_rows(&m, &c.datasets))
            .unwrap_or_default(),
        None => Vec::new(),
    };
    let summary = build_summary(results, config, datasets);
    write_results_csv(dir.join(RESULTS_FILE), results)?;
    let json_path = dir.join(SUMMARY_FILE);
    let json = serde_json::to_string_pretty(&summary)?;
    std::fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))?;
    let txt_path = dir.join(REPORT_FILE);
    std::fs::write(&txt_path, render_text(&summary)).map_err(|e| Error::io(&txt_path, e))?;
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Table,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "table" => Ok(ReportFormat::Table),
            other => Err(Error::Config(format!("unknown report format `{other}`"))),
        }
    }
}

/// Aggregate view of `results` in the requested format.
pub fn render_report(results: &[ExperimentResult], format: ReportFormat, pairing: Pairing) -> Result<String> {
    let mut summary = build_summary(results, None, Vec::new());
    summary.comparisons = statistical_report(results, pairing);
    match format {
        ReportFormat::Table => Ok(render_text(&summary)),
        ReportFormat::Json => {
            summary.cells.clear();
            Ok(serde_json::to_string_pretty(&summary)?)
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["architecture".to_string(), "strategy".into(), "n_datasets".into()];
            for m in MetricBundle::NAMES {
                header.push(format!("{m}_mean"));
                header.push(format!("{m}_sd"));
            }
            header.extend(["median_wall_time_s".into(), "median_model_memory_bytes".into(), "n_failed".into()]);
            w.write_record(&header)?;
            for g in &summary.summary.groups {
                let mut rec = vec![g.architecture.to_string(), g.strategy.to_string(), g.n_datasets.to_string()];
                for m in MetricBundle::NAMES {
                    rec.push(g.mean.get(m).map(|v| v.to_string()).unwrap_or_default());
                    rec.push(g.sd.get(m).map(|v| v.to_string()).unwrap_or_default());
                }
                rec.push(g.median_wall_time_s.to_string());
                rec.push(g.median_model_memory_bytes.to_string());
                rec.push(g.n_failed.to_string());
                w.write_record(&rec)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
    }
}
