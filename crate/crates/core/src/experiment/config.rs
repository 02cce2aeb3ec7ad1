use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Manifest;
use crate::error::{Error, Result};
use crate::models::Architecture;
use crate::train::{DEFAULT_MAX_EPOCHS, DEFAULT_PATIENCE, DEFAULT_VALIDATION_FRACTION};

/// Imbalance-handling arm of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Plain cross-entropy on the raw training split.
    Baseline,
    /// Cross-entropy after SMOTE-Tomek on the training split.
    Resampled,
    /// Focal loss on the raw training split.
    Focal,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Baseline, Strategy::Resampled, Strategy::Focal];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Baseline => "baseline",
            Strategy::Resampled => "resampled",
            Strategy::Focal => "focal",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "baseline" => Ok(Strategy::Baseline),
            "resampled" | "smote-tomek" | "smote_tomek" => Ok(Strategy::Resampled),
            "focal" => Ok(Strategy::Focal),
            other => Err(Error::Config(format!("unknown strategy `{other}`"))),
        }
    }
}

/// How paired observations are formed for the statistical tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// One pair per dataset, each the median over seeds.
    #[default]
    DatasetMedian,
    /// One pair per (dataset, seed).
    Seed,
}

/// Per-dataset network hyperparameters. The MLP reuses `hidden_widths`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperParams {
    pub hidden_widths: Vec<usize>,
    /// Spline order k.
    pub order: usize,
    /// Grid intervals G.
    pub grid_intervals: usize,
    pub learning_rate: f64,
}

impl HyperParams {
    pub fn new(hidden_widths: &[usize], order: usize, grid_intervals: usize, learning_rate: f64) -> Self {
        HyperParams {
            hidden_widths: hidden_widths.to_vec(),
            order,
            grid_intervals,
            learning_rate,
        }
    }

    /// `[n_features, hidden..., 2]`.
    pub fn widths(&self, n_features: usize) -> Vec<usize> {
        let mut w = Vec::with_capacity(self.hidden_widths.len() + 2);
        w.push(n_features);
        w.extend_from_slice(&self.hidden_widths);
        w.push(2);
        w
    }
}

/// The ten benchmark datasets in report order.
pub const BENCHMARK_DATASETS: [&str; 10] = [
    "yeast4",
    "yeast5",
    "yeast6",
    "glass2",
    "ecoli3",
    "winequality-red-8_vs_6-7",
    "new-thyroid1",
    "glass4",
    "glass6",
    "winequality-red-8_vs_6",
];

/// Tuned per-dataset KAN settings: hidden widths, order, grid, learning rate.
pub fn default_hyperparameters() -> BTreeMap<String, HyperParams> {
    [
        ("yeast4", HyperParams::new(&[7], 3, 5, 0.00066)),
        ("yeast5", HyperParams::new(&[7, 8], 2, 5, 0.00040)),
        ("yeast6", HyperParams::new(&[4], 2, 5, 0.00452)),
        ("glass2", HyperParams::new(&[4], 3, 5, 0.00236)),
        ("ecoli3", HyperParams::new(&[6, 5], 2, 5, 0.00069)),
        ("winequality-red-8_vs_6-7", HyperParams::new(&[7], 3, 5, 0.00062)),
        ("new-thyroid1", HyperParams::new(&[6, 4], 3, 3, 0.00785)),
        ("glass4", HyperParams::new(&[6], 3, 4, 0.00010)),
        ("glass6", HyperParams::new(&[8], 2, 5, 0.00028)),
        ("winequality-red-8_vs_6", HyperParams::new(&[5], 3, 5, 0.00138)),
    ]
    .into_iter()
    .map(|(n, h)| (n.to_string(), h))
    .collect()
}

fn default_manifest() -> PathBuf {
    PathBuf::from("data/manifest.json")
}
fn default_datasets() -> Vec<String> {
    BENCHMARK_DATASETS.iter().map(|s| s.to_string()).collect()
}
fn default_strategies() -> Vec<Strategy> {
    Strategy::ALL.to_vec()
}
fn default_architectures() -> Vec<Architecture> {
    vec![Architecture::Kan, Architecture::Mlp]
}
fn default_seeds() -> Vec<u64> {
    vec![0, 1, 2, 3, 4]
}
fn default_test_fraction() -> f64 {
    0.2
}
fn default_validation_fraction() -> f64 {
    DEFAULT_VALIDATION_FRACTION
}
fn default_max_epochs() -> usize {
    DEFAULT_MAX_EPOCHS
}
fn default_patience() -> usize {
    DEFAULT_PATIENCE
}
fn default_gamma() -> f64 {
    2.0
}
fn default_k_neighbors() -> usize {
    5
}
fn default_target_ratio() -> f64 {
    1.0
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("results")
}
fn default_jobs() -> usize {
    1
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_manifest")]
    pub manifest: PathBuf,
    #[serde(default = "default_datasets")]
    pub datasets: Vec<String>,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
    #[serde(default = "default_architectures")]
    pub architectures: Vec<Architecture>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Overrides merged over the built-in per-dataset defaults.
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, HyperParams>,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default = "default_validation_fraction")]
    pub validation_fraction: f64,
    #[serde(default = "default_max_epochs")]
    pub max_epochs: usize,
    /// Early-stopping patience in epochs; 0 disables early stopping.
    #[serde(default = "default_patience")]
    pub patience: usize,
    /// Fixed batch size; by default 32 below 500 training rows, else 64.
    #[serde(default)]
    pub batch_size: Option<usize>,
    #[serde(default = "default_gamma")]
    pub focal_gamma: f64,
    /// Explicit `[majority, minority]` focal weights; inverse class
    /// frequency of the training rows by default.
    #[serde(default)]
    pub focal_alpha: Option<[f64; 2]>,
    #[serde(default = "default_k_neighbors")]
    pub smote_k: usize,
    #[serde(default = "default_target_ratio")]
    pub target_ratio: f64,
    #[serde(default)]
    pub pairing: Pairing,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    /// Serialize the timed training loops even when `jobs > 1`.
    #[serde(default = "default_true")]
    pub sequential_timing: bool,
    /// Write a per-epoch training log for every cell under `out_dir/logs`.
    #[serde(default)]
    pub verbose_logs: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Effective hyperparameters for `dataset`.
    pub fn hyperparameters_for(&self, dataset: &str) -> Result<HyperParams> {
        if let Some(h) = self.hyperparameters.get(dataset) {
            return Ok(h.clone());
        }
        default_hyperparameters()
            .remove(dataset)
            .ok_or_else(|| Error::Config(format!("no hyperparameters configured for `{dataset}`")))
    }

    /// Structural checks that do not need the filesystem.
    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() || self.strategies.is_empty() || self.architectures.is_empty() || self.seeds.is_empty() {
            return Err(Error::Config(
                "datasets, strategies, architectures and seeds must be nonempty".into(),
            ));
        }
        for (what, dup) in [
            ("dataset", has_duplicates(&self.datasets)),
            ("strategy", has_duplicates(&self.strategies)),
            ("architecture", has_duplicates(&self.architectures)),
            ("seed", has_duplicates(&self.seeds)),
        ] {
            if dup {
                return Err(Error::Config(format!("duplicate {what} in the selection")));
            }
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config(format!("test_fraction {} outside (0, 1)", self.test_fraction)));
        }
        if !(self.validation_fraction >= 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::Config(format!(
                "validation_fraction {} outside [0, 1)",
                self.validation_fraction
            )));
        }
        if self.max_epochs < 1 {
            return Err(Error::Config("max_epochs must be at least 1".into()));
        }
        if self.batch_size == Some(0) {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.jobs < 1 {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        if self.focal_gamma < 0.0 {
            return Err(Error::Config("focal_gamma must be >= 0".into()));
        }
        for d in &self.datasets {
            let h = self.hyperparameters_for(d)?;
            if h.order < 1 || h.grid_intervals < 1 || !(h.learning_rate > 0.0) || h.hidden_widths.contains(&0) {
                return Err(Error::Config(format!("invalid hyperparameters for `{d}`")));
            }
        }
        Ok(())
    }

    /// [`Self::validate`] plus a check that every dataset is in the manifest.
    pub fn validate_against(&self, manifest: &Manifest) -> Result<()> {
        self.validate()?;
        for d in &self.datasets {
            manifest.entry(d)?;
        }
        Ok(())
    }
}

fn has_duplicates<T: PartialEq>(items: &[T]) -> bool {
    items.iter().enumerate().any(|(i, a)| items[..i].contains(a))
}

/// Parses a comma-separated list.
pub fn parse_list<T: FromStr>(text: &str) -> std::result::Result<Vec<T>, T::Err> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(T::from_str)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_cover_the_full_grid() {
        let c = ExperimentConfig::default();
        assert_eq!(c.datasets.len() * c.architectures.len() * c.strategies.len() * c.seeds.len(), 300);
        c.validate().unwrap();
        let y4 = c.hyperparameters_for("yeast4").unwrap();
        assert_eq!(y4, HyperParams::new(&[7], 3, 5, 0.00066));
        assert_eq!(y4.widths(8), vec![8, 7, 2]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<ExperimentConfig>(r#"{"seedz": [1]}"#).unwrap_err();
        assert!(err.to_string().contains("seedz"));
        let c: ExperimentConfig = serde_json::from_str(r#"{"seeds": [7], "strategies": ["focal"]}"#).unwrap();
        assert_eq!(c.seeds, vec![7]);
        assert_eq!(c.strategies, vec![Strategy::Focal]);
    }

    #[test]
    fn overrides_and_validation() {
        let mut c = ExperimentConfig::default();
        c.hyperparameters.insert("yeast4".into(), HyperParams::new(&[3], 2, 4, 0.01));
        assert_eq!(c.hyperparameters_for("yeast4").unwrap().hidden_widths, vec![3]);
        c.datasets.push("unknown".into());
        assert!(c.validate().is_err());
        let mut d = ExperimentConfig::default();
        d.seeds.clear();
        assert!(d.validate().is_err());
    }

    #[test]
    fn lists_parse() {
        let s: Vec<Strategy> = parse_list("baseline, focal").unwrap();
        assert_eq!(s, vec![Strategy::Baseline, Strategy::Focal]);
        let n: Vec<u64> = parse_list("1,2,3").unwrap();
        assert_eq!(n, vec![1, 2, 3]);
        assert!(parse_list::<Strategy>("nope").is_err());
    }
}
