use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::Strategy;
use super::runner::ExperimentResult;
use crate::metrics::MetricBundle;
use crate::models::Architecture;

/// Median of the finite values, or `None` if there are none.
pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 })
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_sd(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some((mean, sd))
}

/// Seed-median of `quantity` for each dataset of one (architecture, strategy)
/// arm, over successful cells.
pub fn dataset_medians(
    results: &[ExperimentResult],
    architecture: Architecture,
    strategy: Strategy,
    quantity: &str,
) -> BTreeMap<String, f64> {
    let mut per: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in results {
        if r.is_ok() && r.architecture == architecture && r.strategy == strategy {
            if let Some(v) = r.value(quantity) {
                per.entry(r.dataset.clone()).or_default().push(v);
            }
        }
    }
    per.into_iter()
        .filter_map(|(d, v)| median(&v).map(|m| (d, m)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub architecture: Architecture,
    pub strategy: Strategy,
    pub n_datasets: usize,
    pub n_cells: usize,
    pub n_failed: usize,
    /// Mean over datasets of the per-dataset seed-medians.
    pub mean: BTreeMap<String, f64>,
    pub sd: BTreeMap<String, f64>,
    pub median_wall_time_s: f64,
    pub median_model_memory_bytes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub groups: Vec<GroupSummary>,
}

impl Summary {
    pub fn group(&self, architecture: Architecture, strategy: Strategy) -> Option<&GroupSummary> {
        self.groups
            .iter()
            .find(|g| g.architecture == architecture && g.strategy == strategy)
    }

    /// Mean of `metric` for one arm, if it has data.
    pub fn mean_of(&self, architecture: Architecture, strategy: Strategy, metric: &str) -> Option<f64> {
        self.group(architecture, strategy)?.mean.get(metric).copied()
    }
}

/// Per (architecture, strategy): seed-median per dataset, then mean and
/// standard deviation across datasets; resource medians over cells.
pub fn aggregate(results: &[ExperimentResult]) -> Summary {
    let mut groups = Vec::new();
    for architecture in [Architecture::Kan, Architecture::Mlp] {
        for strategy in Strategy::ALL {
            let cells: Vec<&ExperimentResult> = results
                .iter()
                .filter(|r| r.architecture == architecture && r.strategy == strategy)
                .collect();
            if cells.is_empty() {
                continue;
            }
            let ok: Vec<&&ExperimentResult> = cells.iter().filter(|r| r.is_ok()).collect();
            let mut mean = BTreeMap::new();
            let mut sd = BTreeMap::new();
            let mut n_datasets = 0;
            for name in MetricBundle::NAMES {
                let per = dataset_medians(results, architecture, strategy, name);
                n_datasets = n_datasets.max(per.len());
                let values: Vec<f64> = per.into_values().collect();
                if let Some((m, s)) = mean_sd(&values) {
                    mean.insert(name.to_string(), m);
                    sd.insert(name.to_string(), s);
                }
            }
            let times: Vec<f64> = ok.iter().map(|r| r.wall_time_s).collect();
            let mems: Vec<f64> = ok.iter().map(|r| r.model_memory_bytes as f64).collect();
            groups.push(GroupSummary {
                architecture,
                strategy,
                n_datasets,
                n_cells: cells.len(),
                n_failed: cells.len() - ok.len(),
                mean,
                sd,
                median_wall_time_s: median(&times).unwrap_or(f64::NAN),
                median_model_memory_bytes: median(&mems).unwrap_or(f64::NAN),
            });
        }
    }
    Summary { groups }
}
