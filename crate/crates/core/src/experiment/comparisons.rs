use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::aggregate::{dataset_medians, mean_sd};
use super::config::{Pairing, Strategy};
use super::runner::ExperimentResult;
use crate::error::Error;
use crate::models::Architecture;
use crate::stats::{cohens_d_paired, wilcoxon_signed_rank, PairedSample};

/// |d| below this counts as practical equivalence.
pub const EQUIVALENCE_D: f64 = 0.2;
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// One paired comparison between two arms of the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub name: &'static str,
    /// Metric name or `wall_time_s`.
    pub quantity: &'static str,
    pub a: (Architecture, Strategy),
    pub b: (Architecture, Strategy),
    /// Published p and d for the same comparison.
    pub reference_p: f64,
    pub reference_d: f64,
    /// A second published p value where sources disagree.
    pub alternate_reference_p: Option<f64>,
}

/// The five standard comparisons.
pub const COMPARISONS: [Comparison; 5] = [
    Comparison {
        name: "KAN: baseline vs focal",
        quantity: "g_mean",
        a: (Architecture::Kan, Strategy::Baseline),
        b: (Architecture::Kan, Strategy::Focal),
        reference_p: 0.042,
        reference_d: 0.79,
        alternate_reference_p: None,
    },
    Comparison {
        name: "KAN: baseline vs resampled",
        quantity: "g_mean",
        a: (Architecture::Kan, Strategy::Baseline),
        b: (Architecture::Kan, Strategy::Resampled),
        reference_p: 0.057,
        reference_d: 0.73,
        alternate_reference_p: None,
    },
    Comparison {
        name: "baseline: KAN vs MLP",
        quantity: "f1",
        a: (Architecture::Kan, Strategy::Baseline),
        b: (Architecture::Mlp, Strategy::Baseline),
        reference_p: 0.101,
        reference_d: 0.61,
        alternate_reference_p: None,
    },
    Comparison {
        name: "resampled: KAN vs MLP",
        quantity: "balanced_accuracy",
        a: (Architecture::Kan, Strategy::Resampled),
        b: (Architecture::Mlp, Strategy::Resampled),
        reference_p: 0.810,
        reference_d: -0.08,
        alternate_reference_p: None,
    },
    Comparison {
        name: "KAN vs MLP: training time",
        quantity: "wall_time_s",
        a: (Architecture::Kan, Strategy::Baseline),
        b: (Architecture::Mlp, Strategy::Baseline),
        reference_p: 0.042,
        reference_d: 2.94,
        alternate_reference_p: Some(0.002),
    },
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub name: String,
    pub quantity: String,
    pub condition_a: String,
    pub condition_b: String,
    pub pairing: Pairing,
    pub n_pairs: usize,
    pub mean_a: Option<f64>,
    pub mean_b: Option<f64>,
    /// `min(W+, W-)`.
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub exact: Option<bool>,
    pub effect_size_d: Option<f64>,
    /// `|d| < 0.2`.
    pub equivalent: bool,
    /// `significant`, `not significant`, `no difference` or `not computable: ...`.
    pub verdict: String,
    pub reference_p: f64,
    pub reference_d: f64,
    pub alternate_reference_p: Option<f64>,
}

impl ComparisonRow {
    pub fn is_computable(&self) -> bool {
        !self.verdict.starts_with("not computable")
    }
}

fn label((arch, strategy): (Architecture, Strategy)) -> String {
    format!("{arch}/{strategy}")
}

/// Aligned observations of both arms.
fn paired_values(results: &[ExperimentResult], c: &Comparison, pairing: Pairing) -> (Vec<f64>, Vec<f64>) {
    match pairing {
        Pairing::DatasetMedian => {
            let a = dataset_medians(results, c.a.0, c.a.1, c.quantity);
            let b = dataset_medians(results, c.b.0, c.b.1, c.quantity);
            a.iter()
                .filter_map(|(d, va)| b.get(d).map(|vb| (*va, *vb)))
                .unzip()
        }
        Pairing::Seed => {
            let collect = |(arch, strategy): (Architecture, Strategy)| -> BTreeMap<(String, u64), f64> {
                results
                    .iter()
                    .filter(|r| r.is_ok() && r.architecture == arch && r.strategy == strategy)
                    .filter_map(|r| {
                        r.value(c.quantity)
                            .filter(|v| v.is_finite())
                            .map(|v| ((r.dataset.clone(), r.seed), v))
                    })
                    .collect()
            };
            let a = collect(c.a);
            let b = collect(c.b);
            a.iter()
                .filter_map(|(k, va)| b.get(k).map(|vb| (*va, *vb)))
                .unzip()
        }
    }
}

/// Wilcoxon p and paired Cohen's d for one comparison.
pub fn compare(results: &[ExperimentResult], c: &Comparison, pairing: Pairing) -> ComparisonRow {
    let (a, b) = paired_values(results, c, pairing);
    let mut row = ComparisonRow {
        name: c.name.into(),
        quantity: c.quantity.into(),
        condition_a: label(c.a),
        condition_b: label(c.b),
        pairing,
        n_pairs: a.len(),
        mean_a: mean_sd(&a).map(|m| m.0),
        mean_b: mean_sd(&b).map(|m| m.0),
        statistic: None,
        p_value: None,
        exact: None,
        effect_size_d: None,
        equivalent: false,
        verdict: String::new(),
        reference_p: c.reference_p,
        reference_d: c.reference_d,
        alternate_reference_p: c.alternate_reference_p,
    };
    let sample = match PairedSample::new(a, b) {
        Ok(s) => s,
        Err(e) => {
            row.verdict = format!("not computable: {}", reason(&e));
            return row;
        }
    };
    match wilcoxon_signed_rank(&sample) {
        Ok(w) => {
            row.statistic = Some(w.statistic);
            row.p_value = Some(w.p_value);
            row.exact = Some(w.exact);
        }
        Err(Error::DegenerateTest(_)) => {
            row.p_value = Some(1.0);
            row.effect_size_d = Some(0.0);
            row.equivalent = true;
            row.verdict = "no difference".into();
            return row;
        }
        Err(e) => {
            row.verdict = format!("not computable: {}", reason(&e));
            return row;
        }
    }
    match cohens_d_paired(&sample) {
        Ok(d) => {
            row.effect_size_d = Some(d);
            row.equivalent = d.abs() < EQUIVALENCE_D;
        }
        Err(e) => log::warn!("{}: effect size undefined ({})", c.name, reason(&e)),
    }
    let p = row.p_value.unwrap_or(1.0);
    row.verdict = if p < SIGNIFICANCE_LEVEL {
        "significant".into()
    } else {
        "not significant".into()
    };
    if row.equivalent {
        row.verdict.push_str(", equivalent");
    }
    row
}

fn reason(e: &Error) -> String {
    match e {
        Error::DegenerateTest(m) | Error::Numeric(m) | Error::Shape(m) => m.clone(),
        other => other.to_string(),
    }
}

/// The five standard comparisons over `results`.
pub fn statistical_report(results: &[ExperimentResult], pairing: Pairing) -> Vec<ComparisonRow> {
    COMPARISONS.iter().map(|c| compare(results, c, pairing)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::MetricBundle;

    fn row(dataset: &str, arch: Architecture, strategy: Strategy, seed: u64, v: f64, t: f64) -> ExperimentResult {
        ExperimentResult {
            dataset: dataset.into(),
            architecture: arch,
            strategy,
            seed,
            metrics: MetricBundle {
                precision: v,
                recall: v,
                specificity: v,
                f1: v,
                balanced_accuracy: v,
                g_mean: v,
                auc: v,
            },
            wall_time_s: t,
            model_memory_bytes: 8,
            n_synthetic: 0,
            n_removed_tomek: 0,
            status: "ok".into(),
            epochs_run: 1,
            best_epoch: 1,
            n_train: 1,
            n_test: 1,
            test_digest: None,
            hyperparameters: None,
            timestamp: 0.0,
        }
    }

    fn grid(f: impl Fn(usize, Architecture, Strategy) -> (f64, f64)) -> Vec<ExperimentResult> {
        let mut out = Vec::new();
        for d in 0..10 {
            for arch in [Architecture::Kan, Architecture::Mlp] {
                for s in Strategy::ALL {
                    let (v, t) = f(d, arch, s);
                    out.push(row(&format!("d{d}"), arch, s, 0, v, t));
                }
            }
        }
        out
    }

    #[test]
    fn kan_always_slower_gives_exact_small_p() {
        let results = grid(|d, arch, _| {
            let t = if arch == Architecture::Kan { 10.0 + d as f64 * 1.7 } else { 0.1 + d as f64 * 0.01 };
            (0.5, t)
        });
        let rows = statistical_report(&results, Pairing::DatasetMedian);
        let time = &rows[4];
        assert_eq!(time.n_pairs, 10);
        assert!((time.p_value.unwrap() - 2.0 / 1024.0).abs() < 1e-15);
        assert!(time.effect_size_d.unwrap() > 1.0);
        assert_eq!(time.verdict, "significant");
        // identical metric values everywhere
        assert_eq!(rows[0].verdict, "no difference");
        assert!(rows[0].equivalent);
    }

    #[test]
    fn missing_arm_is_not_computable() {
        let results: Vec<_> = grid(|_, _, _| (0.5, 1.0))
            .into_iter()
            .filter(|r| r.strategy != Strategy::Focal)
            .collect();
        let rows = statistical_report(&results, Pairing::Seed);
        assert_eq!(rows.len(), 5);
        assert!(!rows[0].is_computable());
        assert!(rows[0].verdict.starts_with("not computable"));
        assert!(rows[1].is_computable());
    }

    #[test]
    fn small_effect_flags_equivalence() {
        let results = grid(|d, arch, _| {
            let wiggle = [0.03, -0.02, 0.01, -0.04, 0.02, -0.01, 0.05, -0.03, 0.0, 0.01][d];
            let v = 0.6 + if arch == Architecture::Kan { wiggle } else { 0.0 };
            (v, 1.0)
        });
        let r = &statistical_report(&results, Pairing::DatasetMedian)[3];
        assert!(r.effect_size_d.unwrap().abs() < EQUIVALENCE_D);
        assert!(r.equivalent);
        assert!(r.verdict.ends_with("equivalent"));
    }
}
