//! Imbalance-aware evaluation. The positive class is the minority, label 1.
//!
//! Ratios whose denominator is zero evaluate to 0, which penalises
//! degenerate predictors (an all-majority model scores precision 0).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricBundle {
    pub precision: f64,
    pub recall: f64,
    pub specificity: f64,
    pub f1: f64,
    pub balanced_accuracy: f64,
    pub g_mean: f64,
    /// Rank AUC, unclipped; `NaN` until set.
    pub auc: f64,
}

impl MetricBundle {
    /// Metric names in report order.
    pub const NAMES: [&'static str; 7] = [
        "precision",
        "recall",
        "specificity",
        "f1",
        "balanced_accuracy",
        "g_mean",
        "auc",
    ];

    pub fn values(&self) -> [f64; 7] {
        [
            self.precision,
            self.recall,
            self.specificity,
            self.f1,
            self.balanced_accuracy,
            self.g_mean,
            self.auc,
        ]
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Self::NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.values()[i])
    }
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionCounts> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Shape(format!(
            "{} true labels vs {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    let mut c = ConfusionCounts::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => c.tp += 1,
            (0, 1) => c.fp += 1,
            (1, 0) => c.fn_ += 1,
            (0, 0) => c.tn += 1,
            _ => return Err(Error::Shape(format!("labels must be 0/1, got ({t}, {p})"))),
        }
    }
    Ok(c)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// All threshold metrics; `auc` is left as `NaN`.
pub fn bundle_from_counts(c: &ConfusionCounts) -> MetricBundle {
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let specificity = ratio(c.tn, c.tn + c.fp);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    MetricBundle {
        precision,
        recall,
        specificity,
        f1,
        balanced_accuracy: 0.5 * (recall + specificity),
        g_mean: (recall * specificity).sqrt(),
        auc: f64::NAN,
    }
}

/// Argmax of the two logits; ties go to the majority class.
pub fn predict_labels(logits: &Matrix) -> Vec<u8> {
    logits
        .iter_rows()
        .map(|z| u8::from(z[1] > z[0]))
        .collect()
}

/// Minority-class probability `p_1 = softmax(z)_1`, used as the ranking score.
pub fn positive_scores(logits: &Matrix) -> Vec<f64> {
    logits
        .iter_rows()
        .map(|z| 1.0 / (1.0 + (z[0] - z[1]).exp()))
        .collect()
}

fn check_scores(y_true: &[u8], scores: &[f64]) -> Result<(usize, usize)> {
    if y_true.len() != scores.len() {
        return Err(Error::Shape(format!(
            "{} labels vs {} scores",
            y_true.len(),
            scores.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Numeric("NaN score".into()));
    }
    let pos = y_true.iter().filter(|&&y| y == 1).count();
    let neg = y_true.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedMetric(
            "AUC needs both classes in y_true".into(),
        ));
    }
    Ok((pos, neg))
}

/// Normalised Mann-Whitney U with average ranks for ties.
pub fn roc_auc(y_true: &[u8], scores: &[f64]) -> Result<f64> {
    let (pos, neg) = check_scores(y_true, scores)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut positive_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1..=j+1 share their mean
        let avg_rank = (i + j + 2) as f64 / 2.0;
        let positives = order[i..=j].iter().filter(|&&k| y_true[k] == 1).count();
        positive_rank_sum += avg_rank * positives as f64;
        i = j + 1;
    }
    let u = positive_rank_sum - (pos * (pos + 1)) as f64 / 2.0;
    Ok(u / (pos as f64 * neg as f64))
}

/// Area under the empirical ROC curve by the trapezoid rule, sweeping the
/// threshold over distinct scores from high to low.
pub fn roc_auc_trapezoid(y_true: &[u8], scores: &[f64]) -> Result<f64> {
    let (pos, neg) = check_scores(y_true, scores)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut area = 0.0;
    let mut i = 0;
    while i < order.len() {
        let (tp0, fp0) = (tp, fp);
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if y_true[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        // exact in integer counts: (fp - fp0) * (tp + tp0) / 2
        area += ((fp - fp0) * (tp + tp0)) as f64 / 2.0;
    }
    Ok(area / (pos as f64 * neg as f64))
}

/// Full bundle for a set of logits against the true labels.
pub fn evaluate_logits(y_true: &[u8], logits: &Matrix) -> Result<MetricBundle> {
    let counts = confusion(y_true, &predict_labels(logits))?;
    let mut bundle = bundle_from_counts(&counts);
    bundle.auc = roc_auc(y_true, &positive_scores(logits))?;
    Ok(bundle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn confusion_cases() {
        let c = confusion(&[1, 1, 0, 0], &[1, 0, 1, 0]).unwrap();
        assert_eq!((c.tp, c.fn_, c.fp, c.tn), (1, 1, 1, 1));
        let y = [1, 0, 0, 1, 0];
        let c = confusion(&y, &y).unwrap();
        assert_eq!((c.fp, c.fn_), (0, 0));
        assert!(matches!(confusion(&[1], &[1, 0]), Err(Error::Shape(_))));
    }

    #[test]
    fn all_majority_on_yeast4_test_split() {
        let mut y = vec![1u8; 10];
        y.extend(std::iter::repeat_n(0, 287));
        let c = confusion(&y, &vec![0; 297]).unwrap();
        assert_eq!((c.tp, c.fn_, c.fp, c.tn), (0, 10, 0, 287));
        let b = bundle_from_counts(&c);
        assert_eq!((b.recall, b.g_mean, b.precision, b.f1), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(b.balanced_accuracy, 0.5);
    }

    #[test]
    fn hand_computed_bundle() {
        let b = bundle_from_counts(&ConfusionCounts { tp: 2, fp: 1, fn_: 2, tn: 5 });
        assert_relative_eq!(b.precision, 2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(b.recall, 0.5, epsilon = 1e-12);
        assert_relative_eq!(b.specificity, 5.0 / 6.0, epsilon = 1e-12);
        assert_relative_eq!(b.f1, 4.0 / 7.0, epsilon = 1e-12);
        assert_relative_eq!(b.balanced_accuracy, 2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(b.g_mean, (5.0f64 / 12.0).sqrt(), epsilon = 1e-12);
        assert!((b.g_mean - 0.6455).abs() < 1e-4);
    }

    #[test]
    fn perfect_classifier() {
        let b = bundle_from_counts(&ConfusionCounts { tp: 3, fp: 0, fn_: 0, tn: 4 });
        assert!(b.values()[..6].iter().all(|v| *v == 1.0));
    }

    #[test]
    fn auc_cases() {
        assert_eq!(roc_auc(&[1, 0, 1, 0], &[0.9, 0.8, 0.4, 0.3]).unwrap(), 0.75);
        assert_eq!(roc_auc(&[0, 0, 1, 1], &[0.1, 0.2, 0.3, 0.4]).unwrap(), 1.0);
        assert_eq!(roc_auc(&[0, 1, 1, 0], &[0.5; 4]).unwrap(), 0.5);
        assert_eq!(roc_auc_trapezoid(&[1, 0, 1, 0], &[0.9, 0.8, 0.4, 0.3]).unwrap(), 0.75);
        assert_eq!(roc_auc_trapezoid(&[0, 1, 1, 0], &[0.5; 4]).unwrap(), 0.5);
        assert!(matches!(
            roc_auc(&[1, 1], &[0.1, 0.2]),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn predictions_from_logits() {
        let z = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0], [0.5, 0.5]]).unwrap();
        assert_eq!(predict_labels(&z), vec![1, 0, 0]);
        let s = positive_scores(&z);
        assert!(s[0] > 0.5 && s[1] < 0.5 && s[2] == 0.5);
    }
}
