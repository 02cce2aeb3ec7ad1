use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

/// Per-feature min-max scaler onto `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

/// Fits min/max on the given training rows only. Panics on an empty index set.
pub fn fit_scaler(features: &Matrix, train_indices: &[usize]) -> Scaler {
    assert!(!train_indices.is_empty(), "scaler needs training rows");
    let first = features.row(train_indices[0]);
    let mut min = first.to_vec();
    let mut max = first.to_vec();
    for &i in &train_indices[1..] {
        for (j, &v) in features.row(i).iter().enumerate() {
            min[j] = min[j].min(v);
            max[j] = max[j].max(v);
        }
    }
    Scaler { min, max }
}

/// `(x - min) / (max - min)` clamped to `[0, 1]`; constant columns map to 0.5.
///
/// Panics if the column count differs from the scaler's.
pub fn transform(scaler: &Scaler, features: &Matrix) -> Matrix {
    assert_eq!(
        features.cols(),
        scaler.min.len(),
        "scaler fitted on a different number of columns"
    );
    let mut out = features.clone();
    for i in 0..out.rows() {
        for (j, v) in out.row_mut(i).iter_mut().enumerate() {
            let (lo, hi) = (scaler.min[j], scaler.max[j]);
            *v = if hi > lo {
                ((*v - lo) / (hi - lo)).clamp(0.0, 1.0)
            } else {
                0.5
            };
        }
    }
    out
}

impl Scaler {
    pub fn transform(&self, features: &Matrix) -> Matrix {
        transform(self, features)
    }
}
