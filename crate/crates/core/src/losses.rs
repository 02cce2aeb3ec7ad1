//! Two-class softmax, weighted cross-entropy and focal loss over raw logits.
//!
//! Every loss averages over the batch and returns `dloss/dlogits` with the
//! `1/n` already applied, so model gradients are plain batch sums.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Probabilities are kept inside `[P_FLOOR, 1 - P_FLOOR]` by the focal loss.
pub const P_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FocalParams {
    pub gamma: f64,
    /// `[alpha_majority, alpha_minority]`, indexed by label.
    pub alpha: [f64; 2],
}

impl FocalParams {
    pub fn new(gamma: f64, alpha: [f64; 2]) -> Result<Self> {
        let p = FocalParams { gamma, alpha };
        p.validate()?;
        Ok(p)
    }

    /// Inverse-frequency weighting: each class is weighted by the other
    /// class's share of the training labels.
    pub fn inverse_frequency(gamma: f64, labels: &[u8]) -> Result<Self> {
        let n = labels.len();
        let minority = labels.iter().filter(|&&l| l == 1).count();
        if n == 0 || minority == 0 || minority == n {
            return Err(Error::DegenerateDataset(
                "inverse-frequency weights need both classes".into(),
            ));
        }
        let majority = n - minority;
        FocalParams::new(
            gamma,
            [minority as f64 / n as f64, majority as f64 / n as f64],
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!("focal gamma must be >= 0, got {}", self.gamma)));
        }
        if self.alpha.iter().any(|a| !(*a > 0.0 && *a <= 1.0)) {
            return Err(Error::Config(format!(
                "focal alphas must lie in (0, 1], got {:?}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Training objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Loss {
    CrossEntropy { class_weights: [f64; 2] },
    Focal(FocalParams),
}

impl Loss {
    pub fn unweighted_cross_entropy() -> Self {
        Loss::CrossEntropy {
            class_weights: [1.0, 1.0],
        }
    }

    pub fn evaluate(&self, logits: &Matrix, labels: &[u8]) -> Result<(f64, Matrix)> {
        match self {
            Loss::CrossEntropy { class_weights } => cross_entropy(logits, labels, *class_weights),
            Loss::Focal(p) => focal_loss(logits, labels, p),
        }
    }
}

/// Numerically stable two-class softmax.
pub fn softmax2(z0: f64, z1: f64) -> Result<(f64, f64)> {
    if !(z0.is_finite() && z1.is_finite()) {
        return Err(Error::Numeric(format!("non-finite logits ({z0}, {z1})")));
    }
    let m = z0.max(z1);
    let e0 = (z0 - m).exp();
    let e1 = (z1 - m).exp();
    let s = e0 + e1;
    Ok((e0 / s, e1 / s))
}

/// Probabilities and log-probabilities from one pair of exponentials.
fn softmax_log2(z0: f64, z1: f64) -> Result<([f64; 2], [f64; 2])> {
    if !(z0.is_finite() && z1.is_finite()) {
        return Err(Error::Numeric(format!("non-finite logits ({z0}, {z1})")));
    }
    let m = z0.max(z1);
    let e0 = (z0 - m).exp();
    let e1 = (z1 - m).exp();
    let s = e0 + e1;
    let lse = m + s.ln();
    Ok(([e0 / s, e1 / s], [z0 - lse, z1 - lse]))
}

fn check_batch(logits: &Matrix, labels: &[u8]) -> Result<()> {
    if logits.rows() == 0 {
        return Err(Error::EmptyBatch);
    }
    if logits.cols() != 2 || logits.rows() != labels.len() {
        return Err(Error::Shape(format!(
            "logits {:?} do not match {} labels",
            logits.shape(),
            labels.len()
        )));
    }
    if let Some(l) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::Shape(format!("label {l} is not 0 or 1")));
    }
    Ok(())
}

/// Mean of `-w_y log p_y`.
pub fn cross_entropy(logits: &Matrix, labels: &[u8], class_weights: [f64; 2]) -> Result<(f64, Matrix)> {
    check_batch(logits, labels)?;
    let n = labels.len() as f64;
    let mut total = 0.0;
    let mut grad = Matrix::zeros(logits.rows(), 2);
    for (i, &y) in labels.iter().enumerate() {
        let (z0, z1) = (logits.get(i, 0), logits.get(i, 1));
        let ([p0, p1], log_p) = softmax_log2(z0, z1)?;
        let t = usize::from(y);
        let w = class_weights[t];
        total -= w * log_p[t];
        let onehot = [f64::from(u8::from(t == 0)), f64::from(u8::from(t == 1))];
        grad.set(i, 0, w * (p0 - onehot[0]) / n);
        grad.set(i, 1, w * (p1 - onehot[1]) / n);
    }
    Ok((total / n, grad))
}

/// Per-sample focal term `-alpha (1 - p)^gamma ln p` for true-class probability `p`.
pub fn focal_term(p: f64, alpha: f64, gamma: f64) -> f64 {
    let p = p.clamp(P_FLOOR, 1.0 - P_FLOOR);
    -alpha * (1.0 - p).powf(gamma) * p.ln()
}

/// Mean of `-alpha_y (1 - p_y)^gamma ln p_y` with `p_y` from the softmax of the logits.
pub fn focal_loss(logits: &Matrix, labels: &[u8], params: &FocalParams) -> Result<(f64, Matrix)> {
    check_batch(logits, labels)?;
    params.validate()?;
    let gamma = params.gamma;
    let n = labels.len() as f64;
    let log_floor = P_FLOOR.ln();
    let log_ceiling = (1.0 - P_FLOOR).ln();
    let mut total = 0.0;
    let mut grad = Matrix::zeros(logits.rows(), 2);
    for (i, &y) in labels.iter().enumerate() {
        let (z0, z1) = (logits.get(i, 0), logits.get(i, 1));
        let (probs, log_probs) = softmax_log2(z0, z1)?;
        let t = usize::from(y);
        let alpha = params.alpha[t];
        let raw_log_p = log_probs[t];
        let clamped = raw_log_p < log_floor || raw_log_p > log_ceiling;
        let log_p = raw_log_p.clamp(log_floor, log_ceiling);
        let p = log_p.exp();
        let q = 1.0 - p;
        let modulator = if gamma == 0.0 { 1.0 } else { q.powf(gamma) };
        total -= alpha * modulator * log_p;
        if clamped {
            continue;
        }
        // dL/dz_j = alpha [ (1-p)^g - g p (1-p)^(g-1) ln p ] (p_j - [j == t])
        let factor = if gamma == 0.0 {
            1.0
        } else {
            modulator - gamma * p * q.powf(gamma - 1.0) * log_p
        };
        for j in 0..2 {
            let onehot = if j == t { 1.0 } else { 0.0 };
            grad.set(i, j, alpha * factor * (probs[j] - onehot) / n);
        }
    }
    Ok((total / n, grad))
}
