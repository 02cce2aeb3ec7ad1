//! Paired comparisons across datasets: Wilcoxon signed-rank test with exact
//! null distribution for small samples, and the paired effect size `d_z`.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest effective sample size for which the exact null distribution is used.
pub const EXACT_MAX_N: usize = 20;

/// Two aligned samples, e.g. one value per dataset for each of two conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    condition_a: Vec<f64>,
    condition_b: Vec<f64>,
}

impl PairedSample {
    pub fn new(condition_a: Vec<f64>, condition_b: Vec<f64>) -> Result<Self> {
        if condition_a.len() != condition_b.len() {
            return Err(Error::Shape(format!(
                "paired samples differ in length ({} vs {})",
                condition_a.len(),
                condition_b.len()
            )));
        }
        if condition_a.len() < 2 {
            return Err(Error::DegenerateTest("need at least two pairs".into()));
        }
        if condition_a.iter().chain(&condition_b).any(|v| !v.is_finite()) {
            return Err(Error::Numeric("paired sample contains non-finite values".into()));
        }
        Ok(PairedSample {
            condition_a,
            condition_b,
        })
    }

    pub fn condition_a(&self) -> &[f64] {
        &self.condition_a
    }

    pub fn condition_b(&self) -> &[f64] {
        &self.condition_b
    }

    /// `a_i - b_i`.
    pub fn differences(&self) -> Vec<f64> {
        self.condition_a
            .iter()
            .zip(&self.condition_b)
            .map(|(a, b)| a - b)
            .collect()
    }

    pub fn swapped(&self) -> Self {
        PairedSample {
            condition_a: self.condition_b.clone(),
            condition_b: self.condition_a.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// `min(W+, W-)`.
    pub statistic: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    /// Two-sided.
    pub p_value: f64,
    /// Pairs left after dropping zero differences.
    pub n_effective: usize,
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub effect_size_d: f64,
    pub n_effective: usize,
}

/// Average ranks of `values` (1-based), doubled so that they are integers.
fn doubled_average_ranks(values: &[f64]) -> (Vec<u64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0u64; values.len()];
    let mut tie_sizes = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // mean of ranks i+1..=j+1, times two
        let doubled = (i + j + 2) as u64;
        for &k in &order[i..=j] {
            ranks[k] = doubled;
        }
        tie_sizes.push(j - i + 1);
        i = j + 1;
    }
    (ranks, tie_sizes)
}

/// Number of sign assignments giving each doubled positive-rank sum.
fn sign_sum_counts(doubled_ranks: &[u64]) -> Vec<u64> {
    let total: u64 = doubled_ranks.iter().sum();
    let mut counts = vec![0u64; total as usize + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for &r in doubled_ranks {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] > 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    counts
}

/// Wilcoxon signed-rank test on `a - b`.
///
/// Zero differences are dropped and tied magnitudes share average ranks. For
/// up to [`EXACT_MAX_N`] remaining pairs the two-sided p-value counts, over
/// all `2^n` sign assignments, those whose `min(W+, W-)` is no larger than
/// the observed one. Larger samples use the normal approximation with tie and
/// continuity corrections.
pub fn wilcoxon_signed_rank(sample: &PairedSample) -> Result<WilcoxonResult> {
    let diffs: Vec<f64> = sample
        .differences()
        .into_iter()
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return Err(Error::DegenerateTest("all paired differences are zero".into()));
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, ties) = doubled_average_ranks(&magnitudes);
    let total: u64 = ranks.iter().sum();
    let plus2: u64 = ranks
        .iter()
        .zip(&diffs)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| *r)
        .sum();
    let minus2 = total - plus2;
    let w2 = plus2.min(minus2);

    let (p_value, exact) = if n <= EXACT_MAX_N {
        let counts = sign_sum_counts(&ranks);
        let extreme: u64 = counts
            .iter()
            .enumerate()
            .filter(|(s, _)| (*s as u64).min(total - *s as u64) <= w2)
            .map(|(_, c)| *c)
            .sum();
        (extreme as f64 / 2f64.powi(n as i32), true)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let tie_term: f64 = ties
            .iter()
            .map(|&t| {
                let t = t as f64;
                t * t * t - t
            })
            .sum::<f64>()
            / 48.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
        let w = w2 as f64 / 2.0;
        let z = ((mean - w).abs() - 0.5).max(0.0) / var.sqrt();
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        (2.0 * normal.cdf(-z), false)
    };

    Ok(WilcoxonResult {
        statistic: w2 as f64 / 2.0,
        w_plus: plus2 as f64 / 2.0,
        w_minus: minus2 as f64 / 2.0,
        p_value: p_value.min(1.0),
        n_effective: n,
        exact,
    })
}

/// Paired Cohen's d (`d_z`): mean of `a - b` over its sample standard deviation.
pub fn cohens_d_paired(sample: &PairedSample) -> Result<f64> {
    let d = sample.differences();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    // relative guard: constant differences can leave rounding noise in the variance
    if sd == 0.0 || sd <= 1e-12 * mean.abs() {
        return Err(Error::DegenerateTest(
            "paired differences have zero variance".into(),
        ));
    }
    Ok(mean / sd)
}

/// Wilcoxon p-value together with the paired effect size.
pub fn paired_test(sample: &PairedSample) -> Result<TestResult> {
    let w = wilcoxon_signed_rank(sample)?;
    let d = cohens_d_paired(sample)?;
    Ok(TestResult {
        statistic: w.statistic,
        p_value: w.p_value,
        effect_size_d: d,
        n_effective: w.n_effective,
    })
}
