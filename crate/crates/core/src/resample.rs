//! SMOTE oversampling, Tomek links and the combined SMOTE-Tomek cleaning.
//!
//! Label 1 is the minority class. Neighbour searches are exact brute force
//! on Euclidean distance; distance ties resolve to the lower index.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResamplePlan {
    pub k_neighbors: usize,
    /// Minority/majority ratio SMOTE oversamples up to.
    pub target_ratio: f64,
    pub seed: u64,
}

impl Default for ResamplePlan {
    fn default() -> Self {
        ResamplePlan {
            k_neighbors: 5,
            target_ratio: 1.0,
            seed: 0,
        }
    }
}

impl ResamplePlan {
    pub fn validate(&self) -> Result<()> {
        if self.k_neighbors < 1 {
            return Err(Error::Config("SMOTE needs k_neighbors >= 1".into()));
        }
        if !(self.target_ratio > 0.0 && self.target_ratio <= 1.0) {
            return Err(Error::Config(format!(
                "target ratio must lie in (0, 1], got {}",
                self.target_ratio
            )));
        }
        Ok(())
    }
}

/// Where a synthetic sample came from: `base + gap * (neighbor - base)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSource {
    pub base: usize,
    pub neighbor: usize,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoteOutput {
    /// Original rows followed by the synthetic ones.
    pub features: Matrix,
    pub labels: Vec<u8>,
    pub n_synthetic: usize,
    /// One entry per synthetic row, indices into the input.
    pub sources: Vec<SyntheticSource>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResampleOutcome {
    pub features: Matrix,
    pub labels: Vec<u8>,
    pub n_synthetic: usize,
    pub n_removed_by_tomek: usize,
    pub sources: Vec<SyntheticSource>,
    /// Rows of the SMOTE-augmented set that Tomek cleaning dropped.
    pub removed: Vec<usize>,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_inputs(features: &Matrix, labels: &[u8]) -> Result<()> {
    if features.rows() != labels.len() {
        return Err(Error::Shape(format!(
            "{} rows but {} labels",
            features.rows(),
            labels.len()
        )));
    }
    Ok(())
}

/// The `k` nearest other members of `pool` for `pool[at]`, closest first.
fn nearest_in_pool(features: &Matrix, pool: &[usize], at: usize, k: usize) -> Vec<usize> {
    let me = features.row(pool[at]);
    let mut cand: Vec<(f64, usize)> = pool
        .iter()
        .enumerate()
        .filter(|(p, _)| *p != at)
        .map(|(p, &i)| (squared_distance(me, features.row(i)), p))
        .collect();
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(pool[a.1].cmp(&pool[b.1])));
    cand.truncate(k);
    cand.into_iter().map(|(_, p)| p).collect()
}

/// SMOTE up to `ceil(target_ratio * majority)` minority rows.
///
/// Each synthetic row interpolates a uniformly drawn minority row towards
/// one of its `k` nearest minority neighbours (`k` is lowered to
/// `minority - 1` when needed).
pub fn smote(features: &Matrix, labels: &[u8], plan: &ResamplePlan) -> Result<SmoteOutput> {
    check_inputs(features, labels)?;
    plan.validate()?;
    let minority: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 1).collect();
    let n_majority = labels.len() - minority.len();
    if minority.len() < 2 {
        return Err(Error::Resample(format!(
            "SMOTE needs at least 2 minority rows, found {}",
            minority.len()
        )));
    }
    let target = (plan.target_ratio * n_majority as f64).ceil() as usize;
    let n_synthetic = target.saturating_sub(minority.len());

    let mut out_features = features.clone();
    let mut out_labels = labels.to_vec();
    let mut sources = Vec::with_capacity(n_synthetic);
    if n_synthetic == 0 {
        return Ok(SmoteOutput {
            features: out_features,
            labels: out_labels,
            n_synthetic,
            sources,
        });
    }

    let k = plan.k_neighbors.min(minority.len() - 1);
    let neighbours: Vec<Vec<usize>> = (0..minority.len())
        .map(|p| nearest_in_pool(features, &minority, p, k))
        .collect();
    let mut rng = rng::stream(plan.seed, &[rng::label::SMOTE]);
    let mut row = vec![0.0; features.cols()];
    for _ in 0..n_synthetic {
        let p = rng.gen_range(0..minority.len());
        let q = neighbours[p][rng.gen_range(0..k)];
        let gap: f64 = rng.gen();
        let (base, neighbor) = (minority[p], minority[q]);
        let (a, b) = (features.row(base), features.row(neighbor));
        for ((r, x), y) in row.iter_mut().zip(a).zip(b) {
            *r = x + gap * (y - x);
        }
        out_features.push_row(&row)?;
        out_labels.push(1);
        sources.push(SyntheticSource {
            base,
            neighbor,
            gap,
        });
    }
    Ok(SmoteOutput {
        features: out_features,
        labels: out_labels,
        n_synthetic,
        sources,
    })
}

/// Cross-class mutual nearest-neighbour pairs `(i, j)` with `i < j`.
pub fn tomek_links(features: &Matrix, labels: &[u8]) -> Result<Vec<(usize, usize)>> {
    check_inputs(features, labels)?;
    let n = labels.len();
    if !(labels.contains(&0) && labels.contains(&1)) {
        return Err(Error::Resample("Tomek links need both classes".into()));
    }
    let mut nearest = vec![usize::MAX; n];
    let mut best = vec![f64::INFINITY; n];
    for i in 0..n {
        let ri = features.row(i);
        for j in (i + 1)..n {
            let d = squared_distance(ri, features.row(j));
            // strict comparisons keep the lower index on ties, since j grows
            if d < best[i] {
                best[i] = d;
                nearest[i] = j;
            }
            if d < best[j] {
                best[j] = d;
                nearest[j] = i;
            }
        }
    }
    Ok((0..n)
        .filter_map(|i| {
            let j = nearest[i];
            (j != usize::MAX && i < j && nearest[j] == i && labels[i] != labels[j])
                .then_some((i, j))
        })
        .collect())
}

/// SMOTE, then removal of the majority member of every Tomek link found on
/// the augmented set.
pub fn smote_tomek(features: &Matrix, labels: &[u8], plan: &ResamplePlan) -> Result<ResampleOutcome> {
    let sm = smote(features, labels, plan)?;
    let links = tomek_links(&sm.features, &sm.labels)?;
    let mut removed: Vec<usize> = links
        .iter()
        .map(|&(i, j)| if sm.labels[i] == 0 { i } else { j })
        .collect();
    removed.sort_unstable();
    removed.dedup();
    let mut drop = vec![false; sm.labels.len()];
    for &r in &removed {
        drop[r] = true;
    }
    let keep: Vec<usize> = (0..sm.labels.len()).filter(|&i| !drop[i]).collect();
    Ok(ResampleOutcome {
        features: sm.features.select_rows(&keep),
        labels: keep.iter().map(|&i| sm.labels[i]).collect(),
        n_synthetic: sm.n_synthetic,
        n_removed_by_tomek: removed.len(),
        sources: sm.sources,
        removed,
    })
}
