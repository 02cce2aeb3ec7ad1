//! Dataset ingestion: KEEL parsing, one-vs-all binarization, min-max scaling
//! and stratified splitting.

mod keel;
pub mod manifest;
mod scaler;
mod split;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use keel::{parse_keel, read_keel, to_keel_string};
pub use manifest::{sha256_hex, DatasetEntry, Manifest, Validation, IR_TOLERANCE};
pub use scaler::{fit_scaler, transform, Scaler};
pub use split::{stratified_split, Split};

/// A parsed KEEL file: numeric features plus a textual class column.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub name: String,
    pub feature_names: Vec<String>,
    pub features: Matrix,
    pub labels: Vec<String>,
}

impl RawDataset {
    pub fn n_instances(&self) -> usize {
        self.features.rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    /// Class frequencies, keyed by class name.
    pub fn class_counts(&self) -> BTreeMap<&str, usize> {
        let mut counts = BTreeMap::new();
        for l in &self.labels {
            *counts.entry(l.as_str()).or_insert(0) += 1;
        }
        counts
    }
}

/// Two-class view of a dataset; label `1` is the minority class.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryDataset {
    pub name: String,
    pub features: Matrix,
    pub labels: Vec<u8>,
    pub minority_class: String,
    pub minority_count: usize,
    pub majority_count: usize,
    pub imbalance_ratio: f64,
}

impl BinaryDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Builds a binary dataset from 0/1 labels, computing the class summary.
    pub fn from_labels(
        name: impl Into<String>,
        features: Matrix,
        labels: Vec<u8>,
        minority_class: impl Into<String>,
    ) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::Shape(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        let minority_count = labels.iter().filter(|&&l| l == 1).count();
        let majority_count = labels.len() - minority_count;
        if minority_count == 0 || majority_count == 0 {
            return Err(Error::DegenerateDataset(
                "binary dataset needs both classes".into(),
            ));
        }
        Ok(BinaryDataset {
            name: name.into(),
            features,
            labels,
            minority_class: minority_class.into(),
            minority_count,
            majority_count,
            imbalance_ratio: majority_count as f64 / minority_count as f64,
        })
    }
}

/// One-vs-all binarization: the least frequent class becomes label 1 and every
/// other class is merged into label 0. Frequency ties go to the
/// lexicographically smallest class name.
pub fn binarize_ova(raw: &RawDataset) -> Result<BinaryDataset> {
    let counts = raw.class_counts();
    if counts.len() < 2 {
        return Err(Error::DegenerateDataset(format!(
            "{}: one-vs-all needs at least two classes, found {}",
            raw.name,
            counts.len()
        )));
    }
    // BTreeMap iterates names in order, so min_by_key keeps the smallest name on ties
    let (minority, _) = counts
        .iter()
        .min_by_key(|(_, &c)| c)
        .expect("at least two classes");
    let minority = minority.to_string();
    let labels = raw
        .labels
        .iter()
        .map(|l| u8::from(*l == minority))
        .collect();
    BinaryDataset::from_labels(raw.name.clone(), raw.features.clone(), labels, minority)
}
