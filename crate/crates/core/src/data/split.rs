use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng;

/// Disjoint, sorted train/test index sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
}

/// Per-class stratified split of `labels`.
///
/// Each class sends `round(count * test_fraction)` instances to the test
/// side, at least one and never all of them.
pub fn stratified_split(labels: &[u8], test_fraction: f64, seed: u64) -> Result<Split> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [0u8, 1u8] {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        if members.len() < 2 {
            return Err(Error::DegenerateDataset(format!(
                "class {class} has {} instance(s); a stratified split needs at least 2",
                members.len()
            )));
        }
        let n_test = ((members.len() as f64 * test_fraction).round() as usize)
            .clamp(1, members.len() - 1);
        let mut rng = rng::stream(seed, &[rng::label::SPLIT, u64::from(class)]);
        members.shuffle(&mut rng);
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split {
        train_indices: train,
        test_indices: test,
        seed,
    })
}
