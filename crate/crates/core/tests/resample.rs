use kan_imbalance::data::{fit_scaler, stratified_split};
use kan_imbalance::experiment::runner::load_dataset;
use kan_imbalance::experiment::{prepare, ExperimentConfig};
use kan_imbalance::resample::{smote, smote_tomek, tomek_links, ResamplePlan};
use kan_imbalance::data::Manifest;
use kan_imbalance::{Error, Matrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn manifest() -> Manifest {
    Manifest::load(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/manifest.json")).unwrap()
}

fn random_set(seed: u64) -> (Matrix, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_min = rng.gen_range(2..12);
    let n_maj = rng.gen_range(n_min..60);
    let d = rng.gen_range(1..5);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n_min + n_maj {
        let minority = i < n_min;
        let centre = if minority { 0.3 } else { 0.6 };
        rows.push((0..d).map(|_| centre + rng.gen_range(-0.3..0.3)).collect::<Vec<f64>>());
        labels.push(u8::from(minority));
    }
    (Matrix::from_rows(&rows).unwrap(), labels)
}

#[test]
fn yeast4_full_dataset_synthetic_count() {
    let ds = load_dataset(&manifest(), "yeast4").unwrap();
    let all: Vec<usize> = (0..ds.len()).collect();
    let scaled = fit_scaler(&ds.features, &all).transform(&ds.features);
    let plan = ResamplePlan { seed: 1, ..ResamplePlan::default() };
    let out = smote(&scaled, &ds.labels, &plan).unwrap();
    assert_eq!(out.n_synthetic, 1433 - 51);
}

#[test]
fn yeast4_train_split_accounting() {
    let ds = load_dataset(&manifest(), "yeast4").unwrap();
    let config = ExperimentConfig::default();
    let p = prepare(&ds, &config, 0).unwrap();
    let out = smote_tomek(&p.fit_features, &p.fit_labels, &ResamplePlan::default()).unwrap();
    let minority = out.labels.iter().filter(|&&l| l == 1).count();
    let majority = out.labels.len() - minority;
    assert_eq!(out.labels.len(), p.fit_labels.len() + out.n_synthetic - out.n_removed_by_tomek);
    assert!(minority.abs_diff(majority) <= out.n_removed_by_tomek);
    // removals only touch the majority class
    assert_eq!(minority, p.fit_labels.iter().filter(|&&l| l == 1).count() + out.n_synthetic);
}

#[test]
fn split_test_partition_is_independent_of_resampling() {
    let ds = load_dataset(&manifest(), "glass4").unwrap();
    let config = ExperimentConfig::default();
    let before = prepare(&ds, &config, 3).unwrap();
    let _ = smote_tomek(&before.fit_features, &before.fit_labels, &ResamplePlan::default()).unwrap();
    let after = prepare(&ds, &config, 3).unwrap();
    assert_eq!(before.test_features.digest(), after.test_features.digest());
    assert_eq!(before.test_labels, after.test_labels);
    let split = stratified_split(&ds.labels, config.test_fraction, 3).unwrap();
    assert_eq!(split.test_indices.len(), before.test_labels.len());
}

#[test]
fn tiny_minority_lowers_k() {
    let x = Matrix::from_rows(&[[0.0], [0.1], [0.2], [5.0], [5.1], [5.2], [5.3], [5.4]]).unwrap();
    let y = [1, 1, 1, 0, 0, 0, 0, 0];
    let out = smote(&x, &y, &ResamplePlan { k_neighbors: 5, ..ResamplePlan::default() }).unwrap();
    assert_eq!(out.n_synthetic, 2);
    assert!(matches!(smote(&x, &[1, 0, 0, 0, 0, 0, 0, 0], &ResamplePlan::default()), Err(Error::Resample(_))));
}

#[test]
fn tomek_one_dimensional_example() {
    let x = Matrix::from_rows(&[[0.0], [0.1], [5.0]]).unwrap();
    assert_eq!(tomek_links(&x, &[1, 0, 0]).unwrap(), vec![(0, 1)]);
}

proptest! {
    #[test]
    fn accounting_and_segments(seed in any::<u64>(), plan_seed in any::<u64>(), k in 1usize..6) {
        let (x, y) = random_set(seed);
        let plan = ResamplePlan { k_neighbors: k, target_ratio: 1.0, seed: plan_seed };
        let out = smote_tomek(&x, &y, &plan).unwrap();
        prop_assert_eq!(out.labels.len(), y.len() + out.n_synthetic - out.n_removed_by_tomek);
        prop_assert_eq!(out.sources.len(), out.n_synthetic);
        let sm = smote(&x, &y, &plan).unwrap();
        for (s, src) in out.sources.iter().enumerate() {
            prop_assert!(y[src.base] == 1 && y[src.neighbor] == 1);
            prop_assert!((0.0..1.0).contains(&src.gap));
            let row = sm.features.row(y.len() + s);
            let (a, b) = (x.row(src.base), x.row(src.neighbor));
            for j in 0..x.cols() {
                prop_assert!((row[j] - (a[j] + src.gap * (b[j] - a[j]))).abs() < 1e-12);
                let (lo, hi) = (a[j].min(b[j]), a[j].max(b[j]));
                prop_assert!(row[j] >= lo - 1e-12 && row[j] <= hi + 1e-12);
            }
        }
        for &r in &out.removed {
            prop_assert_eq!(sm.labels[r], 0);
        }
        prop_assert_eq!(smote_tomek(&x, &y, &plan).unwrap(), out);
    }

    #[test]
    fn links_are_mutual_and_cross_class(seed in any::<u64>()) {
        let (x, y) = random_set(seed);
        for (i, j) in tomek_links(&x, &y).unwrap() {
            prop_assert!(i < j && y[i] != y[j]);
            let d = |a: usize, b: usize| -> f64 {
                x.row(a).iter().zip(x.row(b)).map(|(p, q)| (p - q) * (p - q)).sum()
            };
            for m in 0..y.len() {
                if m != i && m != j {
                    prop_assert!(d(i, m) >= d(i, j) && d(j, m) >= d(i, j));
                }
            }
        }
    }
}
