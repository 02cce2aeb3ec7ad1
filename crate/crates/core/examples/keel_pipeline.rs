//! Loads a KEEL file, binarizes it one-vs-all, splits and scales it.

use kan_imbalance::data::{binarize_ova, fit_scaler, read_keel, stratified_split, Manifest};

fn main() -> kan_imbalance::Result<()> {
    let manifest = Manifest::load(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/manifest.json"))?;
    let name = std::env::args().nth(1).unwrap_or_else(|| "ecoli3".into());
    let v = manifest.validate(&name)?;
    println!("{name}: checksum {}, shape {}, IR {:.2} (expected {:.2})", v.checksum_ok, v.shape_ok(), v.imbalance_ratio, v.expected_ir);

    let raw = read_keel(manifest.path_of(&name)?)?;
    println!("classes: {:?}", raw.class_counts());
    let ds = binarize_ova(&raw)?;
    println!("minority '{}': {} vs {}", ds.minority_class, ds.minority_count, ds.majority_count);

    let split = stratified_split(&ds.labels, 0.2, 0)?;
    let scaler = fit_scaler(&ds.features, &split.train_indices);
    let scaled = scaler.transform(&ds.features);
    let test_minority = split.test_indices.iter().filter(|&&i| ds.labels[i] == 1).count();
    println!("train {} / test {} ({test_minority} minority)", split.train_indices.len(), split.test_indices.len());
    println!("first scaled row: {:?}", scaled.row(split.train_indices[0]));
    Ok(())
}
