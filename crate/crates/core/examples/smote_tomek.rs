//! SMOTE followed by Tomek-link cleaning on the yeast4 training split.

use kan_imbalance::data::Manifest;
use kan_imbalance::experiment::runner::load_dataset;
use kan_imbalance::experiment::{prepare, ExperimentConfig};
use kan_imbalance::resample::{smote_tomek, ResamplePlan};

fn main() -> kan_imbalance::Result<()> {
    let manifest = Manifest::load(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/manifest.json"))?;
    let ds = load_dataset(&manifest, "yeast4")?;
    let p = prepare(&ds, &ExperimentConfig::default(), 0)?;
    let count = |l: &[u8]| (l.iter().filter(|&&v| v == 0).count(), l.iter().filter(|&&v| v == 1).count());

    let (maj, min) = count(&p.fit_labels);
    println!("before: {maj} majority / {min} minority");
    let out = smote_tomek(&p.fit_features, &p.fit_labels, &ResamplePlan::default())?;
    let (maj, min) = count(&out.labels);
    println!(
        "after:  {maj} majority / {min} minority ({} synthetic, {} removed by Tomek links)",
        out.n_synthetic, out.n_removed_by_tomek
    );
    for s in out.sources.iter().take(3) {
        println!("synthetic from row {} towards row {} at gap {:.3}", s.base, s.neighbor, s.gap);
    }
    Ok(())
}
