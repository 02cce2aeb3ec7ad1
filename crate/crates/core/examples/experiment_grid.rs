//! A reduced benchmark grid with aggregates and paired tests.

use kan_imbalance::experiment::{render_report, run_experiment, ExperimentConfig, Pairing, ReportFormat};

fn main() -> kan_imbalance::Result<()> {
    let config = ExperimentConfig {
        manifest: concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/manifest.json").into(),
        datasets: vec!["glass4".into(), "new-thyroid1".into(), "ecoli3".into()],
        seeds: vec![0, 1],
        max_epochs: 50,
        ..ExperimentConfig::default()
    };
    config.validate()?;
    let results = run_experiment(&config)?;
    for r in results.iter().take(6) {
        println!(
            "{:<13} {} {:<9} seed {} BalAcc {:.3} G-mean {:.3} {:.3}s",
            r.dataset, r.architecture, r.strategy, r.seed, r.metrics.balanced_accuracy, r.metrics.g_mean, r.wall_time_s
        );
    }
    print!("{}", render_report(&results, ReportFormat::Table, Pairing::Seed)?);
    Ok(())
}
