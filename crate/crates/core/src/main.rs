use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kan_imbalance::data::Manifest;
use kan_imbalance::experiment::config::parse_list;
use kan_imbalance::experiment::{
    check_test_integrity, emit_reports, ensure_writable_dir, read_results_csv, render_report, run_experiment_with,
    ExperimentConfig, Pairing, ReportFormat, ResultsWriter, Strategy,
};

#[derive(Parser)]
#[command(name = "kanimb", version, about = "KAN vs MLP benchmark on imbalanced KEEL datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment grid and write results.csv, summary.json and report.txt.
    Run {
        /// JSON experiment config; flags below override its fields
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated dataset names.
        #[arg(long)]
        datasets: Option<String>,
        /// Comma-separated subset of baseline,resampled,focal.
        #[arg(long)]
        strategies: Option<String>,
        /// Comma-separated integer seeds.
        #[arg(long)]
        seeds: Option<String>,
        /// Output directory (default: results)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads
        #[arg(long)]
        jobs: Option<usize>,
        /// Run the timed training loops one at a time even with --jobs > 1.
        #[arg(long)]
        sequential_timing: bool,
    },
    /// Download missing datasets listed in the manifest and verify checksums.
    Fetch {
        #[arg(long, default_value = "data/manifest.json")]
        manifest: PathBuf,
    },
    /// Aggregate an existing results.csv.
    Report {
        #[arg(long)]
        results: PathBuf,
        #[arg(long, default_value = "table")]
        format: ReportFormat,
        /// Pair per dataset (seed-medians) or per seed.
        #[arg(long, default_value = "dataset")]
        pairing: String,
    },
    /// Check every manifest dataset against its expected shape, imbalance ratio and checksum.
    ValidateData {
        #[arg(long, default_value = "data/manifest.json")]
        manifest: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Run {
            config,
            datasets,
            strategies,
            seeds,
            out,
            jobs,
            sequential_timing,
        } => {
            let mut cfg = match config {
                Some(p) => ExperimentConfig::load(p)?,
                None => ExperimentConfig::default(),
            };
            if let Some(d) = datasets {
                cfg.datasets = parse_list(&d)?;
            }
            if let Some(s) = strategies {
                cfg.strategies = parse_list::<Strategy>(&s)?;
            }
            if let Some(s) = seeds {
                cfg.seeds = parse_list(&s)?;
            }
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            if let Some(j) = jobs {
                cfg.jobs = j;
            }
            if sequential_timing {
                cfg.sequential_timing = true;
            }
            run(&cfg)
        }
        Command::Fetch { manifest } => {
            let m = Manifest::load(&manifest)?;
            let mut failed = 0;
            for name in m.datasets.keys() {
                match m.fetch(name) {
                    Ok(true) => println!("{name}: downloaded"),
                    Ok(false) => println!("{name}: present"),
                    Err(e) => {
                        failed += 1;
                        println!("{name}: FAILED ({e})");
                    }
                }
            }
            Ok(exit(failed == 0))
        }
        Command::Report {
            results,
            format,
            pairing,
        } => {
            let pairing = match pairing.as_str() {
                "dataset" | "dataset_median" => Pairing::DatasetMedian,
                "seed" => Pairing::Seed,
                other => anyhow::bail!("unknown pairing `{other}` (dataset or seed)"),
            };
            let rows = read_results_csv(&results)?;
            print!("{}", render_report(&rows, format, pairing)?);
            Ok(exit(rows.iter().all(|r| r.is_ok())))
        }
        Command::ValidateData { manifest } => {
            let m = Manifest::load(&manifest)?;
            let mut all = true;
            println!(
                "{:<26} {:>9} {:>8} {:>8} {:>8} {:>8}  verdict",
                "dataset", "instances", "features", "IR", "ref IR", "checksum"
            );
            for v in m.validate_all()? {
                all &= v.passed();
                println!(
                    "{:<26} {:>9} {:>8} {:>8.3} {:>8.2} {:>8}  {}",
                    v.name,
                    v.instances,
                    v.features,
                    v.imbalance_ratio,
                    v.expected_ir,
                    if v.checksum_ok { "ok" } else { "MISMATCH" },
                    match (&v.error, v.passed()) {
                        (Some(e), _) => format!("FAIL ({e})"),
                        (None, true) => "PASS".into(),
                        (None, false) if !v.shape_ok() => "FAIL (shape)".into(),
                        (None, false) if !v.ir_ok() => "FAIL (imbalance ratio)".into(),
                        (None, false) => "FAIL (checksum)".into(),
                    }
                );
            }
            Ok(exit(all))
        }
    }
}

fn run(cfg: &ExperimentConfig) -> anyhow::Result<ExitCode> {
    cfg.validate()?;
    ensure_writable_dir(&cfg.out_dir)?;
    let mut writer = ResultsWriter::create(cfg.out_dir.join("results.csv"))?;
    let results = run_experiment_with(cfg, |r| writer.append(r))?;
    drop(writer);
    check_test_integrity(&results)?;
    let summary = emit_reports(&cfg.out_dir, &results, Some(cfg))?;
    println!("wrote {} rows to {}", results.len(), cfg.out_dir.display());
    if summary.n_failed > 0 {
        eprintln!("{} cell(s) failed", summary.n_failed);
    }
    Ok(exit(summary.n_failed == 0))
}

fn exit(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
