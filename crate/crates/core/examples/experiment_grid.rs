//! A small resumable experiment grid: raw results, aggregate mean ± SD and
//! per-episode wall-clock times are written next to each other.
//!
//! cargo run --release --example experiment_grid -- [results.csv]

use lanefree::experiment::{aggregate_path, run_grid, Algorithm, Config, ExperimentPlan};

fn main() -> lanefree::Result<()> {
    let out = std::path::PathBuf::from(
        std::env::args().nth(1).unwrap_or_else(|| "grid.csv".to_string()),
    );
    let cfg = Config {
        experiment: ExperimentPlan {
            algorithms: vec![Algorithm::Mcts, Algorithm::MctsNudging],
            iterations: vec![20, 50],
            seeds: vec![1, 2],
            duration: Some(30.0),
            ..ExperimentPlan::default()
        },
        ..Config::default()
    };
    let summary = run_grid(&cfg, &cfg.experiment, &out, |row| {
        println!("{}", row.to_csv());
    })?;
    println!(
        "completed {} failed {} skipped {}",
        summary.completed, summary.failed, summary.skipped
    );
    let agg = aggregate_path(&out);
    print!("{}", std::fs::read_to_string(&agg).unwrap_or_default());
    Ok(())
}
