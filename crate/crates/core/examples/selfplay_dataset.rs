//! Collects (observation, chosen action) rows from isotropic MCTS self-play
//! and writes them as a 63-column CSV dataset.
//!
//! cargo run --release --example selfplay_dataset -- [rows] [out.csv]

use lanefree::env::{EnvConfig, ObservationMode};
use lanefree::mcts::{MctsConfig, RewardParams};
use lanefree::nn::{collect_selfplay, save_dataset};

fn main() -> lanefree::Result<()> {
    let mut args = std::env::args().skip(1);
    let rows: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(2000);
    let out = args.next().unwrap_or_else(|| "selfplay.csv".to_string());

    let search = MctsConfig {
        iterations: 1000,
        mode: ObservationMode::Isotropic,
        ..MctsConfig::default()
    };
    let data = collect_selfplay(&EnvConfig::default(), &search, &RewardParams::default(), rows)?;
    save_dataset(&data, std::path::Path::new(&out))?;

    let mut counts = [0usize; 15];
    for row in &data {
        counts[row.label.get()] += 1;
    }
    println!("{} rows written to {out}", data.len());
    println!("label histogram: {counts:?}");
    Ok(())
}
