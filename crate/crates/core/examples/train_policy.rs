//! Trains the policy network on a dataset file and saves the model.
//!
//! cargo run --release --example train_policy -- data.csv [model.txt] [epochs]
//!
//! Without a dataset argument a small self-play dataset is collected first.

use std::path::PathBuf;

use lanefree::env::{EnvConfig, ObservationMode};
use lanefree::mcts::{MctsConfig, RewardParams};
use lanefree::nn::{collect_selfplay, load_dataset, train_with_progress, TrainConfig};

fn main() -> lanefree::Result<()> {
    let mut args = std::env::args().skip(1);
    let data = match args.next() {
        Some(path) => load_dataset(&PathBuf::from(path))?,
        None => {
            let search = MctsConfig {
                iterations: 500,
                max_rollout_depth: 1,
                mode: ObservationMode::Isotropic,
                ..MctsConfig::default()
            };
            collect_selfplay(&EnvConfig::default(), &search, &RewardParams::default(), 3000)?
        }
    };
    let out = PathBuf::from(args.next().unwrap_or_else(|| "policy.txt".to_string()));
    let epochs: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(10);

    let cfg = TrainConfig {
        epochs,
        scale_inputs: true,
        ..TrainConfig::default()
    };
    let outcome = train_with_progress(&data, &cfg, |r| {
        let val = r.validation_accuracy.map_or("-".into(), |a| format!("{a:.4}"));
        println!(
            "epoch {:>3}  lr {:.5}  loss {:.4}  train {:.4}  validation {val}",
            r.epoch, r.learning_rate, r.train_loss, r.train_accuracy
        );
    })?;
    outcome.model.save(&out)?;
    println!("model saved to {}", out.display());
    Ok(())
}
