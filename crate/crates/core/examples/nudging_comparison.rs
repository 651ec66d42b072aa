//! Front-only MCTS against isotropic ("nudging") MCTS on identical traffic.
//!
//! cargo run --release --example nudging_comparison -- [seconds] [iterations]

use lanefree::env::{LogFilter, ObservationMode};
use lanefree::experiment::{run_algorithm, Algorithm, Config};

fn main() -> lanefree::Result<()> {
    let mut args = std::env::args().skip(1);
    let seconds: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(120.0);
    let iterations: u32 = args.next().and_then(|a| a.parse().ok()).unwrap_or(50);

    let cfg = Config::default();
    for algorithm in [Algorithm::Mcts, Algorithm::MctsNudging] {
        let search = lanefree::mcts::MctsConfig {
            iterations,
            seed: 1,
            ..cfg.mcts
        };
        let env_cfg = lanefree::env::EnvConfig {
            seed: 1,
            ..cfg.env.clone()
        };
        let episode = run_algorithm(&cfg, env_cfg, search, algorithm, None, seconds, &LogFilter::Off)?;
        let mode = match algorithm.observation_mode() {
            ObservationMode::FrontOnly => "front-only",
            ObservationMode::Isotropic => "isotropic",
        };
        let m = episode.metrics;
        println!(
            "{:<13} ({mode:<10}) collisions {:>3}  speed {:>7.3}  delay {:>7.3}",
            algorithm.name(),
            m.collisions,
            m.speed_average,
            m.delay_average
        );
    }
    Ok(())
}
