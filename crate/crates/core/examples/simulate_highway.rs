//! Runs a short lane-free episode where every vehicle plans with MCTS and
//! prints the episode metrics.
//!
//! cargo run --release --example simulate_highway -- [seconds] [iterations]

use lanefree::env::{run_episode, Env, EnvConfig, LogFilter, ObservationMode};
use lanefree::mcts::{Dynamics, MctsConfig, MctsPolicy, RewardParams};

fn main() -> lanefree::Result<()> {
    let mut args = std::env::args().skip(1);
    let seconds: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(60.0);
    let iterations: u32 = args.next().and_then(|a| a.parse().ok()).unwrap_or(100);

    let env_cfg = EnvConfig {
        seed: 1,
        ..EnvConfig::default()
    };
    let policy = MctsPolicy {
        config: MctsConfig {
            iterations,
            mode: ObservationMode::Isotropic,
            seed: 1,
            ..MctsConfig::default()
        },
        reward: RewardParams::default(),
        dynamics: Dynamics::from(&env_cfg),
    };
    let mut env = Env::new(env_cfg)?;
    let episode = run_episode(&mut env, &policy, seconds, &LogFilter::Off)?;
    let m = &episode.metrics;
    println!("steps            {}", episode.steps);
    println!("vehicles entered {}", m.vehicles_entered);
    println!("vehicles exited  {}", m.vehicles_exited);
    println!("collisions       {}", m.collisions);
    println!("mean speed       {:.3} m/s", m.speed_average);
    println!("mean delay       {:.3} s", m.delay_average);
    Ok(())
}
