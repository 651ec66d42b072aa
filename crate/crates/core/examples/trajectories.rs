//! Exports position and speed traces of selected vehicles, ready for
//! p_y-time, v_x-time and v_y-time plots.
//!
//! cargo run --release --example trajectories -- [out.csv] [ids...]

use lanefree::experiment::{trajectories, Config};

fn main() -> lanefree::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = std::path::PathBuf::from(args.next().unwrap_or_else(|| "traces.csv".into()));
    let mut ids: Vec<u64> = args.filter_map(|a| a.parse().ok()).collect();
    if ids.is_empty() {
        ids = vec![3, 4, 5];
    }
    let mut cfg = Config::default();
    cfg.env.sim_duration = 60.0;
    cfg.mcts.iterations = 100;
    let missing = trajectories(&cfg, &ids, &out)?;
    for id in missing {
        eprintln!("vehicle {id} never entered the road");
    }
    println!("traces of {ids:?} written to {}", out.display());
    Ok(())
}
