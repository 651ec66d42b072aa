//! One UCT decision for a vehicle approaching a slower leader, with the
//! visit counts and mean values of every root action.

use lanefree::env::{EnvConfig, PlanningState};
use lanefree::mcts::{decision_rng, plan_search, Dynamics, MctsConfig, RewardParams};
use lanefree::env::DecisionContext;
use lanefree::traffic::{action_from_index, VehicleState};

fn main() -> lanefree::Result<()> {
    let ego = VehicleState::new(0, 100.0, 5.1, 30.0, 32.0);
    let leader = VehicleState::new(1, 118.0, 5.3, 24.0, 24.0);
    let root = PlanningState::root(ego, vec![leader]);

    let cfg = MctsConfig {
        iterations: 2000,
        ..MctsConfig::default()
    };
    let dynamics = Dynamics::from(&EnvConfig::default());
    let mut rng = decision_rng(cfg.seed, DecisionContext { vehicle_id: 0, step: 0 });
    let outcome = plan_search(&root, &cfg, &RewardParams::default(), &dynamics, &mut rng)?;

    println!("action   a_x   a_y   visits   mean value");
    for (i, edge) in outcome.tree.root().edges.iter().enumerate() {
        let a = action_from_index(i)?;
        let marker = if i == outcome.action { "  <- chosen" } else { "" };
        println!(
            "{i:>6} {:>5} {:>5} {:>8} {:>12.4}{marker}",
            a.ax, a.ay, edge.visits, edge.value
        );
    }
    println!("tree nodes: {}", outcome.tree.len());
    Ok(())
}
