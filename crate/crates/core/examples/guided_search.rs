//! Network-guided search: batch-predicts priors for the first tree levels,
//! then runs a PUCT search and reports how often the network was queried.
//!
//! cargo run --release --example guided_search -- [model.txt]

use lanefree::env::{DecisionContext, EnvConfig, PlanningState};
use lanefree::guided::{enumerate_prediction_tree, plan_guided_search, table_size, PuctConfig};
use lanefree::mcts::{decision_rng, Dynamics, MctsConfig, RewardParams};
use lanefree::nn::{MlpModel, ARCHITECTURE};
use lanefree::traffic::VehicleState;

fn main() -> lanefree::Result<()> {
    let model = match std::env::args().nth(1) {
        Some(path) => MlpModel::load(path.as_ref())?,
        None => MlpModel::he_uniform(&ARCHITECTURE, 7)?,
    };
    let root = PlanningState::root(
        VehicleState::new(0, 100.0, 5.1, 30.0, 33.0),
        vec![
            VehicleState::new(1, 115.0, 4.8, 26.0, 26.0),
            VehicleState::new(2, 90.0, 6.5, 34.0, 35.0),
        ],
    );
    let dynamics = Dynamics::from(&EnvConfig::default());
    let puct = PuctConfig::default();
    for levels in 1..=4 {
        println!("prediction table, {levels} levels: {} states", table_size(levels));
    }
    let states = enumerate_prediction_tree(&root, puct.prediction_levels, &dynamics)?;
    let probs = model.predict(&lanefree::nn::vectorize_state(&root))?;
    println!("enumerated {} states; root prior {:?}", states.len(), rounded(&probs));

    let search = MctsConfig {
        iterations: 200,
        ..MctsConfig::default()
    };
    let mut rng = decision_rng(search.seed, DecisionContext { vehicle_id: 0, step: 0 });
    let out = plan_guided_search(
        &root,
        &search,
        &puct,
        &RewardParams::default(),
        &dynamics,
        &model,
        &mut rng,
    )?;
    println!("chosen action {}", out.action);
    println!("model invocations {}", out.model_invocations);
    println!("tree nodes {}", out.tree.len());
    Ok(())
}

fn rounded(p: &[f64]) -> Vec<f64> {
    p.iter().map(|x| (x * 1000.0).round() / 1000.0).collect()
}
