use rand::Rng;
use serde::{Deserialize, Serialize};

use super::table::{batch_predict, enumerate_prediction_tree, PredictionTable};
use crate::env::{DecisionContext, ObservationMode, PlanningState, Policy};
use crate::error::{Error, Result};
use crate::mcts::{
    check_guided_root, decision_rng, run_search, select_puct, Dynamics, MctsConfig, NodeId,
    RewardParams, SearchTree, SelectionRule, TrafficDomain, TreeNode,
};
use crate::nn::{vectorize_state, MlpModel};
use crate::traffic::ActionIndex;

/// Prior settings layered on top of an [`MctsConfig`], whose `exploration`
/// weighs the visit-count bonus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PuctConfig {
    /// Weight of the prior bonus `P(s,a) / (N(s,a) + 1)`.
    pub prior_weight: f64,
    /// Complete tree levels predicted before the search (3 levels = 241 states).
    pub prediction_levels: u32,
}

impl Default for PuctConfig {
    fn default() -> Self {
        PuctConfig {
            prior_weight: 4.0,
            prediction_levels: 3,
        }
    }
}

impl PuctConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.prior_weight >= 0.0) {
            return Err(Error::config("prior_weight must be non-negative"));
        }
        if self.prediction_levels == 0 {
            return Err(Error::config("prediction_levels must be at least 1"));
        }
        Ok(())
    }
}

/// Prior of `node`: its table row when the node lies inside the table,
/// otherwise one model call whose result is kept on the node.
pub fn prediction_for(
    node: &mut TreeNode<PlanningState>,
    table: &PredictionTable,
    model: &MlpModel,
    invocations: &mut usize,
) -> Result<Vec<f64>> {
    if let Some(row) = usize::try_from(node.tree_index).ok().and_then(|i| table.row(i)) {
        return Ok(row.to_vec());
    }
    if let Some(p) = &node.prior {
        return Ok(p.clone());
    }
    let p = model.predict(&vectorize_state(&node.state))?;
    *invocations += 1;
    node.prior = Some(p.clone());
    Ok(p)
}

/// Selection by UCT plus a decaying prior bonus.
pub struct PuctRule<'a> {
    pub model: &'a MlpModel,
    pub table: &'a PredictionTable,
    pub exploration: f64,
    pub prior_weight: f64,
    /// Model calls made so far, including the table's batch call.
    pub invocations: usize,
}

impl SelectionRule<PlanningState> for PuctRule<'_> {
    fn select(&mut self, tree: &mut SearchTree<PlanningState>, node: NodeId) -> Result<usize> {
        let prior = prediction_for(tree.node_mut(node), self.table, self.model, &mut self.invocations)?;
        select_puct(tree.node(node), &prior, self.exploration, self.prior_weight)
    }
}

#[derive(Debug, Clone)]
pub struct GuidedOutcome {
    pub action: usize,
    pub tree: SearchTree<PlanningState>,
    pub model_invocations: usize,
}

#[allow(clippy::too_many_arguments)]
pub fn plan_guided_search<R: Rng + ?Sized>(
    s: &PlanningState,
    search: &MctsConfig,
    puct: &PuctConfig,
    params: &RewardParams,
    dynamics: &Dynamics,
    model: &MlpModel,
    rng: &mut R,
) -> Result<GuidedOutcome> {
    check_guided_root(s)?;
    search.validate()?;
    puct.validate()?;
    let states = enumerate_prediction_tree(s, puct.prediction_levels, dynamics)?;
    let table = batch_predict(model, &states)?;
    let domain = TrafficDomain {
        dynamics: *dynamics,
        reward: params,
    };
    let mut rule = PuctRule {
        model,
        table: &table,
        exploration: search.exploration,
        prior_weight: puct.prior_weight,
        invocations: 1,
    };
    let outcome = run_search(&domain, s.clone(), &search.budget(), &mut rule, rng)?;
    Ok(GuidedOutcome {
        action: outcome.action,
        tree: outcome.tree,
        model_invocations: rule.invocations,
    })
}

pub fn plan_guided<R: Rng + ?Sized>(
    s: &PlanningState,
    search: &MctsConfig,
    puct: &PuctConfig,
    params: &RewardParams,
    dynamics: &Dynamics,
    model: &MlpModel,
    rng: &mut R,
) -> Result<ActionIndex> {
    let out = plan_guided_search(s, search, puct, params, dynamics, model, rng)?;
    ActionIndex::new(out.action)
}

/// Every vehicle runs its own guided search each step.
#[derive(Debug, Clone, Copy)]
pub struct GuidedPolicy<'a> {
    pub search: MctsConfig,
    pub puct: PuctConfig,
    pub reward: RewardParams,
    pub dynamics: Dynamics,
    pub model: &'a MlpModel,
}

impl Policy for GuidedPolicy<'_> {
    fn observation_mode(&self) -> ObservationMode {
        self.search.mode
    }

    fn decide(&self, state: &PlanningState, ctx: DecisionContext) -> Result<ActionIndex> {
        let mut rng = decision_rng(self.search.seed, ctx);
        plan_guided(
            state,
            &self.search,
            &self.puct,
            &self.reward,
            &self.dynamics,
            self.model,
            &mut rng,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcts::{plan, plan_search, ROOT};
    use crate::nn::ARCHITECTURE;
    use crate::traffic::VehicleState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scene(seed: u64) -> PlanningState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ego = VehicleState::new(0, 200.0, rng.random_range(2.0..8.0), rng.random_range(24.0..34.0), 30.0);
        let nbs = (1..=5)
            .map(|i| {
                VehicleState::new(
                    i,
                    200.0 + rng.random_range(-40.0..40.0),
                    rng.random_range(1.0..9.2),
                    rng.random_range(24.0..35.0),
                    rng.random_range(25.0..35.0),
                )
            })
            .filter(|nb| !crate::traffic::rect_overlap(&ego, nb))
            .collect();
        PlanningState::root(ego, nbs)
    }

    #[test]
    fn zero_prior_weight_reproduces_uct() {
        let model = MlpModel::he_uniform(&ARCHITECTURE, 2).unwrap();
        let search = MctsConfig { iterations: 150, ..Default::default() };
        let puct = PuctConfig { prior_weight: 0.0, ..Default::default() };
        let (p, d) = (RewardParams::default(), Dynamics::default());
        for seed in 0..5 {
            let s = scene(seed);
            let guided = plan_guided_search(&s, &search, &puct, &p, &d, &model, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let plain = plan_search(&s, &search, &p, &d, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(guided.action, plain.action);
            assert_eq!(guided.tree.root().edges, plain.tree.root().edges);
        }
    }

    #[test]
    fn shallow_search_uses_one_model_call() {
        let model = MlpModel::he_uniform(&ARCHITECTURE, 2).unwrap();
        let search = MctsConfig { iterations: 400, max_rollout_depth: 3, ..Default::default() };
        let out = plan_guided_search(
            &scene(1),
            &search,
            &PuctConfig::default(),
            &RewardParams::default(),
            &Dynamics::default(),
            &model,
            &mut ChaCha8Rng::seed_from_u64(0),
        )
        .unwrap();
        assert!(out.tree.nodes().all(|n| n.depth <= 3));
        assert_eq!(out.model_invocations, 1);
    }

    #[test]
    fn deep_nodes_are_predicted_once() {
        let model = MlpModel::he_uniform(&ARCHITECTURE, 2).unwrap();
        let states = enumerate_prediction_tree(&scene(3), 1, &Dynamics::default()).unwrap();
        let table = batch_predict(&model, &states).unwrap();
        let mut tree = SearchTree::new(scene(3), 15, false, 0);
        let child = simulate_transition_child(&mut tree);
        let mut calls = 0;
        let first = prediction_for(tree.node_mut(child), &table, &model, &mut calls).unwrap();
        let second = prediction_for(tree.node_mut(child), &table, &model, &mut calls).unwrap();
        assert_eq!(calls, 1);
        assert_eq!(first, second);
        assert!((first.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        let root = prediction_for(tree.node_mut(ROOT), &table, &model, &mut calls).unwrap();
        assert_eq!(root.as_slice(), table.row(0).unwrap());
        assert_eq!(calls, 1);
    }

    fn simulate_transition_child(tree: &mut SearchTree<PlanningState>) -> NodeId {
        let s = crate::mcts::simulate_transition(&tree.root().state, ActionIndex::NEUTRAL, &Dynamics::default()).unwrap();
        tree.add_child(ROOT, 7, s, false)
    }

    /// Two-sided Fisher exact test on the 2x2 table [[a, b], [c, d]].
    fn fisher_two_sided(a: u64, b: u64, c: u64, d: u64) -> f64 {
        let ln_fact = |n: u64| (1..=n).map(|k| (k as f64).ln()).sum::<f64>();
        let (r1, r2, c1, n) = (a + b, c + d, a + c, a + b + c + d);
        let ln_p = |x: u64| {
            ln_fact(r1) + ln_fact(r2) + ln_fact(c1) + ln_fact(n - c1)
                - ln_fact(n)
                - ln_fact(x)
                - ln_fact(r1 - x)
                - ln_fact(c1 - x)
                - ln_fact(r2 + x - c1)
        };
        let observed = ln_p(a);
        let lo = c1.saturating_sub(r2);
        let hi = r1.min(c1);
        (lo..=hi)
            .map(ln_p)
            .filter(|&l| l <= observed + 1e-9)
            .map(f64::exp)
            .sum::<f64>()
            .min(1.0)
    }

    #[test]
    fn fisher_oracle() {
        assert!((fisher_two_sided(3, 1, 1, 3) - 0.485714).abs() < 1e-5);
        assert!((fisher_two_sided(10, 0, 0, 10) - 1.0825e-5).abs() < 1e-8);
    }

    #[test]
    fn uniform_prior_leaves_choices_unchanged_in_distribution() {
        let model = MlpModel::zeros(&ARCHITECTURE).unwrap();
        let search = MctsConfig { iterations: 200, ..Default::default() };
        let (p, d) = (RewardParams::default(), Dynamics::default());
        let s = scene(11);
        let mut plain = [0u64; 15];
        let mut guided = [0u64; 15];
        for seed in 0..50 {
            let a = plan(&s, &search, &p, &d, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let b = plan_guided(&s, &search, &PuctConfig::default(), &p, &d, &model, &mut ChaCha8Rng::seed_from_u64(seed + 1000)).unwrap();
            plain[a.get()] += 1;
            guided[b.get()] += 1;
        }
        let mode = (0..15).max_by_key(|&i| (plain[i], std::cmp::Reverse(i))).unwrap();
        let pval = fisher_two_sided(plain[mode], 50 - plain[mode], guided[mode], 50 - guided[mode]);
        assert!(pval > 0.01, "plain {plain:?} guided {guided:?} p {pval}");
    }

    #[test]
    fn expert_prior_accelerates_more_often() {
        use crate::nn::{train, vectorize_state, DatasetRow, TrainConfig};
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let accelerate = ActionIndex::new(13).unwrap();
        let rows: Vec<DatasetRow> = (0..2000)
            .map(|_| {
                let ego = VehicleState::new(
                    0,
                    rng.random_range(0.0..500.0),
                    rng.random_range(2.0..8.0),
                    rng.random_range(20.0..30.0),
                    rng.random_range(31.0..35.0),
                );
                DatasetRow { features: vectorize_state(&PlanningState::root(ego, vec![])), label: accelerate }
            })
            .collect();
        let cfg = TrainConfig { hidden_layers: vec![32], epochs: 5, scale_inputs: true, ..Default::default() };
        let model = train(&rows, &cfg).unwrap().model;

        let s = PlanningState::root(VehicleState::new(0, 100.0, 5.1, 25.0, 35.0), vec![]);
        let search = MctsConfig { iterations: 50, ..Default::default() };
        let (p, d) = (RewardParams::default(), Dynamics::default());
        let (mut plain, mut guided) = (0, 0);
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            if plan(&s, &search, &p, &d, &mut rng).unwrap().action().ax == 5.0 {
                plain += 1;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = plan_guided(&s, &search, &PuctConfig::default(), &p, &d, &model, &mut rng).unwrap();
            if a.action().ax == 5.0 {
                guided += 1;
            }
        }
        assert!(guided >= plain, "guided {guided} plain {plain}");
        assert!(guided >= 90, "guided {guided}");
    }

    #[test]
    fn terminal_root_is_rejected() {
        let model = MlpModel::zeros(&ARCHITECTURE).unwrap();
        let s = PlanningState { terminal: true, ..scene(0) };
        let r = plan_guided(&s, &MctsConfig::default(), &PuctConfig::default(), &RewardParams::default(), &Dynamics::default(), &model, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(matches!(r, Err(Error::Contract(_))));
    }
}
