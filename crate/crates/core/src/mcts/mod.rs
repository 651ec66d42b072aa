//! Per-vehicle Monte-Carlo tree search over the 15-action grid.

mod planner;
mod reward;
mod search;
mod select;
mod tree;

pub use planner::{
    decision_rng, decision_seed, plan, plan_search, rollout, simulate_transition, Dynamics,
    MctsConfig, MctsPolicy, RolloutResult, TrafficDomain,
};
pub(crate) use planner::check_guided_root;
pub use reward::{reward_collision, reward_field, reward_speed, reward_total, RewardParams};
pub use search::{
    random_rollout, run_search, SearchBudget, SearchDomain, SearchOutcome, SelectionRule, Uct,
};
pub use select::{puct_score, select_puct, select_uct, uct_score};
pub use tree::{child_tree_index, EdgeStats, NodeId, SearchTree, TreeNode, ROOT};
