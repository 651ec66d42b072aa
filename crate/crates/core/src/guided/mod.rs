//! Network-guided search: a prior bonus in the selection score, with priors
//! for the first tree levels predicted in one batch before the search starts.

mod planner;
mod table;

pub use planner::{
    plan_guided, plan_guided_search, prediction_for, GuidedOutcome, GuidedPolicy, PuctConfig,
    PuctRule,
};
pub use table::{batch_predict, enumerate_prediction_tree, table_size, PredictionTable};
