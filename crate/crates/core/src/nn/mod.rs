//! Policy network: state features, a dense softmax classifier trained on
//! planner decisions, self-play data collection and calibration analysis.

mod calibration;
mod dataset;
mod features;
mod gradcheck;
mod mlp;
mod selfplay;
mod train;

pub use calibration::{
    bin_of, calibration_from_outcomes, reliability_report, CalibrationBin, CalibrationReport, BINS,
};
pub use dataset::{format_row, load_dataset, parse_dataset, save_dataset, write_dataset, DatasetRow};
pub use features::{
    feature_scale, vectorize_state, FeatureVector, EGO_FEATURES, FEATURE_LEN, NEIGHBOR_FEATURES,
    SLOTS_PER_SIDE, VIRTUAL_NEIGHBOR,
};
pub use gradcheck::{gradient_check, relative_error, GradientCheck, GradientFault, RELATIVE_FLOOR, STEP};
pub use mlp::{Dense, MlpModel, ARCHITECTURE};
pub use selfplay::{collect_selfplay, collect_selfplay_with_progress, greedy_policy, GreedyPolicy};
pub use train::{
    argmax, evaluate, loss, loss_and_gradients, train, train_with_progress, EpochReport, Gradients,
    TrainConfig, TrainOutcome,
};
