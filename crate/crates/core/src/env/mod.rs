//! The open-highway world: spawning, synchronized stepping, observation and
//! metrics.

mod config;
mod episode;
mod highway;
mod state;

pub use config::{EnvConfig, ENTRY_LATERAL_MARGIN};
pub use episode::{
    run_episode, ConstantPolicy, DecisionContext, Episode, LogFilter, Policy, TrajectoryLog,
    TrajectoryRow,
};
pub(crate) use episode::plan_step;
pub use highway::{compute_delay, Env, EpisodeMetrics, StepReport};
pub use state::{ObservationMode, PlanningState};
