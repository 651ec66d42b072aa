use std::collections::BTreeMap;

use super::dataset::DatasetRow;
use super::features::vectorize_state;
use super::mlp::MlpModel;
use super::train::argmax;
use crate::env::{plan_step, DecisionContext, Env, EnvConfig, LogFilter, ObservationMode};
use crate::env::{PlanningState, Policy, TrajectoryLog};
use crate::error::{Error, Result};
use crate::mcts::{Dynamics, MctsConfig, MctsPolicy, RewardParams};
use crate::traffic::ActionIndex;

pub fn collect_selfplay(
    env_cfg: &EnvConfig,
    mcts_cfg: &MctsConfig,
    params: &RewardParams,
    rows_target: usize,
) -> Result<Vec<DatasetRow>> {
    collect_selfplay_with_progress(env_cfg, mcts_cfg, params, rows_target, |_| {})
}

/// Runs self-play episodes in which every vehicle plans with isotropic MCTS
/// and records one (observation, chosen action) row per vehicle and step.
///
/// Episode `k` uses environment seed `env_cfg.seed + k` and planner seed
/// `mcts_cfg.seed + k`; episodes are repeated until `rows_target` rows exist.
/// `progress` receives the row count after every simulated step.
pub fn collect_selfplay_with_progress(
    env_cfg: &EnvConfig,
    mcts_cfg: &MctsConfig,
    params: &RewardParams,
    rows_target: usize,
    mut progress: impl FnMut(usize),
) -> Result<Vec<DatasetRow>> {
    if !mcts_cfg.mode.is_isotropic() {
        return Err(Error::contract("self-play requires isotropic observation"));
    }
    mcts_cfg.validate()?;
    params.validate(env_cfg.visibility)?;
    let mut rows = Vec::with_capacity(rows_target);
    let mut scratch = TrajectoryLog::default();
    let mut episode = 0u64;
    while rows.len() < rows_target {
        let cfg = EnvConfig {
            seed: env_cfg.seed.wrapping_add(episode),
            ..env_cfg.clone()
        };
        let policy = MctsPolicy {
            config: MctsConfig {
                seed: mcts_cfg.seed.wrapping_add(episode),
                ..*mcts_cfg
            },
            reward: *params,
            dynamics: Dynamics::from(&cfg),
        };
        let mut env = Env::new(cfg)?;
        let before = rows.len();
        for _ in 0..env.config().steps_for(env.config().sim_duration) {
            let decisions = plan_step(
                &mut env,
                &policy,
                ObservationMode::Isotropic,
                &LogFilter::Off,
                &mut scratch,
            )?;
            for (s, a) in &decisions {
                rows.push(DatasetRow {
                    features: vectorize_state(s),
                    label: *a,
                });
                if rows.len() == rows_target {
                    progress(rows.len());
                    return Ok(rows);
                }
            }
            progress(rows.len());
            let actions: BTreeMap<_, _> = decisions.iter().map(|(s, a)| (s.ego.id, *a)).collect();
            env.apply_joint_actions(&actions)?;
        }
        if rows.len() == before {
            return Err(Error::config("self-play episode produced no rows"));
        }
        episode += 1;
    }
    Ok(rows)
}

/// Highest-probability action for `s`; ties go to the lowest index.
pub fn greedy_policy(model: &MlpModel, s: &PlanningState) -> Result<ActionIndex> {
    let p = model.predict(&vectorize_state(s))?;
    ActionIndex::new(argmax(&p))
}

/// Acts on a single network prediction per decision, without search.
#[derive(Debug, Clone, Copy)]
pub struct GreedyPolicy<'a> {
    pub model: &'a MlpModel,
}

impl Policy for GreedyPolicy<'_> {
    fn observation_mode(&self) -> ObservationMode {
        ObservationMode::Isotropic
    }

    fn decide(&self, s: &PlanningState, _: DecisionContext) -> Result<ActionIndex> {
        greedy_policy(self.model, s)
    }
}
