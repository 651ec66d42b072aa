use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::reward::{reward_total, RewardParams};
use super::search::{random_rollout, run_search, SearchBudget, SearchDomain, SearchOutcome, Uct};
use crate::env::{DecisionContext, EnvConfig, ObservationMode, PlanningState, Policy};
use crate::error::{Error, Result};
use crate::traffic::{
    out_of_bounds, rect_overlap, step_kinematics, step_neutral, ActionIndex, RoadGeometry,
    VehicleId, NUM_ACTIONS,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MctsConfig {
    pub iterations: u32,
    /// UCT exploration constant `C`.
    pub exploration: f64,
    pub min_visits: u32,
    /// Depth cap from the root for tree and rollout together.
    pub max_rollout_depth: u32,
    pub mode: ObservationMode,
    pub seed: u64,
}

impl Default for MctsConfig {
    fn default() -> Self {
        MctsConfig {
            iterations: 200,
            exploration: std::f64::consts::SQRT_2,
            min_visits: 5,
            max_rollout_depth: 6,
            mode: ObservationMode::Isotropic,
            seed: 0,
        }
    }
}

impl MctsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.min_visits == 0 || self.max_rollout_depth == 0 {
            return Err(Error::config(
                "iterations, min_visits and max_rollout_depth must be at least 1",
            ));
        }
        if !(self.exploration >= 0.0) {
            return Err(Error::config("exploration must be non-negative"));
        }
        Ok(())
    }

    pub fn budget(&self) -> SearchBudget {
        SearchBudget {
            iterations: self.iterations,
            min_visits: self.min_visits,
            max_depth: self.max_rollout_depth,
        }
    }
}

/// Time step and road the planner simulates against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dynamics {
    pub time_step: f64,
    pub road: RoadGeometry,
}

impl Default for Dynamics {
    fn default() -> Self {
        Dynamics::from(&EnvConfig::default())
    }
}

impl From<&EnvConfig> for Dynamics {
    fn from(cfg: &EnvConfig) -> Self {
        Dynamics {
            time_step: cfg.time_step,
            road: cfg.road,
        }
    }
}

fn advance(s: &mut PlanningState, action: ActionIndex, dynamics: &Dynamics) {
    let dt = dynamics.time_step;
    s.ego = step_kinematics(&s.ego, action.action(), dt);
    for nb in &mut s.neighbors {
        *nb = step_neutral(nb, dt);
    }
    s.depth += 1;
    s.terminal = out_of_bounds(&s.ego, &dynamics.road)
        || s.neighbors.iter().any(|nb| rect_overlap(&s.ego, nb));
}

/// Ego applies `action`, every neighbor keeps its speed.
pub fn simulate_transition(
    s: &PlanningState,
    action: ActionIndex,
    dynamics: &Dynamics,
) -> Result<PlanningState> {
    if s.terminal {
        return Err(Error::contract("cannot advance a terminal state"));
    }
    let mut next = s.clone();
    advance(&mut next, action, dynamics);
    Ok(next)
}

/// The lane-free driving problem as seen by one ego vehicle.
#[derive(Debug, Clone, Copy)]
pub struct TrafficDomain<'a> {
    pub dynamics: Dynamics,
    pub reward: &'a RewardParams,
}

impl SearchDomain for TrafficDomain<'_> {
    type State = PlanningState;

    fn num_actions(&self) -> usize {
        NUM_ACTIONS
    }

    fn is_terminal(&self, s: &PlanningState) -> bool {
        s.terminal
    }

    fn depth(&self, s: &PlanningState) -> u32 {
        s.depth
    }

    fn step(&self, s: &PlanningState, action: usize) -> PlanningState {
        let mut next = s.clone();
        self.step_in_place(&mut next, action);
        next
    }

    fn step_in_place(&self, s: &mut PlanningState, action: usize) {
        let a = ActionIndex::new(action).expect("search only draws valid actions");
        advance(s, a, &self.dynamics);
    }

    fn evaluate(&self, s: &PlanningState) -> Result<f64> {
        reward_total(s, s.terminal, self.reward)
    }

    fn fallback_action(&self) -> usize {
        ActionIndex::NEUTRAL.get()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutResult {
    pub state: PlanningState,
    pub collided: bool,
    pub depth: u32,
}

pub fn rollout<R: Rng + ?Sized>(
    s: &PlanningState,
    cfg: &MctsConfig,
    dynamics: &Dynamics,
    rng: &mut R,
) -> Result<RolloutResult> {
    if s.terminal {
        return Err(Error::contract("cannot roll out from a terminal state"));
    }
    let params = RewardParams::default();
    let domain = TrafficDomain {
        dynamics: *dynamics,
        reward: &params,
    };
    let mut state = s.clone();
    random_rollout(&domain, &mut state, cfg.max_rollout_depth, rng);
    Ok(RolloutResult {
        collided: state.terminal,
        depth: state.depth,
        state,
    })
}

/// Mixes the configured seed with the decision coordinates so that every
/// (vehicle, step) search has its own reproducible random stream.
pub fn decision_seed(seed: u64, vehicle_id: VehicleId, step: u64) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    splitmix(splitmix(splitmix(seed) ^ vehicle_id) ^ step)
}

pub fn decision_rng(seed: u64, ctx: DecisionContext) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(decision_seed(seed, ctx.vehicle_id, ctx.step))
}

fn check_root(s: &PlanningState) -> Result<()> {
    if s.terminal {
        return Err(Error::contract("cannot plan from a terminal state"));
    }
    if s.depth != 0 {
        return Err(Error::contract("search root must have depth 0"));
    }
    Ok(())
}

/// Plain UCT search; returns the whole tree for inspection.
pub fn plan_search<R: Rng + ?Sized>(
    s: &PlanningState,
    cfg: &MctsConfig,
    params: &RewardParams,
    dynamics: &Dynamics,
    rng: &mut R,
) -> Result<SearchOutcome<PlanningState>> {
    check_root(s)?;
    cfg.validate()?;
    let domain = TrafficDomain {
        dynamics: *dynamics,
        reward: params,
    };
    let mut rule = Uct {
        exploration: cfg.exploration,
    };
    run_search(&domain, s.clone(), &cfg.budget(), &mut rule, rng)
}

pub fn plan<R: Rng + ?Sized>(
    s: &PlanningState,
    cfg: &MctsConfig,
    params: &RewardParams,
    dynamics: &Dynamics,
    rng: &mut R,
) -> Result<ActionIndex> {
    let outcome = plan_search(s, cfg, params, dynamics, rng)?;
    ActionIndex::new(outcome.action)
}

pub(crate) fn check_guided_root(s: &PlanningState) -> Result<()> {
    check_root(s)
}

/// Every vehicle runs its own UCT search each step.
#[derive(Debug, Clone, Copy)]
pub struct MctsPolicy {
    pub config: MctsConfig,
    pub reward: RewardParams,
    pub dynamics: Dynamics,
}

impl Policy for MctsPolicy {
    fn observation_mode(&self) -> ObservationMode {
        self.config.mode
    }

    fn decide(&self, state: &PlanningState, ctx: DecisionContext) -> Result<ActionIndex> {
        let mut rng = decision_rng(self.config.seed, ctx);
        plan(state, &self.config, &self.reward, &self.dynamics, &mut rng)
    }
}
