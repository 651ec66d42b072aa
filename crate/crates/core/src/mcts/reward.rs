use serde::{Deserialize, Serialize};

use crate::env::PlanningState;
use crate::error::{Error, Result};
use crate::traffic::{field_influence, FieldParams};

/// Weights and constants of the planning reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardParams {
    /// Collision penalty scale `D`.
    pub collision_penalty: f64,
    /// Smoothing constant of the speed term.
    pub epsilon: f64,
    /// Weight of the potential-field term.
    pub alpha: f64,
    /// Weight of the collision term.
    pub beta: f64,
    /// Weight of the desired-speed term.
    pub c: f64,
    pub field: FieldParams,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            collision_penalty: 10.0,
            epsilon: 1.0,
            alpha: 1.0,
            beta: 1.0,
            c: 1.0,
            field: FieldParams::default(),
        }
    }
}

impl RewardParams {
    pub fn validate(&self, visibility: f64) -> Result<()> {
        if !(self.collision_penalty > 0.0) {
            return Err(Error::config("collision_penalty must be positive"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::config("epsilon must be positive"));
        }
        let weights = [self.alpha, self.beta, self.c];
        if weights.iter().any(|w| !(*w >= 0.0)) || weights.iter().all(|w| *w == 0.0) {
            return Err(Error::config(
                "alpha, beta, c must be non-negative with at least one positive",
            ));
        }
        self.field.validate(visibility)
    }

    /// Interval every backed-up value lies in for a state with
    /// `neighbor_count` neighbors (each field term is within [-1, 0]).
    pub fn value_bounds(&self, neighbor_count: usize) -> (f64, f64) {
        let field = self.alpha * neighbor_count as f64;
        (-self.beta * self.collision_penalty - field, self.c)
    }
}

/// Penalty for a collision `depth` steps after the search root.
pub fn reward_collision(collided: bool, depth: u32, collision_penalty: f64) -> Result<f64> {
    if !collided {
        return Ok(0.0);
    }
    if depth == 0 {
        return Err(Error::contract("a collision cannot occur at the search root"));
    }
    Ok(-collision_penalty / depth as f64)
}

/// Summed field influence of neighbors within `d_max` longitudinally.
pub fn reward_field(s: &PlanningState, fp: &FieldParams) -> f64 {
    s.neighbors
        .iter()
        .filter(|nb| (nb.px - s.ego.px).abs() <= fp.d_max)
        .map(|nb| field_influence(&s.ego, nb, fp))
        .sum()
}

pub fn reward_speed(vx: f64, desired_speed: f64, epsilon: f64) -> f64 {
    epsilon / ((vx - desired_speed).abs() + epsilon)
}

/// Weighted reward of a rollout's final state. Leaving the road counts as a
/// collision.
pub fn reward_total(s: &PlanningState, collided: bool, params: &RewardParams) -> Result<f64> {
    let field = params.alpha * reward_field(s, &params.field);
    if collided {
        Ok(field + params.beta * reward_collision(true, s.depth, params.collision_penalty)?)
    } else {
        Ok(field + params.c * reward_speed(s.ego.vx, s.ego.desired_speed, params.epsilon))
    }
}
