use std::fmt;

use crate::error::{Error, Result};

/// Longitudinal accelerations available to a vehicle, m/s².
pub const LONGITUDINAL_ACCELERATIONS: [f64; 5] = [-5.0, -2.0, 0.0, 2.0, 5.0];
/// Lateral accelerations available to a vehicle, m/s².
pub const LATERAL_ACCELERATIONS: [f64; 3] = [-1.0, 0.0, 1.0];

pub const NUM_ACTIONS: usize = LONGITUDINAL_ACCELERATIONS.len() * LATERAL_ACCELERATIONS.len();

/// Position of an action in the fixed row-major (longitudinal-major) ordering.
///
/// The ordering is part of the dataset format, so it must never change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionIndex(u8);

impl ActionIndex {
    /// Zero acceleration on both axes.
    pub const NEUTRAL: ActionIndex = ActionIndex(7);

    pub fn new(index: usize) -> Result<Self> {
        if index < NUM_ACTIONS {
            Ok(ActionIndex(index as u8))
        } else {
            Err(Error::contract(format!(
                "action index {index} outside 0..{NUM_ACTIONS}"
            )))
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    pub fn action(self) -> Action {
        let i = self.get();
        Action {
            ax: LONGITUDINAL_ACCELERATIONS[i / LATERAL_ACCELERATIONS.len()],
            ay: LATERAL_ACCELERATIONS[i % LATERAL_ACCELERATIONS.len()],
        }
    }

    pub fn all() -> impl Iterator<Item = ActionIndex> {
        (0..NUM_ACTIONS as u8).map(ActionIndex)
    }
}

impl fmt::Display for ActionIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A pair of accelerations applied for one time-step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub ax: f64,
    pub ay: f64,
}

impl Action {
    pub const NEUTRAL: Action = Action { ax: 0.0, ay: 0.0 };

    /// Inverse of [`action_from_index`]; `None` for pairs outside the grid.
    pub fn index(&self) -> Option<ActionIndex> {
        let ix = LONGITUDINAL_ACCELERATIONS.iter().position(|&a| a == self.ax)?;
        let iy = LATERAL_ACCELERATIONS.iter().position(|&a| a == self.ay)?;
        Some(ActionIndex((ix * LATERAL_ACCELERATIONS.len() + iy) as u8))
    }
}

pub fn action_from_index(index: usize) -> Result<Action> {
    ActionIndex::new(index).map(ActionIndex::action)
}

pub fn action_index(action: &Action) -> Result<ActionIndex> {
    action
        .index()
        .ok_or_else(|| Error::contract(format!("{action:?} is not in the action grid")))
}
