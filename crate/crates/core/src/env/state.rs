use serde::{Deserialize, Serialize};

use crate::traffic::VehicleState;

/// Which neighbors a vehicle perceives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservationMode {
    /// Only vehicles level with or ahead of the ego.
    FrontOnly,
    /// Vehicles ahead and behind; enables nudging.
    Isotropic,
}

impl ObservationMode {
    pub fn is_isotropic(self) -> bool {
        matches!(self, ObservationMode::Isotropic)
    }
}

/// Local view of one vehicle: itself, its visible neighbors and how many
/// simulated steps separate this state from the search root.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanningState {
    pub ego: VehicleState,
    /// Ordered by longitudinal distance to the ego, nearest first.
    pub neighbors: Vec<VehicleState>,
    pub depth: u32,
    /// Ego overlapped a neighbor or left the road.
    pub terminal: bool,
}

impl PlanningState {
    pub fn root(ego: VehicleState, neighbors: Vec<VehicleState>) -> Self {
        PlanningState {
            ego,
            neighbors,
            depth: 0,
            terminal: false,
        }
    }
}
