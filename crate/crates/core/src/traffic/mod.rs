//! Domain types and physics shared by the environment and the planners.

mod action;
mod field;
mod vehicle;

pub use action::{
    action_from_index, action_index, Action, ActionIndex, LATERAL_ACCELERATIONS,
    LONGITUDINAL_ACCELERATIONS, NUM_ACTIONS,
};
pub use field::{field_influence, safety_half_axes, FieldParams};
pub use vehicle::{
    out_of_bounds, rect_overlap, step_kinematics, step_neutral, RoadGeometry, VehicleId,
    VehicleState,
};
