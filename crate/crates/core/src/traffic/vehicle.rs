use serde::{Deserialize, Serialize};

use super::action::Action;
use crate::error::{Error, Result};

pub type VehicleId = u64;

/// Kinematic record of one vehicle. Positions refer to the rectangle center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub id: VehicleId,
    /// Longitudinal position, m.
    pub px: f64,
    /// Lateral position, m.
    pub py: f64,
    /// Longitudinal speed, m/s.
    pub vx: f64,
    /// Lateral speed, m/s.
    pub vy: f64,
    /// Length, m.
    pub length: f64,
    /// Width, m.
    pub width: f64,
    /// Desired longitudinal speed, m/s.
    pub desired_speed: f64,
}

impl VehicleState {
    /// A vehicle with the default 3.5 m × 1.6 m footprint.
    pub fn new(id: VehicleId, px: f64, py: f64, vx: f64, desired_speed: f64) -> Self {
        VehicleState {
            id,
            px,
            py,
            vx,
            vy: 0.0,
            length: 3.5,
            width: 1.6,
            desired_speed,
        }
    }

    pub fn with_lateral_speed(mut self, vy: f64) -> Self {
        self.vy = vy;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoadGeometry {
    /// m
    pub length: f64,
    /// m
    pub width: f64,
}

impl Default for RoadGeometry {
    fn default() -> Self {
        RoadGeometry {
            length: 500.0,
            width: 10.2,
        }
    }
}

impl RoadGeometry {
    pub fn validate(&self, vehicle_width: f64) -> Result<()> {
        if !(self.length > 0.0) {
            return Err(Error::config("road length must be positive"));
        }
        if !(self.width > vehicle_width) {
            return Err(Error::config("road must be wider than a vehicle"));
        }
        Ok(())
    }
}

/// Double-integrator update over one step of `dt` seconds.
///
/// Longitudinal speed never goes negative; the position still follows the
/// unclamped equation for the step in which the clamp applies.
pub fn step_kinematics(v: &VehicleState, a: Action, dt: f64) -> VehicleState {
    let half_dt2 = 0.5 * dt * dt;
    VehicleState {
        px: v.px + v.vx * dt + a.ax * half_dt2,
        py: v.py + v.vy * dt + a.ay * half_dt2,
        vx: (v.vx + a.ax * dt).max(0.0),
        vy: v.vy + a.ay * dt,
        ..*v
    }
}

pub fn step_neutral(v: &VehicleState, dt: f64) -> VehicleState {
    step_kinematics(v, Action::NEUTRAL, dt)
}

/// Strict overlap of the two axis-aligned footprints; touching edges do not count.
pub fn rect_overlap(a: &VehicleState, b: &VehicleState) -> bool {
    (a.px - b.px).abs() < 0.5 * (a.length + b.length)
        && (a.py - b.py).abs() < 0.5 * (a.width + b.width)
}

pub fn out_of_bounds(v: &VehicleState, road: &RoadGeometry) -> bool {
    let half = 0.5 * v.width;
    v.py - half < 0.0 || v.py + half > road.width
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::action::ActionIndex;
    use proptest::prelude::*;

    fn car(px: f64, py: f64, vx: f64) -> VehicleState {
        VehicleState::new(1, px, py, vx, 30.0)
    }

    #[test]
    fn kinematics_examples() {
        let next = step_kinematics(&car(0.0, 5.0, 25.0), Action { ax: 2.0, ay: 0.0 }, 0.25);
        assert_eq!(next.vx, 25.5);
        assert_eq!(next.px, 6.3125);
        assert_eq!(next.vy, 0.0);
        assert_eq!(next.py, 5.0);

        let slow = step_kinematics(&car(0.0, 5.0, 0.5), Action { ax: -5.0, ay: 0.0 }, 0.25);
        assert_eq!(slow.vx, 0.0);
        // pre-clamp position equation
        assert_eq!(slow.px, 0.5 * 0.25 - 0.5 * 5.0 * 0.0625);
    }

    #[test]
    fn neutral_is_linear_motion() {
        let v = car(10.0, 5.0, 30.0).with_lateral_speed(0.5);
        let next = step_neutral(&v, 0.25);
        assert_eq!(next.px, 17.5);
        assert_eq!(next.vx, 30.0);
        assert_eq!(next.vy, 0.5);
        assert_eq!(next, step_kinematics(&v, ActionIndex::NEUTRAL.action(), 0.25));
    }

    #[test]
    fn overlap_boundaries() {
        let a = car(0.0, 5.0, 25.0);
        assert!(rect_overlap(&a, &a));
        assert!(!rect_overlap(&a, &car(3.5, 5.0, 25.0)));
        assert!(rect_overlap(&a, &car(3.0, 5.0, 25.0)));
        let mut wide = car(0.0, 7.0, 25.0);
        wide.width = 2.4;
        // half-widths 0.8 + 1.2 = 2.0 = |dy|: touching
        assert!(!rect_overlap(&a, &wide));
        wide.py = 6.875;
        assert!(rect_overlap(&a, &wide));
    }

    #[test]
    fn road_bounds() {
        let road = RoadGeometry::default();
        assert!(!out_of_bounds(&car(0.0, 5.1, 25.0), &road));
        assert!(out_of_bounds(&car(0.0, 0.7, 25.0), &road));
        assert!(!out_of_bounds(&car(0.0, 10.2 - 0.8, 25.0), &road));
        assert!(!out_of_bounds(&car(0.0, 0.8, 25.0), &road));
    }

    #[test]
    fn geometry_validation() {
        assert!(RoadGeometry::default().validate(1.6).is_ok());
        assert!(RoadGeometry { length: 0.0, width: 10.2 }.validate(1.6).is_err());
        assert!(RoadGeometry { length: 500.0, width: 1.0 }.validate(1.6).is_err());
    }

    fn any_vehicle() -> impl Strategy<Value = VehicleState> {
        (
            -100.0..600.0f64,
            0.0..10.2f64,
            0.0..40.0f64,
            -3.0..3.0f64,
            2.0..5.0f64,
            1.0..2.5f64,
        )
            .prop_map(|(px, py, vx, vy, length, width)| VehicleState {
                id: 0,
                px,
                py,
                vx,
                vy,
                length,
                width,
                desired_speed: 30.0,
            })
    }

    proptest! {
        #[test]
        fn zero_action_equals_neutral(v in any_vehicle(), dt in 0.01..1.0f64) {
            prop_assert_eq!(step_kinematics(&v, Action::NEUTRAL, dt), step_neutral(&v, dt));
        }

        #[test]
        fn overlap_is_symmetric(a in any_vehicle(), b in any_vehicle()) {
            prop_assert_eq!(rect_overlap(&a, &b), rect_overlap(&b, &a));
        }

        #[test]
        fn speed_never_negative(v in any_vehicle(), i in 0usize..15, dt in 0.01..1.0f64) {
            let next = step_kinematics(&v, ActionIndex::new(i).unwrap().action(), dt);
            prop_assert!(next.vx >= 0.0);
        }
    }
}
