//! Potential-field risk between an ego vehicle and one neighbor.
//!
//! The field is built on a safety ellipse around the ego. Its longitudinal
//! half-axis grows with the closing speed, so a neighbor approaching fast
//! (from either side) is felt from further away. Inside the ellipse the
//! influence falls linearly in the normalized squared distance `e`, reaching
//! -1 at full overlap; outside it is exactly zero.

use serde::{Deserialize, Serialize};

use super::vehicle::VehicleState;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldParams {
    /// Time headway applied to the closing speed, s.
    pub time_headway: f64,
    /// Longitudinal clearance added to the half-lengths, m.
    pub margin_x: f64,
    /// Lateral clearance added to the half-widths, m.
    pub margin_y: f64,
    /// Neighbors further than this (longitudinally) are ignored by the reward, m.
    pub d_max: f64,
}

impl Default for FieldParams {
    fn default() -> Self {
        FieldParams {
            time_headway: 1.0,
            margin_x: 2.0,
            margin_y: 0.4,
            d_max: 50.0,
        }
    }
}

impl FieldParams {
    pub fn validate(&self, visibility: f64) -> Result<()> {
        let all_positive = [self.time_headway, self.margin_x, self.margin_y, self.d_max]
            .iter()
            .all(|&x| x > 0.0);
        if !all_positive {
            return Err(Error::config("field parameters must be strictly positive"));
        }
        if self.d_max > visibility {
            return Err(Error::config(format!(
                "field cutoff {} exceeds visibility {visibility}",
                self.d_max
            )));
        }
        Ok(())
    }
}

/// Safety-ellipse half-axes `(longitudinal, lateral)` of `ego` with respect to `nb`.
pub fn safety_half_axes(ego: &VehicleState, nb: &VehicleState, fp: &FieldParams) -> (f64, f64) {
    let dx = nb.px - ego.px;
    let closing = if dx > 0.0 {
        (ego.vx - nb.vx).max(0.0)
    } else {
        (nb.vx - ego.vx).max(0.0)
    };
    let long = 0.5 * (ego.length + nb.length) + fp.margin_x + closing * fp.time_headway;
    let lat = 0.5 * (ego.width + nb.width) + fp.margin_y;
    (long, lat)
}

/// Non-positive influence of `nb` on `ego`: 0 when the gap is safe, down to -1.
pub fn field_influence(ego: &VehicleState, nb: &VehicleState, fp: &FieldParams) -> f64 {
    let (long, lat) = safety_half_axes(ego, nb, fp);
    let ex = (nb.px - ego.px) / long;
    let ey = (nb.py - ego.py) / lat;
    let e = ex * ex + ey * ey;
    if e < 1.0 {
        -(1.0 - e)
    } else {
        0.0
    }
}
