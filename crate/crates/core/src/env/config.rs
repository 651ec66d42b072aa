use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::traffic::RoadGeometry;

/// Highway scenario parameters. Defaults reproduce the reference setup:
/// a 500 m × 10.2 m road, 0.25 s steps, 3.5 m × 1.6 m vehicles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    /// s
    pub sim_duration: f64,
    /// s
    pub time_step: f64,
    pub road: RoadGeometry,
    /// veh/h
    pub demand_flow: f64,
    /// m/s
    pub departure_speed: f64,
    /// Inclusive range the per-vehicle desired speed is drawn from, m/s.
    pub desired_speed_range: [f64; 2],
    /// m
    pub vehicle_length: f64,
    /// m
    pub vehicle_width: f64,
    /// Longitudinal observation radius, m.
    pub visibility: f64,
    pub seed: u64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            sim_duration: 3600.0,
            time_step: 0.25,
            road: RoadGeometry::default(),
            demand_flow: 5400.0,
            departure_speed: 25.0,
            desired_speed_range: [25.0, 35.0],
            vehicle_length: 3.5,
            vehicle_width: 1.6,
            visibility: 50.0,
            seed: 0,
        }
    }
}

/// Clearance kept between a freshly spawned vehicle and the road edges, m.
pub const ENTRY_LATERAL_MARGIN: f64 = 0.1;

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.time_step > 0.0) {
            return Err(Error::config("time_step must be positive"));
        }
        if !(self.sim_duration >= 0.0) {
            return Err(Error::config("sim_duration must be non-negative"));
        }
        if !(self.demand_flow > 0.0) {
            return Err(Error::config("demand_flow must be positive"));
        }
        let [lo, hi] = self.desired_speed_range;
        if !(lo <= hi) || lo < 0.0 {
            return Err(Error::config("desired_speed_range must be a non-empty range"));
        }
        if !(self.visibility > 0.0) {
            return Err(Error::config("visibility must be positive"));
        }
        if !(self.vehicle_length > 0.0 && self.vehicle_width > 0.0) {
            return Err(Error::config("vehicle dimensions must be positive"));
        }
        if !(self.departure_speed >= 0.0) {
            return Err(Error::config("departure_speed must be non-negative"));
        }
        self.road.validate(self.vehicle_width + 2.0 * ENTRY_LATERAL_MARGIN)
    }

    /// Seconds between consecutive arrivals at the entry.
    pub fn inter_arrival(&self) -> f64 {
        3600.0 / self.demand_flow
    }

    /// Number of whole steps covering `duration` seconds.
    pub fn steps_for(&self, duration: f64) -> u64 {
        ((duration / self.time_step) + 1e-9).floor().max(0.0) as u64
    }
}
