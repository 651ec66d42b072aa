use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{EnvConfig, ENTRY_LATERAL_MARGIN};
use super::state::{ObservationMode, PlanningState};
use crate::error::{Error, Result};
use crate::traffic::{rect_overlap, step_kinematics, ActionIndex, VehicleId, VehicleState};

#[derive(Debug, Clone, Copy)]
struct LiveVehicle {
    state: VehicleState,
    entered_at: f64,
}

#[derive(Debug, Clone, Copy)]
struct PendingArrival {
    py: f64,
    desired_speed: f64,
}

/// Outcome of one synchronized step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepReport {
    /// Colliding pairs, lower id first, in ascending order.
    pub collisions: Vec<(VehicleId, VehicleId)>,
    /// Exited vehicles with their travel time, s.
    pub exited: Vec<(VehicleId, f64)>,
    /// Vehicles pushed back inside the road edges.
    pub clamped: Vec<VehicleId>,
}

/// Aggregates accumulated while the environment runs.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EpisodeMetrics {
    pub collisions: u64,
    /// Mean of all per-step, per-vehicle longitudinal speed samples, m/s.
    pub speed_average: f64,
    /// Mean delay of exited vehicles, s. Zero when nobody exited.
    pub delay_average: f64,
    pub vehicles_entered: u64,
    pub vehicles_exited: u64,
}

impl EpisodeMetrics {
    /// Vehicles that beat their ideal travel time drive the mean below zero.
    pub fn negative_delay(&self) -> bool {
        self.delay_average < 0.0
    }
}

/// Actual travel time minus the time needed at the desired speed.
pub fn compute_delay(travel_time: f64, desired_speed: f64, road_length: f64) -> f64 {
    travel_time - road_length / desired_speed
}

/// The open highway: vehicles enter at `p_x = 0` following the demand flow
/// and leave past the road length.
#[derive(Debug, Clone)]
pub struct Env {
    config: EnvConfig,
    rng: ChaCha8Rng,
    vehicles: Vec<LiveVehicle>,
    pending: VecDeque<PendingArrival>,
    arrivals_queued: u64,
    next_id: VehicleId,
    step: u64,
    collisions: u64,
    entered: u64,
    exited: u64,
    speed_sum: f64,
    speed_samples: u64,
    delay_sum: f64,
}

impl Env {
    pub fn new(config: EnvConfig) -> Result<Self> {
        config.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(Env {
            config,
            rng,
            vehicles: Vec::new(),
            pending: VecDeque::new(),
            arrivals_queued: 0,
            next_id: 0,
            step: 0,
            collisions: 0,
            entered: 0,
            exited: 0,
            speed_sum: 0.0,
            speed_samples: 0,
            delay_sum: 0.0,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    /// Simulation clock at the start of the current step, s.
    pub fn time(&self) -> f64 {
        self.step as f64 * self.config.time_step
    }

    pub fn vehicle_count(&self) -> usize {
        self.vehicles.len()
    }

    pub fn pending_spawns(&self) -> usize {
        self.pending.len()
    }

    /// Vehicles currently on the road in ascending id order.
    pub fn vehicles(&self) -> Vec<VehicleState> {
        let mut out: Vec<_> = self.vehicles.iter().map(|v| v.state).collect();
        out.sort_by_key(|v| v.id);
        out
    }

    pub fn vehicle(&self, id: VehicleId) -> Option<&VehicleState> {
        self.vehicles.iter().find(|v| v.state.id == id).map(|v| &v.state)
    }

    /// Places a vehicle directly on the road, bypassing the arrival process.
    /// Returns the id assigned to it.
    pub fn insert_vehicle(&mut self, mut state: VehicleState) -> VehicleId {
        state.id = self.next_id;
        self.next_id += 1;
        self.entered += 1;
        self.vehicles.push(LiveVehicle {
            state,
            entered_at: self.time(),
        });
        state.id
    }

    /// Reorders internal storage. Outcomes must not depend on it.
    #[doc(hidden)]
    pub fn permute_storage(&mut self, order: &[usize]) {
        assert_eq!(order.len(), self.vehicles.len());
        self.vehicles = order.iter().map(|&i| self.vehicles[i]).collect();
    }

    /// Queues every arrival due by the current time, then spawns queued
    /// arrivals in order while the entry is clear.
    pub fn spawn_due_vehicles(&mut self) -> Vec<VehicleState> {
        let due = (self.time() / self.config.inter_arrival() + 1e-9).floor() as u64 + 1;
        let w = self.config.vehicle_width;
        let lo = 0.5 * w + ENTRY_LATERAL_MARGIN;
        let hi = self.config.road.width - 0.5 * w - ENTRY_LATERAL_MARGIN;
        let [vd_lo, vd_hi] = self.config.desired_speed_range;
        while self.arrivals_queued < due {
            let py = self.rng.random_range(lo..=hi);
            let desired_speed = self.rng.random_range(vd_lo..=vd_hi);
            self.pending.push_back(PendingArrival { py, desired_speed });
            self.arrivals_queued += 1;
        }

        let mut spawned = Vec::new();
        while let Some(next) = self.pending.front() {
            let candidate = VehicleState {
                id: self.next_id,
                px: 0.0,
                py: next.py,
                vx: self.config.departure_speed,
                vy: 0.0,
                length: self.config.vehicle_length,
                width: self.config.vehicle_width,
                desired_speed: next.desired_speed,
            };
            if self.vehicles.iter().any(|v| rect_overlap(&v.state, &candidate)) {
                break;
            }
            self.pending.pop_front();
            self.insert_vehicle(candidate);
            spawned.push(candidate);
        }
        spawned
    }

    pub fn observe(&self, id: VehicleId, mode: ObservationMode) -> Result<PlanningState> {
        let ego = *self.vehicle(id).ok_or(Error::UnknownVehicle(id))?;
        let d = self.config.visibility;
        let mut neighbors: Vec<VehicleState> = self
            .vehicles
            .iter()
            .map(|v| v.state)
            .filter(|v| v.id != id)
            .filter(|v| {
                let dx = v.px - ego.px;
                match mode {
                    ObservationMode::Isotropic => dx.abs() <= d,
                    ObservationMode::FrontOnly => (0.0..=d).contains(&dx),
                }
            })
            .collect();
        neighbors.sort_by(|a, b| {
            let da = (a.px - ego.px).abs();
            let db = (b.px - ego.px).abs();
            da.total_cmp(&db).then(a.id.cmp(&b.id))
        });
        Ok(PlanningState::root(ego, neighbors))
    }

    /// Records the current speeds into the running speed average.
    pub(crate) fn sample_speeds(&mut self) {
        for v in &self.vehicles {
            self.speed_sum += v.state.vx;
            self.speed_samples += 1;
        }
    }

    /// Advances every vehicle from the same snapshot, then resolves
    /// collisions and exits.
    pub fn apply_joint_actions(
        &mut self,
        actions: &BTreeMap<VehicleId, ActionIndex>,
    ) -> Result<StepReport> {
        for v in &self.vehicles {
            if !actions.contains_key(&v.state.id) {
                return Err(Error::contract(format!(
                    "no action supplied for vehicle {}",
                    v.state.id
                )));
            }
        }
        let dt = self.config.time_step;
        let road = self.config.road;
        let mut report = StepReport::default();

        let mut next: Vec<LiveVehicle> = self
            .vehicles
            .iter()
            .map(|v| LiveVehicle {
                state: step_kinematics(&v.state, actions[&v.state.id].action(), dt),
                entered_at: v.entered_at,
            })
            .collect();
        next.sort_by_key(|v| v.state.id);

        for v in &mut next {
            let half = 0.5 * v.state.width;
            let clamped = v.state.py.clamp(half, road.width - half);
            if clamped != v.state.py {
                v.state.py = clamped;
                v.state.vy = 0.0;
                report.clamped.push(v.state.id);
            }
        }

        // Greedy pairing in id order: each vehicle takes part in at most one
        // counted collision per step.
        let mut removed = vec![false; next.len()];
        for i in 0..next.len() {
            if removed[i] {
                continue;
            }
            for j in (i + 1)..next.len() {
                if !removed[j] && rect_overlap(&next[i].state, &next[j].state) {
                    removed[i] = true;
                    removed[j] = true;
                    report.collisions.push((next[i].state.id, next[j].state.id));
                    break;
                }
            }
        }
        self.collisions += report.collisions.len() as u64;

        self.step += 1;
        let now = self.time();
        let mut survivors = Vec::with_capacity(next.len());
        for (v, gone) in next.into_iter().zip(removed) {
            if gone {
                continue;
            }
            if v.state.px >= road.length {
                let travel = now - v.entered_at;
                self.delay_sum += compute_delay(travel, v.state.desired_speed, road.length);
                self.exited += 1;
                report.exited.push((v.state.id, travel));
            } else {
                survivors.push(v);
            }
        }
        self.vehicles = survivors;
        Ok(report)
    }

    pub fn metrics(&self) -> EpisodeMetrics {
        EpisodeMetrics {
            collisions: self.collisions,
            speed_average: if self.speed_samples > 0 {
                self.speed_sum / self.speed_samples as f64
            } else {
                0.0
            },
            delay_average: if self.exited > 0 {
                self.delay_sum / self.exited as f64
            } else {
                0.0
            },
            vehicles_entered: self.entered,
            vehicles_exited: self.exited,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet_config() -> EnvConfig {
        // a single arrival at t = 0, then nothing for an hour
        EnvConfig {
            demand_flow: 1.0,
            ..EnvConfig::default()
        }
    }

    fn neutral_for(env: &Env) -> BTreeMap<VehicleId, ActionIndex> {
        env.vehicles()
            .iter()
            .map(|v| (v.id, ActionIndex::NEUTRAL))
            .collect()
    }

    #[test]
    fn starts_empty() {
        let env = Env::new(EnvConfig::default()).unwrap();
        assert_eq!(env.vehicle_count(), 0);
        assert_eq!(env.time(), 0.0);
        assert!(Env::new(EnvConfig { demand_flow: 0.0, ..Default::default() }).is_err());
    }

    #[test]
    fn first_arrival_spawns_at_entry() {
        let mut env = Env::new(quiet_config()).unwrap();
        let spawned = env.spawn_due_vehicles();
        assert_eq!(spawned.len(), 1);
        let v = spawned[0];
        assert_eq!((v.px, v.vx, v.vy), (0.0, 25.0, 0.0));
        assert!(v.py >= 0.8 + 0.1 && v.py <= 10.2 - 0.8 - 0.1);
        assert!((25.0..=35.0).contains(&v.desired_speed));
    }

    #[test]
    fn blocked_entry_defers_spawn() {
        let mut env = Env::new(quiet_config()).unwrap();
        // a wide blocker covering the whole road width at p_x = 1
        let mut blocker = VehicleState::new(0, 1.0, 5.1, 0.0, 25.0);
        blocker.width = 10.0;
        env.insert_vehicle(blocker);
        assert!(env.spawn_due_vehicles().is_empty());
        assert_eq!(env.pending_spawns(), 1);
    }

    #[test]
    fn spawn_attempts_follow_flow() {
        let cfg = EnvConfig {
            demand_flow: 5400.0,
            ..EnvConfig::default()
        };
        let mut env = Env::new(cfg).unwrap();
        let mut attempts = 0;
        for _ in 0..240 {
            let before = env.arrivals_queued;
            env.spawn_due_vehicles();
            attempts += env.arrivals_queued - before;
            let actions = neutral_for(&env);
            env.apply_joint_actions(&actions).unwrap();
        }
        assert_eq!(attempts, 90);
    }

    #[test]
    fn observation_modes() {
        let mut env = Env::new(quiet_config()).unwrap();
        let ego = env.insert_vehicle(VehicleState::new(0, 100.0, 5.0, 25.0, 30.0));
        let lone = env.observe(ego, ObservationMode::Isotropic).unwrap();
        assert!(lone.neighbors.is_empty());
        assert_eq!(lone.depth, 0);

        let back = env.insert_vehicle(VehicleState::new(0, 90.0, 5.0, 25.0, 30.0));
        let front = env.insert_vehicle(VehicleState::new(0, 120.0, 2.0, 25.0, 30.0));
        env.insert_vehicle(VehicleState::new(0, 151.0, 2.0, 25.0, 30.0));
        let fo = env.observe(ego, ObservationMode::FrontOnly).unwrap();
        assert_eq!(fo.neighbors.iter().map(|v| v.id).collect::<Vec<_>>(), vec![front]);
        let iso = env.observe(ego, ObservationMode::Isotropic).unwrap();
        assert_eq!(
            iso.neighbors.iter().map(|v| v.id).collect::<Vec<_>>(),
            vec![back, front]
        );
        assert!(matches!(
            env.observe(999, ObservationMode::Isotropic),
            Err(Error::UnknownVehicle(999))
        ));
    }

    #[test]
    fn observation_ties_break_by_id() {
        let mut env = Env::new(quiet_config()).unwrap();
        let ego = env.insert_vehicle(VehicleState::new(0, 100.0, 5.0, 25.0, 30.0));
        let a = env.insert_vehicle(VehicleState::new(0, 110.0, 2.0, 25.0, 30.0));
        let b = env.insert_vehicle(VehicleState::new(0, 90.0, 8.0, 25.0, 30.0));
        let iso = env.observe(ego, ObservationMode::Isotropic).unwrap();
        assert_eq!(iso.neighbors.iter().map(|v| v.id).collect::<Vec<_>>(), vec![a, b]);
    }

    #[test]
    fn far_apart_vehicles_advance() {
        let mut env = Env::new(quiet_config()).unwrap();
        env.insert_vehicle(VehicleState::new(0, 0.0, 2.0, 25.0, 30.0));
        env.insert_vehicle(VehicleState::new(0, 100.0, 8.0, 25.0, 30.0));
        let report = env.apply_joint_actions(&neutral_for(&env)).unwrap();
        assert!(report.collisions.is_empty());
        let vs = env.vehicles();
        assert_eq!(vs[0].px, 6.25);
        assert_eq!(vs[1].px, 106.25);
    }

    #[test]
    fn head_to_tail_collision_removes_pair() {
        let mut env = Env::new(quiet_config()).unwrap();
        env.insert_vehicle(VehicleState::new(0, 0.0, 5.0, 30.0, 30.0));
        env.insert_vehicle(VehicleState::new(0, 5.0, 5.0, 0.0, 30.0));
        let report = env.apply_joint_actions(&neutral_for(&env)).unwrap();
        assert_eq!(report.collisions, vec![(0, 1)]);
        assert_eq!(env.vehicle_count(), 0);
        assert_eq!(env.metrics().collisions, 1);
    }

    #[test]
    fn missing_action_is_a_contract_violation() {
        let mut env = Env::new(quiet_config()).unwrap();
        env.insert_vehicle(VehicleState::new(0, 0.0, 5.0, 30.0, 30.0));
        assert!(matches!(
            env.apply_joint_actions(&BTreeMap::new()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn vehicle_exits_at_road_end() {
        let mut env = Env::new(quiet_config()).unwrap();
        env.insert_vehicle(VehicleState::new(0, 499.0, 5.0, 25.0, 25.0));
        let report = env.apply_joint_actions(&neutral_for(&env)).unwrap();
        assert_eq!(report.exited.len(), 1);
        assert_eq!(env.vehicle_count(), 0);
        assert_eq!(env.metrics().vehicles_exited, 1);
    }

    #[test]
    fn lateral_excursion_is_clamped() {
        let mut env = Env::new(quiet_config()).unwrap();
        let id = env.insert_vehicle(VehicleState::new(0, 0.0, 0.85, 25.0, 25.0).with_lateral_speed(-2.0));
        let report = env.apply_joint_actions(&neutral_for(&env)).unwrap();
        assert_eq!(report.clamped, vec![id]);
        let v = env.vehicle(id).unwrap();
        assert_eq!((v.py, v.vy), (0.8, 0.0));
    }

    #[test]
    fn delay_examples() {
        assert_eq!(compute_delay(20.0, 25.0, 500.0), 0.0);
        assert_eq!(compute_delay(18.0, 25.0, 500.0), -2.0);
        assert!((compute_delay(16.67, 30.0, 500.0) - 0.00333).abs() < 1e-4);
    }
}
