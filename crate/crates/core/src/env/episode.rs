use std::collections::BTreeSet;
use std::io::{self, Write};

use rayon::prelude::*;

use super::highway::{EpisodeMetrics, Env};
use super::state::{ObservationMode, PlanningState};
use crate::error::Result;
use crate::traffic::{ActionIndex, VehicleId};

/// Identifies one decision in an episode; planners derive their RNG from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecisionContext {
    pub vehicle_id: VehicleId,
    pub step: u64,
}

/// A per-vehicle driving policy. Each call receives its own immutable
/// snapshot, so calls for different vehicles may run concurrently.
pub trait Policy: Sync {
    fn observation_mode(&self) -> ObservationMode;

    fn decide(&self, state: &PlanningState, ctx: DecisionContext) -> Result<ActionIndex>;
}

/// Always applies the same action.
#[derive(Debug, Clone, Copy)]
pub struct ConstantPolicy(pub ActionIndex);

impl Policy for ConstantPolicy {
    fn observation_mode(&self) -> ObservationMode {
        ObservationMode::FrontOnly
    }

    fn decide(&self, _state: &PlanningState, _ctx: DecisionContext) -> Result<ActionIndex> {
        Ok(self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub id: VehicleId,
    pub px: f64,
    pub py: f64,
    pub vx: f64,
    pub vy: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryLog {
    pub rows: Vec<TrajectoryRow>,
}

impl TrajectoryLog {
    pub const HEADER: &'static str = "t,id,p_x,p_y,v_x,v_y";

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", Self::HEADER)?;
        for r in &self.rows {
            writeln!(
                out,
                "{:.4},{},{:.9},{:.9},{:.9},{:.9}",
                r.t, r.id, r.px, r.py, r.vx, r.vy
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// Which vehicles to record in the trajectory log.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum LogFilter {
    #[default]
    Off,
    All,
    Only(BTreeSet<VehicleId>),
}

impl LogFilter {
    fn wants(&self, id: VehicleId) -> bool {
        match self {
            LogFilter::Off => false,
            LogFilter::All => true,
            LogFilter::Only(ids) => ids.contains(&id),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Episode {
    pub metrics: EpisodeMetrics,
    pub log: TrajectoryLog,
    pub steps: u64,
}

/// Runs spawn → observe → plan → apply for `duration` seconds.
///
/// Every vehicle plans from the same pre-step snapshot; actions are merged in
/// ascending id order before being applied.
pub fn run_episode(
    env: &mut Env,
    policy: &dyn Policy,
    duration: f64,
    log: &LogFilter,
) -> Result<Episode> {
    let steps = env.config().steps_for(duration);
    let mode = policy.observation_mode();
    let mut episode = Episode::default();
    for _ in 0..steps {
        let decisions = plan_step(env, policy, mode, log, &mut episode.log)?;
        let actions = decisions.into_iter().map(|(s, a)| (s.ego.id, a)).collect();
        env.apply_joint_actions(&actions)?;
        episode.steps += 1;
    }
    episode.metrics = env.metrics();
    Ok(episode)
}

/// Spawns, samples metrics, logs and collects one action per live vehicle,
/// paired with the observation it was chosen from, in ascending id order.
pub(crate) fn plan_step(
    env: &mut Env,
    policy: &dyn Policy,
    mode: ObservationMode,
    filter: &LogFilter,
    log: &mut TrajectoryLog,
) -> Result<Vec<(PlanningState, ActionIndex)>> {
    env.spawn_due_vehicles();
    env.sample_speeds();
    let t = env.time();
    let step = env.step_index();
    let vehicles = env.vehicles();
    for v in vehicles.iter().filter(|v| filter.wants(v.id)) {
        log.rows.push(TrajectoryRow {
            t,
            id: v.id,
            px: v.px,
            py: v.py,
            vx: v.vx,
            vy: v.vy,
        });
    }
    let observations = vehicles
        .iter()
        .map(|v| env.observe(v.id, mode))
        .collect::<Result<Vec<_>>>()?;
    let actions: Vec<ActionIndex> = observations
        .par_iter()
        .map(|s| {
            let ctx = DecisionContext {
                vehicle_id: s.ego.id,
                step,
            };
            policy.decide(s, ctx)
        })
        .collect::<Result<_>>()?;
    Ok(observations.into_iter().zip(actions).collect())
}
