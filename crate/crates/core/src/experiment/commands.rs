use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use super::config::Config;
use super::grid::{run_algorithm, run_grid, GridSummary, ResultRow};
use crate::env::{EpisodeMetrics, LogFilter, ObservationMode, TrajectoryLog};
use crate::error::{Error, Result};
use crate::mcts::MctsConfig;
use crate::nn::{
    collect_selfplay_with_progress, load_dataset, reliability_report, save_dataset,
    train_with_progress, CalibrationReport, EpochReport, MlpModel, TrainOutcome,
};
use crate::traffic::VehicleId;

/// Process exit status for a finished command.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Parse { .. } => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

fn load_run_model(cfg: &Config) -> Result<Option<MlpModel>> {
    if !cfg.run.algorithm.needs_model() {
        return Ok(None);
    }
    let path = cfg.run.model.as_ref().ok_or_else(|| {
        Error::config(format!("algorithm {} needs `run.model`", cfg.run.algorithm))
    })?;
    MlpModel::load(path).map(Some)
}

fn write_trajectories(log: &TrajectoryLog, out: &Path) -> Result<()> {
    let file = fs::File::create(out).map_err(|e| Error::io(out, e))?;
    log.write_csv(std::io::BufWriter::new(file))
        .map_err(|e| Error::io(out, e))
}

/// One episode of the configured algorithm, optionally exporting every
/// vehicle's trajectory.
pub fn simulate(cfg: &Config, trajectory_out: Option<&Path>) -> Result<EpisodeMetrics> {
    let model = load_run_model(cfg)?;
    let log = if trajectory_out.is_some() {
        LogFilter::All
    } else {
        LogFilter::Off
    };
    let episode = run_algorithm(
        cfg,
        cfg.env.clone(),
        cfg.mcts,
        cfg.run.algorithm,
        model.as_ref(),
        cfg.env.sim_duration,
        &log,
    )?;
    if let Some(out) = trajectory_out {
        write_trajectories(&episode.log, out)?;
    }
    Ok(episode.metrics)
}

/// Self-play with isotropic MCTS; writes `rows` dataset lines to `out`.
pub fn collect(
    cfg: &Config,
    rows: usize,
    out: &Path,
    progress: impl FnMut(usize),
) -> Result<usize> {
    let search = MctsConfig {
        mode: ObservationMode::Isotropic,
        ..cfg.mcts
    };
    let data = collect_selfplay_with_progress(&cfg.env, &search, &cfg.reward, rows, progress)?;
    save_dataset(&data, out)?;
    Ok(data.len())
}

pub fn train(
    cfg: &Config,
    dataset: &Path,
    model_out: &Path,
    progress: impl FnMut(&EpochReport),
) -> Result<TrainOutcome> {
    let rows = load_dataset(dataset)?;
    let outcome = train_with_progress(&rows, &cfg.train, progress)?;
    outcome.model.save(model_out)?;
    Ok(outcome)
}

pub fn calibrate(model: &Path, dataset: &Path, out: Option<&Path>) -> Result<CalibrationReport> {
    let model = MlpModel::load(model)?;
    let rows = load_dataset(dataset)?;
    let report = reliability_report(&model, &rows)?;
    if let Some(out) = out {
        fs::write(out, report.to_table()).map_err(|e| Error::io(out, e))?;
    }
    Ok(report)
}

/// Runs the grid described by `cfg.experiment`.
pub fn experiment(
    cfg: &Config,
    out: &Path,
    progress: impl FnMut(&ResultRow),
) -> Result<GridSummary> {
    run_grid(cfg, &cfg.experiment, out, progress)
}

/// Logs only `ids`; returns the ids that never appeared in the episode.
pub fn trajectories(cfg: &Config, ids: &[VehicleId], out: &Path) -> Result<Vec<VehicleId>> {
    let model = load_run_model(cfg)?;
    let wanted: BTreeSet<VehicleId> = ids.iter().copied().collect();
    let episode = run_algorithm(
        cfg,
        cfg.env.clone(),
        cfg.mcts,
        cfg.run.algorithm,
        model.as_ref(),
        cfg.env.sim_duration,
        &LogFilter::Only(wanted.clone()),
    )?;
    write_trajectories(&episode.log, out)?;
    let seen: BTreeSet<VehicleId> = episode.log.rows.iter().map(|r| r.id).collect();
    Ok(wanted.difference(&seen).copied().collect())
}
