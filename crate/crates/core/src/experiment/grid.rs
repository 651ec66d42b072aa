use std::collections::HashSet;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::config::{Algorithm, Config, ExperimentPlan};
use crate::env::{run_episode, Env, EnvConfig, Episode, EpisodeMetrics, LogFilter, Policy};
use crate::error::{Error, Result};
use crate::guided::GuidedPolicy;
use crate::mcts::{Dynamics, MctsConfig, MctsPolicy};
use crate::nn::{GreedyPolicy, MlpModel};

pub const RAW_HEADER: &str = "algorithm,flow,iterations,seed,status,collisions,speed_average,delay_average,vehicles_entered,vehicles_exited,message";
pub const AGGREGATE_HEADER: &str = "algorithm,flow,iterations,episodes,collisions_mean,collisions_sd,speed_mean,speed_sd,delay_mean,delay_sd";
pub const TIMING_HEADER: &str = "algorithm,flow,iterations,seed,seconds";

/// Identifies one episode of a grid. The greedy network policy has no
/// search budget and is keyed with 0 iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridKey {
    pub algorithm: Algorithm,
    pub flow: f64,
    pub iterations: u32,
    pub seed: u64,
}

impl GridKey {
    fn id(&self) -> (Algorithm, u64, u32, u64) {
        (self.algorithm, self.flow.to_bits(), self.iterations, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub key: GridKey,
    /// `Err` holds the failure reason.
    pub outcome: std::result::Result<EpisodeMetrics, String>,
}

impl ResultRow {
    pub fn to_csv(&self) -> String {
        let k = &self.key;
        let head = format!("{},{},{},{}", k.algorithm, k.flow, k.iterations, k.seed);
        match &self.outcome {
            Ok(m) => format!(
                "{head},ok,{},{},{},{},{},",
                m.collisions, m.speed_average, m.delay_average, m.vehicles_entered, m.vehicles_exited
            ),
            Err(reason) => {
                let clean: String = reason
                    .chars()
                    .map(|c| if c == ',' || c == '\n' || c == '\r' { ' ' } else { c })
                    .collect();
                format!("{head},failed,,,,,,{clean}")
            }
        }
    }

    fn from_csv(line: &str, n: usize, path: &Path) -> Result<Self> {
        let fail = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: n,
            message,
        };
        let cells: Vec<&str> = line.splitn(11, ',').collect();
        if cells.len() != 11 {
            return Err(fail(format!("expected 11 columns, found {}", cells.len())));
        }
        fn num<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            s.parse::<T>().map_err(|e| format!("bad value `{s}`: {e}"))
        }
        let key = GridKey {
            algorithm: cells[0].parse().map_err(|e: Error| fail(e.to_string()))?,
            flow: num(cells[1]).map_err(fail)?,
            iterations: num(cells[2]).map_err(fail)?,
            seed: num(cells[3]).map_err(fail)?,
        };
        let outcome = match cells[4] {
            "ok" => Ok(EpisodeMetrics {
                collisions: num(cells[5]).map_err(fail)?,
                speed_average: num(cells[6]).map_err(fail)?,
                delay_average: num(cells[7]).map_err(fail)?,
                vehicles_entered: num(cells[8]).map_err(fail)?,
                vehicles_exited: num(cells[9]).map_err(fail)?,
            }),
            "failed" => Err(cells[10].to_string()),
            other => return Err(fail(format!("unknown status `{other}`"))),
        };
        Ok(ResultRow { key, outcome })
    }
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        None => return Ok(Vec::new()),
        Some((_, h)) if h.trim() == RAW_HEADER => {}
        Some(_) => {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: "missing results header".into(),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| ResultRow::from_csv(l, i + 1, path))
        .collect()
}

/// Mean and sample standard deviation (n - 1); the deviation of a single
/// value is 0.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub algorithm: Algorithm,
    pub flow: f64,
    pub iterations: u32,
    pub episodes: usize,
    pub collisions: (f64, f64),
    pub speed: (f64, f64),
    pub delay: (f64, f64),
}

impl AggregateRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.algorithm,
            self.flow,
            self.iterations,
            self.episodes,
            self.collisions.0,
            self.collisions.1,
            self.speed.0,
            self.speed.1,
            self.delay.0,
            self.delay.1
        )
    }
}

/// Mean ± SD of the successful episodes of every (algorithm, flow,
/// iterations) cell, in order of first appearance.
pub fn aggregate(rows: &[ResultRow]) -> Vec<AggregateRow> {
    let mut cells: Vec<(GridKey, Vec<EpisodeMetrics>)> = Vec::new();
    for row in rows {
        let Ok(m) = &row.outcome else { continue };
        let same = |k: &GridKey| {
            k.algorithm == row.key.algorithm
                && k.flow.to_bits() == row.key.flow.to_bits()
                && k.iterations == row.key.iterations
        };
        match cells.iter_mut().find(|(k, _)| same(k)) {
            Some((_, ms)) => ms.push(*m),
            None => cells.push((row.key, vec![*m])),
        }
    }
    cells
        .into_iter()
        .map(|(k, ms)| {
            let stat = |f: fn(&EpisodeMetrics) -> f64| mean_sd(&ms.iter().map(f).collect::<Vec<_>>());
            AggregateRow {
                algorithm: k.algorithm,
                flow: k.flow,
                iterations: k.iterations,
                episodes: ms.len(),
                collisions: stat(|m| m.collisions as f64),
                speed: stat(|m| m.speed_average),
                delay: stat(|m| m.delay_average),
            }
        })
        .collect()
}

/// `results.csv` → `results.<suffix>.csv`.
pub fn sibling_path(raw: &Path, suffix: &str) -> PathBuf {
    let stem = raw.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    let ext = raw.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    raw.with_file_name(format!("{stem}.{suffix}.{ext}"))
}

pub fn aggregate_path(raw: &Path) -> PathBuf {
    sibling_path(raw, "aggregate")
}

/// Wall-clock durations live beside the results so the results themselves
/// stay reproducible byte for byte.
pub fn timing_path(raw: &Path) -> PathBuf {
    sibling_path(raw, "timing")
}

/// Keys of `plan` in run order: algorithm, flow, iterations, seed.
pub fn grid_keys(plan: &ExperimentPlan) -> Vec<GridKey> {
    let mut keys = Vec::new();
    for &algorithm in &plan.algorithms {
        for &flow in &plan.flows {
            let budgets: Vec<u32> = if algorithm.uses_search() {
                plan.iterations.clone()
            } else {
                vec![0]
            };
            for &iterations in &budgets {
                for &seed in &plan.seeds {
                    keys.push(GridKey {
                        algorithm,
                        flow,
                        iterations,
                        seed,
                    });
                }
            }
        }
    }
    keys
}

/// Runs one episode of `algorithm`; search settings come from `search`.
pub fn run_algorithm(
    cfg: &Config,
    env_cfg: EnvConfig,
    search: MctsConfig,
    algorithm: Algorithm,
    model: Option<&MlpModel>,
    duration: f64,
    log: &LogFilter,
) -> Result<Episode> {
    let dynamics = Dynamics::from(&env_cfg);
    let search = MctsConfig {
        mode: algorithm.observation_mode(),
        ..search
    };
    let need_model = || {
        model.ok_or_else(|| Error::config(format!("algorithm {algorithm} needs a model")))
    };
    let policy: Box<dyn Policy + '_> = match algorithm {
        Algorithm::Mcts | Algorithm::MctsNudging => Box::new(MctsPolicy {
            config: search,
            reward: cfg.reward,
            dynamics,
        }),
        Algorithm::NnMcts => Box::new(GuidedPolicy {
            search,
            puct: cfg.guided,
            reward: cfg.reward,
            dynamics,
            model: need_model()?,
        }),
        Algorithm::Nn => Box::new(GreedyPolicy {
            model: need_model()?,
        }),
    };
    let mut env = Env::new(env_cfg)?;
    run_episode(&mut env, policy.as_ref(), duration, log)
}

/// Runs the episode for one grid cell: the seed drives both the traffic and
/// the planners.
pub fn run_cell(
    cfg: &Config,
    key: &GridKey,
    duration: f64,
    model: Option<&MlpModel>,
) -> Result<EpisodeMetrics> {
    let env_cfg = EnvConfig {
        demand_flow: key.flow,
        seed: key.seed,
        ..cfg.env.clone()
    };
    let search = MctsConfig {
        iterations: key.iterations.max(1),
        seed: key.seed,
        ..cfg.mcts
    };
    run_algorithm(cfg, env_cfg, search, key.algorithm, model, duration, &LogFilter::Off)
        .map(|e| e.metrics)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GridSummary {
    pub completed: usize,
    pub failed: usize,
    pub skipped: usize,
}

/// Runs every missing cell of `plan`, appending to `raw_path`, then rewrites
/// the aggregate table from the full raw file. Cells already present in the
/// raw file (succeeded or failed) are skipped.
pub fn run_grid(
    cfg: &Config,
    plan: &ExperimentPlan,
    raw_path: &Path,
    mut progress: impl FnMut(&ResultRow),
) -> Result<GridSummary> {
    plan.validate()?;
    let model = match (&plan.model, plan.algorithms.iter().any(|a| a.needs_model())) {
        (Some(p), true) => Some(MlpModel::load(p)?),
        _ => None,
    };
    let duration = plan.duration.unwrap_or(cfg.env.sim_duration);

    let existing = if raw_path.exists() {
        read_results(raw_path)?
    } else {
        Vec::new()
    };
    let done: HashSet<_> = existing.iter().map(|r| r.key.id()).collect();
    let open = |p: &Path, header: &str| -> Result<fs::File> {
        let fresh = fs::metadata(p).map(|m| m.len() == 0).unwrap_or(true);
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(p)
            .map_err(|e| Error::io(p, e))?;
        if fresh {
            writeln!(f, "{header}").map_err(|e| Error::io(p, e))?;
        }
        Ok(f)
    };
    let mut raw = open(raw_path, RAW_HEADER)?;
    let timing = timing_path(raw_path);
    let mut times = open(&timing, TIMING_HEADER)?;

    let mut summary = GridSummary::default();
    for key in grid_keys(plan) {
        if done.contains(&key.id()) {
            summary.skipped += 1;
            continue;
        }
        let start = Instant::now();
        let outcome = run_cell(cfg, &key, duration, model.as_ref()).map_err(|e| e.to_string());
        let seconds = start.elapsed().as_secs_f64();
        let row = ResultRow { key, outcome };
        writeln!(raw, "{}", row.to_csv())
            .and_then(|_| raw.flush())
            .map_err(|e| Error::io(raw_path, e))?;
        writeln!(
            times,
            "{},{},{},{},{seconds:.3}",
            key.algorithm, key.flow, key.iterations, key.seed
        )
        .map_err(|e| Error::io(&timing, e))?;
        match row.outcome {
            Ok(_) => summary.completed += 1,
            Err(_) => summary.failed += 1,
        }
        progress(&row);
    }

    let all = read_results(raw_path)?;
    let mut text = format!("{AGGREGATE_HEADER}\n");
    for a in aggregate(&all) {
        text.push_str(&a.to_csv());
        text.push('\n');
    }
    let agg = aggregate_path(raw_path);
    fs::write(&agg, text).map_err(|e| Error::io(&agg, e))?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metrics(collisions: u64, speed: f64) -> EpisodeMetrics {
        EpisodeMetrics {
            collisions,
            speed_average: speed,
            delay_average: 0.5,
            vehicles_entered: 10,
            vehicles_exited: 8,
        }
    }

    fn key(seed: u64) -> GridKey {
        GridKey {
            algorithm: Algorithm::Mcts,
            flow: 5400.0,
            iterations: 200,
            seed,
        }
    }

    #[test]
    fn grid_arithmetic() {
        let plan = ExperimentPlan {
            algorithms: vec![Algorithm::Mcts, Algorithm::MctsNudging],
            flows: vec![5400.0],
            iterations: vec![50, 200],
            seeds: vec![1, 2, 3, 4, 5],
            ..Default::default()
        };
        assert_eq!(grid_keys(&plan).len(), 20);
        let with_nn = ExperimentPlan {
            algorithms: vec![Algorithm::Nn],
            ..plan
        };
        assert_eq!(grid_keys(&with_nn).len(), 5);
    }

    #[test]
    fn sample_sd() {
        assert_eq!(mean_sd(&[3.0; 5]), (3.0, 0.0));
        assert_eq!(mean_sd(&[7.0]), (7.0, 0.0));
        let (m, sd) = mean_sd(&[3.0, 4.0, 5.0, 4.0, 3.0]);
        assert_eq!(m, 3.8);
        assert!((sd - 0.8366600265340756).abs() < 1e-15);
    }

    #[test]
    fn rows_round_trip() {
        let rows = [
            ResultRow { key: key(1), outcome: Ok(metrics(3, 28.123456789)) },
            ResultRow { key: key(2), outcome: Err("blocked, queue\nfull".into()) },
        ];
        let text: Vec<String> = rows.iter().map(ResultRow::to_csv).collect();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        fs::write(&p, format!("{RAW_HEADER}\n{}\n", text.join("\n"))).unwrap();
        let back = read_results(&p).unwrap();
        assert_eq!(back[0], rows[0]);
        assert_eq!(back[1].outcome, Err("blocked  queue full".into()));
    }

    #[test]
    fn aggregate_skips_failures() {
        let mut rows: Vec<ResultRow> = (1..=5)
            .map(|s| ResultRow { key: key(s), outcome: Ok(metrics(s, 30.0)) })
            .collect();
        rows.push(ResultRow { key: key(6), outcome: Err("x".into()) });
        let agg = aggregate(&rows);
        assert_eq!(agg.len(), 1);
        assert_eq!(agg[0].episodes, 5);
        assert_eq!(agg[0].collisions.0, 3.0);
        assert_eq!(agg[0].speed, (30.0, 0.0));
    }

    #[test]
    fn sibling_names() {
        let p = Path::new("/tmp/out/results.csv");
        assert_eq!(aggregate_path(p), Path::new("/tmp/out/results.aggregate.csv"));
        assert_eq!(timing_path(p), Path::new("/tmp/out/results.timing.csv"));
    }
}
