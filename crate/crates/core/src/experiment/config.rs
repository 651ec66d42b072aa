use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::env::{EnvConfig, ObservationMode};
use crate::error::{Error, Result};
use crate::guided::PuctConfig;
use crate::mcts::{MctsConfig, RewardParams};
use crate::nn::TrainConfig;

/// Environment variable naming the default configuration file.
pub const CONFIG_ENV_VAR: &str = "LANEFREE_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// UCT search observing only vehicles ahead.
    Mcts,
    /// UCT search observing vehicles ahead and behind.
    MctsNudging,
    /// Prior-guided search with network predictions.
    NnMcts,
    /// Greedy network policy, no search.
    Nn,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Mcts,
        Algorithm::MctsNudging,
        Algorithm::NnMcts,
        Algorithm::Nn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Mcts => "mcts",
            Algorithm::MctsNudging => "mcts-nudging",
            Algorithm::NnMcts => "nn-mcts",
            Algorithm::Nn => "nn",
        }
    }

    pub fn needs_model(self) -> bool {
        matches!(self, Algorithm::NnMcts | Algorithm::Nn)
    }

    /// The greedy policy ignores the iteration budget.
    pub fn uses_search(self) -> bool {
        !matches!(self, Algorithm::Nn)
    }

    pub fn observation_mode(self) -> ObservationMode {
        match self {
            Algorithm::Mcts => ObservationMode::FrontOnly,
            _ => ObservationMode::Isotropic,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::config(format!("unknown algorithm `{s}`")))
    }
}

/// Settings for single-episode commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub algorithm: Algorithm,
    /// Trained network, required by the network-based algorithms.
    pub model: Option<PathBuf>,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            algorithm: Algorithm::MctsNudging,
            model: None,
        }
    }
}

/// Grid of episodes: every (algorithm, flow, iterations, seed) combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentPlan {
    pub algorithms: Vec<Algorithm>,
    /// Demand flows, veh/h.
    pub flows: Vec<f64>,
    pub iterations: Vec<u32>,
    pub seeds: Vec<u64>,
    /// Episode length in seconds; the environment's `sim_duration` when unset.
    pub duration: Option<f64>,
    pub model: Option<PathBuf>,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            algorithms: vec![Algorithm::Mcts, Algorithm::MctsNudging],
            flows: vec![5400.0],
            iterations: vec![30, 50, 100, 200, 500, 750, 1000],
            seeds: vec![1, 2, 3, 4, 5],
            duration: None,
            model: None,
        }
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty()
            || self.flows.is_empty()
            || self.iterations.is_empty()
            || self.seeds.is_empty()
        {
            return Err(Error::config(
                "experiment needs at least one algorithm, flow, iteration count and seed",
            ));
        }
        if self.algorithms.iter().any(|a| a.needs_model()) && self.model.is_none() {
            return Err(Error::config("nn-mcts and nn need `experiment.model`"));
        }
        if self.iterations.contains(&0) {
            return Err(Error::config("iteration counts must be at least 1"));
        }
        if let Some(d) = self.duration {
            if !(d >= 0.0) {
                return Err(Error::config("duration must be non-negative"));
            }
        }
        Ok(())
    }
}

/// Every tunable of the simulator, planners, training and experiments.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub env: EnvConfig,
    pub reward: RewardParams,
    pub mcts: MctsConfig,
    pub guided: PuctConfig,
    pub train: TrainConfig,
    pub run: RunSettings,
    pub experiment: ExperimentPlan,
}

/// Splits `a.b.c=value` and parses the value as TOML, falling back to a
/// plain string.
fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(format!("override `{assignment}` is not key=value")))?;
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, parents) = parts.split_last().expect("split yields at least one part");
    let mut table = doc;
    for p in parents {
        let entry = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(format!("`{p}` in `{key}` is not a table")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.reward.validate(self.env.visibility)?;
        self.mcts.validate()?;
        self.guided.validate()?;
        self.train.validate()
    }

    /// Parses a TOML document, then applies `key=value` overrides.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Table =
            toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: Config = doc
            .try_into()
            .map_err(|e: toml::de::Error| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path`, or the file named by [`CONFIG_ENV_VAR`], or starts from
    /// the defaults; overrides are applied last.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let from_env = std::env::var_os(CONFIG_ENV_VAR).map(PathBuf::from);
        let text = match path.map(Path::to_path_buf).or(from_env) {
            Some(p) => std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?,
            None => String::new(),
        };
        Self::from_toml(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = Config::default();
        assert_eq!(Config::from_toml(&cfg.to_toml(), &[]).unwrap(), cfg);
        assert_eq!(Config::from_toml("", &[]).unwrap(), cfg);
    }

    #[test]
    fn default_values() {
        let c = Config::default();
        assert_eq!(c.env.time_step, 0.25);
        assert_eq!(c.env.demand_flow, 5400.0);
        assert_eq!((c.env.road.length, c.env.road.width), (500.0, 10.2));
        assert_eq!(c.reward.collision_penalty, 10.0);
        assert_eq!((c.mcts.min_visits, c.mcts.max_rollout_depth), (5, 6));
        assert_eq!((c.train.batch_size, c.train.epochs, c.train.learning_rate), (64, 50, 0.001));
        assert_eq!(c.train.hidden_layers, vec![512, 256, 128]);
        assert_eq!(c.experiment.iterations, vec![30, 50, 100, 200, 500, 750, 1000]);
        assert_eq!(c.experiment.seeds.len(), 5);
    }

    #[test]
    fn overrides_patch_nested_keys() {
        let cfg = Config::from_toml(
            "[mcts]\niterations = 10\n",
            &[
                "mcts.iterations=250".into(),
                "env.demand_flow=7200".into(),
                "run.algorithm=mcts".into(),
                "experiment.flows=[5400, 9000]".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.mcts.iterations, 250);
        assert_eq!(cfg.env.demand_flow, 7200.0);
        assert_eq!(cfg.run.algorithm, Algorithm::Mcts);
        assert_eq!(cfg.experiment.flows, vec![5400.0, 9000.0]);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_config_errors() {
        assert!(matches!(Config::from_toml("[mcts]\nbogus = 1\n", &[]), Err(Error::Config(_))));
        assert!(matches!(
            Config::from_toml("", &["mcts.iterations=0".into()]),
            Err(Error::Config(_))
        ));
        assert!(matches!(Config::from_toml("", &["oops".into()]), Err(Error::Config(_))));
    }

    #[test]
    fn nn_plans_need_a_model() {
        let plan = ExperimentPlan {
            algorithms: vec![Algorithm::Nn],
            ..Default::default()
        };
        assert!(plan.validate().is_err());
        let plan = ExperimentPlan {
            model: Some("m.txt".into()),
            ..plan
        };
        assert!(plan.validate().is_ok());
    }

    #[test]
    fn algorithm_names() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
    }
}
