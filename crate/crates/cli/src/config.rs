//! Flat JSON run configuration: the search keys plus the driver's own
//! training and checkpoint keys, all at the top level. Unknown keys are
//! rejected.

use std::path::{Path, PathBuf};

use robarch::micronet::{AttackSpec, DataConfig, NetConfig, TrainConfig};
use robarch::search::SearchConfig;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

/// Keys that are not part of [`SearchConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriverKeys {
    /// Supernet checkpoint for the micronet evaluator.
    pub checkpoint: Option<PathBuf>,
    pub width: usize,
    pub data_seed: u64,
    pub n_train: usize,
    pub n_val: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub max_grad_norm: Option<f64>,
    /// PGD steps of the training attack.
    pub train_attack_steps: usize,
}

impl Default for DriverKeys {
    fn default() -> Self {
        let t = TrainConfig::default();
        DriverKeys {
            checkpoint: None,
            width: t.net.width,
            data_seed: t.data.seed,
            n_train: t.data.n_train,
            n_val: t.data.n_val,
            epochs: t.epochs,
            batch_size: t.batch_size,
            lr: t.lr,
            momentum: t.momentum,
            weight_decay: t.weight_decay,
            max_grad_norm: t.max_grad_norm,
            train_attack_steps: t.attack.steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    pub search: SearchConfig,
    pub driver: DriverKeys,
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("config structs serialize to objects"),
    }
}

fn search_keys() -> Vec<String> {
    let v = serde_json::to_value(SearchConfig::default()).expect("serializable");
    object(v).into_iter().map(|(k, _)| k).collect()
}

impl Config {
    pub fn from_value(v: Value) -> Result<Self, CliError> {
        let Value::Object(all) = v else {
            return Err(CliError::Config("config must be a JSON object".into()));
        };
        let keys = search_keys();
        let (search, driver): (Map<_, _>, Map<_, _>) = all.into_iter().partition(|(k, _)| keys.contains(k));
        let search: SearchConfig = serde_json::from_value(Value::Object(search)).map_err(|e| CliError::Config(e.to_string()))?;
        let driver: DriverKeys = serde_json::from_value(Value::Object(driver)).map_err(|e| CliError::Config(e.to_string()))?;
        search.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Config { search, driver })
    }

    /// Reads a config file; `None` gives the defaults.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Config::from_value(v).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// The flat key map, readable back by [`Config::from_value`].
    pub fn to_flat(&self) -> Map<String, Value> {
        let mut m = object(serde_json::to_value(&self.search).expect("serializable"));
        m.extend(object(serde_json::to_value(&self.driver).expect("serializable")));
        m
    }

    pub fn train_config(&self) -> TrainConfig {
        let d = &self.driver;
        let base = TrainConfig::default();
        TrainConfig {
            net: NetConfig { width: d.width, ..NetConfig::default() },
            data: DataConfig { seed: d.data_seed, n_train: d.n_train, n_val: d.n_val },
            epochs: d.epochs,
            batch_size: d.batch_size,
            lr: d.lr,
            momentum: d.momentum,
            weight_decay: d.weight_decay,
            max_grad_norm: d.max_grad_norm,
            attack: AttackSpec { steps: d.train_attack_steps, ..base.attack },
            seed: self.search.master_seed,
        }
    }
}
