use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

/// Record of one command invocation. `config` is a flat config that
/// `--config` accepts as is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Map<String, Value>,
    pub master_seed: u64,
    pub tool_version: String,
    pub inputs: Vec<PathBuf>,
    pub started: String,
    pub finished: Option<String>,
    pub exit_code: Option<u8>,
    pub outputs: Vec<PathBuf>,
}

pub fn manifest_path(out: &Path, command: &str) -> PathBuf {
    out.join(format!("manifest_{}.json", command.replace('-', "_")))
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn start(command: &str, config: Map<String, Value>, master_seed: u64, inputs: Vec<PathBuf>) -> Self {
        RunManifest {
            command: command.to_string(),
            config,
            master_seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs,
            started: now(),
            finished: None,
            exit_code: None,
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("serializable");
        std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
    }

    pub fn finish(&mut self, exit_code: u8, path: &Path) -> Result<(), CliError> {
        self.finished = Some(now());
        self.exit_code = Some(exit_code);
        self.write(path)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::io(path, e))
    }
}
