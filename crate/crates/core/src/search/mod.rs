//! Bi-fidelity surrogate-assisted search: initial Latin-hypercube sampling
//! evaluated at high fidelity, periodic surrogate refits, a three-objective
//! NSGA-II loop on `(f1l, f2l, f3)`, infill, archive maintenance, secondary
//! screening and hypervolume reporting. Modes `H`, `L` and `S` are the
//! ablations using high fidelity only, low fidelity only and the surrogate
//! only.

mod archive;
mod evaluator;
mod hv;
mod infill;
mod io;
mod run;
mod screen;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evo::{EvoError, EvoParams};
use crate::micronet::MicronetError;
use crate::surrogate::{SurrogateError, SurrogateKind};

pub use archive::{Archive, ArchiveEntry};
pub use evaluator::{synthetic_objectives, Evaluator, Fidelity, MicronetEvaluator, SyntheticEvaluator};
pub use hv::hypervolume;
pub use infill::{infill_select, nearest_distance};
pub use io::{
    embedding_hash, read_archive, read_history, write_archive, write_config, write_history, write_surrogate_data, RunFiles,
};
pub use run::{run_search, Counters, GenerationRecord, SearchOutcome};
pub use screen::secondary_screening;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error("evaluator unavailable: {0}")]
    EvaluatorUnavailable(String),
    #[error("point {point:?} lies beyond the reference {reference:?}")]
    PointBeyondReference { point: Vec<f64>, reference: Vec<f64> },
    #[error("hypervolume supports 2 or 3 objectives, got {0}")]
    Dimension(usize),
    #[error("archive is empty")]
    EmptyArchive,
    #[error("malformed run file: {0}")]
    Format(String),
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
    #[error(transparent)]
    Micronet(#[from] MicronetError),
    #[error(transparent)]
    Evo(#[from] EvoError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Which objectives drive selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Mode {
    /// Low-fidelity pair plus the surrogate auxiliary objective.
    #[default]
    SH,
    /// High-fidelity pair, no surrogate.
    H,
    /// Low-fidelity pair, no surrogate.
    L,
    /// Surrogate prediction alone.
    S,
}

impl Mode {
    pub fn uses_surrogate(self) -> bool {
        matches!(self, Mode::SH | Mode::S)
    }

    pub fn label(self) -> &'static str {
        match self {
            Mode::SH => "SH",
            Mode::H => "H",
            Mode::L => "L",
            Mode::S => "S",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "SH" => Ok(Mode::SH),
            "H" => Ok(Mode::H),
            "L" => Ok(Mode::L),
            "S" => Ok(Mode::S),
            other => Err(format!("unknown mode {other:?} (expected SH, H, L or S)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EvaluatorKind {
    #[default]
    Synthetic,
    Micronet,
}

impl std::str::FromStr for EvaluatorKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "synthetic" => Ok(EvaluatorKind::Synthetic),
            "micronet" => Ok(EvaluatorKind::Micronet),
            other => Err(format!("unknown evaluator {other:?} (expected synthetic or micronet)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub population_size: usize,
    /// Total generations T.
    pub max_generations: usize,
    /// Generations G between surrogate refits.
    pub surrogate_update_interval: usize,
    /// Infill samples k per refit.
    pub infill_count: usize,
    /// Initial high-fidelity samples m.
    pub initial_samples: usize,
    pub low_fidelity_fraction: f64,
    pub surrogate_kind: SurrogateKind,
    pub mode: Mode,
    pub evaluator: EvaluatorKind,
    pub master_seed: u64,
    /// Seconds; the search returns its current archive once exceeded.
    pub wall_clock_budget: Option<f64>,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub sbx_eta: f64,
    pub pm_eta: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        let evo = EvoParams::default();
        SearchConfig {
            population_size: evo.population_size,
            max_generations: 100,
            surrogate_update_interval: 20,
            infill_count: 10,
            initial_samples: 200,
            low_fidelity_fraction: 0.2,
            surrogate_kind: SurrogateKind::Rbf,
            mode: Mode::SH,
            evaluator: EvaluatorKind::Synthetic,
            master_seed: 0,
            wall_clock_budget: None,
            crossover_prob: evo.crossover_prob,
            mutation_prob: evo.mutation_prob,
            sbx_eta: evo.sbx_eta,
            pm_eta: evo.pm_eta,
        }
    }
}

impl SearchConfig {
    pub fn evo_params(&self) -> EvoParams {
        EvoParams {
            population_size: self.population_size,
            crossover_prob: self.crossover_prob,
            mutation_prob: self.mutation_prob,
            sbx_eta: self.sbx_eta,
            pm_eta: self.pm_eta,
            ..EvoParams::default()
        }
    }

    /// Number of surrogate rounds T / G.
    pub fn rounds(&self) -> usize {
        self.max_generations / self.surrogate_update_interval
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: String| Err(SearchError::Config(m));
        self.evo_params().validate()?;
        if self.surrogate_update_interval == 0 || self.max_generations == 0 {
            return bad("max_generations and surrogate_update_interval must be positive".into());
        }
        if self.max_generations % self.surrogate_update_interval != 0 {
            return bad(format!(
                "max_generations {} is not a multiple of surrogate_update_interval {}",
                self.max_generations, self.surrogate_update_interval
            ));
        }
        if self.infill_count >= self.population_size {
            return bad(format!("infill_count {} must be below population_size {}", self.infill_count, self.population_size));
        }
        if self.initial_samples < 2 {
            return bad(format!("initial_samples {} must be at least 2", self.initial_samples));
        }
        if !(self.low_fidelity_fraction > 0.0 && self.low_fidelity_fraction <= 1.0) {
            return bad(format!("low_fidelity_fraction {} outside (0, 1]", self.low_fidelity_fraction));
        }
        if let Some(b) = self.wall_clock_budget {
            if b.is_nan() || b <= 0.0 {
                return bad(format!("wall_clock_budget {b} must be positive"));
            }
        }
        Ok(())
    }
}
