//! Regressors predicting the high-fidelity score `0.5 f1h + 0.5 f2h` from
//! an architecture embedding. The prediction is the auxiliary objective.

mod io;
mod kmeans;
mod mlp;
mod rbf;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gates::ArchEmbedding;
use crate::genome::Genome;

pub use io::{read_surrogate, write_surrogate};
pub use kmeans::kmeans;
pub use mlp::{fit_mlp, fit_mlp_with, MlpModel, MlpTrainConfig, MLP_HIDDEN};
pub use rbf::{fit_rbf, fit_rbf_with, RbfModel, RBF_CENTERS};

#[derive(Debug, Error)]
pub enum SurrogateError {
    #[error("no points to cluster")]
    EmptyInput,
    #[error("need at least two training records, got {0}")]
    DegenerateTrainingSet(usize),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("malformed model file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Weight of each high-fidelity error rate in the regression label.
pub const LABEL_WEIGHT: f64 = 0.5;

pub fn label(f1h: f64, f2h: f64) -> f64 {
    LABEL_WEIGHT * f1h + LABEL_WEIGHT * f2h
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateRecord {
    pub genome: Genome,
    pub embedding: ArchEmbedding,
    pub f1h: f64,
    pub f2h: f64,
    pub label: f64,
}

/// Insertion-ordered high-fidelity samples without duplicate genomes.
#[derive(Debug, Clone, Default)]
pub struct TrainingSet {
    records: Vec<SurrogateRecord>,
    genomes: HashSet<Genome>,
}

impl TrainingSet {
    /// Adds a record; returns `false` (and keeps the earlier one) on a duplicate genome.
    pub fn insert(&mut self, genome: Genome, embedding: ArchEmbedding, f1h: f64, f2h: f64) -> bool {
        if !self.genomes.insert(genome) {
            return false;
        }
        self.records.push(SurrogateRecord { genome, embedding, f1h, f2h, label: label(f1h, f2h) });
        true
    }

    pub fn contains(&self, genome: &Genome) -> bool {
        self.genomes.contains(genome)
    }

    pub fn records(&self) -> &[SurrogateRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SurrogateKind {
    #[default]
    Rbf,
    Mlp,
}

impl std::str::FromStr for SurrogateKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rbf" => Ok(SurrogateKind::Rbf),
            "mlp" => Ok(SurrogateKind::Mlp),
            other => Err(format!("unknown surrogate kind {other:?} (expected rbf or mlp)")),
        }
    }
}

/// A fitted regression head.
#[derive(Debug, Clone, PartialEq)]
pub enum Surrogate {
    Rbf(RbfModel),
    Mlp(MlpModel),
}

impl Surrogate {
    pub fn fit(kind: SurrogateKind, set: &TrainingSet, seed: u64) -> Result<Self, SurrogateError> {
        Ok(match kind {
            SurrogateKind::Rbf => Surrogate::Rbf(fit_rbf(set, seed)?),
            SurrogateKind::Mlp => Surrogate::Mlp(fit_mlp(set, seed)?),
        })
    }

    pub fn predict(&self, e: &ArchEmbedding) -> f64 {
        match self {
            Surrogate::Rbf(m) => m.predict(e.as_slice()),
            Surrogate::Mlp(m) => m.predict(e.as_slice()),
        }
    }

    pub fn kind(&self) -> SurrogateKind {
        match self {
            Surrogate::Rbf(_) => SurrogateKind::Rbf,
            Surrogate::Mlp(_) => SurrogateKind::Mlp,
        }
    }
}
