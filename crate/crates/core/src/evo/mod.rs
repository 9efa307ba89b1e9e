//! NSGA-II machinery over genomes.

mod lhs;
mod pareto;
mod variation;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genome::Genome;

pub use lhs::{lhs_sample, lhs_unit};
pub use pareto::{
    crowded_cmp, crowding_distance, dominates, fast_nondominated_sort, next_generation, select_survivors,
    sort_fronts, tournament_select, SelectionOutcome,
};
pub(crate) use pareto::dominates_unchecked;
pub use variation::{polynomial_mutation, polynomial_mutation_with_stats, sbx_crossover, MutationStats};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvoError {
    #[error("objective vectors differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("objective arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("invalid evolution parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvoParams {
    pub population_size: usize,
    pub crossover_prob: f64,
    /// Per-gene mutation probability.
    pub mutation_prob: f64,
    pub sbx_eta: f64,
    pub pm_eta: f64,
    pub gene_bounds: (f64, f64),
}

impl Default for EvoParams {
    fn default() -> Self {
        EvoParams {
            population_size: 100,
            crossover_prob: 0.9,
            mutation_prob: 0.02,
            sbx_eta: 15.0,
            pm_eta: 20.0,
            gene_bounds: (0.0, 3.0),
        }
    }
}

impl EvoParams {
    pub fn validate(&self) -> Result<(), EvoError> {
        let bad = |msg: &str| Err(EvoError::InvalidParams(msg.to_string()));
        if self.population_size < 4 || self.population_size % 2 != 0 {
            return bad("population_size must be even and at least 4");
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) || !(0.0..=1.0).contains(&self.mutation_prob) {
            return bad("probabilities must lie in [0, 1]");
        }
        if !(self.sbx_eta > 0.0 && self.pm_eta > 0.0) {
            return bad("distribution indices must be positive");
        }
        Ok(())
    }
}

/// Where an individual's objective values came from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalMeta {
    pub generation: usize,
    pub low: Option<(f64, f64)>,
    pub high: Option<(f64, f64)>,
    pub surrogate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genome: Genome,
    /// Minimized objective vector.
    pub objectives: Vec<f64>,
    pub rank: Option<usize>,
    pub crowding: Option<f64>,
    pub meta: EvalMeta,
}

impl Individual {
    pub fn new(genome: Genome, objectives: Vec<f64>) -> Self {
        Individual { genome, objectives, rank: None, crowding: None, meta: EvalMeta::default() }
    }
}
