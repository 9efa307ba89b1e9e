//! Bi-fidelity, surrogate-assisted multiobjective search for adversarially
//! robust cell-based architectures.
//!
//! The crate is organized bottom-up:
//!
//! * [`genome`] – the 56-gene stage-wise search space and its DAG decoding.
//! * [`evo`] – NSGA-II sorting, crowding, SBX, polynomial mutation and LHS.
//! * [`gates`] – graph encoder turning a cell into a 128-d embedding.
//! * [`surrogate`] – RBF and MLP regressors over embeddings.
//! * [`micronet`] – a tiny differentiable realization of the search space
//!   with a shared-weight supernet, FGSM/PGD attacks and adversarial training.
//! * [`search`] – the bi-fidelity search loop, archive, screening,
//!   hypervolume and run-directory files.

pub mod evo;
pub mod gates;
pub mod genome;
pub mod micronet;
pub mod rng;
pub mod search;
pub mod surrogate;

pub use evo::{EvoParams, Individual};
pub use gates::{ArchEmbedding, GatesParams};
pub use genome::{BlockDag, CellArchitecture, Genome, GenomeError, Operation};
pub use micronet::{AttackSpec, NetConfig, Supernet, Tensor, TrainConfig};
pub use search::{Mode, SearchConfig, SearchError};
pub use surrogate::{Surrogate, SurrogateKind};
