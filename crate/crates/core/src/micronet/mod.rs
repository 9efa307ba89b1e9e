//! Desk-scale differentiable realization of the search space.
//!
//! A stem convolution feeds four single-cell blocks `B0 B1 B2 R` whose two
//! inputs are the outputs of the previous two stages; `R` halves the
//! resolution. Each block concatenates its internal nodes and projects
//! them back to the base width with a bias-free 1x1 convolution followed by
//! a parameter-free per-sample standardization, which keeps activation
//! scale comparable across genomes without batch statistics. A global
//! average pool and an affine layer produce the class logits.
//!
//! Per-sample kernels with hand-written reverse mode keep everything in
//! `f64`, so gradients can be checked against finite differences.

mod attack;
mod checkpoint;
mod data;
mod eval;
pub mod layers;
mod net;
mod tensor;
mod train;

use thiserror::Error;

pub use attack::{attack, fgsm, pgd, project_coord, random_start, AttackKind, AttackSpec, Differentiable};
pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub use data::{pattern_value, synth_dataset, synth_dataset_with_noise, DataConfig, Split, SynthDataset, NOISE_AMPLITUDE};
pub use eval::{evaluate, final_metrics, subsample_indices, Classifier, EvalResult, FinalMetrics};
pub use layers::{conv_out, softmax_xent};
pub use net::{Gradients, NetConfig, Network, ParamLayout, StandaloneNet, SubnetView, Supernet, TensorEntry};
pub use tensor::Tensor;
pub use train::{adv_train_supernet, train_standalone, EpochLog, StandaloneOutcome, TrainConfig};

#[derive(Debug, Error)]
pub enum MicronetError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("genome needs parameters for block {block} edge {edge} that this network does not hold")]
    MissingSlot { block: usize, edge: usize },
    #[error("label {label} out of range for {classes} classes")]
    BadLabel { label: usize, classes: usize },
    #[error("empty evaluation split")]
    EmptySplit,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("non-finite value during {0}")]
    NonFinite(&'static str),
    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
