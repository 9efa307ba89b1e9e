use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{MicronetError, Tensor};
use crate::rng::{stream, tag};

pub const IMAGE_SIDE: usize = 8;
pub const NUM_CLASSES: usize = 4;
pub const NOISE_AMPLITUDE: f64 = 0.15;
const LOW: f64 = 0.3;
const HIGH: f64 = 0.7;

/// Noise-free pixel of class `class` at row `r`, column `c`.
pub fn pattern_value(class: usize, r: usize, c: usize) -> f64 {
    let on = match class {
        0 => r % 2 == 0,
        1 => c % 2 == 0,
        2 => (r + c) % 4 < 2,
        3 => (r + c) % 2 == 0,
        _ => panic!("class {class} out of range"),
    };
    if on {
        HIGH
    } else {
        LOW
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    /// Shape `(n, 1, 8, 8)`, values in `[0, 1]`.
    pub images: Tensor,
    pub labels: Vec<usize>,
}

impl Split {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn subset(&self, indices: &[usize]) -> Split {
        Split { images: self.images.select(indices), labels: indices.iter().map(|&i| self.labels[i]).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub seed: u64,
    pub train: Split,
    pub val: Split,
}

/// How to regenerate a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub seed: u64,
    pub n_train: usize,
    pub n_val: usize,
}

impl DataConfig {
    pub fn build(&self) -> Result<SynthDataset, MicronetError> {
        synth_dataset(self.seed, self.n_train, self.n_val)
    }
}

pub fn synth_dataset(seed: u64, n_train: usize, n_val: usize) -> Result<SynthDataset, MicronetError> {
    synth_dataset_with_noise(seed, n_train, n_val, NOISE_AMPLITUDE)
}

pub fn synth_dataset_with_noise(seed: u64, n_train: usize, n_val: usize, noise: f64) -> Result<SynthDataset, MicronetError> {
    if n_train < NUM_CLASSES || n_val < NUM_CLASSES {
        return Err(MicronetError::Config(format!("dataset needs at least {NUM_CLASSES} items per split")));
    }
    Ok(SynthDataset { seed, train: make_split(seed, 0, n_train, noise), val: make_split(seed, 1, n_val, noise) })
}

fn make_split(seed: u64, split: u64, n: usize, noise: f64) -> Split {
    let mut rng = stream(seed, &[tag::DATASET, split]);
    let mut labels: Vec<usize> = (0..n).map(|i| i % NUM_CLASSES).collect();
    labels.shuffle(&mut rng);
    let mut data = Vec::with_capacity(n * IMAGE_SIDE * IMAGE_SIDE);
    for &label in &labels {
        for r in 0..IMAGE_SIDE {
            for c in 0..IMAGE_SIDE {
                let u: f64 = rng.random();
                data.push((pattern_value(label, r, c) + noise * (2.0 * u - 1.0)).clamp(0.0, 1.0));
            }
        }
    }
    Split { images: Tensor::new(vec![n, 1, IMAGE_SIDE, IMAGE_SIDE], data).expect("sizes agree"), labels }
}
