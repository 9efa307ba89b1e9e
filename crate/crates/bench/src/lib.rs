//! Shared fixtures for the benchmarks.

use rand::Rng;
use robarch::gates::GatesParams;
use robarch::genome::{random_genome, Genome};
use robarch::micronet::{NetConfig, Tensor};
use robarch::rng::stream;
use robarch::search::{synthetic_objectives, Fidelity};
use robarch::surrogate::TrainingSet;

pub fn genomes(n: usize, seed: u64) -> Vec<Genome> {
    let mut rng = stream(seed, &[]);
    (0..n).map(|_| random_genome(&mut rng)).collect()
}

/// `n` objective vectors of length `m`, uniform in the unit cube.
pub fn objectives(n: usize, m: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream(seed, &[]);
    (0..n).map(|_| (0..m).map(|_| rng.random::<f64>()).collect()).collect()
}

/// A mutually non-dominated 2D or 3D front of `n` points.
pub fn front(n: usize, m: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let t = (i as f64 + 0.5) / n as f64;
            match m {
                2 => vec![t, 1.0 - t],
                _ => {
                    let u = ((i * 7) % n) as f64 / n as f64;
                    vec![t * (1.0 - u) * 0.9, (1.0 - t) * (1.0 - u) * 0.9, u * 0.9]
                }
            }
        })
        .collect()
}

/// Training set of `n` distinct genomes labelled by the synthetic oracle.
pub fn training_set(n: usize, gates: &GatesParams, seed: u64) -> TrainingSet {
    let mut set = TrainingSet::default();
    let mut rng = stream(seed, &[]);
    while set.len() < n {
        let g = random_genome(&mut rng);
        let (f1, f2) = synthetic_objectives(&g, Fidelity::High, seed);
        set.insert(g, gates.embed(&g), f1, f2);
    }
    set
}

pub fn images(cfg: &NetConfig, batch: usize, seed: u64) -> (Tensor, Vec<usize>) {
    let mut rng = stream(seed, &[]);
    let len = batch * cfg.in_channels * cfg.image_size * cfg.image_size;
    let x = Tensor::new(vec![batch, cfg.in_channels, cfg.image_size, cfg.image_size], (0..len).map(|_| rng.random::<f64>()).collect())
        .expect("consistent shape");
    let y = (0..batch).map(|_| rng.random_range(0..cfg.num_classes)).collect();
    (x, y)
}
