//! Latin hypercube sampling over the unit cube, mapped onto genes.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::genome::{Genome, GENOME_LEN, NUM_OPERATIONS};

/// Raw LHS design: `m` points in `[0,1)^dims`, each dimension using every
/// one of the `m` equal strata exactly once.
pub fn lhs_unit<R: Rng + ?Sized>(m: usize, dims: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut points = vec![vec![0.0; dims]; m];
    let mut strata: Vec<usize> = (0..m).collect();
    for d in 0..dims {
        strata.shuffle(rng);
        for (point, &s) in points.iter_mut().zip(&strata) {
            let u: f64 = rng.random();
            point[d] = (s as f64 + u) / m as f64;
        }
    }
    points
}

/// `m` genomes from an LHS design; gene = `min(floor(4u), 3)`.
pub fn lhs_sample<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<Genome> {
    lhs_unit(m, GENOME_LEN, rng)
        .into_iter()
        .map(|u| {
            let genes = std::array::from_fn(|d| ((u[d] * NUM_OPERATIONS as f64).floor() as u8).min(3));
            Genome::from_genes(genes).expect("genes are clamped to 0..=3")
        })
        .collect()
}
