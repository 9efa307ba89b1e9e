//! Simulated binary crossover and polynomial mutation in their bounded
//! real-coded forms, applied to the relaxation of each gene to
//! `[lower, upper]` and rounded back to the nearest valid gene.

use rand::Rng;

use super::EvoParams;
use crate::genome::{Genome, GENOME_LEN};

fn to_gene(x: f64, params: &EvoParams) -> u8 {
    let (lo, hi) = params.gene_bounds;
    x.round().clamp(lo, hi) as u8
}

fn sbx_pair<R: Rng + ?Sized>(p1: f64, p2: f64, eta: f64, (lo, hi): (f64, f64), rng: &mut R) -> (f64, f64) {
    let (y1, y2) = if p1 < p2 { (p1, p2) } else { (p2, p1) };
    let span = y2 - y1;
    let u: f64 = rng.random();
    let exponent = 1.0 / (eta + 1.0);
    let beta_q = |beta: f64| {
        let alpha = 2.0 - beta.powf(-(eta + 1.0));
        if u <= 1.0 / alpha {
            (u * alpha).powf(exponent)
        } else {
            (1.0 / (2.0 - u * alpha)).powf(exponent)
        }
    };
    let c1 = 0.5 * ((y1 + y2) - beta_q(1.0 + 2.0 * (y1 - lo) / span) * span);
    let c2 = 0.5 * ((y1 + y2) + beta_q(1.0 + 2.0 * (hi - y2) / span) * span);
    let (c1, c2) = (c1.clamp(lo, hi), c2.clamp(lo, hi));
    if rng.random_bool(0.5) {
        (c2, c1)
    } else {
        (c1, c2)
    }
}

/// Gene-wise SBX. With probability `1 - crossover_prob` the parents are
/// returned unchanged; identical genes are always copied through.
pub fn sbx_crossover<R: Rng + ?Sized>(p1: &Genome, p2: &Genome, params: &EvoParams, rng: &mut R) -> (Genome, Genome) {
    if !rng.random_bool(params.crossover_prob) {
        return (*p1, *p2);
    }
    let mut a = *p1.genes();
    let mut b = *p2.genes();
    for i in 0..GENOME_LEN {
        if a[i] == b[i] {
            continue;
        }
        let (c1, c2) = sbx_pair(a[i] as f64, b[i] as f64, params.sbx_eta, params.gene_bounds, rng);
        a[i] = to_gene(c1, params);
        b[i] = to_gene(c2, params);
    }
    let valid = |g| Genome::from_genes(g).expect("rounded and clamped genes are valid");
    (valid(a), valid(b))
}

/// Counters reported by [`polynomial_mutation_with_stats`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MutationStats {
    /// Genes selected for mutation.
    pub drawn: usize,
    /// Genes whose rounded value actually changed.
    pub changed: usize,
}

fn pm_value<R: Rng + ?Sized>(y: f64, eta: f64, (lo, hi): (f64, f64), rng: &mut R) -> f64 {
    let span = hi - lo;
    let delta1 = (y - lo) / span;
    let delta2 = (hi - y) / span;
    let u: f64 = rng.random();
    let power = 1.0 / (eta + 1.0);
    let delta_q = if u <= 0.5 {
        let val = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - delta1).powf(eta + 1.0);
        val.powf(power) - 1.0
    } else {
        let val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - delta2).powf(eta + 1.0);
        1.0 - val.powf(power)
    };
    (y + delta_q * span).clamp(lo, hi)
}

pub fn polynomial_mutation<R: Rng + ?Sized>(g: &Genome, params: &EvoParams, rng: &mut R) -> Genome {
    polynomial_mutation_with_stats(g, params, rng).0
}

/// Mutates each gene independently with `mutation_prob`.
pub fn polynomial_mutation_with_stats<R: Rng + ?Sized>(
    g: &Genome,
    params: &EvoParams,
    rng: &mut R,
) -> (Genome, MutationStats) {
    let mut genes = *g.genes();
    let mut stats = MutationStats::default();
    for gene in genes.iter_mut() {
        if !rng.random_bool(params.mutation_prob) {
            continue;
        }
        stats.drawn += 1;
        let mutated = to_gene(pm_value(*gene as f64, params.pm_eta, params.gene_bounds, rng), params);
        if mutated != *gene {
            stats.changed += 1;
        }
        *gene = mutated;
    }
    (Genome::from_genes(genes).expect("rounded and clamped genes are valid"), stats)
}
