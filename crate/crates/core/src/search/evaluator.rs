use crate::genome::{Genome, NUM_BLOCKS};
use crate::micronet::{evaluate, AttackSpec, Split, Supernet};
use crate::rng::hash_bytes;

use super::SearchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fidelity {
    Low,
    High,
}

const NOISE_BOUND: f64 = 0.05;

fn pseudo_noise(g: &Genome, i: u8, noise_seed: u64) -> f64 {
    let mut bytes = g.genes().to_vec();
    bytes.push(i);
    let h = hash_bytes(noise_seed, &bytes);
    let unit = (h >> 11) as f64 / (1u64 << 53) as f64;
    NOISE_BOUND * (2.0 * unit - 1.0)
}

/// Closed-form stand-in for supernet evaluation: conv-heavy genomes get a
/// lower clean error, deep ones a lower adversarial error.
pub fn synthetic_objectives(g: &Genome, fidelity: Fidelity, noise_seed: u64) -> (f64, f64) {
    let p_conv = g.conv_count() as f64 / 56.0;
    let cell = g.decode();
    let d = cell.blocks.iter().map(|b| b.longest_path() as f64 / 4.0).sum::<f64>() / NUM_BLOCKS as f64;
    let f1h = (0.1 + 0.4 * (1.0 - p_conv) + 0.2 * d).clamp(0.05, 0.95);
    let f2h = (0.2 + 0.4 * (1.0 - d) + 0.2 * p_conv).clamp(0.05, 0.95);
    match fidelity {
        Fidelity::High => (f1h, f2h),
        Fidelity::Low => (
            (f1h + pseudo_noise(g, 0, noise_seed)).clamp(0.0, 1.0),
            (f2h + pseudo_noise(g, 1, noise_seed)).clamp(0.0, 1.0),
        ),
    }
}

/// Clean and adversarial error rates of a genome at two fidelities.
pub trait Evaluator: Sync {
    fn low(&self, g: &Genome) -> Result<(f64, f64), SearchError>;
    fn high(&self, g: &Genome) -> Result<(f64, f64), SearchError>;
}

#[derive(Debug, Clone, Copy)]
pub struct SyntheticEvaluator {
    pub noise_seed: u64,
}

impl Evaluator for SyntheticEvaluator {
    fn low(&self, g: &Genome) -> Result<(f64, f64), SearchError> {
        Ok(synthetic_objectives(g, Fidelity::Low, self.noise_seed))
    }

    fn high(&self, g: &Genome) -> Result<(f64, f64), SearchError> {
        Ok(synthetic_objectives(g, Fidelity::High, self.noise_seed))
    }
}

/// Scores subnets of a trained supernet on the validation split with the
/// FGSM proxy; low fidelity uses a fixed seeded subsample.
#[derive(Debug, Clone)]
pub struct MicronetEvaluator {
    pub supernet: Supernet,
    pub val: Split,
    pub low_fraction: f64,
    pub attack: AttackSpec,
    pub seed: u64,
}

impl MicronetEvaluator {
    pub fn new(supernet: Supernet, val: Split, low_fraction: f64, seed: u64) -> Self {
        MicronetEvaluator { supernet, val, low_fraction, attack: AttackSpec::default_fgsm(), seed }
    }

    fn score(&self, g: &Genome, fraction: f64) -> Result<(f64, f64), SearchError> {
        let r = evaluate(&self.supernet.view(*g), &self.val, Some(&self.attack), fraction, self.seed)?;
        let adv = r.adv_error.ok_or_else(|| SearchError::EvaluatorUnavailable("attack produced no error rate".into()))?;
        Ok((r.clean_error, adv))
    }
}

impl Evaluator for MicronetEvaluator {
    fn low(&self, g: &Genome) -> Result<(f64, f64), SearchError> {
        self.score(g, self.low_fraction)
    }

    fn high(&self, g: &Genome) -> Result<(f64, f64), SearchError> {
        self.score(g, 1.0)
    }
}
