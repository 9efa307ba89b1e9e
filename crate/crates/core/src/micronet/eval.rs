use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::attack::{attack, AttackSpec, Differentiable};
use super::data::Split;
use super::net::SubnetView;
use super::{MicronetError, Tensor};
use crate::rng::{stream, tag};

const CHUNK: usize = 64;

/// A model that produces class logits and input gradients.
pub trait Classifier: Differentiable<Target = [usize]> {
    fn logits(&self, x: &Tensor) -> Result<Tensor, MicronetError>;
}

impl Classifier for SubnetView<'_> {
    fn logits(&self, x: &Tensor) -> Result<Tensor, MicronetError> {
        self.forward(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub clean_error: f64,
    pub adv_error: Option<f64>,
    /// Number of split items scored.
    pub evaluated: usize,
}

/// Sorted indices of a seeded `ceil(fraction * n)`-item subsample.
pub fn subsample_indices(n: usize, fraction: f64, seed: u64) -> Result<Vec<usize>, MicronetError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(MicronetError::Config(format!("fraction {fraction} outside (0, 1]")));
    }
    if n == 0 {
        return Err(MicronetError::EmptySplit);
    }
    let m = ((fraction * n as f64).ceil() as usize).clamp(1, n);
    if m == n {
        return Ok((0..n).collect());
    }
    let mut rng = stream(seed, &[tag::SUBSAMPLE]);
    let mut picked = index::sample(&mut rng, n, m).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

fn misclassified(logits: &Tensor, labels: &[usize]) -> usize {
    (0..logits.batch())
        .filter(|&i| {
            let row = logits.sample(i);
            // first maximum wins ties
            let pred = (0..row.len()).fold(0, |best, j| if row[j] > row[best] { j } else { best });
            pred != labels[i]
        })
        .count()
}

/// Error rates on a seeded subsample of `split`, optionally under attack.
pub fn evaluate<M: Classifier>(
    model: &M,
    split: &Split,
    attack_spec: Option<&AttackSpec>,
    fraction: f64,
    seed: u64,
) -> Result<EvalResult, MicronetError> {
    let picked = subsample_indices(split.len(), fraction, seed)?;
    let (mut clean, mut adv) = (0, 0);
    for (chunk_id, chunk) in picked.chunks(CHUNK).enumerate() {
        let part = split.subset(chunk);
        clean += misclassified(&model.logits(&part.images)?, &part.labels);
        if let Some(spec) = attack_spec {
            let mut rng = stream(seed, &[tag::ATTACK, chunk_id as u64]);
            let x_adv = attack(model, &part.images, &part.labels, spec, &mut rng)?;
            adv += misclassified(&model.logits(&x_adv)?, &part.labels);
        }
    }
    let n = picked.len() as f64;
    Ok(EvalResult { clean_error: clean as f64 / n, adv_error: attack_spec.map(|_| adv as f64 / n), evaluated: picked.len() })
}

/// Clean and attacked error rates on the whole split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinalMetrics {
    pub clean_error: f64,
    pub fgsm_error: f64,
    pub pgd7_error: f64,
    pub pgd20_error: f64,
}

pub fn final_metrics<M: Classifier>(model: &M, split: &Split, seed: u64) -> Result<FinalMetrics, MicronetError> {
    let fgsm = evaluate(model, split, Some(&AttackSpec::default_fgsm()), 1.0, seed)?;
    let pgd7 = evaluate(model, split, Some(&AttackSpec::pgd7()), 1.0, seed)?;
    let pgd20 = evaluate(model, split, Some(&AttackSpec::pgd20()), 1.0, seed)?;
    Ok(FinalMetrics {
        clean_error: fgsm.clean_error,
        fgsm_error: fgsm.adv_error.unwrap_or(f64::NAN),
        pgd7_error: pgd7.adv_error.unwrap_or(f64::NAN),
        pgd20_error: pgd20.adv_error.unwrap_or(f64::NAN),
    })
}
