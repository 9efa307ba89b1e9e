use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;

use super::{SurrogateError, TrainingSet};
use crate::gates::EMBEDDING_DIM;
use crate::rng::RngStream;

pub const MLP_HIDDEN: usize = 256;

/// Adam/minibatch settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpTrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for MlpTrainConfig {
    fn default() -> Self {
        MlpTrainConfig { epochs: 100, batch_size: 50, learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// Three affine layers `in -> hidden -> hidden -> 1` with rectifiers on
/// the hidden layers. Parameters live in one flat row-major buffer:
/// `W1, b1, W2, b2, W3, b3`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub input: usize,
    pub hidden: usize,
    pub params: Vec<f64>,
}

struct Offsets {
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
    w3: usize,
    b3: usize,
    len: usize,
}

fn offsets(input: usize, hidden: usize) -> Offsets {
    let w1 = 0;
    let b1 = w1 + hidden * input;
    let w2 = b1 + hidden;
    let b2 = w2 + hidden * hidden;
    let w3 = b2 + hidden;
    let b3 = w3 + hidden;
    Offsets { w1, b1, w2, b2, w3, b3, len: b3 + 1 }
}

struct Activations {
    h1: Vec<f64>,
    h2: Vec<f64>,
    out: f64,
}

fn affine_relu(w: &[f64], b: &[f64], x: &[f64]) -> Vec<f64> {
    let n_in = x.len();
    b.iter()
        .enumerate()
        .map(|(j, bias)| {
            let row = &w[j * n_in..(j + 1) * n_in];
            (bias + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()).max(0.0)
        })
        .collect()
}

impl MlpModel {
    pub fn parameter_count(input: usize, hidden: usize) -> usize {
        offsets(input, hidden).len
    }

    pub fn zeros(input: usize, hidden: usize) -> Self {
        MlpModel { input, hidden, params: vec![0.0; Self::parameter_count(input, hidden)] }
    }

    /// Uniform `±1/sqrt(fan_in)` initialization.
    pub fn init(input: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = RngStream::seed_from_u64(seed);
        let o = offsets(input, hidden);
        let mut params = vec![0.0; o.len];
        let mut fill = |range: std::ops::Range<usize>, fan_in: usize| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            for p in &mut params[range] {
                *p = rng.random_range(-bound..bound);
            }
        };
        fill(o.w1..o.w2, input);
        fill(o.w2..o.w3, hidden);
        fill(o.w3..o.len, hidden);
        MlpModel { input, hidden, params }
    }

    fn forward(&self, x: &[f64]) -> Activations {
        let o = offsets(self.input, self.hidden);
        let p = &self.params;
        let h1 = affine_relu(&p[o.w1..o.b1], &p[o.b1..o.w2], x);
        let h2 = affine_relu(&p[o.w2..o.b2], &p[o.b2..o.w3], &h1);
        let out = p[o.b3] + p[o.w3..o.b3].iter().zip(&h2).map(|(a, b)| a * b).sum::<f64>();
        Activations { h1, h2, out }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.forward(x).out
    }

    /// Adds `scale * d(output)/d(params)` at `x` into `grad`.
    fn accumulate_grad(&self, x: &[f64], act: &Activations, scale: f64, grad: &mut [f64]) {
        let o = offsets(self.input, self.hidden);
        let p = &self.params;
        let (n_in, h) = (self.input, self.hidden);
        grad[o.b3] += scale;
        let mut d2 = vec![0.0; h];
        for j in 0..h {
            grad[o.w3 + j] += scale * act.h2[j];
            if act.h2[j] > 0.0 {
                d2[j] = scale * p[o.w3 + j];
            }
        }
        let mut d1 = vec![0.0; h];
        for j in 0..h {
            if d2[j] == 0.0 {
                continue;
            }
            grad[o.b2 + j] += d2[j];
            let row = o.w2 + j * h;
            for i in 0..h {
                grad[row + i] += d2[j] * act.h1[i];
                d1[i] += d2[j] * p[row + i];
            }
        }
        for i in 0..h {
            if act.h1[i] <= 0.0 || d1[i] == 0.0 {
                continue;
            }
            grad[o.b1 + i] += d1[i];
            let row = o.w1 + i * n_in;
            for (g, xv) in grad[row..row + n_in].iter_mut().zip(x) {
                *g += d1[i] * xv;
            }
        }
    }

    /// Output and its gradient with respect to every parameter.
    pub fn output_and_param_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let act = self.forward(x);
        let mut grad = vec![0.0; self.params.len()];
        self.accumulate_grad(x, &act, 1.0, &mut grad);
        (act.out, grad)
    }

    pub fn mse(&self, set: &TrainingSet) -> f64 {
        let total: f64 = set.records().iter().map(|r| (self.predict(r.embedding.as_slice()) - r.label).powi(2)).sum();
        total / set.len().max(1) as f64
    }
}

pub fn fit_mlp(set: &TrainingSet, seed: u64) -> Result<MlpModel, SurrogateError> {
    fit_mlp_with(set, &MlpTrainConfig::default(), MLP_HIDDEN, seed)
}

/// Mean-squared-error training with Adam over shuffled minibatches.
pub fn fit_mlp_with(set: &TrainingSet, cfg: &MlpTrainConfig, hidden: usize, seed: u64) -> Result<MlpModel, SurrogateError> {
    if set.len() < 2 {
        return Err(SurrogateError::DegenerateTrainingSet(set.len()));
    }
    let mut model = MlpModel::init(EMBEDDING_DIM, hidden, seed);
    let mut rng = RngStream::seed_from_u64(seed ^ 0x05ee_d0fb_a7c4);
    let n = model.params.len();
    let (mut m, mut v) = (vec![0.0; n], vec![0.0; n]);
    let mut grad = vec![0.0; n];
    let mut order: Vec<usize> = (0..set.len()).collect();
    let mut step = 0i32;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            for &i in batch {
                let record = &set.records()[i];
                let x = record.embedding.as_slice();
                let act = model.forward(x);
                let scale = 2.0 * (act.out - record.label) / batch.len() as f64;
                model.accumulate_grad(x, &act, scale, &mut grad);
            }
            step += 1;
            let bc1 = 1.0 - cfg.beta1.powi(step);
            let bc2 = 1.0 - cfg.beta2.powi(step);
            for k in 0..n {
                m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * grad[k];
                v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
                model.params[k] -= cfg.learning_rate * (m[k] / bc1) / ((v[k] / bc2).sqrt() + cfg.epsilon);
            }
        }
    }
    if model.params.iter().any(|p| !p.is_finite()) {
        return Err(SurrogateError::Numeric("MLP training diverged".into()));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::ArchEmbedding;
    use crate::genome::random_genome;
    use crate::rng::stream;

    #[test]
    fn zero_model_predicts_zero() {
        let m = MlpModel::zeros(EMBEDDING_DIM, MLP_HIDDEN);
        assert_eq!(m.params.len(), 128 * 256 + 256 + 256 * 256 + 256 + 256 + 1);
        assert_eq!(m.predict(&[0.3; 128]), 0.0);
    }

    #[test]
    fn param_gradient_matches_central_differences() {
        let mut rng = stream(1, &[]);
        // small hidden width keeps the full sweep cheap
        let model = MlpModel::init(6, 8, 2);
        for _ in 0..20 {
            let x: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (_, grad) = model.output_and_param_grad(&x);
            let h = 1e-6;
            for k in 0..model.params.len() {
                let mut plus = model.clone();
                plus.params[k] += h;
                let mut minus = model.clone();
                minus.params[k] -= h;
                let numeric = (plus.predict(&x) - minus.predict(&x)) / (2.0 * h);
                let err = (numeric - grad[k]).abs() / numeric.abs().max(grad[k].abs()).max(1e-3);
                assert!(err < 1e-4, "param {k}: {numeric} vs {}", grad[k]);
            }
        }
    }

    #[test]
    fn learns_a_linear_target() {
        let mut rng = stream(3, &[]);
        let mut set = TrainingSet::default();
        let coeffs = [0.3, -0.2, 0.5, 0.1, -0.4];
        while set.len() < 120 {
            let e: Vec<f64> = (0..128).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: f64 = coeffs.iter().zip(&e).map(|(c, x)| c * x).sum();
            set.insert(random_genome(&mut rng), ArchEmbedding::from_vec(e).unwrap(), y, y);
        }
        let initial = MlpModel::init(EMBEDDING_DIM, MLP_HIDDEN, 9).mse(&set);
        let cfg = MlpTrainConfig { epochs: 100, ..MlpTrainConfig::default() };
        let trained = fit_mlp_with(&set, &cfg, MLP_HIDDEN, 9).unwrap();
        assert!(trained.mse(&set) < 0.25 * initial, "{} vs {initial}", trained.mse(&set));
        assert_eq!(trained, fit_mlp_with(&set, &cfg, MLP_HIDDEN, 9).unwrap());
    }
}
