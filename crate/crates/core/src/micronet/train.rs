use std::f64::consts::PI;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::attack::{attack, AttackSpec};
use super::data::{DataConfig, SynthDataset};
use super::eval::{evaluate, final_metrics, FinalMetrics};
use super::net::{NetConfig, Network, ParamLayout, StandaloneNet, Supernet};
use super::MicronetError;
use crate::genome::{random_genome, Genome};
use crate::rng::{stream, tag};

/// Adversarial training schedule shared by the supernet and standalone nets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub net: NetConfig,
    pub data: DataConfig,
    pub epochs: usize,
    pub batch_size: usize,
    /// Initial learning rate, cosine-decayed to zero over all steps.
    pub lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    /// Gradients with a larger global norm are rescaled to it.
    pub max_grad_norm: Option<f64>,
    pub attack: AttackSpec,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            net: NetConfig::default(),
            data: DataConfig { seed: 0, n_train: 256, n_val: 256 },
            epochs: 20,
            batch_size: 32,
            lr: 0.05,
            momentum: 0.9,
            weight_decay: 1e-4,
            max_grad_norm: Some(1.0),
            attack: AttackSpec::pgd7(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), MicronetError> {
        self.net.validate()?;
        self.attack.validate()?;
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(MicronetError::Config("epochs and batch size must be positive".into()));
        }
        let clip_ok = self.max_grad_norm.is_none_or(|c| c > 0.0);
        if !(self.lr > 0.0 && self.momentum >= 0.0 && self.momentum < 1.0 && self.weight_decay >= 0.0 && clip_ok) {
            return Err(MicronetError::Config(format!("bad optimizer settings lr={} momentum={} wd={}", self.lr, self.momentum, self.weight_decay)));
        }
        Ok(())
    }
}

/// One row of the training log. Validation uses a fixed probe path and the
/// FGSM proxy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    /// Mean adversarial loss over the epoch's batches.
    pub adv_loss: f64,
    pub clean_val_err: f64,
    pub adv_val_err: f64,
}

fn train_loop(
    net: &mut Network,
    cfg: &TrainConfig,
    data: &SynthDataset,
    mut pick: impl FnMut(usize, usize) -> Genome,
    probe: Genome,
) -> Result<Vec<EpochLog>, MicronetError> {
    let n = data.train.len();
    let batches = n.div_ceil(cfg.batch_size);
    let total_steps = (cfg.epochs * batches) as f64;
    let mut velocity = vec![0.0; net.params().len()];
    let mut log = Vec::with_capacity(cfg.epochs);
    let mut step = 0usize;
    for epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut stream(cfg.seed, &[tag::SUPERNET_TRAIN, epoch as u64]));
        let mut loss_sum = 0.0;
        for (b, idx) in order.chunks(cfg.batch_size).enumerate() {
            let batch = data.train.subset(idx);
            let genome = pick(epoch, b);
            let lr = 0.5 * cfg.lr * (1.0 + (PI * step as f64 / total_steps).cos());
            let (loss, grad) = {
                let view = net.view(genome)?;
                let mut rng = stream(cfg.seed, &[tag::ATTACK, epoch as u64, b as u64]);
                let x_adv = attack(&view, &batch.images, &batch.labels, &cfg.attack, &mut rng)?;
                let g = view.loss_and_grad(&x_adv, &batch.labels, true)?;
                (g.loss, g.params.expect("requested"))
            };
            if !loss.is_finite() {
                return Err(MicronetError::NonFinite("training"));
            }
            let ranges = net.layout().active_ranges(&genome);
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            let rescale = cfg.max_grad_norm.map_or(1.0, |c| if norm > c { c / norm } else { 1.0 });
            let params = net.params_mut();
            for i in ranges.into_iter().flatten() {
                let g = rescale * grad[i] + cfg.weight_decay * params[i];
                velocity[i] = cfg.momentum * velocity[i] + g;
                params[i] -= lr * velocity[i];
            }
            loss_sum += loss;
            step += 1;
        }
        let probe_eval = evaluate(&net.view(probe)?, &data.val, Some(&AttackSpec::default_fgsm()), 1.0, cfg.seed)?;
        log.push(EpochLog {
            epoch,
            adv_loss: loss_sum / batches as f64,
            clean_val_err: probe_eval.clean_error,
            adv_val_err: probe_eval.adv_error.expect("attack given"),
        });
    }
    Ok(log)
}

/// Single-path adversarial supernet training: every batch trains one
/// uniformly sampled genome on adversarial examples crafted against it.
pub fn adv_train_supernet(cfg: &TrainConfig) -> Result<(Supernet, Vec<EpochLog>), MicronetError> {
    cfg.validate()?;
    let data = cfg.data.build()?;
    let mut net = Network::init(ParamLayout::full(cfg.net), cfg.seed);
    let seed = cfg.seed;
    let probe = random_genome(&mut stream(seed, &[tag::SUPERNET_TRAIN, u64::MAX]));
    let pick = |epoch: usize, batch: usize| random_genome(&mut stream(seed, &[tag::SUPERNET_TRAIN, epoch as u64, batch as u64, 1]));
    let log = train_loop(&mut net, cfg, &data, pick, probe)?;
    Ok((Supernet(net), log))
}

#[derive(Debug, Clone)]
pub struct StandaloneOutcome {
    pub net: StandaloneNet,
    pub log: Vec<EpochLog>,
    pub metrics: FinalMetrics,
}

/// Trains `genome` from fresh parameters and scores it on the validation split.
pub fn train_standalone(genome: Genome, cfg: &TrainConfig) -> Result<StandaloneOutcome, MicronetError> {
    cfg.validate()?;
    let data = cfg.data.build()?;
    let mut net = Network::init(ParamLayout::for_genome(cfg.net, &genome), cfg.seed);
    let log = train_loop(&mut net, cfg, &data, |_, _| genome, genome)?;
    let net = StandaloneNet { net, genome };
    let metrics = final_metrics(&net.view(), &data.val, cfg.seed)?;
    Ok(StandaloneOutcome { net, log, metrics })
}
