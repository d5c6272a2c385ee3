use serde::{Deserialize, Serialize};

use super::loss::LossKind;
use super::network::{Gradients, NetworkState};
use crate::error::{Error, Result};

/// Learning-rate drop points: either fractions of the total epoch count or
/// absolute epoch numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    Fractions(Vec<f64>),
    Epochs(Vec<usize>),
}

impl Schedule {
    /// Markers as absolute epochs for a run of `epochs` epochs.
    pub fn resolve(&self, epochs: usize) -> Vec<usize> {
        match self {
            // the epsilon absorbs representation error, e.g. 0.3 * 600
            Schedule::Fractions(f) => f.iter().map(|&x| (x * epochs as f64 + 1e-9).floor() as usize).collect(),
            Schedule::Epochs(e) => e.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub base_lr: f64,
    pub schedule: Schedule,
    pub lr_factor: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub loss: LossKind,
    pub rng_seed: u64,
}

impl TrainConfig {
    /// Initial-training defaults: fractional markers {0.3, 0.6, 0.9}.
    pub fn pretrain(epochs: usize, base_lr: f64, seed: u64) -> Self {
        TrainConfig {
            epochs,
            base_lr,
            schedule: Schedule::Fractions(vec![0.3, 0.6, 0.9]),
            lr_factor: 0.1,
            momentum: 0.9,
            batch_size: 32,
            loss: LossKind::Kld,
            rng_seed: seed,
        }
    }

    /// Fine-tuning defaults: lr 0.001, markers [15, 60, 90], batch 16.
    pub fn fine_tune(epochs: usize, seed: u64) -> Self {
        TrainConfig {
            epochs,
            base_lr: 0.001,
            schedule: Schedule::Epochs(vec![15, 60, 90]),
            lr_factor: 0.1,
            momentum: 0.9,
            batch_size: 16,
            loss: LossKind::Kld,
            rng_seed: seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_lr > 0.0) {
            return Err(Error::Config(format!("base_lr must be positive, got {}", self.base_lr)));
        }
        if !(self.lr_factor > 0.0 && self.lr_factor < 1.0) {
            return Err(Error::Config(format!("lr_factor must lie in (0,1), got {}", self.lr_factor)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!("momentum must lie in [0,1), got {}", self.momentum)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        match &self.schedule {
            Schedule::Fractions(f) => {
                if f.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
                    return Err(Error::Config("fractional markers must lie in (0,1)".into()));
                }
                if f.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Config("schedule markers must be strictly increasing".into()));
                }
            }
            Schedule::Epochs(e) => {
                if e.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Config("schedule markers must be strictly increasing".into()));
                }
            }
        }
        Ok(())
    }
}

/// `base_lr * lr_factor^(markers <= epoch)`.
pub fn lr_at(config: &TrainConfig, epoch: usize) -> f64 {
    let passed = config
        .schedule
        .resolve(config.epochs)
        .into_iter()
        .filter(|&m| m <= epoch)
        .count();
    config.base_lr * config.lr_factor.powi(passed as i32)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FreezePolicy {
    NoFreeze,
    /// Only the trailing `tail_layers` parameterized layers train.
    FixedFreeze { tail_layers: usize },
    /// Stage `s` (0-based) unfreezes the trailing `tail_layers + 2 s`
    /// parameterized layers; stage boundaries are cumulative `stage_epochs`.
    ScheduledFreeze {
        tail_layers: usize,
        stage_epochs: Vec<usize>,
    },
}

impl FreezePolicy {
    pub fn fixed() -> Self {
        FreezePolicy::FixedFreeze { tail_layers: 3 }
    }

    pub fn scheduled(stage_epochs: Vec<usize>) -> Self {
        FreezePolicy::ScheduledFreeze {
            tail_layers: 3,
            stage_epochs,
        }
    }
}

/// Per-layer freeze mask for `epoch` under `policy`.
pub fn apply_freeze_policy(net: &NetworkState, policy: &FreezePolicy, epoch: usize) -> Result<Vec<bool>> {
    let layers = net.spec.blocks.len();
    let param_layers = net.param_layers();
    let unfrozen_tail = match policy {
        FreezePolicy::NoFreeze => return Ok(vec![false; layers]),
        FreezePolicy::FixedFreeze { tail_layers } => {
            check_tail(*tail_layers, layers)?;
            *tail_layers
        }
        FreezePolicy::ScheduledFreeze {
            tail_layers,
            stage_epochs,
        } => {
            check_tail(*tail_layers, layers)?;
            if stage_epochs.is_empty() {
                return Err(Error::Config("scheduled freeze needs at least one stage".into()));
            }
            let mut boundary = 0;
            let mut stage = stage_epochs.len() - 1;
            for (s, &len) in stage_epochs.iter().enumerate() {
                boundary += len;
                if epoch < boundary {
                    stage = s;
                    break;
                }
            }
            tail_layers + 2 * stage
        }
    };
    let frozen_count = param_layers.len().saturating_sub(unfrozen_tail);
    let mut mask = vec![false; layers];
    for &i in &param_layers[..frozen_count] {
        mask[i] = true;
    }
    Ok(mask)
}

fn check_tail(tail: usize, layers: usize) -> Result<()> {
    if tail == 0 || tail > layers {
        return Err(Error::Config(format!(
            "tail_layers must be in 1..={layers}, got {tail}"
        )));
    }
    Ok(())
}

/// Momentum SGD: `v <- momentum * v - lr * g; p <- p + v` on unfrozen layers.
pub fn sgd_update(net: &mut NetworkState, grads: &Gradients, lr: f64, momentum: f64) -> Result<()> {
    if !(lr > 0.0) {
        return Err(Error::Contract(format!("learning rate must be positive, got {lr}")));
    }
    if grads.layers.len() != net.params.len() {
        return Err(Error::Dimension(format!(
            "gradients for {} layers, network has {}",
            grads.layers.len(),
            net.params.len()
        )));
    }
    for (i, g) in grads.layers.iter().enumerate() {
        let p = &net.params[i];
        if g.weights.len() != p.weights.len() || g.bias.len() != p.bias.len() {
            return Err(Error::Shape {
                layer: i,
                message: "gradient shape does not match parameters".into(),
            });
        }
    }
    for i in 0..net.params.len() {
        if net.freeze_mask[i] {
            continue;
        }
        let g = &grads.layers[i];
        let v = &mut net.velocity[i];
        let p = &mut net.params[i];
        for ((pw, vw), gw) in p.weights.iter_mut().zip(v.weights.iter_mut()).zip(&g.weights) {
            *vw = momentum * *vw - lr * gw;
            *pw += *vw;
        }
        for ((pb, vb), gb) in p.bias.iter_mut().zip(v.bias.iter_mut()).zip(&g.bias) {
            *vb = momentum * *vb - lr * gb;
            *pb += *vb;
        }
    }
    Ok(())
}
