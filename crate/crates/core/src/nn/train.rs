use rand::seq::SliceRandom;

use super::loss::{argmax, one_hot};
use super::network::NetworkState;
use super::optim::{apply_freeze_policy, lr_at, sgd_update, FreezePolicy, TrainConfig};
use super::spec::LayerSpec;
use crate::error::{Error, Result};
use crate::rng::{purpose, rng_for};

/// Borrowed waveforms with their class labels.
#[derive(Debug, Clone, Default)]
pub struct Examples<'a> {
    pub inputs: Vec<&'a [f64]>,
    pub labels: Vec<usize>,
}

impl<'a> Examples<'a> {
    pub fn new(inputs: Vec<&'a [f64]>, labels: Vec<usize>) -> Self {
        assert_eq!(inputs.len(), labels.len(), "inputs and labels differ in length");
        Examples { inputs, labels }
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

pub fn predict(net: &NetworkState, inputs: &[&[f64]]) -> Result<Vec<usize>> {
    inputs.iter().map(|x| Ok(argmax(&net.logits(x)?))).collect()
}

pub fn evaluate(net: &NetworkState, data: &Examples<'_>) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Contract("cannot evaluate on an empty set".into()));
    }
    let preds = predict(net, &data.inputs)?;
    let correct = preds.iter().zip(&data.labels).filter(|(p, l)| p == l).count();
    Ok(correct as f64 / data.len() as f64)
}

/// Keeps the best-scoring candidate; a later candidate replaces the current one
/// only if it scores strictly higher, so ties resolve to the earliest.
#[derive(Debug, Clone)]
pub struct BestCheckpoint<T> {
    best: Option<(usize, f64, T)>,
}

impl<T> Default for BestCheckpoint<T> {
    fn default() -> Self {
        BestCheckpoint { best: None }
    }
}

impl<T> BestCheckpoint<T> {
    /// Returns `true` when the candidate became the new best.
    pub fn offer(&mut self, epoch: usize, score: f64, make: impl FnOnce() -> T) -> bool {
        match &self.best {
            Some((_, s, _)) if score <= *s => false,
            _ => {
                self.best = Some((epoch, score, make()));
                true
            }
        }
    }

    pub fn epoch(&self) -> Option<usize> {
        self.best.as_ref().map(|b| b.0)
    }

    pub fn into_inner(self) -> Option<(usize, f64, T)> {
        self.best
    }
}

/// Mini-batch training with validation-selected checkpointing.
///
/// Returns the checkpoint with the highest validation accuracy over all epochs
/// and that accuracy. With zero epochs the input network is returned with its
/// current validation accuracy.
pub fn train(
    net: &NetworkState,
    labeled: &Examples<'_>,
    validation: &Examples<'_>,
    config: &TrainConfig,
    policy: &FreezePolicy,
) -> Result<(NetworkState, f64)> {
    if labeled.is_empty() {
        return Err(Error::Contract("training set is empty".into()));
    }
    if validation.is_empty() {
        return Err(Error::Contract("validation set is empty".into()));
    }
    config.validate()?;
    if config.epochs == 0 {
        return Ok((net.clone(), evaluate(net, validation)?));
    }
    let classes = net.num_classes();
    if let Some(&bad) = labeled.labels.iter().find(|&&l| l >= classes) {
        return Err(Error::Contract(format!("label {bad} out of range for {classes} classes")));
    }
    let mut current = net.clone();
    current.reset_velocity();
    let mut best = BestCheckpoint::default();
    let mut order: Vec<usize> = (0..labeled.len()).collect();
    for epoch in 0..config.epochs {
        current.freeze_mask = apply_freeze_policy(&current, policy, epoch)?;
        let lr = lr_at(config, epoch);
        let mut rng = rng_for(config.rng_seed, &[purpose::SHUFFLE, epoch as u64]);
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&[f64]> = chunk.iter().map(|&i| labeled.inputs[i]).collect();
            let targets: Vec<Vec<f64>> = chunk.iter().map(|&i| one_hot(labeled.labels[i], classes)).collect();
            let (_, grads) = current.backprop(&batch, &targets, config.loss)?;
            sgd_update(&mut current, &grads, lr, config.momentum)?;
        }
        let val = evaluate(&current, validation)?;
        best.offer(epoch, val, || current.clone());
    }
    let (_, val, mut state) = best.into_inner().expect("at least one epoch ran");
    state.freeze_mask = vec![false; state.freeze_mask.len()];
    Ok((state, val))
}

/// Rebuilds the last convolution with `5 * C` filters, re-initializes it and
/// the layers after it, then trains the result.
pub fn prepare_for_dafl(
    net: &NetworkState,
    labeled: &Examples<'_>,
    validation: &Examples<'_>,
    config: &TrainConfig,
) -> Result<NetworkState> {
    let resized = resize_last_conv(net)?;
    let (trained, _) = train(&resized, labeled, validation, config, &FreezePolicy::NoFreeze)?;
    Ok(trained)
}

/// The structural half of [`prepare_for_dafl`].
pub fn resize_last_conv(net: &NetworkState) -> Result<NetworkState> {
    let last_conv = net
        .spec
        .blocks
        .iter()
        .rposition(|l| matches!(l, LayerSpec::Conv1d { .. }))
        .ok_or_else(|| Error::Contract("network has no convolution layer".into()))?;
    let mut spec = net.spec.clone();
    if let LayerSpec::Conv1d { filters, .. } = &mut spec.blocks[last_conv] {
        *filters = 5 * spec.num_classes;
    }
    let mut out = net.clone();
    out.rebuild_from(spec, last_conv, 1)?;
    out.freeze_mask = vec![false; out.spec.blocks.len()];
    Ok(out)
}
