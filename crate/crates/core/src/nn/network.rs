use rand::Rng;
use serde::{Deserialize, Serialize};

use super::loss::{loss_and_grad, LossKind};
use super::spec::{LayerSpec, Layout, NetworkSpec};
use crate::error::{Error, Result};
use crate::rng::{purpose, rng_for};

/// Weights and biases of one layer; both empty for parameter-free layers.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LayerParams {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LayerParams {
    fn zeros(w: usize, b: usize) -> Self {
        LayerParams {
            weights: vec![0.0; w],
            bias: vec![0.0; b],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub spec: NetworkSpec,
    pub params: Vec<LayerParams>,
    pub velocity: Vec<LayerParams>,
    /// `true` means the layer is frozen.
    pub freeze_mask: Vec<bool>,
    layout: Layout,
}

/// Per-layer parameter gradients. `droppable[i]` marks gradients of frozen
/// layers that an optimizer step will ignore.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerParams>,
    pub droppable: Vec<bool>,
}

impl Gradients {
    pub fn flat(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
            .collect()
    }
}

/// Layer outputs of one sample's forward pass.
#[derive(Debug, Clone)]
pub struct Trace {
    pub outputs: Vec<Vec<f64>>,
    pool_argmax: Vec<Vec<usize>>,
    penultimate_layer: usize,
    logits_layer: usize,
}

impl Trace {
    /// Globally pooled activation of the last convolution (input of the output dense).
    pub fn penultimate(&self) -> &[f64] {
        &self.outputs[self.penultimate_layer]
    }

    pub fn logits(&self) -> &[f64] {
        &self.outputs[self.logits_layer]
    }
}

fn glorot(rng: &mut impl Rng, fan_in: usize, fan_out: usize, n: usize) -> Vec<f64> {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..n).map(|_| rng.gen_range(-bound..=bound)).collect()
}

pub fn build_network(spec: NetworkSpec) -> Result<NetworkState> {
    let layout = spec.layout()?;
    let mut params = Vec::with_capacity(spec.blocks.len());
    for i in 0..spec.blocks.len() {
        params.push(init_layer(&spec, &layout, i, 0));
    }
    let velocity = params
        .iter()
        .map(|p| LayerParams::zeros(p.weights.len(), p.bias.len()))
        .collect();
    let freeze_mask = vec![false; spec.blocks.len()];
    Ok(NetworkState {
        spec,
        params,
        velocity,
        freeze_mask,
        layout,
    })
}

fn init_layer(spec: &NetworkSpec, layout: &Layout, i: usize, generation: u64) -> LayerParams {
    let (nw, nb) = layout.param_shape(&spec.blocks, i);
    let mut rng = rng_for(spec.seed, &[purpose::INIT, i as u64, generation]);
    let (fan_in, fan_out) = match spec.blocks[i] {
        LayerSpec::Conv1d {
            kernel, filters, ..
        } => (layout.input[i].channels * kernel, filters * kernel),
        LayerSpec::Dense { units } => (layout.input[i].size(), units),
        _ => return LayerParams::default(),
    };
    LayerParams {
        weights: glorot(&mut rng, fan_in, fan_out, nw),
        bias: vec![0.0; nb],
    }
}

impl NetworkState {
    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn num_classes(&self) -> usize {
        self.spec.num_classes
    }

    pub fn input_length(&self) -> usize {
        self.spec.input_length
    }

    pub fn penultimate_dim(&self) -> usize {
        self.layout.penultimate_dim()
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(LayerParams::len).sum()
    }

    /// Indices of layers that carry parameters, in order.
    pub fn param_layers(&self) -> Vec<usize> {
        (0..self.spec.blocks.len())
            .filter(|&i| self.spec.blocks[i].has_params())
            .collect()
    }

    /// Replaces the spec (and the parameters of layers from `from` onward whose
    /// shape changed) after a structural edit. Layers before `from` keep their
    /// parameters; later parameterized layers are freshly initialized.
    pub(crate) fn rebuild_from(&mut self, spec: NetworkSpec, from: usize, generation: u64) -> Result<()> {
        let layout = spec.layout()?;
        for i in from..spec.blocks.len() {
            self.params[i] = init_layer(&spec, &layout, i, generation);
        }
        self.velocity = self
            .params
            .iter()
            .map(|p| LayerParams::zeros(p.weights.len(), p.bias.len()))
            .collect();
        self.spec = spec;
        self.layout = layout;
        Ok(())
    }

    pub(crate) fn reset_velocity(&mut self) {
        for v in &mut self.velocity {
            v.weights.iter_mut().for_each(|x| *x = 0.0);
            v.bias.iter_mut().for_each(|x| *x = 0.0);
        }
    }

    pub(crate) fn from_parts(spec: NetworkSpec, params: Vec<LayerParams>) -> Result<Self> {
        let mut net = build_network(spec)?;
        for (i, (have, want)) in params.iter().zip(&net.params).enumerate() {
            if have.weights.len() != want.weights.len() || have.bias.len() != want.bias.len() {
                return Err(Error::Shape {
                    layer: i,
                    message: "parameter array size does not match spec".into(),
                });
            }
        }
        if params.len() != net.params.len() {
            return Err(Error::Dimension(format!(
                "expected {} layers of parameters, got {}",
                net.params.len(),
                params.len()
            )));
        }
        net.params = params;
        Ok(net)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.spec.input_length {
            return Err(Error::Dimension(format!(
                "waveform has {} samples, network expects {}",
                x.len(),
                self.spec.input_length
            )));
        }
        Ok(())
    }

    /// Forward pass of a single waveform keeping every layer output.
    pub fn forward_one(&self, x: &[f64]) -> Result<Trace> {
        self.check_input(x)?;
        let n = self.spec.blocks.len();
        let mut outputs: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut pool_argmax = vec![Vec::new(); n];
        for (i, layer) in self.spec.blocks.iter().enumerate() {
            let input: &[f64] = if i == 0 { x } else { &outputs[i - 1] };
            let in_shape = self.layout.input[i];
            let out_shape = self.layout.output[i];
            let p = &self.params[i];
            let out = match *layer {
                LayerSpec::Conv1d { kernel, stride, .. } => {
                    let (cin, lin) = (in_shape.channels, in_shape.len);
                    let (cout, lout) = (out_shape.channels, out_shape.len);
                    let mut y = vec![0.0; cout * lout];
                    for o in 0..cout {
                        let row = &mut y[o * lout..(o + 1) * lout];
                        row.iter_mut().for_each(|v| *v = p.bias[o]);
                        for c in 0..cin {
                            let xin = &input[c * lin..(c + 1) * lin];
                            let w = &p.weights[(o * cin + c) * kernel..(o * cin + c + 1) * kernel];
                            for (t, acc) in row.iter_mut().enumerate() {
                                let seg = &xin[t * stride..t * stride + kernel];
                                *acc += seg.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
                            }
                        }
                    }
                    y
                }
                LayerSpec::Relu => input.iter().map(|&v| v.max(0.0)).collect(),
                LayerSpec::MaxPool { kernel, stride } => {
                    let (ch, lin, lout) = (in_shape.channels, in_shape.len, out_shape.len);
                    let mut y = Vec::with_capacity(ch * lout);
                    let mut arg = Vec::with_capacity(ch * lout);
                    for c in 0..ch {
                        for t in 0..lout {
                            let start = c * lin + t * stride;
                            let mut best = start;
                            for j in start + 1..start + kernel {
                                if input[j] > input[best] {
                                    best = j;
                                }
                            }
                            y.push(input[best]);
                            arg.push(best);
                        }
                    }
                    pool_argmax[i] = arg;
                    y
                }
                LayerSpec::GlobalAvgPool => {
                    let (ch, len) = (in_shape.channels, in_shape.len);
                    (0..ch)
                        .map(|c| input[c * len..(c + 1) * len].iter().sum::<f64>() / len as f64)
                        .collect()
                }
                LayerSpec::Dense { units } => {
                    let nin = in_shape.size();
                    (0..units)
                        .map(|o| {
                            p.bias[o]
                                + p.weights[o * nin..(o + 1) * nin]
                                    .iter()
                                    .zip(input)
                                    .map(|(a, b)| a * b)
                                    .sum::<f64>()
                        })
                        .collect()
                }
                // Logits are reported pre-softmax; the loss applies the softmax.
                LayerSpec::Softmax => input.to_vec(),
            };
            outputs.push(out);
        }
        Ok(Trace {
            outputs,
            pool_argmax,
            penultimate_layer: self.layout.logits_layer - 1,
            logits_layer: self.layout.logits_layer,
        })
    }

    /// Batched forward pass: logits rows plus one trace per sample.
    pub fn forward(&self, batch: &[&[f64]]) -> Result<(Vec<Vec<f64>>, Vec<Trace>)> {
        let traces = batch
            .iter()
            .map(|x| self.forward_one(x))
            .collect::<Result<Vec<_>>>()?;
        let logits = traces.iter().map(|t| t.logits().to_vec()).collect();
        Ok((logits, traces))
    }

    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_one(x)?.logits().to_vec())
    }

    /// Pooled last-conv activation of one waveform.
    pub fn penultimate(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_one(x)?.penultimate().to_vec())
    }

    /// Applies the output dense layer to a penultimate feature vector.
    pub fn head_logits(&self, features: &[f64]) -> Result<Vec<f64>> {
        let i = self.layout.logits_layer;
        let nin = self.layout.input[i].size();
        if features.len() != nin {
            return Err(Error::Dimension(format!(
                "feature vector has {} entries, output layer expects {nin}",
                features.len()
            )));
        }
        let p = &self.params[i];
        Ok((0..self.spec.num_classes)
            .map(|o| {
                p.bias[o]
                    + p.weights[o * nin..(o + 1) * nin]
                        .iter()
                        .zip(features)
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
            })
            .collect())
    }

    /// Hash of the parameter bit patterns, for cheap equality checks in logs.
    pub fn fingerprint(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for p in &self.params {
            for v in p.weights.iter().chain(&p.bias) {
                v.to_bits().hash(&mut h);
            }
        }
        h.finish()
    }

    /// Accumulates parameter gradients of one sample into `acc`, given the
    /// gradient of the loss with respect to that sample's logits.
    pub fn accumulate_backward(&self, x: &[f64], trace: &Trace, dlogits: &[f64], acc: &mut [LayerParams]) {
        let logits_layer = self.layout.logits_layer;
        let mut grad: Vec<f64> = dlogits.to_vec();
        for i in (0..=logits_layer).rev() {
            let input: &[f64] = if i == 0 { x } else { &trace.outputs[i - 1] };
            let in_shape = self.layout.input[i];
            let out_shape = self.layout.output[i];
            let p = &self.params[i];
            let need_dx = i > 0;
            grad = match self.spec.blocks[i] {
                LayerSpec::Dense { units } => {
                    let nin = in_shape.size();
                    let g = &mut acc[i];
                    let mut dx = vec![0.0; if need_dx { nin } else { 0 }];
                    for o in 0..units {
                        let go = grad[o];
                        if go == 0.0 {
                            continue;
                        }
                        g.bias[o] += go;
                        let gw = &mut g.weights[o * nin..(o + 1) * nin];
                        for (w, &xi) in gw.iter_mut().zip(input) {
                            *w += go * xi;
                        }
                        if need_dx {
                            for (d, &w) in dx.iter_mut().zip(&p.weights[o * nin..(o + 1) * nin]) {
                                *d += go * w;
                            }
                        }
                    }
                    dx
                }
                LayerSpec::Conv1d { kernel, stride, .. } => {
                    let (cin, lin) = (in_shape.channels, in_shape.len);
                    let (cout, lout) = (out_shape.channels, out_shape.len);
                    let g = &mut acc[i];
                    let mut dx = vec![0.0; if need_dx { cin * lin } else { 0 }];
                    for o in 0..cout {
                        let go = &grad[o * lout..(o + 1) * lout];
                        g.bias[o] += go.iter().sum::<f64>();
                        for c in 0..cin {
                            let xin = &input[c * lin..(c + 1) * lin];
                            let base = (o * cin + c) * kernel;
                            let gw = &mut g.weights[base..base + kernel];
                            for (t, &gt) in go.iter().enumerate() {
                                if gt == 0.0 {
                                    continue;
                                }
                                let seg = &xin[t * stride..t * stride + kernel];
                                for (w, &xv) in gw.iter_mut().zip(seg) {
                                    *w += gt * xv;
                                }
                            }
                            if need_dx {
                                let w = &p.weights[base..base + kernel];
                                let dxc = &mut dx[c * lin..(c + 1) * lin];
                                for (t, &gt) in go.iter().enumerate() {
                                    if gt == 0.0 {
                                        continue;
                                    }
                                    for (d, &wv) in dxc[t * stride..t * stride + kernel].iter_mut().zip(w) {
                                        *d += gt * wv;
                                    }
                                }
                            }
                        }
                    }
                    dx
                }
                LayerSpec::Relu => grad
                    .iter()
                    .zip(&trace.outputs[i])
                    .map(|(&g, &y)| if y > 0.0 { g } else { 0.0 })
                    .collect(),
                LayerSpec::MaxPool { .. } => {
                    let mut dx = vec![0.0; in_shape.size()];
                    for (&g, &j) in grad.iter().zip(&trace.pool_argmax[i]) {
                        dx[j] += g;
                    }
                    dx
                }
                LayerSpec::GlobalAvgPool => {
                    let len = in_shape.len;
                    let mut dx = Vec::with_capacity(in_shape.size());
                    for &g in &grad {
                        dx.extend(std::iter::repeat(g / len as f64).take(len));
                    }
                    dx
                }
                LayerSpec::Softmax => grad,
            };
        }
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            layers: self
                .params
                .iter()
                .map(|p| LayerParams::zeros(p.weights.len(), p.bias.len()))
                .collect(),
            droppable: self.freeze_mask.clone(),
        }
    }

    /// Loss and parameter gradients of a batch. The loss is the batch mean and
    /// the gradient is that of the mean.
    pub fn backprop(&self, batch: &[&[f64]], targets: &[Vec<f64>], loss: LossKind) -> Result<(f64, Gradients)> {
        if batch.len() != targets.len() {
            return Err(Error::Dimension(format!(
                "{} inputs but {} target rows",
                batch.len(),
                targets.len()
            )));
        }
        let (logits, traces) = self.forward(batch)?;
        let (value, dlogits) = loss_and_grad(&logits, targets, loss)?;
        let mut grads = self.zero_gradients();
        for ((x, trace), dl) in batch.iter().zip(&traces).zip(&dlogits) {
            self.accumulate_backward(x, trace, dl, &mut grads.layers);
        }
        Ok((value, grads))
    }
}
