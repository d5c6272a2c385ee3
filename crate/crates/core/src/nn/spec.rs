use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One layer of the network description.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv1d {
        kernel: usize,
        filters: usize,
        stride: usize,
    },
    Relu,
    #[serde(rename = "maxpool")]
    MaxPool { kernel: usize, stride: usize },
    GlobalAvgPool,
    Dense { units: usize },
    Softmax,
}

impl LayerSpec {
    pub fn conv(kernel: usize, filters: usize, stride: usize) -> Self {
        LayerSpec::Conv1d {
            kernel,
            filters,
            stride,
        }
    }

    pub fn pool(kernel: usize) -> Self {
        LayerSpec::MaxPool {
            kernel,
            stride: kernel,
        }
    }

    pub fn has_params(&self) -> bool {
        matches!(self, LayerSpec::Conv1d { .. } | LayerSpec::Dense { .. })
    }
}

/// Activation shape flowing between layers of a single sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub channels: usize,
    pub len: usize,
}

impl Shape {
    pub fn size(&self) -> usize {
        self.channels * self.len
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_length: usize,
    pub num_classes: usize,
    pub blocks: Vec<LayerSpec>,
    pub seed: u64,
}

/// Resolved per-layer geometry of a validated spec.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub input: Vec<Shape>,
    pub output: Vec<Shape>,
    /// Index of the final dense layer (producer of the logits).
    pub logits_layer: usize,
    pub last_conv: usize,
}

impl Layout {
    /// Number of weights and biases of layer `i`.
    pub fn param_shape(&self, blocks: &[LayerSpec], i: usize) -> (usize, usize) {
        match blocks[i] {
            LayerSpec::Conv1d {
                kernel, filters, ..
            } => (filters * self.input[i].channels * kernel, filters),
            LayerSpec::Dense { units } => (units * self.input[i].size(), units),
            _ => (0, 0),
        }
    }

    pub fn penultimate_dim(&self) -> usize {
        self.input[self.logits_layer].size()
    }
}

impl NetworkSpec {
    /// Walks the layer chain and checks every geometric constraint.
    pub fn layout(&self) -> Result<Layout> {
        let err = |layer: usize, message: String| Error::Shape { layer, message };
        if self.input_length == 0 {
            return Err(Error::Config("input_length must be positive".into()));
        }
        if self.num_classes < 2 {
            return Err(Error::Config(format!(
                "num_classes must be at least 2, got {}",
                self.num_classes
            )));
        }
        let mut shape = Shape {
            channels: 1,
            len: self.input_length,
        };
        let mut input = Vec::with_capacity(self.blocks.len());
        let mut output = Vec::with_capacity(self.blocks.len());
        let mut last_conv = None;
        let mut last_dense = None;
        for (i, layer) in self.blocks.iter().enumerate() {
            input.push(shape);
            shape = match *layer {
                LayerSpec::Conv1d {
                    kernel,
                    filters,
                    stride,
                } => {
                    if kernel == 0 || filters == 0 || stride == 0 {
                        return Err(err(i, "kernel, filters and stride must be >= 1".into()));
                    }
                    if shape.len < kernel {
                        return Err(err(
                            i,
                            format!("conv kernel {kernel} exceeds input length {}", shape.len),
                        ));
                    }
                    last_conv = Some(i);
                    Shape {
                        channels: filters,
                        len: (shape.len - kernel) / stride + 1,
                    }
                }
                LayerSpec::MaxPool { kernel, stride } => {
                    if kernel == 0 || stride == 0 {
                        return Err(err(i, "pool kernel and stride must be >= 1".into()));
                    }
                    if shape.len < kernel {
                        return Err(err(
                            i,
                            format!("pool kernel {kernel} exceeds input length {}", shape.len),
                        ));
                    }
                    Shape {
                        channels: shape.channels,
                        len: (shape.len - kernel) / stride + 1,
                    }
                }
                LayerSpec::Relu => shape,
                LayerSpec::GlobalAvgPool => Shape {
                    channels: shape.channels,
                    len: 1,
                },
                LayerSpec::Dense { units } => {
                    if units == 0 {
                        return Err(err(i, "dense units must be >= 1".into()));
                    }
                    last_dense = Some(i);
                    Shape {
                        channels: units,
                        len: 1,
                    }
                }
                LayerSpec::Softmax => {
                    if i + 1 != self.blocks.len() {
                        return Err(err(i, "softmax must be the final layer".into()));
                    }
                    shape
                }
            };
            output.push(shape);
        }
        let logits_layer = last_dense
            .ok_or_else(|| err(self.blocks.len(), "network has no dense output layer".into()))?;
        let last_conv = match last_conv {
            Some(c) if c < logits_layer => c,
            _ => {
                return Err(err(
                    logits_layer,
                    "a convolution layer must precede the final dense layer".into(),
                ))
            }
        };
        if let LayerSpec::Dense { units } = self.blocks[logits_layer] {
            if units != self.num_classes {
                return Err(err(
                    logits_layer,
                    format!(
                        "output dense has {units} units but num_classes is {}",
                        self.num_classes
                    ),
                ));
            }
        }
        for (i, layer) in self.blocks.iter().enumerate().skip(logits_layer + 1) {
            if !matches!(layer, LayerSpec::Softmax) {
                return Err(err(i, "only softmax may follow the output dense layer".into()));
            }
        }
        Ok(Layout {
            input,
            output,
            logits_layer,
            last_conv,
        })
    }

    /// Small raw-audio network: `conv_blocks` of (conv, relu, maxpool), then the
    /// final conv with `5 * num_classes` filters, relu, global average pool,
    /// dense and softmax.
    pub fn small_audio(
        input_length: usize,
        num_classes: usize,
        conv_blocks: &[(usize, usize, usize, usize)],
        final_kernel: usize,
        seed: u64,
    ) -> Self {
        let mut blocks = Vec::new();
        for &(kernel, filters, stride, pool) in conv_blocks {
            blocks.push(LayerSpec::conv(kernel, filters, stride));
            blocks.push(LayerSpec::Relu);
            if pool > 1 {
                blocks.push(LayerSpec::pool(pool));
            }
        }
        blocks.push(LayerSpec::conv(final_kernel, 5 * num_classes, 1));
        blocks.push(LayerSpec::Relu);
        blocks.push(LayerSpec::GlobalAvgPool);
        blocks.push(LayerSpec::Dense { units: num_classes });
        blocks.push(LayerSpec::Softmax);
        NetworkSpec {
            input_length,
            num_classes,
            blocks,
            seed,
        }
    }
}
