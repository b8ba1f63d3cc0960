//! A small dependency-free neural-network engine.
//!
//! Just enough machinery for the sensing classifier and its baselines:
//! sequential models over [`Tensor`]s, six layer kinds, softmax +
//! cross-entropy, Adam, seeded He-uniform init, and JSON weight files.
//!
//! Classifier inputs are spectrum chunks presented as two channels (I and Q)
//! of `input_len` bins, max-abs normalized per example; see
//! [`input_from_complex`] / [`input_from_pairs`].

mod adam;
mod io;
mod layers;
mod tensor;

pub use adam::{AdamConfig, AdamState};
pub use io::{load_weights, save_weights};
pub use layers::{Activation, Conv1d, Dense, Dropout, Layer, LayerAux, MaxPool1d, Padding};
pub use tensor::Tensor;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// How classifier inputs are scaled before they reach the first layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Divide both channels by the example's largest |I| or |Q| value.
    MaxAbs,
    /// Feed values through untouched.
    None,
}

/// Input contract of a model, stored alongside its weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    /// Bins per input example.
    pub input_len: usize,
    /// Input channels (2: I and Q).
    pub in_channels: usize,
    /// Output classes, softmax width.
    pub num_classes: usize,
    pub normalization: Normalization,
}

/// A sequential model: layers applied in order, softmax last.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub meta: ModelMeta,
    pub layers: Vec<Layer>,
}

/// Shape a tensor flows through while validating a layer stack.
#[derive(Debug, Clone, Copy, PartialEq)]
enum FlowShape {
    Spatial { channels: usize, len: usize },
    Flat { features: usize },
}

/// Everything the backward pass needs from a training forward pass.
#[derive(Debug)]
pub struct ForwardTape {
    /// `activations[0]` is the input; `activations[i + 1]` is layer `i`'s output.
    activations: Vec<Tensor>,
    aux: Vec<LayerAux>,
}

impl ForwardTape {
    /// Softmax output of the pass.
    pub fn output(&self) -> &Tensor {
        self.activations.last().expect("tape has activations")
    }

    /// Recorded auxiliary state (dropout masks, pool argmaxes) per layer.
    pub fn aux(&self) -> &[LayerAux] {
        &self.aux
    }
}

/// Per-block parameter gradients, in [`Model::param_blocks`] order.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub blocks: Vec<Vec<f32>>,
}

impl Model {
    /// Check layer-local configs and that shapes chain correctly from the
    /// declared input to a final softmax over `num_classes`.
    pub fn validate(&self) -> Result<()> {
        if self.meta.input_len == 0 || self.meta.in_channels == 0 {
            return Err(Error::config("model input dimensions must be positive"));
        }
        if self.meta.num_classes < 2 {
            return Err(Error::config("model needs at least two classes"));
        }
        if self.layers.is_empty() {
            return Err(Error::config("model has no layers"));
        }
        let mut shape = FlowShape::Spatial {
            channels: self.meta.in_channels,
            len: self.meta.input_len,
        };
        for (i, layer) in self.layers.iter().enumerate() {
            layer.validate()?;
            if matches!(layer, Layer::Softmax) && i + 1 != self.layers.len() {
                return Err(Error::config("softmax must be the final layer"));
            }
            shape = next_shape(layer, shape)
                .map_err(|e| Error::config(format!("layer {i} ({}): {e}", layer.kind_name())))?;
        }
        if !matches!(self.layers.last(), Some(Layer::Softmax)) {
            return Err(Error::config("model must end in softmax"));
        }
        match shape {
            FlowShape::Flat { features } if features == self.meta.num_classes => Ok(()),
            other => Err(Error::config(format!(
                "model output is {other:?}, expected {} flat classes",
                self.meta.num_classes
            ))),
        }
    }

    fn check_input(&self, x: &Tensor) -> Result<()> {
        match *x.shape() {
            [b, c, l] if b > 0 && c == self.meta.in_channels && l == self.meta.input_len => Ok(()),
            ref s => Err(Error::contract(format!(
                "model expects [batch, {}, {}] input, got {s:?}",
                self.meta.in_channels, self.meta.input_len
            ))),
        }
    }

    /// Inference pass: dropout disabled, deterministic.
    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        self.check_input(x)?;
        let mut cur = x.clone();
        for layer in &self.layers {
            cur = layer.forward_infer(&cur)?;
        }
        Ok(cur)
    }

    /// Training pass: dropout active (masks drawn from `rng`), every
    /// intermediate activation recorded for [`Model::backward`].
    pub fn forward_train(&self, x: &Tensor, rng: &mut ChaCha8Rng) -> Result<ForwardTape> {
        self.check_input(x)?;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        let mut aux = Vec::with_capacity(self.layers.len());
        activations.push(x.clone());
        for layer in &self.layers {
            let (y, a) = layer.forward_train(activations.last().expect("non-empty"), rng)?;
            activations.push(y);
            aux.push(a);
        }
        Ok(ForwardTape { activations, aux })
    }

    /// Mean cross-entropy loss and parameter gradients for a recorded pass.
    ///
    /// The softmax and loss gradients are fused into the numerically stable
    /// `(probs − one_hot) / batch` seed.
    pub fn backward(&self, tape: &ForwardTape, labels: &[usize]) -> Result<(f64, Gradients)> {
        if tape.activations.len() != self.layers.len() + 1 {
            return Err(Error::contract("tape does not match this model"));
        }
        let probs = tape.output();
        let (loss, seed) = cross_entropy(probs, labels)?;
        let mut blocks_rev: Vec<Vec<f32>> = Vec::new();
        let mut delta = seed;
        // The seed is already dL/d(softmax input), so skip the softmax layer.
        for i in (0..self.layers.len() - 1).rev() {
            let layer = &self.layers[i];
            let (dx, grads) = layer.backward(
                &tape.activations[i],
                &tape.activations[i + 1],
                &tape.aux[i],
                &delta,
            )?;
            for g in grads.into_iter().rev() {
                blocks_rev.push(g);
            }
            delta = dx;
        }
        blocks_rev.reverse();
        Ok((loss, Gradients { blocks: blocks_rev }))
    }

    /// Immutable views of all parameter blocks, layer order.
    pub fn param_blocks(&self) -> Vec<&[f32]> {
        self.layers.iter().flat_map(|l| l.param_blocks()).collect()
    }

    /// Mutable views of all parameter blocks, layer order.
    pub fn param_blocks_mut(&mut self) -> Vec<&mut [f32]> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.param_blocks_mut())
            .collect()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.param_blocks().iter().map(|b| b.len()).collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.param_count()).sum()
    }

    /// Copy all parameters out (for best-epoch snapshots).
    pub fn snapshot_params(&self) -> Vec<Vec<f32>> {
        self.param_blocks().iter().map(|b| b.to_vec()).collect()
    }

    /// Restore parameters from a snapshot taken on an identical architecture.
    pub fn restore_params(&mut self, snapshot: &[Vec<f32>]) -> Result<()> {
        let mut blocks = self.param_blocks_mut();
        if blocks.len() != snapshot.len() {
            return Err(Error::contract("snapshot block count mismatch"));
        }
        for (dst, src) in blocks.iter_mut().zip(snapshot) {
            if dst.len() != src.len() {
                return Err(Error::contract("snapshot block size mismatch"));
            }
            dst.copy_from_slice(src);
        }
        Ok(())
    }
}

fn next_shape(layer: &Layer, shape: FlowShape) -> std::result::Result<FlowShape, String> {
    use FlowShape::*;
    match (layer, shape) {
        (Layer::Conv1d(l), Spatial { channels, len }) => {
            if channels != l.in_channels {
                return Err(format!("expects {} channels, gets {channels}", l.in_channels));
            }
            let out_len = match l.padding {
                Padding::Same => len,
                Padding::Valid => len
                    .checked_sub(l.kernel - 1)
                    .ok_or_else(|| format!("input len {len} shorter than kernel {}", l.kernel))?,
            };
            Ok(Spatial { channels: l.out_channels, len: out_len })
        }
        (Layer::MaxPool1d(l), Spatial { channels, len }) => {
            if len < l.window {
                return Err(format!("input len {len} shorter than window {}", l.window));
            }
            Ok(Spatial { channels, len: (len - l.window) / l.stride + 1 })
        }
        (Layer::Flatten, Spatial { channels, len }) => Ok(Flat { features: channels * len }),
        (Layer::Dense(l), Flat { features }) => {
            if features != l.in_features {
                return Err(format!("expects {} features, gets {features}", l.in_features));
            }
            Ok(Flat { features: l.out_features })
        }
        (Layer::Dropout(_), s) => Ok(s),
        (Layer::Softmax, Flat { features }) => Ok(Flat { features }),
        (l, s) => Err(format!("{} cannot consume {s:?}", l.kind_name())),
    }
}

/// Mean cross-entropy of softmax `probs` against integer labels, plus the
/// fused gradient w.r.t. the softmax *input*: `(probs − one_hot) / batch`.
pub fn cross_entropy(probs: &Tensor, labels: &[usize]) -> Result<(f64, Tensor)> {
    let &[b, classes] = probs.shape() else {
        return Err(Error::contract("cross_entropy expects [batch, classes] probs"));
    };
    if labels.len() != b || b == 0 {
        return Err(Error::contract(format!(
            "got {} labels for batch size {b}",
            labels.len()
        )));
    }
    let mut loss = 0.0f64;
    let mut grad = probs.clone();
    let gd = grad.data_mut();
    for (bi, &label) in labels.iter().enumerate() {
        if label >= classes {
            return Err(Error::contract(format!(
                "label {label} out of range for {classes} classes"
            )));
        }
        let p = probs.data()[bi * classes + label].max(1e-12);
        loss -= (p as f64).ln();
        gd[bi * classes + label] -= 1.0;
    }
    let inv_b = 1.0 / b as f32;
    for v in gd.iter_mut() {
        *v *= inv_b;
    }
    Ok((loss / b as f64, grad))
}

/// Hyperparameters of the classifier family. The default is the shallow
/// reference architecture; the deep baseline in [`crate::bench`] reuses the
/// same layer kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub conv_filters: usize,
    pub kernel: usize,
    pub pool: usize,
    pub dense_width: usize,
    pub dropout_rate: f32,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            conv_filters: 16,
            kernel: 7,
            pool: 4,
            dense_width: 128,
            dropout_rate: 0.5,
        }
    }
}

/// He-uniform init: `U(±sqrt(6 / fan_in))`, the standard choice for ReLU.
fn he_uniform(rng: &mut ChaCha8Rng, fan_in: usize, n: usize) -> Vec<f32> {
    let limit = (6.0 / fan_in as f64).sqrt() as f32;
    (0..n).map(|_| rng.random_range(-limit..limit)).collect()
}

/// Build a classifier from `cfg` for `input_len`-bin two-channel chunks.
pub fn build_model(
    cfg: &ModelConfig,
    input_len: usize,
    num_classes: usize,
    seed: u64,
) -> Result<Model> {
    if input_len < cfg.pool {
        return Err(Error::config(format!(
            "input_len {input_len} is shorter than the pooling window {}",
            cfg.pool
        )));
    }
    let mut rng = rng_from_seed(seed);
    let in_channels = 2;
    let conv_fan_in = in_channels * cfg.kernel;
    let pooled = (input_len - cfg.pool) / cfg.pool + 1;
    let flat = cfg.conv_filters * pooled;
    let model = Model {
        meta: ModelMeta {
            input_len,
            in_channels,
            num_classes,
            normalization: Normalization::MaxAbs,
        },
        layers: vec![
            Layer::Conv1d(Conv1d {
                in_channels,
                out_channels: cfg.conv_filters,
                kernel: cfg.kernel,
                padding: Padding::Same,
                activation: Activation::Relu,
                weights: he_uniform(&mut rng, conv_fan_in, cfg.conv_filters * conv_fan_in),
                bias: vec![0.0; cfg.conv_filters],
            }),
            Layer::MaxPool1d(MaxPool1d {
                window: cfg.pool,
                stride: cfg.pool,
            }),
            Layer::Flatten,
            Layer::Dense(Dense {
                in_features: flat,
                out_features: cfg.dense_width,
                activation: Activation::Relu,
                weights: he_uniform(&mut rng, flat, cfg.dense_width * flat),
                bias: vec![0.0; cfg.dense_width],
            }),
            Layer::Dropout(Dropout {
                rate: cfg.dropout_rate,
            }),
            Layer::Dense(Dense {
                in_features: cfg.dense_width,
                out_features: num_classes,
                activation: Activation::Linear,
                weights: he_uniform(&mut rng, cfg.dense_width, num_classes * cfg.dense_width),
                bias: vec![0.0; num_classes],
            }),
            Layer::Softmax,
        ],
    };
    model.validate()?;
    Ok(model)
}

/// The shallow reference classifier: Conv1D(16, k7, same, ReLU) →
/// MaxPool(4) → Dense(128, ReLU) → Dropout(0.5) → Dense(classes) → Softmax.
pub fn build_reference_model(input_len: usize, num_classes: usize, seed: u64) -> Result<Model> {
    build_model(&ModelConfig::default(), input_len, num_classes, seed)
}

/// Assemble one normalized model-input row (`[I bins ++ Q bins]`, length
/// `2·len`) from complex spectrum bins. Used on the live pipeline path.
pub fn input_from_complex(bins: &[Complex64], norm: Normalization) -> Vec<f32> {
    let scale = match norm {
        Normalization::MaxAbs => {
            let m = bins
                .iter()
                .map(|v| v.re.abs().max(v.im.abs()))
                .fold(0.0f64, f64::max);
            if m > 0.0 {
                1.0 / m
            } else {
                1.0
            }
        }
        Normalization::None => 1.0,
    };
    let mut row = Vec::with_capacity(bins.len() * 2);
    row.extend(bins.iter().map(|v| (v.re * scale) as f32));
    row.extend(bins.iter().map(|v| (v.im * scale) as f32));
    row
}

/// Assemble one normalized input row from stored `(I, Q)` record samples.
/// Used on the dataset/training path.
pub fn input_from_pairs(iq: &[(f32, f32)], norm: Normalization) -> Vec<f32> {
    let scale = match norm {
        Normalization::MaxAbs => {
            let m = iq
                .iter()
                .map(|&(i, q)| i.abs().max(q.abs()))
                .fold(0.0f32, f32::max);
            if m > 0.0 {
                1.0 / m
            } else {
                1.0
            }
        }
        Normalization::None => 1.0,
    };
    let mut row = Vec::with_capacity(iq.len() * 2);
    row.extend(iq.iter().map(|&(i, _)| i * scale));
    row.extend(iq.iter().map(|&(_, q)| q * scale));
    row
}

/// Stack pre-assembled input rows (length `2·input_len` each) into a
/// `[batch, 2, input_len]` tensor.
pub fn batch_from_rows(rows: &[&[f32]], input_len: usize) -> Result<Tensor> {
    if rows.is_empty() {
        return Err(Error::contract("batch must contain at least one row"));
    }
    let mut data = Vec::with_capacity(rows.len() * 2 * input_len);
    for row in rows {
        if row.len() != 2 * input_len {
            return Err(Error::contract(format!(
                "input row has {} values, expected {}",
                row.len(),
                2 * input_len
            )));
        }
        data.extend_from_slice(row);
    }
    Tensor::from_vec(&[rows.len(), 2, input_len], data)
}

/// Argmax with lowest-index tie-breaking (strict `>` scan).
pub fn argmax(row: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}
