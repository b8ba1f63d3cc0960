//! Layer implementations: Conv1D, MaxPool1D, Flatten, Dense, Dropout, Softmax.
//!
//! Every layer offers an inference forward, a training forward (which may
//! record auxiliary state such as a dropout mask or pooling argmaxes), and a
//! backward that turns `dL/d(output)` into `dL/d(input)` plus parameter
//! gradients. Inner loops are written as contiguous slice walks so the
//! compiler can vectorize them; on the sweep hot path these loops are the
//! entire inference cost.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Linear,
    Relu,
}

impl Activation {
    fn apply(&self, buf: &mut [f32]) {
        if let Activation::Relu = self {
            for v in buf {
                *v = v.max(0.0);
            }
        }
    }

    /// Gate `grad` by the activation derivative, which for ReLU is readable
    /// straight off the layer *output* (output > 0 ⇔ pre-activation > 0).
    fn mask_grad(&self, grad: &mut [f32], output: &[f32]) {
        if let Activation::Relu = self {
            for (g, &y) in grad.iter_mut().zip(output) {
                if y <= 0.0 {
                    *g = 0.0;
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Padding {
    /// Zero-pad so the output length equals the input length.
    Same,
    /// No padding; output shrinks by `kernel - 1`.
    Valid,
}

fn shape3(x: &Tensor) -> Result<(usize, usize, usize)> {
    match *x.shape() {
        [b, c, l] => Ok((b, c, l)),
        ref s => Err(Error::contract(format!(
            "expected a [batch, channels, len] tensor, got shape {s:?}"
        ))),
    }
}

fn shape2(x: &Tensor) -> Result<(usize, usize)> {
    match *x.shape() {
        [b, f] => Ok((b, f)),
        ref s => Err(Error::contract(format!(
            "expected a [batch, features] tensor, got shape {s:?}"
        ))),
    }
}

/// 1-D convolution (cross-correlation, the usual deep-learning convention)
/// with an optional fused activation.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv1d {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub padding: Padding,
    pub activation: Activation,
    /// `[out_channels][in_channels][kernel]`, row-major.
    pub weights: Vec<f32>,
    /// `[out_channels]`.
    pub bias: Vec<f32>,
}

impl Conv1d {
    pub fn validate(&self) -> Result<()> {
        if self.in_channels == 0 || self.out_channels == 0 || self.kernel == 0 {
            return Err(Error::config("conv1d dimensions must be positive"));
        }
        let want = self.out_channels * self.in_channels * self.kernel;
        if self.weights.len() != want || self.bias.len() != self.out_channels {
            return Err(Error::config(format!(
                "conv1d parameter buffers have wrong sizes (weights {} want {want}, bias {} want {})",
                self.weights.len(),
                self.bias.len(),
                self.out_channels
            )));
        }
        Ok(())
    }

    fn pad_left(&self) -> usize {
        match self.padding {
            Padding::Same => (self.kernel - 1) / 2,
            Padding::Valid => 0,
        }
    }

    fn out_len(&self, l: usize) -> Result<usize> {
        match self.padding {
            Padding::Same => Ok(l),
            Padding::Valid => {
                if l < self.kernel {
                    Err(Error::contract(format!(
                        "valid conv needs input len >= kernel ({l} < {})",
                        self.kernel
                    )))
                } else {
                    Ok(l - self.kernel + 1)
                }
            }
        }
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let (b, c, l) = shape3(x)?;
        if c != self.in_channels {
            return Err(Error::contract(format!(
                "conv1d expects {} input channels, got {c}",
                self.in_channels
            )));
        }
        let ol = self.out_len(l)?;
        let pad = self.pad_left() as isize;
        let mut out = Tensor::zeros(&[b, self.out_channels, ol]);
        let xd = x.data();
        let od = out.data_mut();
        for bi in 0..b {
            for oc in 0..self.out_channels {
                let orow = &mut od[(bi * self.out_channels + oc) * ol..][..ol];
                orow.fill(self.bias[oc]);
                for ic in 0..self.in_channels {
                    let xrow = &xd[(bi * c + ic) * l..][..l];
                    let wrow =
                        &self.weights[(oc * self.in_channels + ic) * self.kernel..][..self.kernel];
                    for (kk, &w) in wrow.iter().enumerate() {
                        // out[o] += w · x[o + shift] over the in-range span.
                        let shift = kk as isize - pad;
                        let o0 = (-shift).max(0) as usize;
                        let o1 = ol.min((l as isize - shift).max(0) as usize);
                        if o0 >= o1 {
                            continue;
                        }
                        let x0 = (o0 as isize + shift) as usize;
                        for (dst, &src) in
                            orow[o0..o1].iter_mut().zip(&xrow[x0..x0 + (o1 - o0)])
                        {
                            *dst += w * src;
                        }
                    }
                }
                self.activation.apply(orow);
            }
        }
        Ok(out)
    }

    /// Returns `(dL/dx, [dL/dweights, dL/dbias])`.
    pub fn backward(&self, x: &Tensor, y: &Tensor, delta: &Tensor) -> Result<(Tensor, Vec<Vec<f32>>)> {
        let (b, c, l) = shape3(x)?;
        let (_, _, ol) = shape3(y)?;
        if delta.shape() != y.shape() {
            return Err(Error::contract("conv1d backward: delta shape mismatch"));
        }
        let pad = self.pad_left() as isize;
        let mut dpre = delta.clone();
        self.activation.mask_grad(dpre.data_mut(), y.data());
        let dp = dpre.data();
        let xd = x.data();
        let mut dw = vec![0.0f32; self.weights.len()];
        let mut db = vec![0.0f32; self.bias.len()];
        let mut dx = Tensor::zeros(&[b, c, l]);
        let dxd = dx.data_mut();
        for bi in 0..b {
            for oc in 0..self.out_channels {
                let drow = &dp[(bi * self.out_channels + oc) * ol..][..ol];
                db[oc] += drow.iter().sum::<f32>();
                for ic in 0..self.in_channels {
                    let xrow = &xd[(bi * c + ic) * l..][..l];
                    let dxrow = &mut dxd[(bi * c + ic) * l..][..l];
                    let wbase = (oc * self.in_channels + ic) * self.kernel;
                    for kk in 0..self.kernel {
                        let shift = kk as isize - pad;
                        let o0 = (-shift).max(0) as usize;
                        let o1 = ol.min((l as isize - shift).max(0) as usize);
                        if o0 >= o1 {
                            continue;
                        }
                        let x0 = (o0 as isize + shift) as usize;
                        let span = o1 - o0;
                        let mut acc = 0.0f32;
                        for (&d, &src) in drow[o0..o1].iter().zip(&xrow[x0..x0 + span]) {
                            acc += d * src;
                        }
                        dw[wbase + kk] += acc;
                        let w = self.weights[wbase + kk];
                        for (dst, &d) in dxrow[x0..x0 + span].iter_mut().zip(&drow[o0..o1]) {
                            *dst += w * d;
                        }
                    }
                }
            }
        }
        Ok((dx, vec![dw, db]))
    }
}

/// 1-D max pooling. Ties keep the first (lowest-index) maximum so the
/// backward routing is deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxPool1d {
    pub window: usize,
    pub stride: usize,
}

impl MaxPool1d {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.stride == 0 {
            return Err(Error::config("max_pool1d window and stride must be positive"));
        }
        Ok(())
    }

    fn out_len(&self, l: usize) -> Result<usize> {
        if l < self.window {
            return Err(Error::contract(format!(
                "max_pool1d needs input len >= window ({l} < {})",
                self.window
            )));
        }
        Ok((l - self.window) / self.stride + 1)
    }

    /// Forward pass; optionally records per-output argmax (flat index into
    /// the input row) for the backward pass.
    pub fn forward(&self, x: &Tensor, record: bool) -> Result<(Tensor, Option<Vec<u32>>)> {
        let (b, c, l) = shape3(x)?;
        let ol = self.out_len(l)?;
        let mut out = Tensor::zeros(&[b, c, ol]);
        let mut argmax = if record {
            Some(vec![0u32; b * c * ol])
        } else {
            None
        };
        let xd = x.data();
        let od = out.data_mut();
        for row in 0..b * c {
            let xrow = &xd[row * l..][..l];
            let orow = &mut od[row * ol..][..ol];
            for o in 0..ol {
                let start = o * self.stride;
                let mut best = xrow[start];
                let mut best_i = start;
                for (i, &v) in xrow[start..start + self.window].iter().enumerate().skip(1) {
                    if v > best {
                        best = v;
                        best_i = start + i;
                    }
                }
                orow[o] = best;
                if let Some(am) = argmax.as_mut() {
                    am[row * ol + o] = best_i as u32;
                }
            }
        }
        Ok((out, argmax))
    }

    pub fn backward(&self, x: &Tensor, argmax: &[u32], delta: &Tensor) -> Result<Tensor> {
        let (b, c, l) = shape3(x)?;
        let ol = self.out_len(l)?;
        if delta.len() != b * c * ol || argmax.len() != delta.len() {
            return Err(Error::contract("max_pool1d backward: size mismatch"));
        }
        let mut dx = Tensor::zeros(&[b, c, l]);
        let dxd = dx.data_mut();
        for row in 0..b * c {
            for o in 0..ol {
                let flat = row * ol + o;
                dxd[row * l + argmax[flat] as usize] += delta.data()[flat];
            }
        }
        Ok(dx)
    }
}

/// Fully-connected layer with an optional fused activation.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub in_features: usize,
    pub out_features: usize,
    pub activation: Activation,
    /// `[out_features][in_features]`, row-major.
    pub weights: Vec<f32>,
    /// `[out_features]`.
    pub bias: Vec<f32>,
}

impl Dense {
    pub fn validate(&self) -> Result<()> {
        if self.in_features == 0 || self.out_features == 0 {
            return Err(Error::config("dense dimensions must be positive"));
        }
        if self.weights.len() != self.in_features * self.out_features
            || self.bias.len() != self.out_features
        {
            return Err(Error::config("dense parameter buffers have wrong sizes"));
        }
        Ok(())
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let (b, f) = shape2(x)?;
        if f != self.in_features {
            return Err(Error::contract(format!(
                "dense expects {} input features, got {f}",
                self.in_features
            )));
        }
        let mut out = Tensor::zeros(&[b, self.out_features]);
        let od = out.data_mut();
        for bi in 0..b {
            let xrow = x.row(bi);
            let orow = &mut od[bi * self.out_features..][..self.out_features];
            for (o, dst) in orow.iter_mut().enumerate() {
                let wrow = &self.weights[o * self.in_features..][..self.in_features];
                let mut acc = self.bias[o];
                for (&w, &v) in wrow.iter().zip(xrow) {
                    acc += w * v;
                }
                *dst = acc;
            }
            self.activation.apply(orow);
        }
        Ok(out)
    }

    pub fn backward(&self, x: &Tensor, y: &Tensor, delta: &Tensor) -> Result<(Tensor, Vec<Vec<f32>>)> {
        let (b, _) = shape2(x)?;
        if delta.shape() != y.shape() {
            return Err(Error::contract("dense backward: delta shape mismatch"));
        }
        let mut dpre = delta.clone();
        self.activation.mask_grad(dpre.data_mut(), y.data());
        let mut dw = vec![0.0f32; self.weights.len()];
        let mut db = vec![0.0f32; self.bias.len()];
        let mut dx = Tensor::zeros(x.shape());
        let dxd = dx.data_mut();
        for bi in 0..b {
            let xrow = x.row(bi);
            let drow = &dpre.data()[bi * self.out_features..][..self.out_features];
            let dxrow = &mut dxd[bi * self.in_features..][..self.in_features];
            for (o, &d) in drow.iter().enumerate() {
                db[o] += d;
                let wrow = &self.weights[o * self.in_features..][..self.in_features];
                let dwrow = &mut dw[o * self.in_features..][..self.in_features];
                for i in 0..self.in_features {
                    dwrow[i] += d * xrow[i];
                    dxrow[i] += d * wrow[i];
                }
            }
        }
        Ok((dx, vec![dw, db]))
    }
}

/// Inverted dropout: surviving activations are scaled by `1/(1-rate)` during
/// training so inference is a plain identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dropout {
    pub rate: f32,
}

impl Dropout {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.rate) {
            return Err(Error::config(format!(
                "dropout rate must be in [0, 1), got {}",
                self.rate
            )));
        }
        Ok(())
    }

    pub fn forward_train(&self, x: &Tensor, rng: &mut ChaCha8Rng) -> (Tensor, Vec<f32>) {
        let keep = 1.0 - self.rate;
        let scale = 1.0 / keep;
        let mask: Vec<f32> = (0..x.len())
            .map(|_| {
                if rng.random::<f32>() < self.rate {
                    0.0
                } else {
                    scale
                }
            })
            .collect();
        let mut out = x.clone();
        for (v, &m) in out.data_mut().iter_mut().zip(&mask) {
            *v *= m;
        }
        (out, mask)
    }
}

/// Row-wise softmax with the max-shift trick and a double-precision
/// normalizing sum.
fn softmax_forward(x: &Tensor) -> Result<Tensor> {
    let (b, f) = shape2(x)?;
    let mut out = x.clone();
    let od = out.data_mut();
    for bi in 0..b {
        let row = &mut od[bi * f..][..f];
        let max = row.iter().copied().fold(f32::NEG_INFINITY, f32::max);
        let mut sum = 0.0f64;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v as f64;
        }
        for v in row.iter_mut() {
            *v = (*v as f64 / sum) as f32;
        }
    }
    Ok(out)
}

/// General softmax Jacobian product: `dx_i = p_i · (δ_i − Σ_j δ_j p_j)`.
/// The trainer normally fuses this with the cross-entropy gradient; this
/// path exists so the layer is differentiable on its own.
fn softmax_backward(y: &Tensor, delta: &Tensor) -> Result<Tensor> {
    let (b, f) = shape2(y)?;
    if delta.shape() != y.shape() {
        return Err(Error::contract("softmax backward: delta shape mismatch"));
    }
    let mut dx = Tensor::zeros(y.shape());
    let dxd = dx.data_mut();
    for bi in 0..b {
        let p = &y.data()[bi * f..][..f];
        let d = &delta.data()[bi * f..][..f];
        let dot: f64 = p.iter().zip(d).map(|(&pi, &di)| pi as f64 * di as f64).sum();
        for i in 0..f {
            dxd[bi * f + i] = p[i] * (d[i] - dot as f32);
        }
    }
    Ok(dx)
}

/// Auxiliary state a layer records on the training forward pass.
#[derive(Debug, Clone)]
pub enum LayerAux {
    None,
    /// Dropout keep/scale mask.
    Mask(Vec<f32>),
    /// MaxPool per-output argmax (flat index within each input row).
    Argmax(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Conv1d(Conv1d),
    MaxPool1d(MaxPool1d),
    Flatten,
    Dense(Dense),
    Dropout(Dropout),
    Softmax,
}

impl Layer {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Layer::Conv1d(_) => "conv1d",
            Layer::MaxPool1d(_) => "max_pool1d",
            Layer::Flatten => "flatten",
            Layer::Dense(_) => "dense",
            Layer::Dropout(_) => "dropout",
            Layer::Softmax => "softmax",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Layer::Conv1d(l) => l.validate(),
            Layer::MaxPool1d(l) => l.validate(),
            Layer::Dense(l) => l.validate(),
            Layer::Dropout(l) => l.validate(),
            Layer::Flatten | Layer::Softmax => Ok(()),
        }
    }

    pub fn forward_infer(&self, x: &Tensor) -> Result<Tensor> {
        match self {
            Layer::Conv1d(l) => l.forward(x),
            Layer::MaxPool1d(l) => Ok(l.forward(x, false)?.0),
            Layer::Flatten => flatten_forward(x),
            Layer::Dense(l) => l.forward(x),
            Layer::Dropout(_) => Ok(x.clone()),
            Layer::Softmax => softmax_forward(x),
        }
    }

    pub fn forward_train(
        &self,
        x: &Tensor,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Tensor, LayerAux)> {
        match self {
            Layer::MaxPool1d(l) => {
                let (y, am) = l.forward(x, true)?;
                Ok((y, LayerAux::Argmax(am.expect("argmax recorded"))))
            }
            Layer::Dropout(l) => {
                let (y, mask) = l.forward_train(x, rng);
                Ok((y, LayerAux::Mask(mask)))
            }
            other => Ok((other.forward_infer(x)?, LayerAux::None)),
        }
    }

    /// Returns `(dL/dinput, parameter gradients in `param_blocks` order)`.
    pub fn backward(
        &self,
        x: &Tensor,
        y: &Tensor,
        aux: &LayerAux,
        delta: &Tensor,
    ) -> Result<(Tensor, Vec<Vec<f32>>)> {
        match (self, aux) {
            (Layer::Conv1d(l), _) => l.backward(x, y, delta),
            (Layer::MaxPool1d(l), LayerAux::Argmax(am)) => {
                Ok((l.backward(x, am, delta)?, vec![]))
            }
            (Layer::MaxPool1d(_), _) => Err(Error::contract(
                "max_pool1d backward requires a recorded argmax",
            )),
            (Layer::Flatten, _) => Ok((delta.clone().reshaped(x.shape())?, vec![])),
            (Layer::Dense(l), _) => l.backward(x, y, delta),
            (Layer::Dropout(_), LayerAux::Mask(mask)) => {
                if delta.len() != mask.len() {
                    return Err(Error::contract("dropout backward: mask size mismatch"));
                }
                let mut dx = delta.clone();
                for (v, &m) in dx.data_mut().iter_mut().zip(mask) {
                    *v *= m;
                }
                Ok((dx, vec![]))
            }
            (Layer::Dropout(_), _) => Err(Error::contract(
                "dropout backward requires a recorded mask",
            )),
            (Layer::Softmax, _) => Ok((softmax_backward(y, delta)?, vec![])),
        }
    }

    pub fn param_blocks(&self) -> Vec<&[f32]> {
        match self {
            Layer::Conv1d(l) => vec![&l.weights, &l.bias],
            Layer::Dense(l) => vec![&l.weights, &l.bias],
            _ => vec![],
        }
    }

    pub fn param_blocks_mut(&mut self) -> Vec<&mut [f32]> {
        match self {
            Layer::Conv1d(l) => vec![&mut l.weights, &mut l.bias],
            Layer::Dense(l) => vec![&mut l.weights, &mut l.bias],
            _ => vec![],
        }
    }

    /// Shapes of the parameter blocks, matching `param_blocks` order.
    pub fn param_shapes(&self) -> Vec<Vec<usize>> {
        match self {
            Layer::Conv1d(l) => vec![
                vec![l.out_channels, l.in_channels, l.kernel],
                vec![l.out_channels],
            ],
            Layer::Dense(l) => vec![vec![l.out_features, l.in_features], vec![l.out_features]],
            _ => vec![],
        }
    }

    pub fn param_count(&self) -> usize {
        self.param_blocks().iter().map(|b| b.len()).sum()
    }
}

fn flatten_forward(x: &Tensor) -> Result<Tensor> {
    let (b, c, l) = shape3(x)?;
    x.clone().reshaped(&[b, c * l])
}
