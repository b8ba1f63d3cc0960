//! Adam optimizer over flat parameter blocks.
//!
//! State is one pair of first/second-moment buffers per parameter block plus
//! a shared step counter; bias correction uses the standard
//! `m̂ = m / (1-β₁ᵗ)`, `v̂ = v / (1-β₂ᵗ)` form with the corrections computed
//! in double precision.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub alpha: f32,
    pub beta1: f32,
    pub beta2: f32,
    pub epsilon: f32,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            alpha: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        // Zero is allowed: a frozen optimizer that never moves the weights.
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::config(format!(
                "alpha must be non-negative, got {}",
                self.alpha
            )));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::config(format!("{name} must be in [0, 1), got {b}")));
            }
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::config("epsilon must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AdamState {
    cfg: AdamConfig,
    t: u64,
    m: Vec<Vec<f32>>,
    v: Vec<Vec<f32>>,
}

impl AdamState {
    /// Fresh optimizer state for parameter blocks of the given sizes.
    pub fn new(cfg: AdamConfig, block_sizes: &[usize]) -> Result<AdamState> {
        cfg.validate()?;
        Ok(AdamState {
            cfg,
            t: 0,
            m: block_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: block_sizes.iter().map(|&n| vec![0.0; n]).collect(),
        })
    }

    pub fn config(&self) -> &AdamConfig {
        &self.cfg
    }

    /// Number of completed steps.
    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// Apply one update. `params` and `grads` must match the block layout
    /// the state was created with.
    pub fn step(&mut self, params: &mut [&mut [f32]], grads: &[&[f32]]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::contract(format!(
                "adam state has {} blocks, got {} params / {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        self.t += 1;
        let b1 = self.cfg.beta1;
        let b2 = self.cfg.beta2;
        let bc1 = 1.0 - (b1 as f64).powi(self.t as i32);
        let bc2 = 1.0 - (b2 as f64).powi(self.t as i32);
        // Fold the bias corrections into one scale where possible:
        // p -= α · (m/bc1) / (√(v/bc2) + ε)  computed per element below.
        for (bi, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            if p.len() != self.m[bi].len() || g.len() != self.m[bi].len() {
                return Err(Error::contract(format!(
                    "adam block {bi} expects {} elements, got {} params / {} grads",
                    self.m[bi].len(),
                    p.len(),
                    g.len()
                )));
            }
            let m = &mut self.m[bi];
            let v = &mut self.v[bi];
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = b1 * m[i] + (1.0 - b1) * gi;
                v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
                let mhat = m[i] as f64 / bc1;
                let vhat = v[i] as f64 / bc2;
                p[i] -= (self.cfg.alpha as f64 * mhat / (vhat.sqrt() + self.cfg.epsilon as f64))
                    as f32;
            }
        }
        Ok(())
    }
}
