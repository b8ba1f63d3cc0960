//! Labeled-signal synthesis: OFDM bursts, interference, and a channel model.
//!
//! Conventions used throughout the crate:
//!
//! * Subcarriers are addressed by *signed* index `k` relative to DC
//!   (`-N/2 < k < N/2` for an `N`-point grid); subcarrier `k` sits at
//!   frequency `k · fs / N`.
//! * An OFDM symbol is built as `x = IDFT(X) / sqrt(N)` from a unit-magnitude
//!   frequency grid, so each active subcarrier contributes `1/N` to the mean
//!   time-domain power and a burst averages `active / N` power per sample.
//! * Interference power is stated in dB **relative to the per-subcarrier
//!   OFDM power** `1/N`, i.e. `0 dB` means "as strong as one subcarrier".

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fft::Fft;
use crate::rng::{derive_seed, rng_from_seed};

/// Data-subcarrier modulation. Only QPSK is implemented; the enum keeps the
/// config format honest about what was used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modulation {
    Qpsk,
}

/// OFDM waveform parameters.
///
/// The default is the classic 64-point WLAN-style grid: 52 active
/// subcarriers, pilots at ±7 and ±21, a 16-sample cyclic prefix, and a
/// 10 MHz sample rate (156.25 kHz subcarrier spacing).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfdmConfig {
    /// IFFT size of the modulator (power of two).
    pub fft_size: usize,
    /// Number of occupied subcarriers, split evenly around DC. DC stays empty.
    pub active_subcarriers: usize,
    /// Signed indices of pilot subcarriers; must lie in the active set.
    pub pilot_subcarriers: Vec<i32>,
    /// Cyclic-prefix length in samples (strictly less than `fft_size`).
    pub cp_len: usize,
    /// Complex baseband sample rate in Hz.
    pub sample_rate_hz: f64,
    /// Modulation on the non-pilot active subcarriers.
    pub modulation: Modulation,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        OfdmConfig {
            fft_size: 64,
            active_subcarriers: 52,
            pilot_subcarriers: vec![-21, -7, 7, 21],
            cp_len: 16,
            sample_rate_hz: 10e6,
            modulation: Modulation::Qpsk,
        }
    }
}

impl OfdmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fft_size < 2 || !self.fft_size.is_power_of_two() {
            return Err(Error::config(format!(
                "fft_size must be a power of two >= 2, got {}",
                self.fft_size
            )));
        }
        if self.active_subcarriers == 0 {
            return Err(Error::config("active_subcarriers must be positive"));
        }
        let (lo, hi) = self.active_split();
        let max_index = self.fft_size / 2 - 1;
        if lo > max_index || hi > max_index {
            return Err(Error::config(format!(
                "{} active subcarriers do not fit a {}-point grid (max index ±{})",
                self.active_subcarriers, self.fft_size, max_index
            )));
        }
        if self.cp_len >= self.fft_size {
            return Err(Error::config(format!(
                "cp_len {} must be shorter than fft_size {}",
                self.cp_len, self.fft_size
            )));
        }
        if !self.sample_rate_hz.is_finite() || self.sample_rate_hz <= 0.0 {
            return Err(Error::config(format!(
                "sample_rate_hz must be positive and finite, got {}",
                self.sample_rate_hz
            )));
        }
        let active = self.active_indices();
        let mut seen = std::collections::HashSet::new();
        for &p in &self.pilot_subcarriers {
            if !active.contains(&p) {
                return Err(Error::config(format!(
                    "pilot subcarrier {p} is outside the active set"
                )));
            }
            if !seen.insert(p) {
                return Err(Error::config(format!("duplicate pilot subcarrier {p}")));
            }
        }
        if self.pilot_subcarriers.len() >= self.active_subcarriers {
            return Err(Error::config("pilots must leave room for data subcarriers"));
        }
        Ok(())
    }

    /// How many active indices sit below / above DC: `(negatives, positives)`.
    fn active_split(&self) -> (usize, usize) {
        let hi = self.active_subcarriers / 2;
        (self.active_subcarriers - hi, hi)
    }

    /// Signed indices of all active subcarriers, ascending.
    pub fn active_indices(&self) -> Vec<i32> {
        let (lo, hi) = self.active_split();
        (-(lo as i32)..=-1)
            .chain(1..=hi as i32)
            .collect()
    }

    /// Active subcarriers that carry data (active minus pilots), ascending.
    pub fn data_indices(&self) -> Vec<i32> {
        self.active_indices()
            .into_iter()
            .filter(|k| !self.pilot_subcarriers.contains(k))
            .collect()
    }

    /// Samples per OFDM symbol including the cyclic prefix.
    pub fn symbol_len(&self) -> usize {
        self.fft_size + self.cp_len
    }

    pub fn subcarrier_spacing_hz(&self) -> f64 {
        self.sample_rate_hz / self.fft_size as f64
    }

    /// Mean time-domain power of a burst, `active / fft_size`.
    pub fn mean_power(&self) -> f64 {
        self.active_subcarriers as f64 / self.fft_size as f64
    }

    /// Per-subcarrier time-domain power, `1 / fft_size`. Interference power
    /// is specified relative to this.
    pub fn per_subcarrier_power(&self) -> f64 {
        1.0 / self.fft_size as f64
    }
}

/// Position of signed subcarrier `k` in the raw (unshifted) DFT bin order.
pub fn bin_of_subcarrier(k: i32, fft_size: usize) -> usize {
    let n = fft_size as i64;
    (((k as i64 % n) + n) % n) as usize
}

/// Position of signed subcarrier `k` on an ascending-frequency (shifted)
/// grid: `0 .. fft_size`, DC at `fft_size/2`.
pub fn shifted_index(k: i32, fft_size: usize) -> usize {
    (k + fft_size as i32 / 2) as usize
}

/// Interference waveform family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterferenceWaveform {
    /// A single complex tone at the target subcarrier's center frequency.
    Tone,
    /// Band-limited noise centered on the target subcarrier, synthesized as
    /// a dense bank of randomly-phased tones spanning `bandwidth_hz`.
    NarrowbandNoise,
}

/// What the jammer transmits, if anything.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceSpec {
    /// Jammed subcarrier (signed), or `None` for a clean capture.
    pub target_subcarrier: Option<i32>,
    pub waveform: InterferenceWaveform,
    /// Occupied bandwidth in Hz; at most one subcarrier spacing.
    pub bandwidth_hz: f64,
    /// Interference power in dB relative to the per-subcarrier OFDM power.
    pub power_db_rel: f64,
    /// Subcarriers the jammer is allowed to pick from. A `Some` target must
    /// be a member.
    pub candidate_set: Vec<i32>,
}

impl InterferenceSpec {
    /// Defaults matched to [`OfdmConfig`]: tone waveform, one subcarrier
    /// spacing of bandwidth, +10 dB, and the eight consecutive data
    /// subcarriers `+8..=+15` as candidates (the `chunk8` dataset band).
    pub fn default_for(cfg: &OfdmConfig) -> Self {
        InterferenceSpec {
            target_subcarrier: None,
            waveform: InterferenceWaveform::Tone,
            bandwidth_hz: cfg.subcarrier_spacing_hz(),
            power_db_rel: 10.0,
            candidate_set: (8..=15).collect(),
        }
    }

    pub fn validate(&self, cfg: &OfdmConfig) -> Result<()> {
        if self.candidate_set.is_empty() {
            return Err(Error::config("candidate_set must not be empty"));
        }
        let max_index = cfg.fft_size as i32 / 2 - 1;
        let mut seen = std::collections::HashSet::new();
        for &k in &self.candidate_set {
            if k.abs() > max_index {
                return Err(Error::config(format!(
                    "candidate subcarrier {k} is outside the ±{max_index} grid"
                )));
            }
            if !seen.insert(k) {
                return Err(Error::config(format!("duplicate candidate subcarrier {k}")));
            }
        }
        if let Some(k) = self.target_subcarrier {
            if !self.candidate_set.contains(&k) {
                return Err(Error::config(format!(
                    "target subcarrier {k} is not in the candidate set"
                )));
            }
        }
        if !self.bandwidth_hz.is_finite()
            || self.bandwidth_hz <= 0.0
            || self.bandwidth_hz > cfg.subcarrier_spacing_hz()
        {
            return Err(Error::config(format!(
                "bandwidth_hz must be in (0, {}], got {}",
                cfg.subcarrier_spacing_hz(),
                self.bandwidth_hz
            )));
        }
        if !self.power_db_rel.is_finite() {
            return Err(Error::config("power_db_rel must be finite"));
        }
        Ok(())
    }
}

/// Channel applied after synthesis: a flat gain and AWGN at a target SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    /// Target signal-to-noise ratio in dB. `f64::INFINITY` disables noise.
    pub snr_db: f64,
    /// Flat amplitude gain in dB applied to the signal before noise.
    pub gain_db: f64,
    /// Base seed for the noise stream.
    pub seed: u64,
    /// Collection-day tag; folded into the noise seed so different days see
    /// different noise even at identical seeds.
    pub day_tag: u32,
}

impl ChannelSpec {
    /// Noiseless, unit-gain channel.
    pub fn clean() -> Self {
        ChannelSpec {
            snr_db: f64::INFINITY,
            gain_db: 0.0,
            seed: 0,
            day_tag: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_nan() {
            return Err(Error::config("snr_db must not be NaN"));
        }
        if !self.gain_db.is_finite() {
            return Err(Error::config("gain_db must be finite"));
        }
        Ok(())
    }
}

/// Fixed BPSK pilot value for the `i`-th pilot in ascending-index order.
fn pilot_value(i: usize) -> Complex64 {
    if i % 2 == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(-1.0, 0.0)
    }
}

/// Synthesize `n_symbols` OFDM symbols (cyclic prefix included) with random
/// QPSK payload drawn from `seed`. Output length is
/// `n_symbols * (fft_size + cp_len)`.
pub fn generate_ofdm_burst(
    cfg: &OfdmConfig,
    n_symbols: usize,
    seed: u64,
) -> Result<Vec<Complex64>> {
    cfg.validate()?;
    if n_symbols == 0 {
        return Err(Error::contract("n_symbols must be at least 1"));
    }
    let n = cfg.fft_size;
    let plan = Fft::new(n)?;
    let mut rng = rng_from_seed(seed);
    let mut pilots: Vec<i32> = cfg.pilot_subcarriers.clone();
    pilots.sort_unstable();
    let data = cfg.data_indices();
    let qpsk_scale = 1.0 / 2f64.sqrt();
    let amp_scale = (n as f64).sqrt(); // undo the 1/N of `inverse`, keep 1/sqrt(N)

    let mut out = Vec::with_capacity(n_symbols * cfg.symbol_len());
    let mut grid = vec![Complex64::new(0.0, 0.0); n];
    for _ in 0..n_symbols {
        grid.fill(Complex64::new(0.0, 0.0));
        for (i, &p) in pilots.iter().enumerate() {
            grid[bin_of_subcarrier(p, n)] = pilot_value(i);
        }
        for &k in &data {
            let bits: u8 = rng.random::<u8>() & 0b11;
            let re = if bits & 0b01 == 0 { 1.0 } else { -1.0 };
            let im = if bits & 0b10 == 0 { 1.0 } else { -1.0 };
            grid[bin_of_subcarrier(k, n)] = Complex64::new(re * qpsk_scale, im * qpsk_scale);
        }
        let mut body = grid.clone();
        plan.inverse(&mut body)?;
        for v in body.iter_mut() {
            *v *= amp_scale;
        }
        out.extend_from_slice(&body[n - cfg.cp_len..]);
        out.extend_from_slice(&body);
    }
    Ok(out)
}

/// Add the interference described by `spec` to `signal`.
///
/// With `target_subcarrier: None` the input is returned bit-identical.
/// Injected mean power per sample is `per_subcarrier_power · 10^(dB/10)`
/// (exactly for a tone, in expectation for narrowband noise).
pub fn inject_interference(
    signal: &[Complex64],
    spec: &InterferenceSpec,
    cfg: &OfdmConfig,
    seed: u64,
) -> Result<Vec<Complex64>> {
    cfg.validate()?;
    spec.validate(cfg)?;
    if signal.is_empty() {
        return Err(Error::contract("signal must not be empty"));
    }
    let Some(k) = spec.target_subcarrier else {
        return Ok(signal.to_vec());
    };
    let power = cfg.per_subcarrier_power() * 10f64.powf(spec.power_db_rel / 10.0);
    let mut rng = rng_from_seed(seed);
    let mut out = signal.to_vec();
    match spec.waveform {
        InterferenceWaveform::Tone => {
            let amp = power.sqrt();
            let phase0: f64 = rng.random::<f64>() * 2.0 * PI;
            // One full cycle every fft_size/k samples: k · fs/N in Hz.
            let step = 2.0 * PI * k as f64 / cfg.fft_size as f64;
            for (n, v) in out.iter_mut().enumerate() {
                *v += Complex64::from_polar(amp, phase0 + step * n as f64);
            }
        }
        InterferenceWaveform::NarrowbandNoise => {
            // A bank of M tones evenly covering the band, each with an
            // independent circular-Gaussian coefficient; total expected
            // power is `power`.
            const M: usize = 16;
            let coeff_sigma = (power / (2.0 * M as f64)).sqrt();
            let center = k as f64 * cfg.sample_rate_hz / cfg.fft_size as f64;
            let mut steps = [0.0f64; M];
            let mut coeffs = [Complex64::new(0.0, 0.0); M];
            for m in 0..M {
                let frac = (m as f64 + 0.5) / M as f64 - 0.5;
                let freq = center + frac * spec.bandwidth_hz;
                steps[m] = 2.0 * PI * freq / cfg.sample_rate_hz;
                let g_re: f64 = StandardNormal.sample(&mut rng);
                let g_im: f64 = StandardNormal.sample(&mut rng);
                coeffs[m] = Complex64::new(g_re * coeff_sigma, g_im * coeff_sigma);
            }
            for (n, v) in out.iter_mut().enumerate() {
                let mut add = Complex64::new(0.0, 0.0);
                for m in 0..M {
                    add += coeffs[m] * Complex64::from_polar(1.0, steps[m] * n as f64);
                }
                *v += add;
            }
        }
    }
    Ok(out)
}

/// Scale `signal` by the channel gain and add circular AWGN calibrated
/// against the *measured* signal power so the realized SNR matches
/// `snr_db`. An all-zero signal passes through unchanged.
pub fn apply_channel(signal: &[Complex64], ch: &ChannelSpec) -> Result<Vec<Complex64>> {
    ch.validate()?;
    if signal.is_empty() {
        return Err(Error::contract("signal must not be empty"));
    }
    let gain = 10f64.powf(ch.gain_db / 20.0);
    let mut out: Vec<Complex64> = signal.iter().map(|v| v * gain).collect();
    if ch.snr_db.is_finite() {
        let power: f64 = out.iter().map(|v| v.norm_sqr()).sum::<f64>() / out.len() as f64;
        if power > 0.0 {
            let noise_power = power / 10f64.powf(ch.snr_db / 10.0);
            let sigma = (noise_power / 2.0).sqrt();
            let mut rng = rng_from_seed(derive_seed(ch.seed, ch.day_tag as u64));
            for v in out.iter_mut() {
                let n_re: f64 = StandardNormal.sample(&mut rng);
                let n_im: f64 = StandardNormal.sample(&mut rng);
                *v += Complex64::new(n_re * sigma, n_im * sigma);
            }
        }
    }
    Ok(out)
}
