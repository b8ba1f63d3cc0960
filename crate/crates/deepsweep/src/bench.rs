//! Latency benchmarking: per-chunk classifier latency, whole-sweep latency
//! against the capture budget, and a deep-CNN baseline for speedup numbers.
//!
//! All measurements run the real inference path on fixed random inputs and
//! verify on the side that repeated forwards are bit-identical and resident
//! memory stays flat — a benchmark that silently computes different numbers
//! each repetition measures nothing.

use serde::{Deserialize, Serialize};
use std::io::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::nn::{
    build_reference_model, Activation, Conv1d, Dense, Layer, MaxPool1d, Model, ModelMeta,
    Normalization, Padding, Tensor,
};
use crate::pipeline::{SweepBreakdown, SweepConfig, Sweeper};
use crate::rng::{derive_seed, rng_from_seed};
use rand::Rng;

/// Wall-clock span of one capture: `n_time / sample_rate`.
pub fn capture_time(n_time: usize, sample_rate_hz: f64) -> Duration {
    Duration::from_secs_f64(n_time as f64 / sample_rate_hz)
}

/// Nearest-rank percentile of an ascending-sorted slice (`q` in (0, 1]).
pub fn percentile(sorted_ascending: &[f64], q: f64) -> f64 {
    assert!(!sorted_ascending.is_empty() && q > 0.0 && q <= 1.0);
    let rank = (q * sorted_ascending.len() as f64).ceil() as usize;
    sorted_ascending[rank.max(1) - 1]
}

/// Summarize latency samples (microseconds).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub input_bins: usize,
    pub batch: usize,
    pub repetitions: usize,
    pub mean_us: f64,
    pub p50_us: f64,
    pub p95_us: f64,
    pub min_us: f64,
    pub max_us: f64,
}

impl LatencyStats {
    fn from_samples(input_bins: usize, batch: usize, mut samples_us: Vec<f64>) -> Self {
        let repetitions = samples_us.len();
        let mean_us = samples_us.iter().sum::<f64>() / repetitions as f64;
        samples_us.sort_by(|a, b| a.partial_cmp(b).unwrap());
        LatencyStats {
            input_bins,
            batch,
            repetitions,
            mean_us,
            p50_us: percentile(&samples_us, 0.50),
            p95_us: percentile(&samples_us, 0.95),
            min_us: samples_us[0],
            max_us: samples_us[repetitions - 1],
        }
    }
}

/// Resident set size in bytes, from `/proc/self/statm`. `None` where the
/// proc filesystem is unavailable.
pub fn current_rss_bytes() -> Option<u64> {
    let text = std::fs::read_to_string("/proc/self/statm").ok()?;
    let pages: u64 = text.split_whitespace().nth(1)?.parse().ok()?;
    Some(pages * 4096)
}

const RSS_GROWTH_LIMIT_BYTES: u64 = 64 << 20;

/// Time repeated inference forwards of `model` on one fixed random batch.
///
/// Every repetition must produce bit-identical outputs, and resident memory
/// must not grow materially across the run; either failure is an error
/// rather than a wrong number.
pub fn measure_latency(
    model: &Model,
    batch: usize,
    repetitions: usize,
    seed: u64,
) -> Result<LatencyStats> {
    if batch == 0 || repetitions == 0 {
        return Err(Error::contract("latency runs need batch >= 1 and repetitions >= 1"));
    }
    let len = model.meta.input_len;
    let mut rng = rng_from_seed(seed);
    let data: Vec<f32> = (0..batch * model.meta.in_channels * len)
        .map(|_| rng.random_range(-1.0f32..1.0))
        .collect();
    let input = Tensor::from_vec(&[batch, model.meta.in_channels, len], data)?;

    let reference = model.forward(&input)?;
    for _ in 0..9 {
        model.forward(&input)?; // warmup
    }
    let rss_before = current_rss_bytes();

    let mut samples_us = Vec::with_capacity(repetitions);
    for rep in 0..repetitions {
        let t0 = Instant::now();
        let out = model.forward(&input)?;
        samples_us.push(t0.elapsed().as_secs_f64() * 1e6);
        if out.data() != reference.data() {
            return Err(Error::contract(format!(
                "inference is not deterministic: repetition {rep} diverged"
            )));
        }
    }
    if let (Some(before), Some(after)) = (rss_before, current_rss_bytes()) {
        if after > before + RSS_GROWTH_LIMIT_BYTES {
            return Err(Error::contract(format!(
                "resident memory grew {} -> {} bytes during the latency run",
                before, after
            )));
        }
    }
    Ok(LatencyStats::from_samples(len, batch, samples_us))
}

/// Time whole sweeps (segment FFTs, partition, batched classification,
/// combining) of random captures through a `Sweeper`. Also returns the
/// median per-stage breakdown, which must account for nearly all of the
/// end-to-end time — a sweep spending time outside its own stages has a
/// latency bookkeeping bug.
pub fn measure_sweep_latency(
    cfg: &SweepConfig,
    model: Arc<Model>,
    repetitions: usize,
    seed: u64,
) -> Result<(LatencyStats, SweepBreakdown)> {
    if repetitions == 0 {
        return Err(Error::contract("latency runs need repetitions >= 1"));
    }
    let sweeper = Sweeper::new(cfg.clone(), model)?;
    let mut rng = rng_from_seed(seed);
    let capture: Vec<num_complex::Complex64> = (0..cfg.n_time)
        .map(|_| {
            num_complex::Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
        .collect();
    for _ in 0..repetitions.min(10) {
        sweeper.process(&capture, 0)?; // warmup
    }
    let mut samples_us = Vec::with_capacity(repetitions);
    let mut fft = Vec::with_capacity(repetitions);
    let mut classify = Vec::with_capacity(repetitions);
    let mut comb = Vec::with_capacity(repetitions);
    for rep in 0..repetitions {
        let (report, breakdown) = sweeper.process_instrumented(&capture, rep as u64)?;
        samples_us.push(report.latency_us);
        fft.push(breakdown.fft_us);
        classify.push(breakdown.classify_us);
        comb.push(breakdown.combine_us);
    }
    let median = |mut v: Vec<f64>| {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        percentile(&v, 0.50)
    };
    let breakdown = SweepBreakdown {
        fft_us: median(fft),
        classify_us: median(classify),
        combine_us: median(comb),
    };
    Ok((LatencyStats::from_samples(cfg.n_fft, cfg.g, samples_us), breakdown))
}

fn uniform_init(rng: &mut rand_chacha::ChaCha8Rng, fan_in: usize, n: usize) -> Vec<f32> {
    let limit = (6.0 / fan_in as f64).sqrt() as f32;
    (0..n).map(|_| rng.random_range(-limit..limit)).collect()
}

/// A deep CNN of the size commonly used for modulation/interference
/// recognition, as the latency baseline: eight conv layers (32→256
/// filters, halving length after each pair) and two 512-wide dense layers.
pub fn build_baseline_model(input_len: usize, num_classes: usize, seed: u64) -> Result<Model> {
    if input_len < 16 {
        return Err(Error::config(format!(
            "baseline model needs input_len >= 16, got {input_len}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut layers = Vec::new();
    let mut channels = 2usize;
    let mut len = input_len;
    for &filters in &[32usize, 64, 128, 256] {
        for _ in 0..2 {
            let fan_in = channels * 3;
            layers.push(Layer::Conv1d(Conv1d {
                in_channels: channels,
                out_channels: filters,
                kernel: 3,
                padding: Padding::Same,
                activation: Activation::Relu,
                weights: uniform_init(&mut rng, fan_in, filters * fan_in),
                bias: vec![0.0; filters],
            }));
            channels = filters;
        }
        layers.push(Layer::MaxPool1d(MaxPool1d { window: 2, stride: 2 }));
        len = (len - 2) / 2 + 1;
    }
    layers.push(Layer::Flatten);
    let mut features = channels * len;
    for _ in 0..2 {
        layers.push(Layer::Dense(Dense {
            in_features: features,
            out_features: 512,
            activation: Activation::Relu,
            weights: uniform_init(&mut rng, features, 512 * features),
            bias: vec![0.0; 512],
        }));
        features = 512;
    }
    layers.push(Layer::Dense(Dense {
        in_features: features,
        out_features: num_classes,
        activation: Activation::Linear,
        weights: uniform_init(&mut rng, features, num_classes * features),
        bias: vec![0.0; num_classes],
    }));
    layers.push(Layer::Softmax);
    let model = Model {
        meta: ModelMeta {
            input_len,
            in_channels: 2,
            num_classes,
            normalization: Normalization::MaxAbs,
        },
        layers,
    };
    model.validate()?;
    Ok(model)
}

/// One model's latency line for bench.csv.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub model: String,
    pub input_bins: usize,
    pub batch: usize,
    pub p50_us: f64,
    pub p95_us: f64,
    pub mean_us: f64,
}

impl BenchRow {
    pub fn from_stats(model: impl Into<String>, stats: &LatencyStats) -> Self {
        BenchRow {
            model: model.into(),
            input_bins: stats.input_bins,
            batch: stats.batch,
            p50_us: stats.p50_us,
            p95_us: stats.p95_us,
            mean_us: stats.mean_us,
        }
    }
}

pub fn write_bench_csv(rows: &[BenchRow], path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "model,input_bins,batch,p50_us,p95_us,mean_us")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{:.3},{:.3},{:.3}",
            r.model, r.input_bins, r.batch, r.p50_us, r.p95_us, r.mean_us
        )?;
    }
    Ok(())
}

/// One chunking's latency picture against the real-time budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealtimeRow {
    pub g: usize,
    pub chunk_bins: usize,
    pub num_classes: usize,
    pub reference_params: usize,
    pub baseline_params: usize,
    /// Reference classifier, one chunk, batch 1.
    pub chunk_p50_us: f64,
    /// Deep baseline, one chunk, batch 1.
    pub baseline_chunk_p50_us: f64,
    pub speedup: f64,
    /// Whole sweep: all segment FFTs + batched classification + combine.
    pub sweep_p50_us: f64,
    pub sweep_p95_us: f64,
    pub capture_us: f64,
    /// Whether the sweep p95 fits within one capture interval.
    pub meets_budget: bool,
}

/// Real-time characterization of every supported chunking: the budget table
/// plus per-model latency lines for bench.csv.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealtimeReport {
    pub rows: Vec<RealtimeRow>,
    pub bench: Vec<BenchRow>,
}

/// Measure every supported chunking with freshly initialized models.
/// Latency depends on shapes, not trained weights, so no training is
/// needed to characterize the pipeline.
pub fn realtime_report(repetitions: usize, seed: u64) -> Result<RealtimeReport> {
    let mut rows = Vec::new();
    let mut bench = Vec::new();
    for &g in &[1usize, 2, 4, 8] {
        let cfg = SweepConfig { g, ..SweepConfig::default() };
        cfg.validate()?;
        let chunk_bins = cfg.chunk_len();
        let subcarriers = 64 / g; // OFDM grid split across chunks
        let num_classes = subcarriers + 1;
        let reference = build_reference_model(chunk_bins, num_classes, derive_seed(seed, g as u64))?;
        let baseline =
            build_baseline_model(chunk_bins, num_classes, derive_seed(seed, 0x100 + g as u64))?;
        let chunk = measure_latency(&reference, 1, repetitions, derive_seed(seed, 0x200))?;
        let base = measure_latency(&baseline, 1, repetitions, derive_seed(seed, 0x201))?;
        bench.push(BenchRow::from_stats("reference", &chunk));
        bench.push(BenchRow::from_stats("baseline", &base));
        let reference_params = reference.param_count();
        let baseline_params = baseline.param_count();
        let (sweep, _) =
            measure_sweep_latency(&cfg, Arc::new(reference), repetitions, derive_seed(seed, 0x202))?;
        let capture_us = capture_time(cfg.n_time, cfg.sample_rate_hz).as_secs_f64() * 1e6;
        rows.push(RealtimeRow {
            g,
            chunk_bins,
            num_classes,
            reference_params,
            baseline_params,
            chunk_p50_us: chunk.p50_us,
            baseline_chunk_p50_us: base.p50_us,
            speedup: base.p50_us / chunk.p50_us,
            sweep_p50_us: sweep.p50_us,
            sweep_p95_us: sweep.p95_us,
            capture_us,
            meets_budget: sweep.p95_us < capture_us,
        });
    }
    Ok(RealtimeReport { rows, bench })
}

pub fn write_realtime_csv(rows: &[RealtimeRow], path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        w,
        "g,chunk_bins,num_classes,reference_params,baseline_params,chunk_p50_us,\
         baseline_chunk_p50_us,speedup,sweep_p50_us,sweep_p95_us,capture_us,meets_budget"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{:.3},{:.3},{:.2},{:.3},{:.3},{:.3},{}",
            r.g,
            r.chunk_bins,
            r.num_classes,
            r.reference_params,
            r.baseline_params,
            r.chunk_p50_us,
            r.baseline_chunk_p50_us,
            r.speedup,
            r.sweep_p50_us,
            r.sweep_p95_us,
            r.capture_us,
            r.meets_budget
        )?;
    }
    Ok(())
}
