//! Independent oracles for the acceptance suite.
//!
//! Everything here recomputes an answer by a different method than the code
//! under test: an O(n^2) DFT for the FFT, a double-precision mirror of the
//! network plus central finite differences for the gradients, a sequential
//! replay of the queue event log for the streaming counters, and byte-level
//! file comparisons for persistence.

use std::f64::consts::TAU;
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use deepsweep::dataset::{build_dataset, load_dataset, meta_path, write_dataset, DatasetSpec};
use deepsweep::nn::{
    build_model, save_weights, load_weights, Activation, Layer, Model, ModelConfig, Padding,
    Tensor,
};
use deepsweep::rng::rng_from_seed;
use deepsweep::stream::{
    captures_for_duration, expected_stream_checksum, run_stream, CaptureGenerator, Pacing,
    ReplaySummary, StreamConfig, StreamSource, StreamStats,
};
use deepsweep::synth::{generate_ofdm_burst, OfdmConfig};
use deepsweep::pipeline::SweepConfig;
use deepsweep::{Complex64, Error};

use rand::Rng;

// ---------------------------------------------------------------------------
// FFT oracle
// ---------------------------------------------------------------------------

/// Direct O(n^2) DFT, the textbook sum, all in f64.
pub fn dft(input: &[Complex64]) -> Vec<Complex64> {
    let n = input.len();
    (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &x) in input.iter().enumerate() {
                let angle = -TAU * (j as f64) * (k as f64) / (n as f64);
                acc += x * Complex64::new(angle.cos(), angle.sin());
            }
            acc
        })
        .collect()
}

/// Test inputs: seeded noise, a unit impulse off the origin, a pure tone.
pub fn fft_case(n: usize, case: usize) -> Vec<Complex64> {
    match case {
        0 => {
            let mut rng = rng_from_seed(1000 + n as u64);
            (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect()
        }
        1 => {
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            v[n.min(2) - 1] = Complex64::new(1.0, -0.5);
            v
        }
        _ => (0..n)
            .map(|j| {
                let angle = TAU * (j as f64) / (n as f64);
                Complex64::new(angle.cos(), angle.sin())
            })
            .collect(),
    }
}

/// Worst per-bin relative error, with tiny bins compared against a floor of
/// 1e-3 of the largest magnitude so exact zeros do not divide by zero.
pub fn max_rel_error(got: &[Complex64], want: &[Complex64]) -> f64 {
    assert_eq!(got.len(), want.len());
    let peak = want.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let floor = (peak * 1e-3).max(f64::MIN_POSITIVE);
    got.iter()
        .zip(want)
        .map(|(g, w)| (g - w).norm() / w.norm().max(floor))
        .fold(0.0, f64::max)
}

/// A real OFDM capture for energy-conservation checks.
pub fn synthetic_capture(n: usize, seed: u64) -> Vec<Complex64> {
    let cfg = OfdmConfig::default();
    let symbols = n / (cfg.fft_size + cfg.cp_len) + 1;
    let mut burst = generate_ofdm_burst(&cfg, symbols, seed).expect("burst synthesizes");
    burst.truncate(n);
    burst
}

// ---------------------------------------------------------------------------
// Gradient oracle: f64 mirror of the forward pass + central differences
// ---------------------------------------------------------------------------

pub struct GradCheck {
    pub max_rel: f64,
    pub worst_location: String,
    pub loss_rel: f64,
    pub n_params: usize,
}

enum Shape {
    Spatial(usize, usize),
    Flat(usize),
}

/// Forward pass and cross-entropy loss recomputed entirely in f64 against
/// a parameter vector owned by the caller. Follows the exact same
/// specification as the f32 implementation (same padding, first-maximum
/// pooling ties, probability floor) but shares none of its code.
fn mirror_loss(
    layers: &[Layer],
    params: &[Vec<f64>],
    input: &[f64],
    batch: usize,
    labels: &[usize],
) -> f64 {
    let mut cur = input.to_vec();
    let mut shape = Shape::Spatial(2, cur.len() / (batch * 2));
    let mut block = 0usize;
    for layer in layers {
        match layer {
            Layer::Conv1d(conv) => {
                let Shape::Spatial(c, l) = shape else {
                    panic!("conv needs a spatial input")
                };
                assert!(matches!(conv.padding, Padding::Same));
                assert_eq!(c, conv.in_channels);
                let (w, b) = (&params[block], &params[block + 1]);
                block += 2;
                let pad = (conv.kernel - 1) / 2;
                let oc_n = conv.out_channels;
                let mut out = vec![0.0f64; batch * oc_n * l];
                for bi in 0..batch {
                    for oc in 0..oc_n {
                        for o in 0..l {
                            let mut acc = b[oc];
                            for ic in 0..c {
                                for k in 0..conv.kernel {
                                    let xi = o as isize + k as isize - pad as isize;
                                    if xi >= 0 && (xi as usize) < l {
                                        acc += w[(oc * c + ic) * conv.kernel + k]
                                            * cur[(bi * c + ic) * l + xi as usize];
                                    }
                                }
                            }
                            if matches!(conv.activation, Activation::Relu) {
                                acc = acc.max(0.0);
                            }
                            out[(bi * oc_n + oc) * l + o] = acc;
                        }
                    }
                }
                cur = out;
                shape = Shape::Spatial(oc_n, l);
            }
            Layer::MaxPool1d(pool) => {
                let Shape::Spatial(c, l) = shape else {
                    panic!("pool needs a spatial input")
                };
                let ol = (l - pool.window) / pool.stride + 1;
                let mut out = vec![0.0f64; batch * c * ol];
                for row in 0..batch * c {
                    for o in 0..ol {
                        let start = o * pool.stride;
                        let mut best = cur[row * l + start];
                        for i in 1..pool.window {
                            let v = cur[row * l + start + i];
                            if v > best {
                                best = v;
                            }
                        }
                        out[row * ol + o] = best;
                    }
                }
                cur = out;
                shape = Shape::Spatial(c, ol);
            }
            Layer::Flatten => {
                let Shape::Spatial(c, l) = shape else {
                    panic!("flatten needs a spatial input")
                };
                shape = Shape::Flat(c * l);
            }
            Layer::Dense(dense) => {
                let Shape::Flat(f) = shape else {
                    panic!("dense needs a flat input")
                };
                assert_eq!(f, dense.in_features);
                let (w, b) = (&params[block], &params[block + 1]);
                block += 2;
                let of = dense.out_features;
                let mut out = vec![0.0f64; batch * of];
                for bi in 0..batch {
                    for o in 0..of {
                        let mut acc = b[o];
                        for i in 0..f {
                            acc += w[o * f + i] * cur[bi * f + i];
                        }
                        if matches!(dense.activation, Activation::Relu) {
                            acc = acc.max(0.0);
                        }
                        out[bi * of + o] = acc;
                    }
                }
                cur = out;
                shape = Shape::Flat(of);
            }
            Layer::Dropout(drop) => {
                assert_eq!(drop.rate, 0.0, "the gradcheck model must not drop units");
            }
            Layer::Softmax => {
                let Shape::Flat(f) = shape else {
                    panic!("softmax needs a flat input")
                };
                for bi in 0..batch {
                    let row = &mut cur[bi * f..][..f];
                    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let mut sum = 0.0f64;
                    for v in row.iter_mut() {
                        *v = (*v - max).exp();
                        sum += *v;
                    }
                    for v in row.iter_mut() {
                        *v /= sum;
                    }
                }
            }
        }
    }
    let Shape::Flat(f) = shape else {
        panic!("network must end flat")
    };
    let mut loss = 0.0f64;
    for (bi, &label) in labels.iter().enumerate() {
        loss -= cur[bi * f + label].max(1e-12).ln();
    }
    loss / batch as f64
}

/// Check every analytic parameter gradient against central finite
/// differences of the f64 mirror. The model's own f32 parameters promote
/// exactly to f64, and the +/- h perturbations happen in f64, so the only
/// noise in the numeric gradient is the O(h^2) truncation term.
pub fn gradient_check() -> GradCheck {
    let cfg = ModelConfig {
        dropout_rate: 0.0,
        ..ModelConfig::default()
    };
    let model = build_model(&cfg, 32, 9, 11).expect("gradcheck model builds");
    let batch = 4usize;
    let labels = [0usize, 3, 5, 8];

    let mut rng = rng_from_seed(12);
    let data: Vec<f32> = (0..batch * 2 * 32)
        .map(|_| rng.random_range(-1.0f32..1.0))
        .collect();
    let x = Tensor::from_vec(&[batch, 2, 32], data.clone()).expect("input tensor");
    let x64: Vec<f64> = data.iter().map(|&v| v as f64).collect();

    // Analytic gradients from the implementation under test.
    let tape = model.forward_train(&x, &mut rng).expect("forward");
    let (loss32, grads) = model.backward(&tape, &labels).expect("backward");

    // Exact f64 copies of the parameters for the mirror.
    let mut params: Vec<Vec<f64>> = model
        .param_blocks()
        .iter()
        .map(|b| b.iter().map(|&v| v as f64).collect())
        .collect();
    assert_eq!(params.len(), grads.blocks.len());

    let mirror_base = mirror_loss(&model.layers, &params, &x64, batch, &labels);
    let loss_rel = (loss32 - mirror_base).abs() / loss32.abs().max(1.0);

    let h = 1e-4f64;
    let n_params: usize = params.iter().map(|b| b.len()).sum();
    let mut numeric: Vec<Vec<f64>> = params.iter().map(|b| vec![0.0; b.len()]).collect();
    for bi in 0..params.len() {
        for i in 0..params[bi].len() {
            let orig = params[bi][i];
            params[bi][i] = orig + h;
            let up = mirror_loss(&model.layers, &params, &x64, batch, &labels);
            params[bi][i] = orig - h;
            let down = mirror_loss(&model.layers, &params, &x64, batch, &labels);
            params[bi][i] = orig;
            numeric[bi][i] = (up - down) / (2.0 * h);
        }
    }

    let gmax = numeric
        .iter()
        .flatten()
        .map(|v| v.abs())
        .fold(0.0f64, f64::max);
    let mut max_rel = 0.0f64;
    let mut worst_location = String::from("none");
    for (bi, (analytic, num)) in grads.blocks.iter().zip(&numeric).enumerate() {
        assert_eq!(analytic.len(), num.len(), "gradient block {bi} size");
        for (i, (&ga, &gn)) in analytic.iter().zip(num).enumerate() {
            let denom = gn.abs().max(1e-2 * gmax).max(1e-12);
            let rel = (ga as f64 - gn).abs() / denom;
            if rel > max_rel {
                max_rel = rel;
                worst_location = format!(
                    "block {bi} index {i} (analytic {ga:.6e}, numeric {gn:.6e})"
                );
            }
        }
    }

    GradCheck {
        max_rel,
        worst_location,
        loss_rel,
        n_params,
    }
}

/// Largest |row sum - 1| over softmax outputs on a random batch.
pub fn worst_softmax_row_error(model: &Model, batch: usize, seed: u64) -> f64 {
    let mut rng = rng_from_seed(seed);
    let len = model.meta.input_len;
    let data: Vec<f32> = (0..batch * model.meta.in_channels * len)
        .map(|_| rng.random_range(-4.0f32..4.0))
        .collect();
    let x = Tensor::from_vec(&[batch, model.meta.in_channels, len], data).expect("input");
    let probs = model.forward(&x).expect("forward");
    let classes = model.meta.num_classes;
    (0..batch)
        .map(|bi| {
            let sum: f64 = probs.data()[bi * classes..][..classes]
                .iter()
                .map(|&p| p as f64)
                .sum();
            (sum - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Streaming oracle
// ---------------------------------------------------------------------------

pub struct StreamOutcome {
    pub stats: StreamStats,
    pub expected_captures: u64,
    pub expected_checksum: u64,
    pub replay: Result<ReplaySummary, Error>,
    pub report_ids: Vec<u64>,
    pub wall: Duration,
}

/// One simulated second of 10 Msps traffic with the sensing worker slowed
/// to 10x the capture interval, so its bounded queue must shed load while
/// the decode path keeps every sample.
pub fn overloaded_stream_run() -> StreamOutcome {
    let sweep = SweepConfig::default();
    let n_captures = captures_for_duration(1.0, &sweep).expect("capture count");
    let cfg = StreamConfig {
        sweep,
        n_captures,
        pacing: Pacing::Realtime,
        decode_capacity: 64,
        sense_capacity: 8,
        sense_min_service: Some(Duration::from_micros(1024)),
        seed: 9,
        log_sense_events: true,
    };
    let source = StreamSource::Synthetic {
        jam_subcarrier: Some(12),
        snr_db: 20.0,
        power_db_rel: 10.0,
    };
    let model = Arc::new(build_model(&ModelConfig::default(), 32, 9, 1).expect("model"));

    let mut report_ids = Vec::new();
    let t0 = Instant::now();
    let stats = run_stream(&cfg, &source, model, |report| {
        report_ids.push(report.capture_id);
    })
    .expect("stream runs");
    let wall = t0.elapsed();

    let generator = CaptureGenerator::new(&source, &cfg).expect("generator");
    let expected_checksum =
        expected_stream_checksum(&generator, n_captures).expect("checksum oracle");
    let replay = match &stats.sense_events {
        Some(events) => deepsweep::stream::replay_events(
            events,
            cfg.sense_capacity,
            deepsweep::stream::OverflowPolicy::DropOldest,
        ),
        None => Err(Error::contract("no sense event log was recorded")),
    };

    StreamOutcome {
        stats,
        expected_captures: n_captures,
        expected_checksum,
        replay,
        report_ids,
        wall,
    }
}

// ---------------------------------------------------------------------------
// Persistence oracle
// ---------------------------------------------------------------------------

struct Scratch {
    dir: PathBuf,
}

impl Scratch {
    fn new() -> Self {
        let dir = std::env::temp_dir().join(format!(
            "deepsweep-acceptance-{}",
            std::process::id()
        ));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).expect("scratch dir");
        Scratch { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.dir);
    }
}

fn is_format(e: &Error) -> bool {
    matches!(e, Error::Format(_))
}

fn check<F: FnOnce() -> std::result::Result<String, String>>(
    violations: &mut Vec<String>,
    what: &str,
    run: F,
) {
    if let Err(detail) = run() {
        violations.push(format!("{what}: {detail}"));
    }
}

/// Exercise every persistence guarantee and return the violations.
pub fn persistence_violations() -> Vec<String> {
    let scratch = Scratch::new();
    let mut violations = Vec::new();

    // --- Dataset round trip, main file and sidecar, bit for bit. ---
    let a = scratch.path("a.bin");
    let b = scratch.path("b.bin");
    let spec = DatasetSpec::chunk8(21);
    build_dataset(&spec, 36, &a, "chunk8").expect("dataset writes");
    let loaded = load_dataset(&a).expect("dataset loads");
    write_dataset(&b, &loaded.header, &loaded.records, loaded.meta.as_ref())
        .expect("dataset rewrites");
    check(&mut violations, "dataset round trip", || {
        let (ba, bb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
        if ba != bb {
            return Err(format!("main files differ ({} vs {} bytes)", ba.len(), bb.len()));
        }
        let (ma, mb) = (
            fs::read(meta_path(&a)).unwrap(),
            fs::read(meta_path(&b)).unwrap(),
        );
        if ma != mb {
            return Err("sidecar files differ".into());
        }
        Ok(String::new())
    });

    // --- Weights round trip, bit for bit. ---
    let w1 = scratch.path("w1.json");
    let w2 = scratch.path("w2.json");
    let model = build_model(&ModelConfig::default(), 32, 9, 5).expect("model");
    save_weights(&model, &w1).expect("weights save");
    let reloaded = load_weights(&w1).expect("weights load");
    save_weights(&reloaded, &w2).expect("weights resave");
    check(&mut violations, "weights round trip", || {
        if fs::read(&w1).unwrap() != fs::read(&w2).unwrap() {
            return Err("weight files differ after a load/save cycle".into());
        }
        if reloaded != model {
            return Err("reloaded model is not equal to the saved one".into());
        }
        Ok(String::new())
    });

    // --- Corrupted and truncated inputs fail with typed errors. ---
    let full = fs::read(&a).unwrap();

    let short = scratch.path("short.bin");
    fs::write(&short, &full[..10]).unwrap();
    check(&mut violations, "10-byte dataset", || {
        match load_dataset(&short) {
            Err(e) if is_format(&e) => Ok(String::new()),
            Err(e) => Err(format!("wrong error type: {e}")),
            Ok(_) => Err("loaded successfully".into()),
        }
    });

    let clipped = scratch.path("clipped.bin");
    fs::write(&clipped, &full[..full.len() - 5]).unwrap();
    check(&mut violations, "truncated dataset", || {
        match load_dataset(&clipped) {
            Err(e) if is_format(&e) || matches!(e, Error::Io(_)) => Ok(String::new()),
            Err(e) => Err(format!("wrong error type: {e}")),
            Ok(_) => Err("loaded successfully".into()),
        }
    });

    let wrong_magic = scratch.path("magic.bin");
    let mut flipped = full.clone();
    flipped[0] ^= 0xff;
    fs::write(&wrong_magic, &flipped).unwrap();
    check(&mut violations, "wrong dataset magic", || {
        match load_dataset(&wrong_magic) {
            Err(e) if is_format(&e) => Ok(String::new()),
            Err(e) => Err(format!("wrong error type: {e}")),
            Ok(_) => Err("loaded successfully".into()),
        }
    });

    let empty_json = scratch.path("empty.json");
    fs::write(&empty_json, b"{}").unwrap();
    check(&mut violations, "empty weights object", || {
        match load_weights(&empty_json) {
            Err(e) if is_format(&e) => Ok(String::new()),
            Err(e) => Err(format!("wrong error type: {e}")),
            Ok(_) => Err("loaded successfully".into()),
        }
    });

    let cut_json = scratch.path("cut.json");
    let wbytes = fs::read(&w1).unwrap();
    fs::write(&cut_json, &wbytes[..wbytes.len() / 2]).unwrap();
    check(&mut violations, "truncated weights", || {
        match load_weights(&cut_json) {
            Err(e) if is_format(&e) => Ok(String::new()),
            Err(e) => Err(format!("wrong error type: {e}")),
            Ok(_) => Err("loaded successfully".into()),
        }
    });

    check(&mut violations, "missing file", || {
        match load_weights(&scratch.path("nope.json")) {
            Err(Error::Io(_)) => Ok(String::new()),
            Err(e) => Err(format!("wrong error type: {e}")),
            Ok(_) => Err("loaded successfully".into()),
        }
    });

    // --- Failed writes leave no partial state. ---
    check(&mut violations, "save into a missing directory", || {
        let target = scratch.path("no-such-dir").join("w.json");
        match save_weights(&model, &target) {
            Err(Error::Io(_)) if !target.exists() => Ok(String::new()),
            Err(Error::Io(_)) => Err("left a file behind".into()),
            Err(e) => Err(format!("wrong error type: {e}")),
            Ok(_) => Err("saved into a directory that does not exist".into()),
        }
    });

    check(&mut violations, "non-finite weights over a good file", || {
        let before = fs::read(&w1).unwrap();
        let mut bad = model.clone();
        bad.param_blocks_mut()[0][0] = f32::NAN;
        match save_weights(&bad, &w1) {
            Err(Error::Data(_)) => {
                if fs::read(&w1).unwrap() == before {
                    Ok(String::new())
                } else {
                    Err("the existing file was modified".into())
                }
            }
            Err(e) => Err(format!("wrong error type: {e}")),
            Ok(_) => Err("non-finite weights were written".into()),
        }
    });

    check(&mut violations, "failed dataset build writes nothing", || {
        let target = scratch.path("never.bin");
        match build_dataset(&spec, 35, &target, "chunk8") {
            Err(Error::Data(_)) if !target.exists() && !meta_path(&target).exists() => {
                Ok(String::new())
            }
            Err(Error::Data(_)) => Err("left files behind".into()),
            Err(e) => Err(format!("wrong error type: {e}")),
            Ok(_) => Err("an imbalanced dataset was written".into()),
        }
    });

    // Directory check: nothing unexpected (temp siblings) appeared.
    check(&mut violations, "no stray temp files", || {
        let names: Vec<String> = fs::read_dir(&scratch.dir)
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .filter(|n| n.contains(".tmp") || n.ends_with('~'))
            .collect();
        if names.is_empty() {
            Ok(String::new())
        } else {
            Err(format!("found {names:?}"))
        }
    });

    violations
}
