//! Streaming harness: a producer mirrors every capture into a decode path
//! and a sensing path with different overflow policies.
//!
//! The decode queue blocks the producer when full — payload decoding must
//! see every sample. The sensing queue drops its oldest capture instead —
//! sensing is advisory, and a slow classifier must never stall decoding.
//! Every queue keeps exact drop accounting, and can record an event log
//! that [`replay_events`] re-checks against a sequential queue model.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::sync::{mpsc, Arc, Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use crate::bench::{capture_time, percentile};
use crate::error::{Error, Result};
use crate::nn::Model;
use crate::pipeline::{SensingReport, SweepConfig, Sweeper};
use crate::rng::derive_seed;
use crate::synth::{
    apply_channel, generate_ofdm_burst, inject_interference, ChannelSpec, InterferenceSpec,
    InterferenceWaveform, OfdmConfig,
};

/// What a bounded queue does with a push when it is full.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OverflowPolicy {
    /// Block the producer until a consumer makes room (lossless).
    BlockProducer,
    /// Evict the oldest queued item to make room (bounded staleness).
    DropOldest,
}

/// One queue operation, recorded in mutex order when logging is enabled.
/// Sequence numbers are assigned by the queue, starting at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QueueEvent {
    Push(u64),
    Drop(u64),
    Pop(u64),
}

struct QueueInner<T> {
    items: VecDeque<(u64, T)>,
    next_seq: u64,
    closed: bool,
    drop_count: u64,
    log: Option<Vec<QueueEvent>>,
}

/// A bounded MPMC queue with a fixed overflow policy and exact accounting.
pub struct BoundedQueue<T> {
    capacity: usize,
    policy: OverflowPolicy,
    inner: Mutex<QueueInner<T>>,
    not_full: Condvar,
    not_empty: Condvar,
}

impl<T> BoundedQueue<T> {
    pub fn new(capacity: usize, policy: OverflowPolicy) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::config("queue capacity must be positive"));
        }
        Ok(BoundedQueue {
            capacity,
            policy,
            inner: Mutex::new(QueueInner {
                items: VecDeque::with_capacity(capacity),
                next_seq: 0,
                closed: false,
                drop_count: 0,
                log: None,
            }),
            not_full: Condvar::new(),
            not_empty: Condvar::new(),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn policy(&self) -> OverflowPolicy {
        self.policy
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Items evicted by [`OverflowPolicy::DropOldest`] so far.
    pub fn drop_count(&self) -> u64 {
        self.inner.lock().unwrap().drop_count
    }

    /// Start recording queue events (clears any previous log).
    pub fn enable_event_log(&self) {
        self.inner.lock().unwrap().log = Some(Vec::new());
    }

    /// Stop recording and take the log, if one was enabled.
    pub fn take_event_log(&self) -> Option<Vec<QueueEvent>> {
        self.inner.lock().unwrap().log.take()
    }

    /// Enqueue an item, applying the overflow policy when full. Returns the
    /// item's sequence number. Pushing on a closed queue is an error.
    pub fn push(&self, item: T) -> Result<u64> {
        let mut inner = self.inner.lock().unwrap();
        loop {
            if inner.closed {
                return Err(Error::contract("push on a closed queue"));
            }
            if inner.items.len() < self.capacity {
                break;
            }
            match self.policy {
                OverflowPolicy::BlockProducer => {
                    inner = self.not_full.wait(inner).unwrap();
                }
                OverflowPolicy::DropOldest => {
                    let (seq, _) = inner.items.pop_front().expect("full queue has a front");
                    inner.drop_count += 1;
                    if let Some(log) = &mut inner.log {
                        log.push(QueueEvent::Drop(seq));
                    }
                    break;
                }
            }
        }
        let seq = inner.next_seq;
        inner.next_seq += 1;
        inner.items.push_back((seq, item));
        if let Some(log) = &mut inner.log {
            log.push(QueueEvent::Push(seq));
        }
        drop(inner);
        self.not_empty.notify_one();
        Ok(seq)
    }

    /// Dequeue the oldest item, blocking while the queue is empty and open.
    /// Returns `None` once the queue is closed and drained.
    pub fn pop(&self) -> Option<T> {
        let mut inner = self.inner.lock().unwrap();
        loop {
            if let Some((seq, item)) = inner.items.pop_front() {
                if let Some(log) = &mut inner.log {
                    log.push(QueueEvent::Pop(seq));
                }
                drop(inner);
                self.not_full.notify_one();
                return Some(item);
            }
            if inner.closed {
                return None;
            }
            inner = self.not_empty.wait(inner).unwrap();
        }
    }

    /// Close the queue: producers error out, consumers drain then get `None`.
    pub fn close(&self) {
        let mut inner = self.inner.lock().unwrap();
        inner.closed = true;
        drop(inner);
        self.not_full.notify_all();
        self.not_empty.notify_all();
    }
}

/// What a replayed event log did, per the sequential queue model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplaySummary {
    pub pushes: u64,
    pub drops: u64,
    /// Sequence numbers in the order consumers received them.
    pub pops: Vec<u64>,
    /// Sequence numbers still queued at the end of the log.
    pub residual: Vec<u64>,
}

/// Replay an event log against a sequential bounded-queue model and verify
/// every transition: pushes only into spare capacity, contiguous sequence
/// numbers, and drops/pops only ever taking the current head (FIFO). Any
/// deviation means the concurrent queue misbehaved.
pub fn replay_events(
    events: &[QueueEvent],
    capacity: usize,
    policy: OverflowPolicy,
) -> Result<ReplaySummary> {
    let mut queue: VecDeque<u64> = VecDeque::new();
    let mut summary = ReplaySummary {
        pushes: 0,
        drops: 0,
        pops: Vec::new(),
        residual: Vec::new(),
    };
    for (i, ev) in events.iter().enumerate() {
        match *ev {
            QueueEvent::Push(seq) => {
                if queue.len() >= capacity {
                    return Err(Error::contract(format!(
                        "event {i}: push of {seq} into a full queue"
                    )));
                }
                if seq != summary.pushes {
                    return Err(Error::contract(format!(
                        "event {i}: push sequence {seq}, expected {}",
                        summary.pushes
                    )));
                }
                queue.push_back(seq);
                summary.pushes += 1;
            }
            QueueEvent::Drop(seq) => {
                if policy == OverflowPolicy::BlockProducer {
                    return Err(Error::contract(format!(
                        "event {i}: a blocking queue logged a drop"
                    )));
                }
                match queue.pop_front() {
                    Some(head) if head == seq => summary.drops += 1,
                    other => {
                        return Err(Error::contract(format!(
                            "event {i}: drop of {seq} but queue head was {other:?}"
                        )))
                    }
                }
            }
            QueueEvent::Pop(seq) => match queue.pop_front() {
                Some(head) if head == seq => summary.pops.push(seq),
                other => {
                    return Err(Error::contract(format!(
                        "event {i}: pop of {seq} but queue head was {other:?}"
                    )))
                }
            },
        }
    }
    summary.residual = queue.into_iter().collect();
    Ok(summary)
}

/// Fan-out of one stream into a lossless decode path and a lossy sensing
/// path.
pub struct Mirror<T: Clone> {
    pub decode: Arc<BoundedQueue<T>>,
    pub sense: Arc<BoundedQueue<T>>,
}

impl<T: Clone> Mirror<T> {
    pub fn new(decode_capacity: usize, sense_capacity: usize) -> Result<Self> {
        Ok(Mirror {
            decode: Arc::new(BoundedQueue::new(
                decode_capacity,
                OverflowPolicy::BlockProducer,
            )?),
            sense: Arc::new(BoundedQueue::new(sense_capacity, OverflowPolicy::DropOldest)?),
        })
    }

    /// Publish one item to both paths. The sensing copy goes first because
    /// it can never block; the decode push may wait for the decoder.
    pub fn publish(&self, item: T) -> Result<()> {
        self.sense.push(item.clone())?;
        self.decode.push(item)?;
        Ok(())
    }

    pub fn close(&self) {
        self.sense.close();
        self.decode.close();
    }
}

/// How the producer paces captures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pacing {
    /// One capture per real capture interval (`n_time / sample_rate`).
    Realtime,
    /// As fast as the mirror accepts them.
    MaxRate,
}

/// Where the stream's samples come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StreamSource {
    /// Continuously synthesized OFDM traffic, optionally jammed on one
    /// subcarrier, over a noisy channel.
    Synthetic {
        jam_subcarrier: Option<i32>,
        snr_db: f64,
        power_db_rel: f64,
    },
    /// Little-endian f32 I/Q pairs replayed from a file, wrapping around.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamConfig {
    pub sweep: SweepConfig,
    pub n_captures: u64,
    pub pacing: Pacing,
    pub decode_capacity: usize,
    pub sense_capacity: usize,
    /// Artificial minimum service time per sensed capture, for overload
    /// experiments (a 10× slowdown of the sensing worker, say).
    pub sense_min_service: Option<Duration>,
    pub seed: u64,
    /// Record the sensing queue's event log into the returned stats.
    pub log_sense_events: bool,
}

impl Default for StreamConfig {
    fn default() -> Self {
        StreamConfig {
            sweep: SweepConfig::default(),
            n_captures: 1000,
            pacing: Pacing::Realtime,
            decode_capacity: 64,
            sense_capacity: 8,
            sense_min_service: None,
            seed: 0,
            log_sense_events: false,
        }
    }
}

impl StreamConfig {
    pub fn validate(&self) -> Result<()> {
        self.sweep.validate()?;
        if self.n_captures == 0 {
            return Err(Error::config("stream needs at least one capture"));
        }
        if self.decode_capacity == 0 || self.sense_capacity == 0 {
            return Err(Error::config("queue capacities must be positive"));
        }
        Ok(())
    }

    pub fn capture_interval(&self) -> Duration {
        capture_time(self.sweep.n_time, self.sweep.sample_rate_hz)
    }
}

/// Captures needed to cover `duration_s` at the configured capture rate.
pub fn captures_for_duration(duration_s: f64, sweep: &SweepConfig) -> Result<u64> {
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(Error::config(format!(
            "stream duration must be positive seconds, got {duration_s}"
        )));
    }
    let interval = capture_time(sweep.n_time, sweep.sample_rate_hz).as_secs_f64();
    Ok((duration_s / interval).ceil() as u64)
}

/// One mirrored capture. Samples are shared, not copied, between paths.
#[derive(Debug, Clone)]
pub struct Capture {
    pub id: u64,
    pub samples: Arc<Vec<Complex64>>,
}

const SRC_BURST: u64 = 0x53_42_53;
const SRC_JAM: u64 = 0x53_4a_53;
const SRC_CHAN: u64 = 0x53_43_53;

/// Deterministic per-capture sample source: capture `id` depends only on
/// the configuration and seed, so a stream can be re-generated exactly.
pub enum CaptureGenerator {
    Synthetic {
        ofdm: OfdmConfig,
        jam: Option<InterferenceSpec>,
        snr_db: f64,
        n_time: usize,
        burst_base: u64,
        jam_base: u64,
        chan_base: u64,
    },
    Replay {
        samples: Vec<Complex64>,
        n_time: usize,
    },
}

impl CaptureGenerator {
    pub fn new(source: &StreamSource, cfg: &StreamConfig) -> Result<Self> {
        cfg.validate()?;
        match source {
            StreamSource::Synthetic {
                jam_subcarrier,
                snr_db,
                power_db_rel,
            } => {
                if snr_db.is_nan() {
                    return Err(Error::config("stream SNR must not be NaN"));
                }
                let ofdm = OfdmConfig::default();
                let jam = match jam_subcarrier {
                    None => None,
                    Some(k) => {
                        let spec = InterferenceSpec {
                            target_subcarrier: Some(*k),
                            waveform: InterferenceWaveform::Tone,
                            bandwidth_hz: ofdm.subcarrier_spacing_hz(),
                            power_db_rel: *power_db_rel,
                            candidate_set: vec![*k],
                        };
                        spec.validate(&ofdm)?;
                        Some(spec)
                    }
                };
                Ok(CaptureGenerator::Synthetic {
                    ofdm,
                    jam,
                    snr_db: *snr_db,
                    n_time: cfg.sweep.n_time,
                    burst_base: derive_seed(cfg.seed, SRC_BURST),
                    jam_base: derive_seed(cfg.seed, SRC_JAM),
                    chan_base: derive_seed(cfg.seed, SRC_CHAN),
                })
            }
            StreamSource::File(path) => {
                let samples = read_iq_file(path)?;
                Ok(CaptureGenerator::Replay {
                    samples,
                    n_time: cfg.sweep.n_time,
                })
            }
        }
    }

    pub fn generate(&self, id: u64) -> Result<Vec<Complex64>> {
        match self {
            CaptureGenerator::Synthetic {
                ofdm,
                jam,
                snr_db,
                n_time,
                burst_base,
                jam_base,
                chan_base,
            } => {
                let n_symbols = n_time.div_ceil(ofdm.symbol_len());
                let mut signal = generate_ofdm_burst(ofdm, n_symbols, derive_seed(*burst_base, id))?;
                signal.truncate(*n_time);
                if let Some(spec) = jam {
                    signal = inject_interference(&signal, spec, ofdm, derive_seed(*jam_base, id))?;
                }
                let channel = ChannelSpec {
                    snr_db: *snr_db,
                    gain_db: 0.0,
                    seed: derive_seed(*chan_base, id),
                    day_tag: 0,
                };
                apply_channel(&signal, &channel)
            }
            CaptureGenerator::Replay { samples, n_time } => {
                let start = (id as usize).wrapping_mul(*n_time) % samples.len();
                Ok((0..*n_time)
                    .map(|j| samples[(start + j) % samples.len()])
                    .collect())
            }
        }
    }
}

/// Read little-endian f32 I/Q pairs.
pub fn read_iq_file(path: &Path) -> Result<Vec<Complex64>> {
    let bytes = std::fs::read(path)?;
    if bytes.is_empty() || bytes.len() % 8 != 0 {
        return Err(Error::format(format!(
            "{} is not interleaved little-endian f32 I/Q ({} bytes)",
            path.display(),
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| {
            let i = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let q = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(i as f64, q as f64)
        })
        .collect())
}

/// Write samples as little-endian f32 I/Q pairs.
pub fn write_iq_file(path: &Path, samples: &[Complex64]) -> Result<()> {
    use std::io::Write as _;
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for s in samples {
        w.write_all(&(s.re as f32).to_le_bytes())?;
        w.write_all(&(s.im as f32).to_le_bytes())?;
    }
    Ok(())
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Fold one capture into an order-sensitive checksum of every sample bit.
/// The decode worker maintains this over everything it receives; a test can
/// recompute it from the deterministic source to prove lossless, in-order
/// decoding.
pub fn fold_capture_checksum(mut h: u64, capture_id: u64, samples: &[Complex64]) -> u64 {
    h = (h ^ capture_id).wrapping_mul(FNV_PRIME);
    for s in samples {
        h = (h ^ s.re.to_bits()).wrapping_mul(FNV_PRIME);
        h = (h ^ s.im.to_bits()).wrapping_mul(FNV_PRIME);
    }
    h
}

/// Checksum a whole deterministic stream (what the decode path must see).
pub fn expected_stream_checksum(generator: &CaptureGenerator, n_captures: u64) -> Result<u64> {
    let mut h = FNV_OFFSET;
    for id in 0..n_captures {
        let samples = generator.generate(id)?;
        h = fold_capture_checksum(h, id, &samples);
    }
    Ok(h)
}

/// Counters and timing from one streaming run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StreamStats {
    pub produced: u64,
    pub decoded: u64,
    pub sensed: u64,
    pub sense_dropped: u64,
    /// Realtime pacing: captures published more than one interval late.
    pub deadline_misses: u64,
    pub elapsed_s: f64,
    pub capture_interval_us: f64,
    pub decode_checksum: u64,
    pub sense_latency_mean_us: f64,
    pub sense_latency_p50_us: f64,
    pub sense_latency_p95_us: f64,
    /// Sensing-queue event log, when requested (not serialized).
    #[serde(skip)]
    pub sense_events: Option<Vec<QueueEvent>>,
}

fn sleep_until(target: Instant) {
    loop {
        let now = Instant::now();
        if now >= target {
            return;
        }
        let remaining = target - now;
        if remaining > Duration::from_micros(300) {
            thread::sleep(remaining - Duration::from_micros(200));
        } else {
            thread::yield_now();
        }
    }
}

fn join_worker<T>(handle: thread::ScopedJoinHandle<'_, Result<T>>, name: &str) -> Result<T> {
    handle
        .join()
        .map_err(|_| Error::contract(format!("{name} worker panicked")))?
}

/// Run the mirrored stream: a paced producer, a lossless decode worker, and
/// a sensing worker sweeping every capture it manages to get to.
/// `on_report` sees every sensing report, in sensing order.
pub fn run_stream(
    cfg: &StreamConfig,
    source: &StreamSource,
    model: Arc<Model>,
    mut on_report: impl FnMut(&SensingReport),
) -> Result<StreamStats> {
    cfg.validate()?;
    let generator = CaptureGenerator::new(source, cfg)?;
    let sweeper = Sweeper::new(cfg.sweep.clone(), model)?;
    let mirror: Mirror<Capture> = Mirror::new(cfg.decode_capacity, cfg.sense_capacity)?;
    if cfg.log_sense_events {
        mirror.sense.enable_event_log();
    }
    let interval = cfg.capture_interval();
    let (report_tx, report_rx) = mpsc::channel::<SensingReport>();

    let decode_q = Arc::clone(&mirror.decode);
    let sense_q = Arc::clone(&mirror.sense);
    let min_service = cfg.sense_min_service;
    let pacing = cfg.pacing;
    let n_captures = cfg.n_captures;

    let start = Instant::now();
    let (misses, decoded, checksum, sensed, latencies) = thread::scope(|s| -> Result<_> {
        let producer = s.spawn(|| -> Result<u64> {
            let publish_all = || -> Result<u64> {
                let mut misses = 0u64;
                for id in 0..n_captures {
                    let samples = Arc::new(generator.generate(id)?);
                    mirror.publish(Capture { id, samples })?;
                    if pacing == Pacing::Realtime {
                        let target = start + interval.mul_f64((id + 1) as f64);
                        let now = Instant::now();
                        if now < target {
                            sleep_until(target);
                        } else if now > target + interval {
                            misses += 1;
                        }
                    }
                }
                Ok(misses)
            };
            let outcome = publish_all();
            mirror.close(); // unblock workers even if production failed
            outcome
        });

        let decoder = s.spawn(move || -> Result<(u64, u64)> {
            let mut count = 0u64;
            let mut checksum = FNV_OFFSET;
            while let Some(capture) = decode_q.pop() {
                checksum = fold_capture_checksum(checksum, capture.id, &capture.samples);
                count += 1;
            }
            Ok((count, checksum))
        });

        let senser = s.spawn(move || -> Result<u64> {
            let mut count = 0u64;
            while let Some(capture) = sense_q.pop() {
                let t0 = Instant::now();
                let report = sweeper.process(&capture.samples, capture.id)?;
                if let Some(min) = min_service {
                    let left = min.saturating_sub(t0.elapsed());
                    if !left.is_zero() {
                        thread::sleep(left);
                    }
                }
                count += 1;
                // The caller may stop listening early; keep draining anyway
                // so shutdown and accounting still complete.
                let _ = report_tx.send(report);
            }
            Ok(count)
        });

        let mut latencies = Vec::new();
        for report in report_rx.iter() {
            latencies.push(report.latency_us);
            on_report(&report);
        }
        let misses = join_worker(producer, "producer")?;
        let (decoded, checksum) = join_worker(decoder, "decode")?;
        let sensed = join_worker(senser, "sensing")?;
        Ok((misses, decoded, checksum, sensed, latencies))
    })?;
    let elapsed_s = start.elapsed().as_secs_f64();

    let (mean, p50, p95) = if latencies.is_empty() {
        (0.0, 0.0, 0.0)
    } else {
        let mean = latencies.iter().sum::<f64>() / latencies.len() as f64;
        let mut sorted = latencies;
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        (mean, percentile(&sorted, 0.50), percentile(&sorted, 0.95))
    };
    Ok(StreamStats {
        produced: n_captures,
        decoded,
        sensed,
        sense_dropped: mirror.sense.drop_count(),
        deadline_misses: misses,
        elapsed_s,
        capture_interval_us: interval.as_secs_f64() * 1e6,
        decode_checksum: checksum,
        sense_latency_mean_us: mean,
        sense_latency_p50_us: p50,
        sense_latency_p95_us: p95,
        sense_events: mirror.sense.take_event_log(),
    })
}
