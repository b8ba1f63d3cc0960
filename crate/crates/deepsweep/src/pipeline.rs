//! The sensing pipeline: capture → FFT → partition → classify → combine.
//!
//! A capture of `n_time` IQ samples is cut into `n_time / n_fft`
//! non-overlapping segments; each segment becomes a [`SpectrumFrame`] of
//! `n_fft` ascending-frequency bins; each frame is partitioned into `g`
//! contiguous chunks which are classified *in one batched forward pass*;
//! per-segment verdicts are then combined by majority vote into a
//! [`SensingReport`].
//!
//! Grid conventions (for the default 64-subcarrier OFDM plan under a
//! 256-bin frame): each subcarrier owns `n_fft / 64 = 4` bins; subcarrier
//! `u` on the unsigned grid (`u = signed_index + 32`) owns shifted bins
//! `[4u, 4u + 4)`; chunk `i` covers bins `[i·(n_fft/g), (i+1)·(n_fft/g))`,
//! i.e. subcarriers `[i·(64/g), (i+1)·(64/g))`. A chunk-local class `c`
//! therefore names global grid position `i·(64/g) + c`, and the last class
//! of a classifier is always "clean".

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::fft::{fft_shift, Fft};
use crate::nn::{argmax, batch_from_rows, input_from_complex, Model};

/// Geometry of one sweep: how many time samples per capture, how many
/// frequency bins per segment, and how many chunks each frame splits into.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// IQ samples collected per capture.
    pub n_time: usize,
    /// FFT size; a capture yields `n_time / n_fft` spectrum frames.
    pub n_fft: usize,
    /// Chunk count per frame; one of {1, 2, 4, 8}.
    pub g: usize,
    /// Complex baseband sample rate in Hz.
    pub sample_rate_hz: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n_time: 1024,
            n_fft: 256,
            g: 8,
            sample_rate_hz: 10e6,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_fft < 2 || !self.n_fft.is_power_of_two() {
            return Err(Error::config(format!(
                "n_fft must be a power of two >= 2, got {}",
                self.n_fft
            )));
        }
        if self.n_time == 0 || self.n_time % self.n_fft != 0 {
            return Err(Error::config(format!(
                "n_time ({}) must be a positive multiple of n_fft ({})",
                self.n_time, self.n_fft
            )));
        }
        if ![1, 2, 4, 8].contains(&self.g) {
            return Err(Error::config(format!("g must be one of 1, 2, 4, 8, got {}", self.g)));
        }
        if self.n_fft % self.g != 0 {
            return Err(Error::config(format!(
                "n_fft ({}) must be divisible by g ({})",
                self.n_fft, self.g
            )));
        }
        if !self.sample_rate_hz.is_finite() || self.sample_rate_hz <= 0.0 {
            return Err(Error::config("sample_rate_hz must be positive and finite"));
        }
        Ok(())
    }

    /// Spectrum frames per capture.
    pub fn segments_per_capture(&self) -> usize {
        self.n_time / self.n_fft
    }

    /// Bins per chunk.
    pub fn chunk_len(&self) -> usize {
        self.n_fft / self.g
    }

    /// Bandwidth covered by one chunk, in Hz.
    pub fn chunk_bandwidth_hz(&self) -> f64 {
        self.sample_rate_hz / self.g as f64
    }
}

/// One segment's spectrum: `n_fft` bins in ascending frequency order
/// (`-fs/2` first, DC at `n_fft/2`).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFrame {
    pub capture_id: u64,
    pub segment_index: usize,
    pub bins: Vec<Complex64>,
}

/// A frame partitioned into `g` contiguous chunks. Chunks borrow the frame,
/// so partitioning never copies bins.
#[derive(Debug)]
pub struct ChunkBatch<'a> {
    pub capture_id: u64,
    pub segment_index: usize,
    chunks: Vec<&'a [Complex64]>,
}

impl<'a> ChunkBatch<'a> {
    pub fn chunks(&self) -> &[&'a [Complex64]] {
        &self.chunks
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn chunk_len(&self) -> usize {
        self.chunks.first().map_or(0, |c| c.len())
    }
}

/// Combined verdict for one capture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensingReport {
    pub capture_id: u64,
    /// Majority-vote class per chunk; the highest class index is "clean".
    pub chunk_classes: Vec<usize>,
    /// Mean winning-class probability per chunk across segments.
    pub chunk_confidence: Vec<f32>,
    /// Per-subcarrier occupancy on the unsigned grid of `g · (classes-1)`
    /// positions covering the monitored band, lowest frequency first.
    pub occupancy: Vec<bool>,
    /// Signed index of the located interferer (lowest occupied subcarrier),
    /// or `None` when every chunk reads clean.
    pub located_subcarrier: Option<i32>,
    /// End-to-end sensing latency for this capture, set by the caller that
    /// timed the pipeline (0 when untimed).
    pub latency_us: f64,
}

/// Transform one capture into per-segment spectrum frames.
pub fn fft_stage(
    time_iq: &[Complex64],
    cfg: &SweepConfig,
    capture_id: u64,
) -> Result<Vec<SpectrumFrame>> {
    cfg.validate()?;
    let plan = Fft::new(cfg.n_fft)?;
    fft_stage_with_plan(time_iq, cfg, capture_id, &plan)
}

/// [`fft_stage`] with a caller-owned plan — the form the hot path uses.
pub fn fft_stage_with_plan(
    time_iq: &[Complex64],
    cfg: &SweepConfig,
    capture_id: u64,
    plan: &Fft,
) -> Result<Vec<SpectrumFrame>> {
    if time_iq.len() != cfg.n_time {
        return Err(Error::contract(format!(
            "capture has {} samples, sweep config expects {}",
            time_iq.len(),
            cfg.n_time
        )));
    }
    if plan.len() != cfg.n_fft {
        return Err(Error::contract("fft plan size does not match n_fft"));
    }
    let mut frames = Vec::with_capacity(cfg.segments_per_capture());
    for (segment_index, segment) in time_iq.chunks_exact(cfg.n_fft).enumerate() {
        let mut bins = segment.to_vec();
        plan.forward(&mut bins)?;
        fft_shift(&mut bins);
        frames.push(SpectrumFrame {
            capture_id,
            segment_index,
            bins,
        });
    }
    Ok(frames)
}

/// Split a frame into `g` contiguous borrowed chunks.
pub fn partition(frame: &SpectrumFrame, g: usize) -> Result<ChunkBatch<'_>> {
    if g == 0 || frame.bins.len() % g != 0 {
        return Err(Error::contract(format!(
            "cannot partition {} bins into {g} chunks",
            frame.bins.len()
        )));
    }
    let chunk_len = frame.bins.len() / g;
    Ok(ChunkBatch {
        capture_id: frame.capture_id,
        segment_index: frame.segment_index,
        chunks: frame.bins.chunks_exact(chunk_len).collect(),
    })
}

/// Classify every chunk of a batch in a single forward pass.
/// Returns one probability vector per chunk, in chunk order.
pub fn classify_batch(batch: &ChunkBatch<'_>, model: &Model) -> Result<Vec<Vec<f32>>> {
    if batch.is_empty() {
        return Err(Error::contract("chunk batch is empty"));
    }
    if batch.chunk_len() != model.meta.input_len {
        return Err(Error::contract(format!(
            "chunks carry {} bins but the model expects {}",
            batch.chunk_len(),
            model.meta.input_len
        )));
    }
    let rows: Vec<Vec<f32>> = batch
        .chunks()
        .iter()
        .map(|c| input_from_complex(c, model.meta.normalization))
        .collect();
    let row_refs: Vec<&[f32]> = rows.iter().map(|r| r.as_slice()).collect();
    let input = batch_from_rows(&row_refs, model.meta.input_len)?;
    let probs = model.forward(&input)?;
    let classes = model.meta.num_classes;
    Ok((0..batch.len())
        .map(|i| probs.data()[i * classes..(i + 1) * classes].to_vec())
        .collect())
}

/// Merge per-segment, per-chunk verdicts into one report.
///
/// Each chunk takes a majority vote over its segments' argmax classes
/// (ties break toward the lower class index, at both the argmax and the
/// vote level). A chunk voting anything but the clean class marks global
/// grid position `chunk · (classes-1) + class` occupied.
pub fn combine(
    capture_id: u64,
    segment_verdicts: &[Vec<Vec<f32>>],
    cfg: &SweepConfig,
) -> Result<SensingReport> {
    if segment_verdicts.is_empty() {
        return Err(Error::contract("combine needs at least one segment"));
    }
    let num_classes = segment_verdicts[0]
        .first()
        .map(|v| v.len())
        .unwrap_or_default();
    if num_classes < 2 {
        return Err(Error::contract("verdicts need at least two classes"));
    }
    for (s, verdicts) in segment_verdicts.iter().enumerate() {
        if verdicts.len() != cfg.g {
            return Err(Error::contract(format!(
                "segment {s} carries {} chunk verdicts, sweep config expects {}",
                verdicts.len(),
                cfg.g
            )));
        }
        if verdicts.iter().any(|v| v.len() != num_classes) {
            return Err(Error::contract(format!(
                "segment {s} mixes verdict widths; all must have {num_classes} classes"
            )));
        }
    }

    let clean_class = num_classes - 1;
    let per_chunk = clean_class; // grid positions owned by one chunk
    let mut chunk_classes = Vec::with_capacity(cfg.g);
    let mut chunk_confidence = Vec::with_capacity(cfg.g);
    let mut occupancy = vec![false; cfg.g * per_chunk];
    for chunk in 0..cfg.g {
        let mut votes = vec![0u32; num_classes];
        let mut mean = vec![0.0f64; num_classes];
        for verdicts in segment_verdicts {
            let probs = &verdicts[chunk];
            votes[argmax(probs)] += 1;
            for (acc, &p) in mean.iter_mut().zip(probs) {
                *acc += p as f64;
            }
        }
        let winner = votes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(c, _)| c)
            .expect("non-empty votes");
        chunk_classes.push(winner);
        chunk_confidence.push((mean[winner] / segment_verdicts.len() as f64) as f32);
        if winner != clean_class {
            occupancy[chunk * per_chunk + winner] = true;
        }
    }
    let located_subcarrier = occupancy
        .iter()
        .position(|&o| o)
        .map(|u| u as i32 - (cfg.g * per_chunk) as i32 / 2);
    Ok(SensingReport {
        capture_id,
        chunk_classes,
        chunk_confidence,
        occupancy,
        located_subcarrier,
        latency_us: 0.0,
    })
}

/// CSV header matching [`SensingReport::to_csv_row`] for a `g`-chunk sweep.
pub fn report_csv_header(g: usize) -> String {
    let mut s = String::from("capture_id,located_subcarrier");
    for i in 0..g {
        s.push_str(&format!(",chunk_{i}"));
    }
    s.push_str(",latency_us");
    s
}

impl SensingReport {
    pub fn to_csv_row(&self) -> String {
        let located = self
            .located_subcarrier
            .map(|k| k.to_string())
            .unwrap_or_default();
        let chunks = self
            .chunk_classes
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "{},{located},{chunks},{:.3}",
            self.capture_id, self.latency_us
        )
    }
}

/// Reusable pipeline: one FFT plan plus one model, good for many captures.
#[derive(Debug, Clone)]
pub struct Sweeper {
    cfg: SweepConfig,
    model: Arc<Model>,
    plan: Fft,
}

impl Sweeper {
    pub fn new(cfg: SweepConfig, model: Arc<Model>) -> Result<Sweeper> {
        cfg.validate()?;
        model.validate()?;
        if model.meta.input_len != cfg.chunk_len() {
            return Err(Error::contract(format!(
                "model takes {}-bin inputs but the sweep produces {}-bin chunks",
                model.meta.input_len,
                cfg.chunk_len()
            )));
        }
        if model.meta.in_channels != 2 {
            return Err(Error::contract("sweep models take 2-channel (I/Q) input"));
        }
        let plan = Fft::new(cfg.n_fft)?;
        Ok(Sweeper { cfg, model, plan })
    }

    pub fn cfg(&self) -> &SweepConfig {
        &self.cfg
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    /// Run the full pipeline on one capture and time it.
    pub fn process(&self, time_iq: &[Complex64], capture_id: u64) -> Result<SensingReport> {
        Ok(self.process_instrumented(time_iq, capture_id)?.0)
    }

    /// Like [`Sweeper::process`], additionally timing each stage so latency
    /// accounting can be audited against the end-to-end figure.
    pub fn process_instrumented(
        &self,
        time_iq: &[Complex64],
        capture_id: u64,
    ) -> Result<(SensingReport, SweepBreakdown)> {
        let start = Instant::now();
        let t0 = Instant::now();
        let frames = fft_stage_with_plan(time_iq, &self.cfg, capture_id, &self.plan)?;
        let fft_us = t0.elapsed().as_secs_f64() * 1e6;
        let t0 = Instant::now();
        let mut segment_verdicts = Vec::with_capacity(frames.len());
        for frame in &frames {
            let batch = partition(frame, self.cfg.g)?;
            segment_verdicts.push(classify_batch(&batch, &self.model)?);
        }
        let classify_us = t0.elapsed().as_secs_f64() * 1e6;
        let t0 = Instant::now();
        let mut report = combine(capture_id, &segment_verdicts, &self.cfg)?;
        let combine_us = t0.elapsed().as_secs_f64() * 1e6;
        report.latency_us = start.elapsed().as_secs_f64() * 1e6;
        Ok((
            report,
            SweepBreakdown {
                fft_us,
                classify_us,
                combine_us,
            },
        ))
    }
}

/// Per-stage share of one sweep's latency (microseconds).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepBreakdown {
    pub fft_us: f64,
    pub classify_us: f64,
    pub combine_us: f64,
}

impl SweepBreakdown {
    pub fn total_us(&self) -> f64 {
        self.fft_us + self.classify_us + self.combine_us
    }
}
