//! Chunked OFDM spectrum sensing.
//!
//! The crate covers the full loop of a transceiver-side sensing stack:
//!
//! * [`synth`] — OFDM burst synthesis plus tone / narrowband-noise
//!   interference injection and an AWGN channel, for building labeled data.
//! * [`dataset`] — balanced labeled datasets and their on-disk format.
//! * [`nn`] — a small dependency-free neural-network engine (Conv1D,
//!   MaxPool1D, Dense, Dropout, Softmax) with Adam and JSON weight files.
//! * [`train`] — training with early stopping, evaluation, and the
//!   input-size sweep that trades bandwidth-per-chunk against accuracy.
//! * [`pipeline`] — the capture → FFT → partition → classify → combine
//!   sensing pipeline.
//! * [`stream`] — a bounded-queue streaming harness that runs sensing beside
//!   a decode path without interfering with it.
//! * [`bench`] — latency measurement against the capture-time budget.

pub mod bench;
pub mod dataset;
pub mod config;
pub mod error;
pub mod fft;
mod fsio;
pub mod nn;
pub mod pipeline;
pub mod rng;
pub mod stream;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
/// Complex baseband sample type used throughout the public API.
pub use num_complex::Complex64;
