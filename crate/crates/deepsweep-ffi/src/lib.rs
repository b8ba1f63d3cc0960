//! C ABI for the sweep pipeline: load trained weights, build a sweeper, and
//! run captures through it from C, C++, or anything that can call C.
//!
//! Conventions:
//! - Every fallible call returns a [`DsStatus`]; `DS_STATUS_OK` is zero.
//! - On failure, a thread-local message is readable via [`ds_last_error`]
//!   until the next failing call on the same thread.
//! - Handles (`DsModel`, `DsSweeper`) are opaque; free them with the matching
//!   `_free` function exactly once. `_free(NULL)` is a no-op.
//! - No call unwinds across the boundary: panics become `DS_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;

use deepsweep::nn::{load_weights, save_weights, Model};
use deepsweep::pipeline::{SensingReport, SweepConfig, Sweeper};
use deepsweep::{Complex64, Error};

/// Result of every fallible API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The underlying file operation failed.
    Io = 3,
    /// A file's contents were corrupt, truncated, or incompatible.
    Format = 4,
    /// A configuration value violates its documented constraints.
    Config = 5,
    /// Dataset construction or splitting failed.
    Data = 6,
    /// An argument broke an operation's contract (wrong size, mismatch).
    Contract = 7,
    /// The call panicked internally; state may be inconsistent.
    Panic = 8,
}

/// Most chunks a sweep can split a frame into.
pub const DS_MAX_CHUNKS: usize = 8;
/// Subcarrier grid positions covered by a full sweep report.
pub const DS_GRID_POSITIONS: usize = 64;

/// One capture's sensing verdict, fixed-size for ABI stability.
///
/// Only the first `n_chunks` entries of `chunk_classes`/`chunk_confidence`
/// and the first `n_positions` entries of `occupancy` are meaningful.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DsReport {
    /// Echo of the capture id passed to `ds_sweeper_process`.
    pub capture_id: u64,
    /// Chunks in this sweep (1, 2, 4, or 8).
    pub n_chunks: u32,
    /// Valid prefix of `occupancy`: `n_chunks * (classes - 1)`.
    pub n_positions: u32,
    /// Majority-vote class per chunk; the highest class index means clean.
    pub chunk_classes: [u32; DS_MAX_CHUNKS],
    /// Mean winning-class probability per chunk.
    pub chunk_confidence: [f32; DS_MAX_CHUNKS],
    /// Per-subcarrier occupancy, lowest frequency first.
    pub occupancy: [bool; DS_GRID_POSITIONS],
    /// 1 when an interferer was located, else 0 (and `located_subcarrier`
    /// is meaningless).
    pub has_interferer: bool,
    /// Signed subcarrier index of the located interferer.
    pub located_subcarrier: i32,
    /// End-to-end sensing latency for this capture, microseconds.
    pub latency_us: f64,
}

/// Opaque handle to a loaded classifier.
pub struct DsModel {
    inner: Arc<Model>,
}

/// Opaque handle to a reusable sweep pipeline (FFT plan + classifier).
pub struct DsSweeper {
    inner: Sweeper,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("nul bytes were stripped");
    });
}

fn fail(status: DsStatus, msg: impl AsRef<str>) -> DsStatus {
    set_last_error(msg.as_ref());
    status
}

fn fail_with(err: Error) -> DsStatus {
    let status = match err {
        Error::Io(_) => DsStatus::Io,
        Error::Format(_) => DsStatus::Format,
        Error::Config(_) => DsStatus::Config,
        Error::Data(_) => DsStatus::Data,
        Error::Contract(_) => DsStatus::Contract,
    };
    fail(status, err.to_string())
}

/// Run a body that returns a status, converting panics to `DS_STATUS_PANIC`.
fn guarded(body: impl FnOnce() -> DsStatus) -> DsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(DsStatus::Panic, "internal panic; see stderr for details"),
    }
}

/// # Safety
/// `path` must be a valid nul-terminated string.
unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a Path, DsStatus> {
    if path.is_null() {
        return Err(fail(DsStatus::NullArgument, "path is null"));
    }
    match CStr::from_ptr(path).to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => Err(fail(DsStatus::InvalidUtf8, "path is not valid UTF-8")),
    }
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn ds_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent failure on this thread. Never null; empty
/// before any failure. The pointer is invalidated by the next failing call
/// on the same thread.
#[no_mangle]
pub extern "C" fn ds_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Load classifier weights from `path` into a new handle at `*out`.
///
/// # Safety
/// `path` must be nul-terminated; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn ds_model_load(path: *const c_char, out: *mut *mut DsModel) -> DsStatus {
    guarded(|| {
        if out.is_null() {
            return fail(DsStatus::NullArgument, "out is null");
        }
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match load_weights(path) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(DsModel {
                    inner: Arc::new(model),
                }));
                DsStatus::Ok
            }
            Err(e) => fail_with(e),
        }
    })
}

/// Write the model's weights to `path` (atomically: temp file, then rename).
///
/// # Safety
/// `model` must be a live handle from `ds_model_load`; `path` nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn ds_model_save(model: *const DsModel, path: *const c_char) -> DsStatus {
    guarded(|| {
        let Some(model) = model.as_ref() else {
            return fail(DsStatus::NullArgument, "model is null");
        };
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match save_weights(&model.inner, path) {
            Ok(()) => DsStatus::Ok,
            Err(e) => fail_with(e),
        }
    })
}

/// Bins per input example, or 0 when `model` is null.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ds_model_input_len(model: *const DsModel) -> u32 {
    model.as_ref().map_or(0, |m| m.inner.meta.input_len as u32)
}

/// Output classes (softmax width), or 0 when `model` is null.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ds_model_num_classes(model: *const DsModel) -> u32 {
    model.as_ref().map_or(0, |m| m.inner.meta.num_classes as u32)
}

/// Release a model handle. Null is a no-op.
///
/// # Safety
/// `model` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn ds_model_free(model: *mut DsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Build a sweep pipeline around `model` at `*out`.
///
/// The model is shared, not copied: the handle stays usable and must still
/// be freed separately. The model's input width must equal `n_fft / g`.
///
/// # Safety
/// `model` must be a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn ds_sweeper_new(
    model: *const DsModel,
    n_time: u32,
    n_fft: u32,
    g: u32,
    sample_rate_hz: f64,
    out: *mut *mut DsSweeper,
) -> DsStatus {
    guarded(|| {
        if out.is_null() {
            return fail(DsStatus::NullArgument, "out is null");
        }
        let Some(model) = model.as_ref() else {
            return fail(DsStatus::NullArgument, "model is null");
        };
        let cfg = SweepConfig {
            n_time: n_time as usize,
            n_fft: n_fft as usize,
            g: g as usize,
            sample_rate_hz,
        };
        match Sweeper::new(cfg, Arc::clone(&model.inner)) {
            Ok(sweeper) => {
                *out = Box::into_raw(Box::new(DsSweeper { inner: sweeper }));
                DsStatus::Ok
            }
            Err(e) => fail_with(e),
        }
    })
}

fn fill_report(report: &SensingReport, g: usize, out: &mut DsReport) -> DsStatus {
    if report.chunk_classes.len() > DS_MAX_CHUNKS || report.occupancy.len() > DS_GRID_POSITIONS {
        return fail(
            DsStatus::Contract,
            "report is wider than the ABI's fixed-size arrays",
        );
    }
    *out = DsReport {
        capture_id: report.capture_id,
        n_chunks: g as u32,
        n_positions: report.occupancy.len() as u32,
        chunk_classes: [0; DS_MAX_CHUNKS],
        chunk_confidence: [0.0; DS_MAX_CHUNKS],
        occupancy: [false; DS_GRID_POSITIONS],
        has_interferer: report.located_subcarrier.is_some(),
        located_subcarrier: report.located_subcarrier.unwrap_or(0),
        latency_us: report.latency_us,
    };
    for (dst, &src) in out.chunk_classes.iter_mut().zip(&report.chunk_classes) {
        *dst = src as u32;
    }
    out.chunk_confidence[..report.chunk_confidence.len()]
        .copy_from_slice(&report.chunk_confidence);
    out.occupancy[..report.occupancy.len()].copy_from_slice(&report.occupancy);
    DsStatus::Ok
}

/// Run one capture through the pipeline and fill `*out_report`.
///
/// `iq` holds `n_values` doubles as interleaved I/Q pairs, so `n_values`
/// must be even and `n_values / 2` must equal the sweeper's capture size.
///
/// # Safety
/// `sweeper` must be live; `iq` must point to `n_values` readable doubles;
/// `out_report` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn ds_sweeper_process(
    sweeper: *const DsSweeper,
    iq: *const f64,
    n_values: usize,
    capture_id: u64,
    out_report: *mut DsReport,
) -> DsStatus {
    guarded(|| {
        let Some(sweeper) = sweeper.as_ref() else {
            return fail(DsStatus::NullArgument, "sweeper is null");
        };
        if iq.is_null() {
            return fail(DsStatus::NullArgument, "iq is null");
        }
        let Some(out_report) = out_report.as_mut() else {
            return fail(DsStatus::NullArgument, "out_report is null");
        };
        if n_values % 2 != 0 {
            return fail(
                DsStatus::Contract,
                format!("n_values is {n_values}; interleaved I/Q needs an even count"),
            );
        }
        let values = std::slice::from_raw_parts(iq, n_values);
        let samples: Vec<Complex64> = values
            .chunks_exact(2)
            .map(|p| Complex64::new(p[0], p[1]))
            .collect();
        match sweeper.inner.process(&samples, capture_id) {
            Ok(report) => fill_report(&report, sweeper.inner.cfg().g, out_report),
            Err(e) => fail_with(e),
        }
    })
}

/// Release a sweeper handle. Null is a no-op.
///
/// # Safety
/// `sweeper` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn ds_sweeper_free(sweeper: *mut DsSweeper) {
    if !sweeper.is_null() {
        drop(Box::from_raw(sweeper));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use deepsweep::nn::{build_model, ModelConfig};
    use std::ffi::CString;
    use std::path::PathBuf;
    use std::ptr;

    fn tmp(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join("deepsweep-ffi-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    fn c_path(path: &Path) -> CString {
        CString::new(path.to_str().unwrap()).unwrap()
    }

    fn last_error() -> String {
        unsafe {
            CStr::from_ptr(ds_last_error())
                .to_string_lossy()
                .into_owned()
        }
    }

    fn saved_model_path() -> PathBuf {
        let path = tmp("model.json");
        let model = build_model(&ModelConfig::default(), 32, 9, 11).unwrap();
        save_weights(&model, &path).unwrap();
        path
    }

    #[test]
    fn version_and_initial_error_are_readable() {
        let version = unsafe { CStr::from_ptr(ds_version()) }.to_str().unwrap();
        assert_eq!(version, env!("CARGO_PKG_VERSION"));
        // Before any failure the message is empty, never a null pointer.
        assert!(!ds_last_error().is_null());
    }

    #[test]
    fn model_round_trips_through_the_c_api() {
        let path = saved_model_path();
        let c = c_path(&path);
        let mut handle: *mut DsModel = ptr::null_mut();
        let status = unsafe { ds_model_load(c.as_ptr(), &mut handle) };
        assert_eq!(status, DsStatus::Ok);
        assert!(!handle.is_null());
        unsafe {
            assert_eq!(ds_model_input_len(handle), 32);
            assert_eq!(ds_model_num_classes(handle), 9);

            let copy = tmp("copy.json");
            let c_copy = c_path(&copy);
            assert_eq!(ds_model_save(handle, c_copy.as_ptr()), DsStatus::Ok);
            assert_eq!(
                std::fs::read(&path).unwrap(),
                std::fs::read(&copy).unwrap(),
                "saving a loaded model must reproduce the file byte-for-byte"
            );
            ds_model_free(handle);
        }
    }

    #[test]
    fn a_sweep_runs_end_to_end_from_c() {
        let path = saved_model_path();
        let c = c_path(&path);
        let mut model: *mut DsModel = ptr::null_mut();
        unsafe {
            assert_eq!(ds_model_load(c.as_ptr(), &mut model), DsStatus::Ok);
            let mut sweeper: *mut DsSweeper = ptr::null_mut();
            assert_eq!(
                ds_sweeper_new(model, 1024, 256, 8, 10e6, &mut sweeper),
                DsStatus::Ok
            );

            // Interleaved I/Q for 1024 samples of a deterministic waveform.
            let values: Vec<f64> = (0..2048)
                .map(|i| ((i * 37 % 101) as f64 / 101.0) - 0.5)
                .collect();
            let mut report = std::mem::zeroed::<DsReport>();
            let status = ds_sweeper_process(sweeper, values.as_ptr(), values.len(), 42, &mut report);
            assert_eq!(status, DsStatus::Ok);
            assert_eq!(report.capture_id, 42);
            assert_eq!(report.n_chunks, 8);
            assert_eq!(report.n_positions, 64);
            for &class in &report.chunk_classes {
                assert!(class < 9);
            }
            assert!(report.latency_us > 0.0);
            if report.has_interferer {
                assert!((-32..32).contains(&report.located_subcarrier));
            }

            // Freeing the model first is fine: the sweeper shares ownership.
            ds_model_free(model);
            let status = ds_sweeper_process(sweeper, values.as_ptr(), values.len(), 43, &mut report);
            assert_eq!(status, DsStatus::Ok);
            assert_eq!(report.capture_id, 43);
            ds_sweeper_free(sweeper);
        }
    }

    #[test]
    fn failures_set_typed_statuses_and_messages() {
        let mut model: *mut DsModel = ptr::null_mut();
        unsafe {
            assert_eq!(
                ds_model_load(ptr::null(), &mut model),
                DsStatus::NullArgument
            );
            assert!(last_error().contains("null"));

            let missing = c_path(&tmp("missing.json"));
            let _ = std::fs::remove_file(tmp("missing.json"));
            assert_eq!(ds_model_load(missing.as_ptr(), &mut model), DsStatus::Io);

            let garbage = tmp("garbage.json");
            std::fs::write(&garbage, b"not a model").unwrap();
            let c_garbage = c_path(&garbage);
            assert_eq!(ds_model_load(c_garbage.as_ptr(), &mut model), DsStatus::Format);

            let bad_utf8 = CString::new(vec![0xffu8, 0xfe]).unwrap();
            assert_eq!(
                ds_model_load(bad_utf8.as_ptr(), &mut model),
                DsStatus::InvalidUtf8
            );
        }
    }

    #[test]
    fn sweeper_rejects_mismatched_geometry_and_input() {
        let path = saved_model_path();
        let c = c_path(&path);
        let mut model: *mut DsModel = ptr::null_mut();
        unsafe {
            assert_eq!(ds_model_load(c.as_ptr(), &mut model), DsStatus::Ok);

            // 256/4 = 64 bins per chunk, but the model takes 32.
            let mut sweeper: *mut DsSweeper = ptr::null_mut();
            assert_eq!(
                ds_sweeper_new(model, 1024, 256, 4, 10e6, &mut sweeper),
                DsStatus::Contract
            );
            assert!(last_error().contains("32"), "got: {}", last_error());

            assert_eq!(
                ds_sweeper_new(model, 1024, 256, 8, 10e6, &mut sweeper),
                DsStatus::Ok
            );
            let values = vec![0.0f64; 100];
            let mut report = std::mem::zeroed::<DsReport>();
            assert_eq!(
                ds_sweeper_process(sweeper, values.as_ptr(), 99, 0, &mut report),
                DsStatus::Contract,
                "odd interleaved count"
            );
            assert_eq!(
                ds_sweeper_process(sweeper, values.as_ptr(), 100, 0, &mut report),
                DsStatus::Contract,
                "50 samples is not a 1024-sample capture"
            );
            ds_sweeper_free(sweeper);
            ds_model_free(model);
        }
    }

    #[test]
    fn generated_header_declares_the_api() {
        let header = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/include/deepsweep.h"
        ))
        .expect("build.rs generates the header");
        for symbol in [
            "ds_version",
            "ds_last_error",
            "ds_model_load",
            "ds_model_save",
            "ds_model_free",
            "ds_sweeper_new",
            "ds_sweeper_process",
            "ds_sweeper_free",
            "DS_STATUS_OK",
            "typedef struct DsModel DsModel;",
            "typedef struct DsSweeper DsSweeper;",
        ] {
            assert!(header.contains(symbol), "header is missing `{symbol}`");
        }
    }
}
