#ifndef DEEPSWEEP_H
#define DEEPSWEEP_H

/* Generated from the deepsweep-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Most chunks a sweep can split a frame into.
 */
#define DS_MAX_CHUNKS 8

/**
 * Subcarrier grid positions covered by a full sweep report.
 */
#define DS_GRID_POSITIONS 64

/**
 * Result of every fallible API call.
 */
typedef enum DsStatus {
  /**
   * Success.
   */
  DS_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  DS_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  DS_STATUS_INVALID_UTF8 = 2,
  /**
   * The underlying file operation failed.
   */
  DS_STATUS_IO = 3,
  /**
   * A file's contents were corrupt, truncated, or incompatible.
   */
  DS_STATUS_FORMAT = 4,
  /**
   * A configuration value violates its documented constraints.
   */
  DS_STATUS_CONFIG = 5,
  /**
   * Dataset construction or splitting failed.
   */
  DS_STATUS_DATA = 6,
  /**
   * An argument broke an operation's contract (wrong size, mismatch).
   */
  DS_STATUS_CONTRACT = 7,
  /**
   * The call panicked internally; state may be inconsistent.
   */
  DS_STATUS_PANIC = 8,
} DsStatus;

/**
 * Opaque handle to a loaded classifier.
 */
typedef struct DsModel DsModel;

/**
 * Opaque handle to a reusable sweep pipeline (FFT plan + classifier).
 */
typedef struct DsSweeper DsSweeper;

/**
 * One capture's sensing verdict, fixed-size for ABI stability.
 *
 * Only the first `n_chunks` entries of `chunk_classes`/`chunk_confidence`
 * and the first `n_positions` entries of `occupancy` are meaningful.
 */
typedef struct DsReport {
  /**
   * Echo of the capture id passed to `ds_sweeper_process`.
   */
  uint64_t capture_id;
  /**
   * Chunks in this sweep (1, 2, 4, or 8).
   */
  uint32_t n_chunks;
  /**
   * Valid prefix of `occupancy`: `n_chunks * (classes - 1)`.
   */
  uint32_t n_positions;
  /**
   * Majority-vote class per chunk; the highest class index means clean.
   */
  uint32_t chunk_classes[DS_MAX_CHUNKS];
  /**
   * Mean winning-class probability per chunk.
   */
  float chunk_confidence[DS_MAX_CHUNKS];
  /**
   * Per-subcarrier occupancy, lowest frequency first.
   */
  bool occupancy[DS_GRID_POSITIONS];
  /**
   * 1 when an interferer was located, else 0 (and `located_subcarrier`
   * is meaningless).
   */
  bool has_interferer;
  /**
   * Signed subcarrier index of the located interferer.
   */
  int32_t located_subcarrier;
  /**
   * End-to-end sensing latency for this capture, microseconds.
   */
  double latency_us;
} DsReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *ds_version(void);

/**
 * Message for the most recent failure on this thread. Never null; empty
 * before any failure. The pointer is invalidated by the next failing call
 * on the same thread.
 */
const char *ds_last_error(void);

/**
 * Load classifier weights from `path` into a new handle at `*out`.
 *
 * # Safety
 * `path` must be nul-terminated; `out` must point to writable storage.
 */
enum DsStatus ds_model_load(const char *path, struct DsModel **out);

/**
 * Write the model's weights to `path` (atomically: temp file, then rename).
 *
 * # Safety
 * `model` must be a live handle from `ds_model_load`; `path` nul-terminated.
 */
enum DsStatus ds_model_save(const struct DsModel *model, const char *path);

/**
 * Bins per input example, or 0 when `model` is null.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
uint32_t ds_model_input_len(const struct DsModel *model);

/**
 * Output classes (softmax width), or 0 when `model` is null.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
uint32_t ds_model_num_classes(const struct DsModel *model);

/**
 * Release a model handle. Null is a no-op.
 *
 * # Safety
 * `model` must be null or a handle not freed before.
 */
void ds_model_free(struct DsModel *model);

/**
 * Build a sweep pipeline around `model` at `*out`.
 *
 * The model is shared, not copied: the handle stays usable and must still
 * be freed separately. The model's input width must equal `n_fft / g`.
 *
 * # Safety
 * `model` must be a live handle; `out` must point to writable storage.
 */
enum DsStatus ds_sweeper_new(const struct DsModel *model,
                             uint32_t n_time,
                             uint32_t n_fft,
                             uint32_t g,
                             double sample_rate_hz,
                             struct DsSweeper **out);

/**
 * Run one capture through the pipeline and fill `*out_report`.
 *
 * `iq` holds `n_values` doubles as interleaved I/Q pairs, so `n_values`
 * must be even and `n_values / 2` must equal the sweeper's capture size.
 *
 * # Safety
 * `sweeper` must be live; `iq` must point to `n_values` readable doubles;
 * `out_report` must point to writable storage.
 */
enum DsStatus ds_sweeper_process(const struct DsSweeper *sweeper,
                                 const double *iq,
                                 size_t n_values,
                                 uint64_t capture_id,
                                 struct DsReport *out_report);

/**
 * Release a sweeper handle. Null is a no-op.
 *
 * # Safety
 * `sweeper` must be null or a handle not freed before.
 */
void ds_sweeper_free(struct DsSweeper *sweeper);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DEEPSWEEP_H */
