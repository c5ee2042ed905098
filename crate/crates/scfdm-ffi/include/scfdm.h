#ifndef SCFDM_H
#define SCFDM_H

/* Generated by cbindgen from the scfdm-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible entry point.
typedef enum ScfdmStatus {
  SCFDM_STATUS_OK = 0,
  // A required pointer argument was null.
  SCFDM_STATUS_NULL_ARGUMENT = 1,
  // An argument was outside its allowed range.
  SCFDM_STATUS_INVALID_ARGUMENT = 2,
  // Configuration file or key error.
  SCFDM_STATUS_CONFIG = 3,
  // Filesystem error.
  SCFDM_STATUS_IO = 4,
  // Golden-vector regression failed.
  SCFDM_STATUS_GOLDEN_MISMATCH = 5,
  // An output buffer was too small.
  SCFDM_STATUS_BUFFER_TOO_SMALL = 6,
  // Any other internal error.
  SCFDM_STATUS_INTERNAL = 7,
} ScfdmStatus;

// Opaque transmitter handle: a waveform configuration plus shaping filter.
typedef struct ScfdmTx ScfdmTx;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *scfdm_version(void);

// Copies the last error message of the calling thread into `buf` (truncated
// to `cap - 1` bytes, always NUL-terminated) and returns the full message
// length in bytes.
//
// # Safety
// `buf` must point to `cap` writable bytes, or be null (then only the
// length is returned).
size_t scfdm_last_error_message(char *buf, size_t cap);

// Creates a transmitter.
//
// `mapping`: 0 localized, 1 interleaved. `shaping`: 0 frequency-domain,
// 1 time-domain. `taps`/`taps_len` give the real-valued shaping filter
// impulse response; `unit_energy` selects tap normalization. Returns null
// on error (see [`scfdm_last_error_message`]).
//
// # Safety
// `taps` must point to `taps_len` doubles.
struct ScfdmTx *scfdm_tx_new(size_t m,
                             size_t n_fft,
                             size_t cp_len,
                             size_t start_tone,
                             uint32_t mapping,
                             uint32_t shaping,
                             const double *taps,
                             size_t taps_len,
                             bool unit_energy);

// Destroys a transmitter handle; null is accepted.
//
// # Safety
// `tx` must be a pointer from [`scfdm_tx_new`] not freed before.
void scfdm_tx_free(struct ScfdmTx *tx);

// Complex samples per transmitted symbol (body plus cyclic prefix).
//
// # Safety
// `tx` must be a valid transmitter handle.
size_t scfdm_tx_symbol_len(const struct ScfdmTx *tx);

// Generates one shaped data symbol from `bits_len == m` payload bits into
// `out_iq` (interleaved, at least `2 * symbol_len` doubles).
//
// # Safety
// `tx` must be valid; `bits` must point to `bits_len` bytes; `out_iq` must
// point to `out_len` writable doubles.
enum ScfdmStatus scfdm_tx_data(const struct ScfdmTx *tx,
                               const uint8_t *bits,
                               size_t bits_len,
                               double *out_iq,
                               size_t out_len);

// Generates one reference-signal symbol for `port` (0 or 1) from
// `bits_len == m / 2` pilot bits into `out_iq`.
//
// # Safety
// Same contracts as [`scfdm_tx_data`].
enum ScfdmStatus scfdm_tx_dmrs(const struct ScfdmTx *tx,
                               uint32_t port,
                               const uint8_t *bits,
                               size_t bits_len,
                               double *out_iq,
                               size_t out_len);

// PAPR in dB of `samples` interleaved complex values with the given
// frequency-domain oversampling factor.
//
// # Safety
// `iq` must point to `2 * samples` doubles; `out_db` must be writable.
enum ScfdmStatus scfdm_papr_db(const double *iq, size_t samples, size_t oversample, double *out_db);

// Runs the frozen reference-vector regression.
enum ScfdmStatus scfdm_golden_check(void);

// Parses an experiment config file and runs it, writing results under
// `out_dir` (or the config's `out` key when `out_dir` is null) as CSV, or
// JSON when `use_json` is set.
//
// # Safety
// `path` must be a NUL-terminated string; `out_dir` likewise or null.
enum ScfdmStatus scfdm_run_config_file(const char *path, const char *out_dir, bool use_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCFDM_H */
