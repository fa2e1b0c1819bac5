#ifndef EDTC_H
#define EDTC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum EdtcStatus {
  EDTC_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  EDTC_STATUS_NULL_POINTER = 1,
  /**
   * Input text was not valid UTF-8.
   */
  EDTC_STATUS_INVALID_UTF8 = 2,
  /**
   * The sequence program did not parse.
   */
  EDTC_STATUS_PARSE = 3,
  /**
   * Physical parameters were rejected.
   */
  EDTC_STATUS_INVALID_PARAMS = 4,
  /**
   * Other invalid arguments (padding, sizes, fit points).
   */
  EDTC_STATUS_INVALID_ARGUMENT = 5,
  /**
   * Numerical failure: too few samples, non-physical state, no convergence.
   */
  EDTC_STATUS_NUMERIC = 6,
  /**
   * The caller's buffer is too small.
   */
  EDTC_STATUS_BUFFER_TOO_SMALL = 7,
  /**
   * A Rust panic was caught at the boundary.
   */
  EDTC_STATUS_PANIC = 8,
} EdtcStatus;

/**
 * A parsed and validated sequence program.
 */
typedef struct EdtcProgram EdtcProgram;

/**
 * Stroboscopic magnetization samples `M(nT)`, `n = 0..=cycles`.
 */
typedef struct EdtcSeries EdtcSeries;

/**
 * Zero-padded spectrum of a series' `Mz`.
 */
typedef struct EdtcSpectrum EdtcSpectrum;

/**
 * Physical parameters with every timescale resolved. An infinite dephasing
 * time is reported as `INFINITY`.
 */
typedef struct EdtcParams {
  double t1;
  double t2;
  double t_phi;
  double m_eq;
  double omega1;
} EdtcParams;

/**
 * Scalar results of a spectrum. `fwhm` and `peak_nu` are NaN when
 * `has_peak` is false.
 */
typedef struct EdtcSpectrumSummary {
  size_t samples;
  size_t pad;
  size_t window_bins;
  double bin_width;
  double f;
  bool has_peak;
  double fwhm;
  double peak_nu;
} EdtcSpectrumSummary;

/**
 * Least-squares fit of `y = a·d^λ + b`. `covariance` is row-major.
 */
typedef struct EdtcPowerLawFit {
  double a;
  double lambda;
  double b;
  double residual;
  double covariance[9];
  size_t iterations;
  double gradient_norm;
} EdtcPowerLawFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version string of the library; static, do not free.
 */
const char *edtc_version(void);

/**
 * Length in bytes of the last error message on this thread, excluding the
 * terminating NUL.
 */
size_t edtc_last_error_length(void);

/**
 * Copies the last error message (NUL-terminated, truncated to fit) into
 * `buf` and returns the number of bytes written excluding the NUL.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t edtc_last_error_message(char *buf, size_t len);

/**
 * Parses program text.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum EdtcStatus edtc_program_parse(const char *text, struct EdtcProgram **out);

/**
 * Line and column (1-based) of the last error on this thread. Returns
 * false, leaving the outputs untouched, when that error had no source
 * position.
 *
 * # Safety
 * `line` and `col` must be null or writable.
 */
bool edtc_last_error_position(size_t *line, size_t *col);

/**
 * # Safety
 * `program` must come from [`edtc_program_parse`] and not be freed twice.
 */
void edtc_program_free(struct EdtcProgram *program);

/**
 * # Safety
 * `program` must be a live handle; `out` must be writable.
 */
enum EdtcStatus edtc_program_params(const struct EdtcProgram *program, struct EdtcParams *out);

/**
 * Cycle count given by the program's `repeat` directive; 0 for a null handle.
 *
 * # Safety
 * `program` must be null or a live handle.
 */
uint64_t edtc_program_cycles(const struct EdtcProgram *program);

/**
 * Drive period `T`; 0 for a null handle.
 *
 * # Safety
 * `program` must be null or a live handle.
 */
double edtc_program_period(const struct EdtcProgram *program);

/**
 * Evolves the program for `cycles` periods (`cycles < 0` uses the program's
 * own count). Relaxation during pulses is enabled by `dissipative_pulse`.
 *
 * # Safety
 * `program` must be a live handle; `out` must be writable.
 */
enum EdtcStatus edtc_simulate(const struct EdtcProgram *program,
                              int64_t cycles,
                              bool dissipative_pulse,
                              struct EdtcSeries **out);

/**
 * # Safety
 * `series` must come from [`edtc_simulate`] and not be freed twice.
 */
void edtc_series_free(struct EdtcSeries *series);

/**
 * Number of samples; 0 for a null handle.
 *
 * # Safety
 * `series` must be null or a live handle.
 */
size_t edtc_series_len(const struct EdtcSeries *series);

/**
 * Copies sample times and magnetization components. Any output pointer may
 * be null to skip that column; non-null ones must hold `len` values.
 *
 * # Safety
 * `series` must be a live handle; each non-null buffer must hold `len` doubles.
 */
enum EdtcStatus edtc_series_copy(const struct EdtcSeries *series,
                                 double *t,
                                 double *mx,
                                 double *my,
                                 double *mz,
                                 size_t len);

/**
 * Spectrum of a simulated series. `pad = 0` picks the default padding.
 *
 * # Safety
 * `series` must be a live handle; `out` must be writable.
 */
enum EdtcStatus edtc_spectrum(const struct EdtcSeries *series,
                              size_t pad,
                              size_t window_bins,
                              struct EdtcSpectrum **out);

/**
 * Spectrum of caller-supplied `Mz` values.
 *
 * # Safety
 * `mz` must point to `n` doubles; `out` must be writable.
 */
enum EdtcStatus edtc_spectrum_of_values(const double *mz,
                                        size_t n,
                                        size_t pad,
                                        size_t window_bins,
                                        struct EdtcSpectrum **out);

/**
 * # Safety
 * `spectrum` must come from an `edtc_spectrum*` call and not be freed twice.
 */
void edtc_spectrum_free(struct EdtcSpectrum *spectrum);

/**
 * Number of frequency bins (the padded length); 0 for a null handle.
 *
 * # Safety
 * `spectrum` must be null or a live handle.
 */
size_t edtc_spectrum_len(const struct EdtcSpectrum *spectrum);

/**
 * # Safety
 * `spectrum` must be a live handle; `out` must be writable.
 */
enum EdtcStatus edtc_spectrum_summary(const struct EdtcSpectrum *spectrum,
                                      struct EdtcSpectrumSummary *out);

/**
 * Copies the frequency grid, complex amplitudes and power. Null outputs are
 * skipped; non-null ones must hold `len` values.
 *
 * # Safety
 * `spectrum` must be a live handle; each non-null buffer must hold `len` doubles.
 */
enum EdtcStatus edtc_spectrum_copy(const struct EdtcSpectrum *spectrum,
                                   double *nu,
                                   double *re,
                                   double *im,
                                   double *power,
                                   size_t len);

/**
 * Fits `n` points `(d[i], y[i])`; needs `n >= 4` and `d > 0`.
 *
 * # Safety
 * `d` and `y` must point to `n` doubles; `out` must be writable.
 */
enum EdtcStatus edtc_fit_power_law(const double *d,
                                   const double *y,
                                   size_t n,
                                   struct EdtcPowerLawFit *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EDTC_H */
