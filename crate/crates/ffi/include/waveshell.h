#ifndef WAVESHELL_H
#define WAVESHELL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WsStatus {
  WS_STATUS_OK = 0,
  WS_STATUS_INVALID_ARGUMENT = 1,
  WS_STATUS_CONFIG_ERROR = 2,
  WS_STATUS_RESOLUTION = 3,
  WS_STATUS_OUT_OF_DOMAIN = 4,
  WS_STATUS_THEOREM_SCOPE = 5,
  WS_STATUS_QUADRATURE_FAILURE = 6,
  WS_STATUS_IO = 7,
  WS_STATUS_NULL_POINTER = 8,
  WS_STATUS_PANIC = 9,
} WsStatus;

typedef enum WsDispersion {
  WS_DISPERSION_ZERO = 0,
  WS_DISPERSION_CUBIC = 1,
  WS_DISPERSION_FULL_SQRT = 2,
} WsDispersion;

typedef enum WsCommand {
  WS_COMMAND_CONVERGE = 0,
  WS_COMMAND_STATIONARY_PHASE = 1,
  WS_COMMAND_FRESNEL = 2,
  WS_COMMAND_BENCH = 3,
  WS_COMMAND_RECONSTRUCT = 4,
} WsCommand;

/**
 * Opaque parsed experiment configuration.
 */
typedef struct WsConfig WsConfig;

/**
 * Opaque shell field.
 */
typedef struct WsReconstruction WsReconstruction;

/**
 * Dispersion law and constants. `b3` is used by `Cubic`, `d0` by `FullSqrt`.
 */
typedef struct WsDispersionParams {
  enum WsDispersion kind;
  double c;
  double d0;
  double b3;
  double epsilon;
} WsDispersionParams;

/**
 * Inputs of [`ws_reconstruction_new`]. `rho <= 0` selects the plain
 * restriction. `n_polar` is ignored in `d = 1`, `n_azimuth` outside `d = 3`.
 */
typedef struct WsReconstructionParams {
  size_t dim;
  struct WsDispersionParams dispersion;
  double rho;
  double t;
  /**
   * NUL-terminated built-in data name (`default` or `gaussian`).
   */
  const char *initial_data;
  size_t n_polar;
  size_t n_azimuth;
  double z_min;
  double z_max;
  size_t z_nodes;
} WsReconstructionParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent call on this thread if it failed, else NULL. The pointer stays
 * valid until the next call into the library on this thread.
 */
const char *ws_last_error_message(void);

/**
 * Total phase `Φ(k, t)` of the exact multiplier `e^{-iΦ}`.
 *
 * # Safety
 * `params` and `out_phase` must be null or valid.
 */
enum WsStatus ws_dispersion_phase(const struct WsDispersionParams *params,
                                  double k_norm,
                                  double t,
                                  double *out_phase);

/**
 * Value of the smooth low-frequency cutoff weight.
 *
 * # Safety
 * `out_value` must be null or valid for writes.
 */
enum WsStatus ws_regularizer_eval(double rho, size_t dim, double xi, double *out_value);

/**
 * `∫₀^∞ cos(x²) dx` and `∫₀^∞ sin(x²) dx`.
 *
 * # Safety
 * Both outputs must be null or valid for writes.
 */
enum WsStatus ws_fresnel(double *out_cos, double *out_sin);

/**
 * # Safety
 * Both outputs must be null or valid for writes.
 */
enum WsStatus ws_oscillatory_integral(double beta, double n, double *out_re, double *out_im);

/**
 * Stationary-phase functional of a shipped test function centered at
 * `kappa` (`dim` components), on the smallest admissible sphere rule scaled
 * by `quad_scale`.
 *
 * # Safety
 * `test_fn` must be null or NUL-terminated, `kappa` null or readable for `dim` values, outputs null or writable.
 */
enum WsStatus ws_stationary_phase(size_t dim,
                                  const char *test_fn,
                                  const double *kappa,
                                  double n,
                                  double quad_scale,
                                  double *out_re,
                                  double *out_im);

/**
 * Builds the shell field of a built-in initial spectrum at time `t`.
 *
 * # Safety
 * `params` must be null or valid, with `initial_data` null or NUL-terminated; `out_handle` null or writable.
 */
enum WsStatus ws_reconstruction_new(const struct WsReconstructionParams *params,
                                    struct WsReconstruction **out_handle);

/**
 * Evaluates the field at `count` points stored row-major in `points`
 * (`count × dim`), writing interleaved `re, im` pairs to `out_values`.
 *
 * # Safety
 * `handle` must come from `ws_reconstruction_new`; `points` readable for `count × dim` values and `out_values` writable for `2 × count`.
 */
enum WsStatus ws_reconstruction_eval(const struct WsReconstruction *handle,
                                     const double *points,
                                     size_t count,
                                     double *out_values);

/**
 * Number of evaluations that hit the origin, where the field is set to zero.
 *
 * # Safety
 * `handle` must be null or come from `ws_reconstruction_new`.
 */
size_t ws_reconstruction_degenerate_hits(const struct WsReconstruction *handle);

/**
 * # Safety
 * `handle` must be null or come from `ws_reconstruction_new`, and is invalid afterwards.
 */
void ws_reconstruction_free(struct WsReconstruction *handle);

/**
 * Parses `key = value` config text. Relative `tabulated:` paths resolve
 * against the working directory.
 *
 * # Safety
 * `text` must be null or NUL-terminated; `out_config` null or writable.
 */
enum WsStatus ws_config_parse(const char *text, struct WsConfig **out_config);

/**
 * # Safety
 * `config` must be null or come from `ws_config_parse`, and is invalid afterwards.
 */
void ws_config_free(struct WsConfig *config);

/**
 * Runs one experiment and returns its CSV text; free it with
 * [`ws_string_free`].
 *
 * # Safety
 * `config` must be null or come from `ws_config_parse`; `out_csv` null or writable.
 */
enum WsStatus ws_config_run(const struct WsConfig *config, enum WsCommand command, char **out_csv);

/**
 * # Safety
 * `s` must be null or a string returned by this library, and is invalid afterwards.
 */
void ws_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WAVESHELL_H */
