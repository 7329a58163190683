#ifndef LIA_H
#define LIA_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define LIA_METRIC_EUCLIDEAN 1

#define LIA_METRIC_HYPERBOLIC -1

#define LIA_BC_PROJECTED 0

#define LIA_BC_SELF_SIMILARITY 1

#define LIA_BC_RADIATION 2

typedef enum LiaStatus {
  LIA_STATUS_OK = 0,
  LIA_STATUS_NULL_POINTER = 1,
  LIA_STATUS_INVALID_ARGUMENT = 2,
  LIA_STATUS_CONFIG = 3,
  LIA_STATUS_SOLVER = 4,
  LIA_STATUS_IO = 5,
  LIA_STATUS_BUFFER_TOO_SMALL = 6,
  LIA_STATUS_PANIC = 7,
} LiaStatus;

/**
 * Exact self-similar frame profile on a uniform grid.
 */
typedef struct LiaProfile LiaProfile;

/**
 * Reports of one run; two-stage runs hold two.
 */
typedef struct LiaReport LiaReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread (empty if none).
 * Valid until the next failing call on the same thread.
 */
const char *lia_last_error(void);

/**
 * Library version, static storage.
 */
const char *lia_version(void);

/**
 * `A3 = exp(-sign c0^2 pi / 2)`; NaN for an unknown metric code.
 */
double lia_closed_form_a3(double c0, int32_t metric_code);

/**
 * Integrate the exact profile at time `t` on `[-length, length]` with spacing `ds`.
 *
 * # Safety
 * `out` must be a valid pointer to write a handle into.
 */
enum LiaStatus lia_profile_new(double c0,
                               double t,
                               int32_t metric_code,
                               double length,
                               double ds,
                               struct LiaProfile **out);

/**
 * Number of grid nodes; 0 for a null handle.
 *
 * # Safety
 * `handle` must be null or come from [`lia_profile_new`].
 */
size_t lia_profile_len(const struct LiaProfile *handle);

/**
 * Copy nodes into `s` and tangents (x, y, z interleaved) into `tangents`.
 *
 * # Safety
 * `s` needs room for `len` values and `tangents` for `3 len`.
 */
enum LiaStatus lia_profile_tangents(const struct LiaProfile *handle,
                                    double *s,
                                    double *tangents,
                                    size_t len);

/**
 * Limit directions `A-`, `A+` read off the profile ends (needs `length >= 20`).
 *
 * # Safety
 * `a_minus` and `a_plus` each need room for three values.
 */
enum LiaStatus lia_profile_asymptotics(const struct LiaProfile *handle,
                                       double *a_minus,
                                       double *a_plus);

/**
 * # Safety
 * `handle` must be null or come from [`lia_profile_new`], and is invalid afterwards.
 */
void lia_profile_free(struct LiaProfile *handle);

/**
 * Backward finite-difference run from the exact profile at `t = 1`.
 * `asymptotic_bc` selects the two-term boundary instead of the fixed one.
 *
 * # Safety
 * `probes` must hold `n_probes` values (may be null when `n_probes` is 0);
 * `out` must be a valid pointer to write a handle into.
 */
enum LiaStatus lia_fd_run_backward(double c0,
                                   int32_t metric_code,
                                   double length,
                                   double ds,
                                   double dt,
                                   double t_end,
                                   bool asymptotic_bc,
                                   const double *probes,
                                   size_t n_probes,
                                   struct LiaReport **out);

/**
 * Backward spectral run from the exact profile at `t = 1`.
 * `refine_threshold <= 0` keeps the degree fixed.
 *
 * # Safety
 * As for [`lia_fd_run_backward`].
 */
enum LiaStatus lia_spectral_run_backward(double c0,
                                         int32_t metric_code,
                                         double length,
                                         size_t degree,
                                         double dt,
                                         double t_end,
                                         int32_t bc_code,
                                         double refine_threshold,
                                         const double *probes,
                                         size_t n_probes,
                                         struct LiaReport **out);

/**
 * Run a configuration in the flat `key = value` format. With a non-null
 * `out_dir` the artifacts are written there as well.
 *
 * # Safety
 * `config` must be a nul-terminated string, `out_dir` null or one.
 */
enum LiaStatus lia_run_config(const char *config, const char *out_dir, struct LiaReport **out);

/**
 * Number of stages held (1, or 2 for two-stage runs); 0 for null.
 *
 * # Safety
 * `handle` must be null or a live report handle.
 */
size_t lia_report_stages(const struct LiaReport *handle);

/**
 * Final time, step count, and number of probes of one stage.
 *
 * # Safety
 * `handle` must be a live report handle; output pointers must be valid.
 */
enum LiaStatus lia_report_summary(const struct LiaReport *handle,
                                  size_t index,
                                  double *final_t,
                                  uint64_t *steps,
                                  size_t *n_probes);

/**
 * Time, curvature at `s = 0`, and max curvature error of one probe.
 *
 * # Safety
 * `handle` must be a live report handle; output pointers must be valid.
 */
enum LiaStatus lia_report_probe(const struct LiaReport *handle,
                                size_t index,
                                size_t probe,
                                double *t,
                                double *c_origin,
                                double *max_error);

/**
 * JSON of one stage; release with [`lia_string_free`]. Null on error.
 *
 * # Safety
 * `handle` must be a live report handle.
 */
char *lia_report_json(const struct LiaReport *handle, size_t index);

/**
 * # Safety
 * `handle` must be null or a live report handle, and is invalid afterwards.
 */
void lia_report_free(struct LiaReport *handle);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void lia_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIA_H */
