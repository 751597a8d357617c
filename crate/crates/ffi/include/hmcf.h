#ifndef HMCF_H
#define HMCF_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HmcfStatus {
  HMCF_STATUS_OK = 0,
  HMCF_STATUS_NULL_POINTER = 1,
  HMCF_STATUS_INVALID_ARGUMENT = 2,
  HMCF_STATUS_DIMENSION_MISMATCH = 3,
  HMCF_STATUS_SINGULAR = 4,
  HMCF_STATUS_CONFIG_ERROR = 5,
  HMCF_STATUS_INSTABILITY = 6,
  HMCF_STATUS_PANIC = 7,
} HmcfStatus;

typedef enum HmcfBarrierKind {
  HMCF_BARRIER_KIND_CYLINDER = 0,
  HMCF_BARRIER_KIND_GAUGE = 1,
  HMCF_BARRIER_KIND_EUCLID_BALL = 2,
  HMCF_BARRIER_KIND_SQRT_GAUGE = 3,
} HmcfBarrierKind;

/**
 * A catalog barrier on a group.
 */
typedef struct HmcfBarrier HmcfBarrier;

/**
 * A validated experiment configuration.
 */
typedef struct HmcfConfig HmcfConfig;

/**
 * A step-two group.
 */
typedef struct HmcfGroup HmcfGroup;

/**
 * The snapshots and extinction time of a finished evolution.
 */
typedef struct HmcfRun HmcfRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last error on this thread; valid until the next failing call.
 */
const char *hmcf_last_error_message(void);

/**
 * Builds a group from `n - m` structure matrices stored consecutively,
 * each `m x m` row-major (`b_len = (n - m) m^2`).
 *
 * # Safety
 * `b` must point to `b_len` doubles and `out` to writable storage.
 */
enum HmcfStatus hmcf_group_new(size_t m,
                               size_t n,
                               const double *b,
                               size_t b_len,
                               struct HmcfGroup **out);

/**
 * The first Heisenberg group (`m = 2`, `n = 3`).
 *
 * # Safety
 * `out` must point to writable storage.
 */
enum HmcfStatus hmcf_group_heisenberg(struct HmcfGroup **out);

/**
 * # Safety
 * `g` must come from a group constructor and not be used afterwards.
 */
void hmcf_group_free(struct HmcfGroup *g);

/**
 * # Safety
 * `g` must be a live group; `m`, `n` writable.
 */
enum HmcfStatus hmcf_group_dims(const struct HmcfGroup *g, size_t *m, size_t *n);

/**
 * `out = x o y`.
 *
 * # Safety
 * `x`, `y`, `out` must each hold `n` doubles.
 */
enum HmcfStatus hmcf_group_compose(const struct HmcfGroup *g,
                                   const double *x,
                                   const double *y,
                                   double *out);

/**
 * `out = x^-1`.
 *
 * # Safety
 * `x`, `out` must each hold `n` doubles.
 */
enum HmcfStatus hmcf_group_inverse(const struct HmcfGroup *g, const double *x, double *out);

/**
 * `out = delta_lambda(x)`, `lambda > 0`.
 *
 * # Safety
 * `x`, `out` must each hold `n` doubles.
 */
enum HmcfStatus hmcf_group_dilate(const struct HmcfGroup *g,
                                  double lambda,
                                  const double *x,
                                  double *out);

/**
 * Homogeneous norm `(|x_h|^4 + |x_v|^2)^(1/4)`.
 *
 * # Safety
 * `x` must hold `n` doubles; `out` writable.
 */
enum HmcfStatus hmcf_group_norm(const struct HmcfGroup *g, const double *x, double *out);

/**
 * Gauge distance `|x^-1 o y|`.
 *
 * # Safety
 * `x`, `y` must each hold `n` doubles; `out` writable.
 */
enum HmcfStatus hmcf_group_distance(const struct HmcfGroup *g,
                                    const double *x,
                                    const double *y,
                                    double *out);

/**
 * `F(q, A) = -tr A + q.Aq / |q|^2`; `Singular` when `q = 0`.
 *
 * # Safety
 * `q` must hold `m` doubles, `a` `m * m` doubles; `out` writable.
 */
enum HmcfStatus hmcf_mcf_operator(size_t m, const double *q, const double *a, double *out);

/**
 * `F_*(0, A)` and `F^*(0, A)` of a symmetric `m x m` matrix.
 *
 * # Safety
 * `a` must hold `m * m` doubles; `lower`, `upper` writable.
 */
enum HmcfStatus hmcf_envelopes(size_t m, const double *a, double *lower, double *upper);

/**
 * Catalog barrier `ct - U(x) + r`.
 *
 * # Safety
 * `g` must be a live group; `out` writable.
 */
enum HmcfStatus hmcf_barrier_new(const struct HmcfGroup *g,
                                 enum HmcfBarrierKind kind,
                                 double c,
                                 double r,
                                 struct HmcfBarrier **out);

/**
 * # Safety
 * `b` must come from `hmcf_barrier_new` and not be used afterwards.
 */
void hmcf_barrier_free(struct HmcfBarrier *b);

/**
 * Closed-form and recomputed `u_t + F(Xu, X^2 u)` at `(x, t)`; `Singular` at
 * characteristic points.
 *
 * # Safety
 * `x` must hold `n` doubles; outputs writable.
 */
enum HmcfStatus hmcf_barrier_operator(const struct HmcfBarrier *b,
                                      const double *x,
                                      double t,
                                      double *closed_form,
                                      double *computed);

/**
 * Extinction time `-r/c` of the barrier's zero level set.
 *
 * # Safety
 * `b` must be live; `out` writable.
 */
enum HmcfStatus hmcf_barrier_extinction_time(const struct HmcfBarrier *b, double *out);

/**
 * Parses a TOML experiment configuration.
 *
 * # Safety
 * `text` must be a NUL-terminated UTF-8 string; `out` writable.
 */
enum HmcfStatus hmcf_config_from_toml(const char *text, struct HmcfConfig **out);

/**
 * # Safety
 * `c` must come from `hmcf_config_from_toml` and not be used afterwards.
 */
void hmcf_config_free(struct HmcfConfig *c);

/**
 * Runs the configured evolution to `t_end` or extinction.
 *
 * # Safety
 * `cfg` must be live; `out` writable.
 */
enum HmcfStatus hmcf_evolve(const struct HmcfConfig *cfg, struct HmcfRun **out);

/**
 * # Safety
 * `r` must come from `hmcf_evolve` and not be used afterwards.
 */
void hmcf_run_free(struct HmcfRun *r);

/**
 * Number of snapshots and values per snapshot.
 *
 * # Safety
 * `r` must be live; outputs writable.
 */
enum HmcfStatus hmcf_run_shape(const struct HmcfRun *r, size_t *snapshots, size_t *nodes);

/**
 * `has_extinction` is set to 1 and `time` to the extinction time when the
 * run went extinct, otherwise `has_extinction` is 0.
 *
 * # Safety
 * `r` must be live; outputs writable.
 */
enum HmcfStatus hmcf_run_extinction_time(const struct HmcfRun *r,
                                         int32_t *has_extinction,
                                         double *time);

/**
 * Copies snapshot `index` (row-major node order) into `values` and its time into `time`.
 *
 * # Safety
 * `values` must hold `len` doubles; `time` writable.
 */
enum HmcfStatus hmcf_run_snapshot(const struct HmcfRun *r,
                                  size_t index,
                                  double *values,
                                  size_t len,
                                  double *time);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HMCF_H */
