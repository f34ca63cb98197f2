#ifndef AGGDIFF_H
#define AGGDIFF_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum AggdiffStatus {
  AGGDIFF_STATUS_OK = 0,
  AGGDIFF_STATUS_NULL_POINTER = 1,
  AGGDIFF_STATUS_INVALID_ARGUMENT = 2,
  AGGDIFF_STATUS_CONFIG = 3,
  AGGDIFF_STATUS_NUMERICAL = 4,
  AGGDIFF_STATUS_IO = 5,
  AGGDIFF_STATUS_PANIC = 6,
} AggdiffStatus;

/**
 * Run configuration handle.
 */
typedef struct AggdiffConfig AggdiffConfig;

/**
 * Time-stepping handle.
 */
typedef struct AggdiffSolver AggdiffSolver;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *aggdiff_last_error(void);

/**
 * Writes a configuration with every default applied to `*out`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum AggdiffStatus aggdiff_config_default(struct AggdiffConfig **out);

/**
 * Parses a `key=value` configuration file into `*out`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum AggdiffStatus aggdiff_config_from_file(const char *path, struct AggdiffConfig **out);

/**
 * Sets one key. The configuration is left unchanged on failure.
 *
 * # Safety
 * `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
 */
enum AggdiffStatus aggdiff_config_set(struct AggdiffConfig *cfg,
                                      const char *key,
                                      const char *value);

/**
 * Releases a configuration. Null is ignored.
 *
 * # Safety
 * `cfg` must be null or a handle not yet freed.
 */
void aggdiff_config_free(struct AggdiffConfig *cfg);

/**
 * Builds a solver at `t = 0` from the configuration's initial profile.
 *
 * # Safety
 * `cfg` must be a live handle; `out` must be valid for writes.
 */
enum AggdiffStatus aggdiff_solver_new(const struct AggdiffConfig *cfg, struct AggdiffSolver **out);

/**
 * Takes one step of the CFL-limited size and writes it to `*dt_out` if
 * non-null.
 *
 * # Safety
 * `solver` must be a live handle; `dt_out` null or valid for writes.
 */
enum AggdiffStatus aggdiff_solver_step(struct AggdiffSolver *solver, double *dt_out);

/**
 * Steps until the solver time equals `t`, shortening the last step.
 *
 * # Safety
 * `solver` must be a live handle.
 */
enum AggdiffStatus aggdiff_solver_advance_to(struct AggdiffSolver *solver, double t);

/**
 * # Safety
 * `solver` must be a live handle; `out` valid for writes.
 */
enum AggdiffStatus aggdiff_solver_time(const struct AggdiffSolver *solver, double *out);

/**
 * Conserved mass of the current solution.
 *
 * # Safety
 * `solver` must be a live handle; `out` valid for writes.
 */
enum AggdiffStatus aggdiff_solver_mass(const struct AggdiffSolver *solver, double *out);

/**
 * Number of samples in the field, `n^dim`.
 *
 * # Safety
 * `solver` must be a live handle; `out` valid for writes.
 */
enum AggdiffStatus aggdiff_solver_len(const struct AggdiffSolver *solver, size_t *out);

/**
 * Copies the field, row-major in 2D, into `buf`, which holds `len` doubles.
 *
 * # Safety
 * `solver` must be a live handle; `buf` valid for `len` writes.
 */
enum AggdiffStatus aggdiff_solver_copy_field(const struct AggdiffSolver *solver,
                                             double *buf,
                                             size_t len);

/**
 * Releases a solver. Null is ignored.
 *
 * # Safety
 * `solver` must be null or a handle not yet freed.
 */
void aggdiff_solver_free(struct AggdiffSolver *solver);

/**
 * Integrates the configuration to its final time and writes the observable
 * series as CSV.
 *
 * # Safety
 * `cfg` must be a live handle; `path` a NUL-terminated string.
 */
enum AggdiffStatus aggdiff_run_to_csv(const struct AggdiffConfig *cfg, const char *path);

/**
 * Solves the Gagliardo-Nirenberg exponent relation for `r`; writes
 * `INFINITY` when `1/r = 0`.
 *
 * # Safety
 * `r_out` must be valid for writes.
 */
enum AggdiffStatus aggdiff_gn_solve(size_t dim,
                                    size_t m,
                                    size_t beta,
                                    double p,
                                    double q,
                                    double theta,
                                    double *r_out);

/**
 * Solves the Hardy-Littlewood-Sobolev exponent relation for `q`.
 *
 * # Safety
 * `q_out` must be valid for writes.
 */
enum AggdiffStatus aggdiff_hls_solve(size_t dim, double p, double lambda, double *q_out);

/**
 * Homogeneous Sobolev seminorm of order `m` of samples on the periodic box
 * `[-L/2, L/2)^dim` with `n` points per axis.
 *
 * # Safety
 * `values` must be valid for `len` reads; `out` valid for writes.
 */
enum AggdiffStatus aggdiff_sobolev_seminorm(size_t dim,
                                            size_t n,
                                            double extent,
                                            const double *values,
                                            size_t len,
                                            size_t m,
                                            double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AGGDIFF_H */
