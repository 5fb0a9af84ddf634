#ifndef HHOFENN_H
#define HHOFENN_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes of every fallible call.
typedef enum HhoStatus {
  HHO_STATUS_OK = 0,
  HHO_STATUS_NULL_POINTER = 1,
  HHO_STATUS_INVALID_ARGUMENT = 2,
  HHO_STATUS_UNKNOWN_ID = 3,
  HHO_STATUS_DIMENSION_MISMATCH = 4,
  HHO_STATUS_NON_FINITE = 5,
  HHO_STATUS_BUFFER_TOO_SMALL = 6,
  HHO_STATUS_INTERNAL = 7,
} HhoStatus;

// A benchmark objective of fixed dimension.
typedef struct HhoObjective HhoObjective;

// The outcome of one optimizer run.
typedef struct HhoRun HhoRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *hho_version(void);

// Copies the calling thread's last error message into `buf` (truncated and
// always NUL-terminated when `capacity > 0`). Returns the full message
// length in bytes, excluding the terminator.
//
// # Safety
// `buf` must be null or point to `capacity` writable bytes.
size_t hho_last_error_message(char *buf, size_t capacity);

// Creates the benchmark `name` (e.g. "sphere", "rastrigin") at dimension `dim`.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum HhoStatus hho_objective_new(const char *name, size_t dim, struct HhoObjective **out);

// Releases an objective. Null is ignored.
//
// # Safety
// `obj` must come from [`hho_objective_new`] and not be used afterwards.
void hho_objective_free(struct HhoObjective *obj);

// Dimension of the objective, 0 for null.
//
// # Safety
// `obj` must be null or a live handle.
size_t hho_objective_dim(const struct HhoObjective *obj);

// Writes the box bounds into `lower` and `upper`, each of `capacity` values.
//
// # Safety
// `obj` must be a live handle; the buffers must hold `capacity` values.
enum HhoStatus hho_objective_bounds(const struct HhoObjective *obj,
                                    double *lower,
                                    double *upper,
                                    size_t capacity);

// Known optimum value, written to `out`; `*has_optimum` is 0 when the
// function has none.
//
// # Safety
// All pointers must be valid.
enum HhoStatus hho_objective_optimum(const struct HhoObjective *obj,
                                     int32_t *has_optimum,
                                     double *out);

// Evaluates the objective at `x`. `noise_seed` only matters for the noisy
// quartic.
//
// # Safety
// `x` must hold `len` values and `out` be valid.
enum HhoStatus hho_objective_evaluate(const struct HhoObjective *obj,
                                      const double *x,
                                      size_t len,
                                      uint64_t noise_seed,
                                      double *out);

// Minimizes the objective with `algorithm` ("hho_plus", "hho",
// "gwo_baseline", "random_search").
//
// # Safety
// `obj` must be a live handle, `algorithm` a NUL-terminated string and
// `out` valid.
enum HhoStatus hho_run(const struct HhoObjective *obj,
                       const char *algorithm,
                       size_t population,
                       size_t iterations,
                       uint64_t seed,
                       struct HhoRun **out);

// Releases a run. Null is ignored.
//
// # Safety
// `run` must come from [`hho_run`] and not be used afterwards.
void hho_run_free(struct HhoRun *run);

// Best fitness found, NaN for null.
//
// # Safety
// `run` must be null or a live handle.
double hho_run_final_fitness(const struct HhoRun *run);

// Objective evaluations spent, 0 for null.
//
// # Safety
// `run` must be null or a live handle.
uint64_t hho_run_evaluations(const struct HhoRun *run);

// Number of entries in the best-so-far trace, 0 for null.
//
// # Safety
// `run` must be null or a live handle.
size_t hho_run_trace_len(const struct HhoRun *run);

// Copies the best-so-far fitness after each iteration.
//
// # Safety
// `run` must be a live handle and `buf` hold `capacity` values.
enum HhoStatus hho_run_trace(const struct HhoRun *run, double *buf, size_t capacity);

// Copies the best position found.
//
// # Safety
// `run` must be a live handle and `buf` hold `capacity` values.
enum HhoStatus hho_run_position(const struct HhoRun *run, double *buf, size_t capacity);

// Two-sided rank-sum p-value of samples `a` and `b`. NaN when every
// pooled value is identical.
//
// # Safety
// `a` and `b` must hold `n_a` and `n_b` values; `p_value` must be valid.
enum HhoStatus hho_rank_sum_test(const double *a,
                                 size_t n_a,
                                 const double *b,
                                 size_t n_b,
                                 double *p_value);

// Friedman mean ranks (1 = best, lower values rank better) of a row-major
// `n_functions x n_algorithms` table of mean fitness values.
//
// # Safety
// `cells` must hold `n_functions * n_algorithms` values and `mean_ranks`
// `n_algorithms`.
enum HhoStatus hho_friedman_mean_ranks(const double *cells,
                                       size_t n_functions,
                                       size_t n_algorithms,
                                       double *mean_ranks);

// Exploration threshold used by the elite evolution step at iteration `t`
// of `max_iterations`.
//
// # Safety
// `out` must be valid.
enum HhoStatus hho_adaptive_threshold(size_t t, size_t max_iterations, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HHOFENN_H */
