#ifndef OFFMOO_H
#define OFFMOO_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum OffmooStatus {
  OFFMOO_STATUS_OK = 0,
  OFFMOO_STATUS_NULL_POINTER = 1,
  OFFMOO_STATUS_INVALID_ARGUMENT = 2,
  OFFMOO_STATUS_CONFIG = 3,
  OFFMOO_STATUS_NUMERIC = 4,
  OFFMOO_STATUS_DATA = 5,
  OFFMOO_STATUS_VALIDATION = 6,
  OFFMOO_STATUS_METHOD = 7,
  OFFMOO_STATUS_PARSE = 8,
  OFFMOO_STATUS_IO = 9,
  OFFMOO_STATUS_PANIC = 10,
} OffmooStatus;

/**
 * A logged dataset with its rebuilt logging policy.
 */
typedef struct OffmooDataset OffmooDataset;

/**
 * A set of softmax policies sharing one parameter dimension.
 */
typedef struct OffmooPolicySet OffmooPolicySet;

/**
 * A benchmark problem turned into a contextual bandit.
 */
typedef struct OffmooProblem OffmooProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message of the last failed call on this thread, or null after a successful call.
 * The pointer stays valid until the next call into this library on the same thread.
 */
const char *offmoo_last_error(void);

/**
 * Builds a benchmark problem (`"ZDT1"`, `"DTLZ2"`, ...) with `d` features, `m` objectives and
 * `num_actions` actions drawn with `seed`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum OffmooStatus offmoo_problem_new(const char *name,
                                     size_t d,
                                     size_t m,
                                     size_t num_actions,
                                     uint64_t seed,
                                     struct OffmooProblem **out);

/**
 * # Safety
 * `problem` must be null or a handle from this library that has not been freed.
 */
void offmoo_problem_free(struct OffmooProblem *problem);

/**
 * Number of objectives, or 0 for a null handle.
 *
 * # Safety
 * `problem` must be null or a live handle.
 */
size_t offmoo_problem_num_objectives(const struct OffmooProblem *problem);

/**
 * Length of a policy parameter vector, or 0 for a null handle.
 *
 * # Safety
 * `problem` must be null or a live handle.
 */
size_t offmoo_problem_feature_dim(const struct OffmooProblem *problem);

/**
 * Logs `n` interactions with the ε-greedy Pareto logging policy and reward noise `sigma`.
 *
 * # Safety
 * `problem` must be a live handle and `out` a valid pointer.
 */
enum OffmooStatus offmoo_dataset_generate(const struct OffmooProblem *problem,
                                          size_t n,
                                          double epsilon,
                                          double sigma,
                                          uint64_t seed,
                                          struct OffmooDataset **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum OffmooStatus offmoo_dataset_load(const char *path, struct OffmooDataset **out);

/**
 * # Safety
 * `dataset` must be a live handle and `path` a NUL-terminated string.
 */
enum OffmooStatus offmoo_dataset_save(const struct OffmooDataset *dataset, const char *path);

/**
 * Number of logged records, or 0 for a null handle.
 *
 * # Safety
 * `dataset` must be null or a live handle.
 */
size_t offmoo_dataset_len(const struct OffmooDataset *dataset);

/**
 * # Safety
 * `dataset` must be null or a handle from this library that has not been freed.
 */
void offmoo_dataset_free(struct OffmooDataset *dataset);

/**
 * Builds `k` policies from `k * dim` parameters, one policy per row.
 *
 * # Safety
 * `theta` must point to `k * dim` readable values and `out` must be a valid pointer.
 */
enum OffmooStatus offmoo_policy_set_new(const double *theta,
                                        size_t k,
                                        size_t dim,
                                        struct OffmooPolicySet **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum OffmooStatus offmoo_policy_set_load(const char *path, struct OffmooPolicySet **out);

/**
 * # Safety
 * `policies` must be a live handle and `path` a NUL-terminated string.
 */
enum OffmooStatus offmoo_policy_set_save(const struct OffmooPolicySet *policies, const char *path);

/**
 * Number of policies, or 0 for a null handle.
 *
 * # Safety
 * `policies` must be null or a live handle.
 */
size_t offmoo_policy_set_len(const struct OffmooPolicySet *policies);

/**
 * Parameter dimension, or 0 for a null handle.
 *
 * # Safety
 * `policies` must be null or a live handle.
 */
size_t offmoo_policy_set_dim(const struct OffmooPolicySet *policies);

/**
 * Copies the `len * dim` parameters, one policy per row, into `out`.
 *
 * # Safety
 * `policies` must be a live handle and `out` must point to `out_len` writable values.
 */
enum OffmooStatus offmoo_policy_set_theta(const struct OffmooPolicySet *policies,
                                          double *out,
                                          size_t out_len);

/**
 * # Safety
 * `policies` must be null or a handle from this library that has not been freed.
 */
void offmoo_policy_set_free(struct OffmooPolicySet *policies);

/**
 * Hypervolume of `count` points in `[0,1]^m` against the origin.
 *
 * `method` is `"exact2d"`, `"incl-excl"`, `"scalarized:<N>"` or `"mc:<N>"`; null picks the
 * default for `m`. `seed` drives the randomized methods.
 *
 * # Safety
 * `points` must point to `count * m` readable values, `method` must be null or a
 * NUL-terminated string and `out` must be a valid pointer.
 */
enum OffmooStatus offmoo_hypervolume(const double *points,
                                     size_t count,
                                     size_t m,
                                     const char *method,
                                     uint64_t seed,
                                     double *out);

/**
 * Estimates every policy's per-objective value and confidence width from logged data.
 *
 * `estimator` is one of `ips`, `clipped`, `pess`, `dm`, `dr`, `snips`. `clip` is the clipping
 * level of `clipped` (pass infinity to disable). Both outputs receive `len * m` values, one
 * policy per row.
 *
 * # Safety
 * Handles must be live, `estimator` NUL-terminated, and `values`/`widths` must each point to
 * `out_len` writable values.
 */
enum OffmooStatus offmoo_estimate(const struct OffmooDataset *dataset,
                                  const struct OffmooPolicySet *policies,
                                  const char *estimator,
                                  double beta,
                                  double clip,
                                  double *values,
                                  double *widths,
                                  size_t out_len);

/**
 * Optimizes `k` policies for the hypervolume of their estimated values by policy gradient.
 *
 * `objective` is `true`, `mean`, `pess` or `ehvi:<N>`. Optimizer settings other than
 * `iterations`, `restarts` and `seed` keep their library defaults. `value_out` may be null.
 *
 * # Safety
 * `dataset` must be a live handle, `objective` NUL-terminated and `out` a valid pointer.
 */
enum OffmooStatus offmoo_optimize(const struct OffmooDataset *dataset,
                                  const char *objective,
                                  size_t k,
                                  double beta,
                                  size_t iterations,
                                  size_t restarts,
                                  uint64_t seed,
                                  struct OffmooPolicySet **out,
                                  double *value_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OFFMOO_H */
