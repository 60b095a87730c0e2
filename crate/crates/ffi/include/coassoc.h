#ifndef COASSOC_H
#define COASSOC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CoassocStatus {
  COASSOC_STATUS_OK = 0,
  COASSOC_STATUS_NULL_POINTER = 1,
  COASSOC_STATUS_INVALID_ARGUMENT = 2,
  COASSOC_STATUS_IO = 3,
  COASSOC_STATUS_FORMAT = 4,
  COASSOC_STATUS_DIMENSION = 5,
  COASSOC_STATUS_CONFIG = 6,
  COASSOC_STATUS_NUMERIC = 7,
  COASSOC_STATUS_PANIC = 8,
} CoassocStatus;

typedef enum CoassocMethod {
  COASSOC_METHOD_EAC = 0,
  COASSOC_METHOD_LWCA = 1,
  COASSOC_METHOD_NWCA = 2,
  COASSOC_METHOD_SDGCA = 3,
  COASSOC_METHOD_ONLY_S_STAR = 4,
  COASSOC_METHOD_NWCA_ONLY = 5,
  COASSOC_METHOD_NO_S_MANIFOLD = 6,
  COASSOC_METHOD_NO_D_MANIFOLD = 7,
  COASSOC_METHOD_NO_BOTH_MANIFOLD = 8,
} CoassocMethod;

// A pool of base partitions over the same samples.
typedef struct CoassocPool CoassocPool;

// Consensus labels and solver summary.
typedef struct CoassocResult CoassocResult;

// Consensus parameters. Start from [`coassoc_params_default`].
typedef struct CoassocParams {
  double lambda;
  double eta;
  double theta;
  double tau;
  double beta;
  size_t k_steps;
  double rho;
  double gamma_max;
  double gamma_init;
  double epsilon;
  size_t max_iters;
} CoassocParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null if it succeeded.
// The pointer stays valid until the next call into this library on the
// same thread.
const char *coassoc_last_error(void);

struct CoassocParams coassoc_params_default(void);

// Builds a pool from `m` partitions of `n` labels each, stored row-major in
// `labels`. Labels within a partition may be any values; they are
// re-encoded densely.
//
// # Safety
// `labels` must point to `m * n` readable values and `out` must be writable.
enum CoassocStatus coassoc_pool_from_labels(const size_t *labels,
                                            size_t n,
                                            size_t m,
                                            uint64_t seed,
                                            struct CoassocPool **out);

// Reads a pool file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` must be writable.
enum CoassocStatus coassoc_pool_load(const char *path, struct CoassocPool **out);

// Writes a pool file.
//
// # Safety
// `pool` must come from this library and `path` must be NUL-terminated.
enum CoassocStatus coassoc_pool_save(const struct CoassocPool *pool, const char *path);

// Number of samples, or 0 for a null pool.
//
// # Safety
// `pool` must be null or come from this library.
size_t coassoc_pool_n_samples(const struct CoassocPool *pool);

// Number of partitions, or 0 for a null pool.
//
// # Safety
// `pool` must be null or come from this library.
size_t coassoc_pool_len(const struct CoassocPool *pool);

// # Safety
// `pool` must be null or come from this library and not be freed twice.
void coassoc_pool_free(struct CoassocPool *pool);

// Clusters the whole pool into `k` groups with `method`. A null `params`
// means the defaults.
//
// # Safety
// `pool` must come from this library, `method` must be one of the declared
// enumerators, `params` must be null or readable and `out` must be writable.
enum CoassocStatus coassoc_cluster(const struct CoassocPool *pool,
                                   size_t k,
                                   enum CoassocMethod method,
                                   const struct CoassocParams *params,
                                   struct CoassocResult **out);

// Number of labelled samples, or 0 for a null result.
//
// # Safety
// `result` must be null or come from this library.
size_t coassoc_result_len(const struct CoassocResult *result);

// # Safety
// `result` must be null or come from this library.
size_t coassoc_result_n_clusters(const struct CoassocResult *result);

// Solver iterations; 0 for methods without a solver.
//
// # Safety
// `result` must be null or come from this library.
size_t coassoc_result_iterations(const struct CoassocResult *result);

// # Safety
// `result` must be null or come from this library.
bool coassoc_result_converged(const struct CoassocResult *result);

// Copies the labels into `dst`, which holds `len` values.
//
// # Safety
// `result` must come from this library and `dst` must hold `len` writable
// values.
enum CoassocStatus coassoc_result_labels(const struct CoassocResult *result,
                                         size_t *dst,
                                         size_t len);

// # Safety
// `result` must be null or come from this library and not be freed twice.
void coassoc_result_free(struct CoassocResult *result);

// NMI (arithmetic normalization), ARI and pairwise F of `pred` against
// `truth`. Any output pointer may be null.
//
// # Safety
// `pred` and `truth` must each hold `n` readable values.
enum CoassocStatus coassoc_score(const size_t *pred,
                                 const size_t *truth,
                                 size_t n,
                                 double *nmi,
                                 double *ari,
                                 double *f);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COASSOC_H */
