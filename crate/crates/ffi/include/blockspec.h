#ifndef BLOCKSPEC_H
#define BLOCKSPEC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BlockspecStatus {
  BLOCKSPEC_STATUS_OK = 0,
  BLOCKSPEC_STATUS_INVALID_ARGUMENT = 1,
  BLOCKSPEC_STATUS_NULL_POINTER = 2,
  BLOCKSPEC_STATUS_BUFFER_TOO_SMALL = 3,
  BLOCKSPEC_STATUS_NUMERICAL = 4,
  BLOCKSPEC_STATUS_PANIC = 5,
} BlockspecStatus;

/**
 * Tabulated limit density and CDF.
 */
typedef struct BlockspecDensityGrid BlockspecDensityGrid;

/**
 * Limit model for one set of gamma weights.
 */
typedef struct BlockspecModel BlockspecModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *blockspec_last_error_message(void);

/**
 * # Safety
 * `gamma` must point to `p` doubles and `out` to writable storage for one pointer.
 */
enum BlockspecStatus blockspec_model_new(const double *gamma,
                                         size_t p,
                                         struct BlockspecModel **out);

/**
 * # Safety
 * `model` must come from `blockspec_model_new` and not be used afterwards. NULL is ignored.
 */
void blockspec_model_free(struct BlockspecModel *model);

/**
 * # Safety
 * `model` must be a live model handle and `out` writable.
 */
enum BlockspecStatus blockspec_model_support_bound(const struct BlockspecModel *model, double *out);

/**
 * Limit density at `t`, to absolute tolerance `quad_tol`.
 *
 * # Safety
 * `model` must be a live model handle and `out` writable.
 */
enum BlockspecStatus blockspec_limit_density(const struct BlockspecModel *model,
                                             double t,
                                             double quad_tol,
                                             double *out);

/**
 * Tabulates the density at `grid_size + 1` points.
 *
 * # Safety
 * `model` must be a live model handle and `out` writable.
 */
enum BlockspecStatus blockspec_density_grid_new(const struct BlockspecModel *model,
                                                size_t grid_size,
                                                double quad_tol,
                                                struct BlockspecDensityGrid **out);

/**
 * Number of grid points, or 0 for NULL.
 *
 * # Safety
 * `grid` must be NULL or a live grid handle.
 */
size_t blockspec_density_grid_len(const struct BlockspecDensityGrid *grid);

/**
 * Copies the grid, density and CDF columns; any output may be NULL to skip it.
 *
 * # Safety
 * `grid` must be a live grid handle; non-NULL outputs must hold `len` doubles.
 */
enum BlockspecStatus blockspec_density_grid_copy(const struct BlockspecDensityGrid *grid,
                                                 double *t,
                                                 double *density,
                                                 double *cdf,
                                                 size_t len);

/**
 * # Safety
 * `grid` must come from `blockspec_density_grid_new` and not be used afterwards. NULL is ignored.
 */
void blockspec_density_grid_free(struct BlockspecDensityGrid *grid);

/**
 * Ascending eigenvalues of one draw of `G` (divided by `sqrt(n)` when
 * `scaled`), seeded by `(master_seed, stream)`.
 *
 * # Safety
 * `gamma` must point to `p` doubles and `out` to `out_len >= n` writable doubles.
 */
enum BlockspecStatus blockspec_sample_spectrum(size_t n,
                                               const double *gamma,
                                               size_t p,
                                               uint64_t master_seed,
                                               uint64_t stream,
                                               bool scaled,
                                               double *out,
                                               size_t out_len);

/**
 * Ascending roots of the last matrix polynomial, i.e. the spectrum of the
 * deterministic block matrix.
 *
 * # Safety
 * `gamma` must point to `p` doubles and `out` to `out_len >= n` writable doubles.
 */
enum BlockspecStatus blockspec_roots(size_t n,
                                     const double *gamma,
                                     size_t p,
                                     bool scaled,
                                     double *out,
                                     size_t out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BLOCKSPEC_H */
