/* C bindings for the heavytail robust-estimation library. */

#ifndef HEAVYTAIL_H
#define HEAVYTAIL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum HtStatus {
  HtOk = 0,
  HtNullPointer = 1,
  HtInvalidArgument = 2,
  HtNumericalError = 3,
  HtNoConvergence = 4,
  HtInternalError = 5,
} HtStatus;

/**
 * Opaque dataset handle: design matrix plus responses.
 */
typedef struct HtDataset HtDataset;

/**
 * Opaque fitted heavy-tail regression model.
 */
typedef struct HtRegressionModel HtRegressionModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a NUL-terminated static string.
 */
const char *ht_version(void);

/**
 * Median-of-means estimate of `data[0..len]` with `k` groups.
 *
 * # Safety
 * `data` must point to `len` readable doubles and `out` to one writable
 * double.
 */
enum HtStatus ht_median_of_means(const double *data,
                                 size_t len,
                                 size_t k,
                                 uint64_t seed,
                                 double *out);

/**
 * Deviation bound `sigma * sqrt(6k/n)`.
 */
double ht_mom_deviation_bound(double sigma, size_t n, size_t k);

/**
 * Group count `ceil(4.5 ln(1/delta))` for a confidence level in (0,1);
 * returns 0 for an invalid `delta`.
 */
size_t ht_groups_for_confidence(double delta);

/**
 * Median-distance selection over a `k x k` row-major distance table.
 * Writes the selected index and, when `out_radii` is non-null, all `k`
 * per-candidate radii.
 *
 * # Safety
 * `dist` must hold `k*k` doubles; `out_index` one `size_t`; `out_radii`
 * either null or `k` doubles.
 */
enum HtStatus ht_select_median_distance(const double *dist,
                                        size_t k,
                                        size_t *out_index,
                                        double *out_radii);

/**
 * Geometric median of `n` points of dimension `dim` (row-major buffer)
 * by Weiszfeld iteration; writes `dim` coordinates.
 *
 * # Safety
 * `points` must hold `n*dim` doubles and `out` must hold `dim`.
 */
enum HtStatus ht_geometric_median(const double *points,
                                  size_t n,
                                  size_t dim,
                                  double tol,
                                  size_t max_iter,
                                  double *out);

/**
 * Create a dataset from a row-major `n x d` design and `n` responses.
 * Returns null on invalid input.
 *
 * # Safety
 * `x` must hold `n*d` doubles and `y` must hold `n`.
 */
struct HtDataset *ht_dataset_new(const double *x, size_t n, size_t d, const double *y);

/**
 * Destroy a dataset handle. Null is ignored.
 *
 * # Safety
 * `ds` must be a pointer previously returned by [`ht_dataset_new`], or null.
 */
void ht_dataset_free(struct HtDataset *ds);

/**
 * Subsampled least squares with median-distance selection. `pooled`
 * selects the pooled-second-moment variant when nonzero. On success writes
 * a model handle through `out`.
 *
 * # Safety
 * `ds` must be a live dataset handle; `out` must point to a writable
 * pointer slot.
 */
enum HtStatus ht_heavy_tail_regress(const struct HtDataset *ds,
                                    double lambda,
                                    size_t k,
                                    uint64_t seed,
                                    int32_t pooled,
                                    struct HtRegressionModel **out);

/**
 * Number of candidate groups in a fitted model.
 *
 * # Safety
 * `model` must be a live model handle.
 */
size_t ht_regression_group_count(const struct HtRegressionModel *model);

/**
 * Index of the selected candidate.
 *
 * # Safety
 * `model` must be a live model handle.
 */
size_t ht_regression_selected_index(const struct HtRegressionModel *model);

/**
 * Copy the selected candidate's `d` weights.
 *
 * # Safety
 * `model` must be live and `out` must hold `d` doubles.
 */
enum HtStatus ht_regression_weights(const struct HtRegressionModel *model, double *out);

/**
 * Copy the `k` per-candidate selection scores.
 *
 * # Safety
 * `model` must be live and `out` must hold `k` doubles (see
 * [`ht_regression_group_count`]).
 */
enum HtStatus ht_regression_radii(const struct HtRegressionModel *model, double *out);

/**
 * Destroy a model handle. Null is ignored.
 *
 * # Safety
 * `model` must be a pointer previously returned by
 * [`ht_heavy_tail_regress`], or null.
 */
void ht_regression_model_free(struct HtRegressionModel *model);

/**
 * l1-penalized least squares on the dataset; writes `d` weights.
 *
 * # Safety
 * `ds` must be a live dataset handle and `out_weights` must hold `d`
 * doubles.
 */
enum HtStatus ht_lasso_fit(const struct HtDataset *ds,
                           double lambda,
                           double tol,
                           size_t max_iter,
                           double *out_weights);

/**
 * Median-of-means covariance selection over `n x d` row-major samples;
 * writes the selected `d x d` matrix row-major.
 *
 * # Safety
 * `samples` must hold `n*d` doubles and `out_sigma` must hold `d*d`.
 */
enum HtStatus ht_cov_median_select(const double *samples,
                                   size_t n,
                                   size_t d,
                                   size_t k,
                                   uint64_t seed,
                                   double *out_sigma);

/**
 * Trace-norm shrinkage of a symmetric PSD `d x d` matrix (row-major);
 * writes the shrunk matrix row-major.
 *
 * # Safety
 * `sigma` and `out` must each hold `d*d` doubles.
 */
enum HtStatus ht_trace_norm_shrink(const double *sigma, size_t d, double lambda, double *out);

/**
 * Spectral norm of a symmetric `d x d` matrix (row-major).
 *
 * # Safety
 * `m` must hold `d*d` doubles and `out` one double.
 */
enum HtStatus ht_spectral_norm(const double *m, size_t d, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEAVYTAIL_H */
