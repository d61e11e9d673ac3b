//! C ABI for the heavytail estimators.
//!
//! Conventions: matrices are row-major `double` buffers; every fallible call
//! returns an [`HtStatus`] and writes results through out-pointers; datasets
//! and fitted models are opaque handles created and destroyed here. All
//! functions catch panics at the boundary and report them as
//! `HT_INTERNAL_ERROR` instead of unwinding into foreign frames.
//!
//! The generated header lives at `include/heavytail.h` after a build.

use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use nalgebra::{DMatrix, DVector};

use heavytail::covariance;
use heavytail::dataset::Dataset;
use heavytail::error::Error;
use heavytail::lasso;
use heavytail::metric_select;
use heavytail::mom;
use heavytail::regression::{self, GroupSpec, RegressionConfig, RegressionModel, SigmaVariant};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HtStatus {
    HtOk = 0,
    HtNullPointer = 1,
    HtInvalidArgument = 2,
    HtNumericalError = 3,
    HtNoConvergence = 4,
    HtInternalError = 5,
}

fn status_of(err: &Error) -> HtStatus {
    match err {
        Error::NoConvergence { .. } | Error::LassoNoConvergence { .. } => HtStatus::HtNoConvergence,
        Error::NonFinite { .. } | Error::NotPsd { .. } | Error::InvalidMetricValue { .. } => {
            HtStatus::HtNumericalError
        }
        _ => HtStatus::HtInvalidArgument,
    }
}

fn guarded(f: impl FnOnce() -> HtStatus) -> HtStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(HtStatus::HtInternalError)
}

/// Library version as a NUL-terminated static string.
#[no_mangle]
pub extern "C" fn ht_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Median-of-means estimate of `data[0..len]` with `k` groups.
///
/// # Safety
/// `data` must point to `len` readable doubles and `out` to one writable
/// double.
#[no_mangle]
pub unsafe extern "C" fn ht_median_of_means(
    data: *const f64,
    len: usize,
    k: usize,
    seed: u64,
    out: *mut f64,
) -> HtStatus {
    if data.is_null() || out.is_null() {
        return HtStatus::HtNullPointer;
    }
    let sample = std::slice::from_raw_parts(data, len);
    guarded(|| match mom::median_of_means(sample, &mom::MomConfig { k, seed }) {
        Ok(est) => {
            *out = est;
            HtStatus::HtOk
        }
        Err(err) => status_of(&err),
    })
}

/// Deviation bound `sigma * sqrt(6k/n)`.
#[no_mangle]
pub extern "C" fn ht_mom_deviation_bound(sigma: f64, n: usize, k: usize) -> f64 {
    mom::mom_deviation_bound(sigma, n, k)
}

/// Group count `ceil(4.5 ln(1/delta))` for a confidence level in (0,1);
/// returns 0 for an invalid `delta`.
#[no_mangle]
pub extern "C" fn ht_groups_for_confidence(delta: f64) -> usize {
    if 0.0 < delta && delta < 1.0 {
        mom::groups_for_confidence(delta)
    } else {
        0
    }
}

/// Median-distance selection over a `k x k` row-major distance table.
/// Writes the selected index and, when `out_radii` is non-null, all `k`
/// per-candidate radii.
///
/// # Safety
/// `dist` must hold `k*k` doubles; `out_index` one `size_t`; `out_radii`
/// either null or `k` doubles.
#[no_mangle]
pub unsafe extern "C" fn ht_select_median_distance(
    dist: *const f64,
    k: usize,
    out_index: *mut usize,
    out_radii: *mut f64,
) -> HtStatus {
    if dist.is_null() || out_index.is_null() {
        return HtStatus::HtNullPointer;
    }
    if k == 0 {
        return HtStatus::HtInvalidArgument;
    }
    let table = std::slice::from_raw_parts(dist, k * k);
    guarded(|| {
        let set = match metric_select::CandidateSet::new((0..k).collect::<Vec<usize>>()) {
            Ok(set) => set,
            Err(err) => return status_of(&err),
        };
        match metric_select::select_median_distance_set(&set, |a: &usize, b: &usize| {
            table[a * k + b]
        }) {
            Ok(report) => {
                *out_index = report.selected_index;
                if !out_radii.is_null() {
                    let radii = std::slice::from_raw_parts_mut(out_radii, k);
                    radii.copy_from_slice(&report.radii);
                }
                HtStatus::HtOk
            }
            Err(err) => status_of(&err),
        }
    })
}

/// Geometric median of `n` points of dimension `dim` (row-major buffer)
/// by Weiszfeld iteration; writes `dim` coordinates.
///
/// # Safety
/// `points` must hold `n*dim` doubles and `out` must hold `dim`.
#[no_mangle]
pub unsafe extern "C" fn ht_geometric_median(
    points: *const f64,
    n: usize,
    dim: usize,
    tol: f64,
    max_iter: usize,
    out: *mut f64,
) -> HtStatus {
    if points.is_null() || out.is_null() {
        return HtStatus::HtNullPointer;
    }
    if n == 0 || dim == 0 {
        return HtStatus::HtInvalidArgument;
    }
    let flat = std::slice::from_raw_parts(points, n * dim);
    guarded(|| {
        let pts: Vec<Vec<f64>> = (0..n).map(|i| flat[i * dim..(i + 1) * dim].to_vec()).collect();
        match metric_select::geometric_median_euclidean(&pts, tol, max_iter) {
            Ok(x) => {
                std::slice::from_raw_parts_mut(out, dim).copy_from_slice(&x);
                HtStatus::HtOk
            }
            Err(err) => status_of(&err),
        }
    })
}

/// Opaque dataset handle: design matrix plus responses.
pub struct HtDataset {
    inner: Dataset,
}

/// Create a dataset from a row-major `n x d` design and `n` responses.
/// Returns null on invalid input.
///
/// # Safety
/// `x` must hold `n*d` doubles and `y` must hold `n`.
#[no_mangle]
pub unsafe extern "C" fn ht_dataset_new(
    x: *const f64,
    n: usize,
    d: usize,
    y: *const f64,
) -> *mut HtDataset {
    if x.is_null() || y.is_null() || n == 0 || d == 0 {
        return std::ptr::null_mut();
    }
    let xs = std::slice::from_raw_parts(x, n * d);
    let ys = std::slice::from_raw_parts(y, n);
    let built = catch_unwind(AssertUnwindSafe(|| {
        Dataset::new(
            DMatrix::from_row_slice(n, d, xs),
            DVector::from_column_slice(ys),
        )
    }));
    match built {
        Ok(Ok(inner)) => Box::into_raw(Box::new(HtDataset { inner })),
        _ => std::ptr::null_mut(),
    }
}

/// Destroy a dataset handle. Null is ignored.
///
/// # Safety
/// `ds` must be a pointer previously returned by [`ht_dataset_new`], or null.
#[no_mangle]
pub unsafe extern "C" fn ht_dataset_free(ds: *mut HtDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Opaque fitted heavy-tail regression model.
pub struct HtRegressionModel {
    inner: RegressionModel,
}

/// Subsampled least squares with median-distance selection. `pooled`
/// selects the pooled-second-moment variant when nonzero. On success writes
/// a model handle through `out`.
///
/// # Safety
/// `ds` must be a live dataset handle; `out` must point to a writable
/// pointer slot.
#[no_mangle]
pub unsafe extern "C" fn ht_heavy_tail_regress(
    ds: *const HtDataset,
    lambda: f64,
    k: usize,
    seed: u64,
    pooled: i32,
    out: *mut *mut HtRegressionModel,
) -> HtStatus {
    if ds.is_null() || out.is_null() {
        return HtStatus::HtNullPointer;
    }
    let data = &(*ds).inner;
    guarded(|| {
        let config = RegressionConfig {
            lambda,
            groups: GroupSpec::Count(k),
            variant: if pooled != 0 {
                SigmaVariant::Pooled
            } else {
                SigmaVariant::PerGroup
            },
            seed,
        };
        match regression::heavy_tail_regress(data, &config) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(HtRegressionModel { inner: model }));
                HtStatus::HtOk
            }
            Err(err) => status_of(&err),
        }
    })
}

/// Number of candidate groups in a fitted model.
///
/// # Safety
/// `model` must be a live model handle.
#[no_mangle]
pub unsafe extern "C" fn ht_regression_group_count(model: *const HtRegressionModel) -> usize {
    if model.is_null() {
        return 0;
    }
    (*model).inner.group_weights.len()
}

/// Index of the selected candidate.
///
/// # Safety
/// `model` must be a live model handle.
#[no_mangle]
pub unsafe extern "C" fn ht_regression_selected_index(model: *const HtRegressionModel) -> usize {
    if model.is_null() {
        return 0;
    }
    (*model).inner.report.selected_index
}

/// Copy the selected candidate's `d` weights.
///
/// # Safety
/// `model` must be live and `out` must hold `d` doubles.
#[no_mangle]
pub unsafe extern "C" fn ht_regression_weights(
    model: *const HtRegressionModel,
    out: *mut f64,
) -> HtStatus {
    if model.is_null() || out.is_null() {
        return HtStatus::HtNullPointer;
    }
    let weights = &(*model).inner.weights;
    std::slice::from_raw_parts_mut(out, weights.len())
        .copy_from_slice(weights.as_slice());
    HtStatus::HtOk
}

/// Copy the `k` per-candidate selection scores.
///
/// # Safety
/// `model` must be live and `out` must hold `k` doubles (see
/// [`ht_regression_group_count`]).
#[no_mangle]
pub unsafe extern "C" fn ht_regression_radii(
    model: *const HtRegressionModel,
    out: *mut f64,
) -> HtStatus {
    if model.is_null() || out.is_null() {
        return HtStatus::HtNullPointer;
    }
    let radii = &(*model).inner.report.radii;
    std::slice::from_raw_parts_mut(out, radii.len()).copy_from_slice(radii);
    HtStatus::HtOk
}

/// Destroy a model handle. Null is ignored.
///
/// # Safety
/// `model` must be a pointer previously returned by
/// [`ht_heavy_tail_regress`], or null.
#[no_mangle]
pub unsafe extern "C" fn ht_regression_model_free(model: *mut HtRegressionModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// l1-penalized least squares on the dataset; writes `d` weights.
///
/// # Safety
/// `ds` must be a live dataset handle and `out_weights` must hold `d`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn ht_lasso_fit(
    ds: *const HtDataset,
    lambda: f64,
    tol: f64,
    max_iter: usize,
    out_weights: *mut f64,
) -> HtStatus {
    if ds.is_null() || out_weights.is_null() {
        return HtStatus::HtNullPointer;
    }
    let data = &(*ds).inner;
    guarded(|| match lasso::lasso_fit(&data.x, &data.y, lambda, tol, max_iter) {
        Ok(w) => {
            std::slice::from_raw_parts_mut(out_weights, w.len()).copy_from_slice(w.as_slice());
            HtStatus::HtOk
        }
        Err(err) => status_of(&err),
    })
}

/// Median-of-means covariance selection over `n x d` row-major samples;
/// writes the selected `d x d` matrix row-major.
///
/// # Safety
/// `samples` must hold `n*d` doubles and `out_sigma` must hold `d*d`.
#[no_mangle]
pub unsafe extern "C" fn ht_cov_median_select(
    samples: *const f64,
    n: usize,
    d: usize,
    k: usize,
    seed: u64,
    out_sigma: *mut f64,
) -> HtStatus {
    if samples.is_null() || out_sigma.is_null() {
        return HtStatus::HtNullPointer;
    }
    if n == 0 || d == 0 {
        return HtStatus::HtInvalidArgument;
    }
    let flat = std::slice::from_raw_parts(samples, n * d);
    guarded(|| {
        let m = DMatrix::from_row_slice(n, d, flat);
        match covariance::cov_median_select(&m, k, seed) {
            Ok((sigma, _)) => {
                let out = std::slice::from_raw_parts_mut(out_sigma, d * d);
                for i in 0..d {
                    for j in 0..d {
                        out[i * d + j] = sigma[(i, j)];
                    }
                }
                HtStatus::HtOk
            }
            Err(err) => status_of(&err),
        }
    })
}

/// Trace-norm shrinkage of a symmetric PSD `d x d` matrix (row-major);
/// writes the shrunk matrix row-major.
///
/// # Safety
/// `sigma` and `out` must each hold `d*d` doubles.
#[no_mangle]
pub unsafe extern "C" fn ht_trace_norm_shrink(
    sigma: *const f64,
    d: usize,
    lambda: f64,
    out: *mut f64,
) -> HtStatus {
    if sigma.is_null() || out.is_null() {
        return HtStatus::HtNullPointer;
    }
    if d == 0 {
        return HtStatus::HtInvalidArgument;
    }
    let flat = std::slice::from_raw_parts(sigma, d * d);
    guarded(|| {
        let m = DMatrix::from_row_slice(d, d, flat);
        match covariance::trace_norm_shrink(&m, lambda) {
            Ok(shrunk) => {
                let slot = std::slice::from_raw_parts_mut(out, d * d);
                for i in 0..d {
                    for j in 0..d {
                        slot[i * d + j] = shrunk[(i, j)];
                    }
                }
                HtStatus::HtOk
            }
            Err(err) => status_of(&err),
        }
    })
}

/// Spectral norm of a symmetric `d x d` matrix (row-major).
///
/// # Safety
/// `m` must hold `d*d` doubles and `out` one double.
#[no_mangle]
pub unsafe extern "C" fn ht_spectral_norm(m: *const f64, d: usize, out: *mut f64) -> HtStatus {
    if m.is_null() || out.is_null() {
        return HtStatus::HtNullPointer;
    }
    if d == 0 {
        return HtStatus::HtInvalidArgument;
    }
    let flat = std::slice::from_raw_parts(m, d * d);
    guarded(|| {
        let mat = DMatrix::from_row_slice(d, d, flat);
        match covariance::spectral_norm(&mat) {
            Ok(v) => {
                *out = v;
                HtStatus::HtOk
            }
            Err(err) => status_of(&err),
        }
    })
}
