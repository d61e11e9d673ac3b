//! Heavy-tail covariance estimation: median-of-means selection of an
//! empirical second-moment matrix under the spectral-norm metric, followed
//! by trace-norm shrinkage of the spectrum.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::metric_select::{select_median_distance_set, CandidateSet, SelectionReport};
use crate::mom::partition_indices;
use crate::regression::empirical_second_moment;

/// Symmetry tolerance for spectral operations.
const SYMMETRY_TOL: f64 = 1e-9;

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            context: "matrix must be square",
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let gap = (m[(i, j)] - m[(j, i)]).abs();
            let scale = m[(i, j)].abs().max(m[(j, i)].abs());
            if gap > SYMMETRY_TOL * (1.0 + scale) {
                return Err(Error::InvalidArgument(format!(
                    "matrix is not symmetric at ({i},{j}): {} vs {}",
                    m[(i, j)],
                    m[(j, i)]
                )));
            }
        }
    }
    Ok(())
}

/// Spectral norm of a symmetric matrix: the largest absolute eigenvalue.
pub fn spectral_norm(m: &DMatrix<f64>) -> Result<f64> {
    check_symmetric(m)?;
    let sym = (m + m.transpose()) * 0.5;
    Ok(sym.symmetric_eigen().eigenvalues.amax())
}

/// Spectral-norm distance between two symmetric matrices.
pub fn spectral_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let diff = a - b;
    let sym = (&diff + diff.transpose()) * 0.5;
    sym.symmetric_eigen().eigenvalues.amax()
}

/// Partition the rows into `k` groups, take each group's empirical second
/// moment, and select one by median distance under the spectral norm.
pub fn cov_median_select(
    samples: &DMatrix<f64>,
    k: usize,
    seed: u64,
) -> Result<(DMatrix<f64>, SelectionReport)> {
    let groups = partition_indices(samples.nrows(), k, seed)?;
    let sigmas: Vec<DMatrix<f64>> = groups
        .iter()
        .map(|idx| {
            let xg = DMatrix::from_fn(idx.len(), samples.ncols(), |r, c| samples[(idx[r], c)]);
            empirical_second_moment(&xg)
        })
        .collect();
    let set = CandidateSet::new(sigmas)?;
    let report = set_spectral_select(&set)?;
    let sigma_hat = set[report.selected_index].clone();
    Ok((sigma_hat, report))
}

fn set_spectral_select(set: &CandidateSet<DMatrix<f64>>) -> Result<SelectionReport> {
    select_median_distance_set(set, |a: &DMatrix<f64>, b: &DMatrix<f64>| spectral_distance(a, b))
}

/// Proximal trace-norm shrinkage of a symmetric PSD matrix: eigenvalues are
/// soft-thresholded at `lambda`, eigenvectors kept. Exact minimizer of
/// `(1/2) ||sigma_hat - A||_F^2 + lambda ||A||_tr` for PSD input.
///
/// Indefinite input (an eigenvalue below `-1e-9`) is rejected rather than
/// silently routed through singular values.
pub fn trace_norm_shrink(sigma_hat: &DMatrix<f64>, lambda: f64) -> Result<DMatrix<f64>> {
    if lambda < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "lambda must be >= 0, got {lambda}"
        )));
    }
    check_symmetric(sigma_hat)?;
    let sym = (sigma_hat + sigma_hat.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    if let Some(min) = eig
        .eigenvalues
        .iter()
        .copied()
        .min_by(|a, b| a.partial_cmp(b).unwrap())
    {
        if min < -1e-9 {
            return Err(Error::NotPsd { eigenvalue: min });
        }
    }
    let shrunk = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|mu| (mu - lambda).max(0.0)),
    );
    let out = &eig.eigenvectors * DMatrix::from_diagonal(&shrunk) * eig.eigenvectors.transpose();
    Ok((&out + out.transpose()) * 0.5)
}

/// Best rank-`r` approximation of a symmetric matrix by eigenvalue
/// truncation (largest magnitudes kept).
pub fn rank_truncation(m: &DMatrix<f64>, r: usize) -> Result<DMatrix<f64>> {
    check_symmetric(m)?;
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .abs()
            .partial_cmp(&eig.eigenvalues[a].abs())
            .unwrap()
    });
    let kept = DVector::from_iterator(
        eig.eigenvalues.len(),
        (0..eig.eigenvalues.len()).map(|i| {
            if order[..r.min(order.len())].contains(&i) {
                eig.eigenvalues[i]
            } else {
                0.0
            }
        }),
    );
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&kept) * eig.eigenvectors.transpose())
}

fn numeric_rank(m: &DMatrix<f64>) -> usize {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let max = eig.eigenvalues.amax();
    if max == 0.0 {
        return 0;
    }
    let cutoff = max * m.nrows() as f64 * 1e-12;
    eig.eigenvalues.iter().filter(|v| v.abs() > cutoff).count()
}

/// One candidate comparison in [`kolt_bound_check`].
#[derive(Debug, Clone)]
pub struct KoltEntry {
    pub rank: usize,
    /// `(1/2) ||sigma_lambda - sigma_true||_F^2`.
    pub lhs: f64,
    /// `(1/2) ||A - sigma_true||_F^2 + (1/2)(sqrt(2)+1)^2 lambda^2 rank(A)`.
    pub rhs: f64,
    /// `rhs - lhs`; nonnegative when the shrinkage inequality holds.
    pub margin: f64,
}

/// Shrinkage-quality report against a family of reference matrices.
#[derive(Debug, Clone)]
pub struct KoltReport {
    /// Set when `lambda < ||sigma_hat - sigma_true||_2`, in which case the
    /// inequality carries no guarantee.
    pub vacuous: bool,
    pub entries: Vec<KoltEntry>,
}

impl KoltReport {
    pub fn all_hold(&self) -> bool {
        self.entries.iter().all(|e| e.margin >= -1e-9)
    }
}

/// Check the low-rank shrinkage inequality
/// `(1/2)||S_l - S||_F^2 <= (1/2)||A - S||_F^2 + (1/2)(sqrt(2)+1)^2 l^2 rank(A)`
/// for each candidate `A`. With no explicit candidates, uses the true matrix
/// and its best rank-r truncations for r = 1..d.
pub fn kolt_bound_check(
    sigma_lambda: &DMatrix<f64>,
    sigma_true: &DMatrix<f64>,
    sigma_hat: &DMatrix<f64>,
    lambda: f64,
    candidates: Option<&[DMatrix<f64>]>,
) -> Result<KoltReport> {
    let vacuous = lambda < spectral_distance(sigma_hat, sigma_true);
    let constant = 0.5 * (2.0f64.sqrt() + 1.0) * (2.0f64.sqrt() + 1.0) * lambda * lambda;
    let lhs = 0.5 * (sigma_lambda - sigma_true).norm().powi(2);

    let default_candidates: Vec<DMatrix<f64>>;
    let refs: &[DMatrix<f64>] = match candidates {
        Some(c) => c,
        None => {
            let d = sigma_true.nrows();
            let mut list = vec![sigma_true.clone()];
            for r in 1..=d {
                list.push(rank_truncation(sigma_true, r)?);
            }
            default_candidates = list;
            &default_candidates
        }
    };

    let entries = refs
        .iter()
        .map(|a| {
            let rank = numeric_rank(a);
            let rhs = 0.5 * (a - sigma_true).norm().powi(2) + constant * rank as f64;
            KoltEntry {
                rank,
                lhs,
                rhs,
                margin: rhs - lhs,
            }
        })
        .collect();
    Ok(KoltReport { vacuous, entries })
}

/// Rate-shaped shrinkage level `c * (d ln(1/delta) / n)^(1/(2(1+1/eta)))`.
/// The caller supplies `c`; the distribution-dependent constant in front is
/// too conservative to be usable numerically, so only the shape is kept.
pub fn shrinkage_lambda_rate(c: f64, d: usize, delta: f64, n: usize, eta: f64) -> f64 {
    let exponent = 1.0 / (2.0 * (1.0 + 1.0 / eta));
    c * (d as f64 * (1.0 / delta).ln() / n as f64).powf(exponent)
}

/// Selected covariance plus its shrinkage, bundled.
#[derive(Debug, Clone)]
pub struct CovEstimate {
    pub sigma_hat: DMatrix<f64>,
    pub report: SelectionReport,
    pub lambda: f64,
    pub sigma_lambda: DMatrix<f64>,
}

/// Select a per-group covariance by spectral median distance and shrink it.
pub fn cov_estimate(samples: &DMatrix<f64>, k: usize, seed: u64, lambda: f64) -> Result<CovEstimate> {
    let (sigma_hat, report) = cov_median_select(samples, k, seed)?;
    let sigma_lambda = trace_norm_shrink(&sigma_hat, lambda)?;
    Ok(CovEstimate {
        sigma_hat,
        report,
        lambda,
        sigma_lambda,
    })
}
