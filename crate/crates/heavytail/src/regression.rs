//! Heavy-tail least squares: fit one (ridge) regressor per disjoint
//! subsample, then pick a single candidate by the median of pairwise
//! quadratic-form distances under per-group (or pooled) second-moment
//! matrices. The data-dependent metric keeps the selection meaningful even
//! when covariates are too heavy-tailed for a single empirical covariance to
//! be trusted.

use nalgebra::{DMatrix, DVector};

use crate::dataset::{Dataset, Truth};
use crate::error::{Error, Result};
use crate::metric_select::{Procedure, SelectionReport};
use crate::mom::{lower_median, partition_indices};

/// Default group-count constant in `k = ceil(C ln(1/delta))`.
pub const GROUP_CONSTANT_DEFAULT: f64 = 18.0;

/// Preset for the noisy-oracle variant, which needs a larger margin.
pub const GROUP_CONSTANT_NOISY: f64 = 45.0;

/// How the number of groups is chosen.
#[derive(Debug, Clone, Copy)]
pub enum GroupSpec {
    /// Explicit group count.
    Count(usize),
    /// `k = ceil(c * ln(1/delta))`.
    Confidence { delta: f64, c: f64 },
}

impl GroupSpec {
    pub fn confidence(delta: f64) -> Self {
        GroupSpec::Confidence {
            delta,
            c: GROUP_CONSTANT_DEFAULT,
        }
    }

    pub fn resolve(&self) -> Result<usize> {
        match *self {
            GroupSpec::Count(k) if k >= 1 => Ok(k),
            GroupSpec::Count(k) => Err(Error::InvalidArgument(format!("k must be >= 1, got {k}"))),
            GroupSpec::Confidence { delta, c } => {
                let delta_ok = 0.0 < delta && delta < 1.0;
                if !delta_ok || c.is_nan() || c <= 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "confidence needs delta in (0,1) and c > 0, got ({delta}, {c})"
                    )));
                }
                Ok((c * (1.0 / delta).ln()).ceil().max(1.0) as usize)
            }
        }
    }
}

/// Which second-moment matrices drive the selection metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaVariant {
    /// One matrix per group, as estimated on that group.
    PerGroup,
    /// A single matrix pooled over the union of the groups.
    Pooled,
}

/// Whether the median in the selection step includes the `j = i` term.
/// The pairwise-quadratic-form selection excludes it; the generic noisy
/// procedure includes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelfTerm {
    Include,
    Exclude,
}

#[derive(Debug, Clone)]
pub struct RegressionConfig {
    /// Ridge weight; zero gives ordinary least squares.
    pub lambda: f64,
    pub groups: GroupSpec,
    pub variant: SigmaVariant,
    pub seed: u64,
}

impl RegressionConfig {
    pub fn with_k(k: usize, lambda: f64, seed: u64) -> Self {
        RegressionConfig {
            lambda,
            groups: GroupSpec::Count(k),
            variant: SigmaVariant::PerGroup,
            seed,
        }
    }
}

/// Per-group or pooled second-moment matrices attached to a fitted model.
#[derive(Debug, Clone)]
pub enum GroupSigmas {
    PerGroup(Vec<DMatrix<f64>>),
    Pooled(DMatrix<f64>),
}

/// A fitted heavy-tail regression model.
#[derive(Debug, Clone)]
pub struct RegressionModel {
    /// The selected candidate's weights.
    pub weights: DVector<f64>,
    pub report: SelectionReport,
    /// All candidate weight vectors, in group order.
    pub group_weights: Vec<DVector<f64>>,
    pub group_sigmas: GroupSigmas,
}

impl RegressionModel {
    /// One row per candidate: index, selection score, selected flag, and the
    /// candidate's weights.
    pub fn to_csv_string(&self) -> String {
        let d = self.weights.len();
        let mut out = String::from("index,r,selected");
        for j in 1..=d {
            out.push_str(&format!(",w{j}"));
        }
        out.push('\n');
        for (i, w) in self.group_weights.iter().enumerate() {
            let selected = if i == self.report.selected_index { 1 } else { 0 };
            out.push_str(&format!("{i},{},{selected}", self.report.radii[i]));
            for j in 0..d {
                out.push_str(&format!(",{}", w[j]));
            }
            out.push('\n');
        }
        out
    }
}

/// Empirical second-moment matrix `(1/m) X^T X`, symmetrized after
/// accumulation so it is exactly symmetric.
pub fn empirical_second_moment(xg: &DMatrix<f64>) -> DMatrix<f64> {
    let m = xg.nrows().max(1) as f64;
    let raw = xg.transpose() * xg / m;
    (&raw + raw.transpose()) * 0.5
}

/// Symmetric eigendecomposition pseudo-inverse with the spectral cutoff
/// `sigma_max * d * eps`.
fn symmetric_pinv(a: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = a.clone().symmetric_eigen();
    let max_ev = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = max_ev * a.nrows() as f64 * f64::EPSILON;
    let inv = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues
            .iter()
            .map(|v| if v.abs() > cutoff { 1.0 / v } else { 0.0 }),
    );
    &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose()
}

/// Solve the regularized normal equations `(Sigma_g + lambda I) w = X^T y / m`.
///
/// With `lambda = 0` and a singular group second moment, returns the
/// minimum-norm least-squares solution (pseudo-inverse semantics).
pub fn fit_group_least_squares(
    xg: &DMatrix<f64>,
    yg: &DVector<f64>,
    lambda: f64,
) -> Result<DVector<f64>> {
    if xg.nrows() == 0 {
        return Err(Error::InvalidArgument("empty group".into()));
    }
    if xg.nrows() != yg.len() {
        return Err(Error::DimensionMismatch {
            context: "group rows vs responses",
            expected: xg.nrows(),
            got: yg.len(),
        });
    }
    if xg.iter().any(|v| !v.is_finite()) || yg.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "least squares inputs",
        });
    }
    let m = xg.nrows() as f64;
    let d = xg.ncols();
    let mut a = empirical_second_moment(xg);
    for i in 0..d {
        a[(i, i)] += lambda;
    }
    let b = xg.transpose() * yg / m;
    if let Some(chol) = a.clone().cholesky() {
        let w = chol.solve(&b);
        if w.iter().all(|v| v.is_finite()) {
            return Ok(w);
        }
    }
    Ok(symmetric_pinv(&a) * b)
}

fn quadratic_form(a: &DMatrix<f64>, v: &DVector<f64>, lambda: f64) -> f64 {
    let av = a * v;
    v.dot(&av) + lambda * v.dot(v)
}

/// Median-of-quadratic-forms selection among candidate weight vectors.
///
/// `sigmas` holds one matrix per candidate, or a single pooled matrix. The
/// score of candidate `i` is the lower median over `j` of
/// `<w_i - w_j, (Sigma_j + lambda I)(w_i - w_j)>`; these are squared
/// distances, and since squaring is monotone the argmin matches that of the
/// distance medians.
pub fn select_candidate_weights(
    weights: &[DVector<f64>],
    sigmas: &[DMatrix<f64>],
    lambda: f64,
    self_term: SelfTerm,
) -> Result<SelectionReport> {
    let k = weights.len();
    if k == 0 {
        return Err(Error::EmptyCandidateSet);
    }
    let pooled = sigmas.len() == 1;
    if !pooled && sigmas.len() != k {
        return Err(Error::DimensionMismatch {
            context: "selection sigmas",
            expected: k,
            got: sigmas.len(),
        });
    }
    let mut radii = Vec::with_capacity(k);
    for i in 0..k {
        let mut values = Vec::with_capacity(k);
        for j in 0..k {
            if j == i && self_term == SelfTerm::Exclude {
                continue;
            }
            let sigma = if pooled { &sigmas[0] } else { &sigmas[j] };
            let diff = &weights[i] - &weights[j];
            let q = quadratic_form(sigma, &diff, lambda);
            if !q.is_finite() {
                return Err(Error::NonFinite {
                    context: "selection quadratic form",
                });
            }
            values.push(q);
        }
        // k = 1 with the self term excluded leaves nothing to rank.
        radii.push(lower_median(&values).unwrap_or(0.0));
    }
    let min = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let tie_indices: Vec<usize> = radii
        .iter()
        .enumerate()
        .filter(|(_, r)| **r == min)
        .map(|(i, _)| i)
        .collect();
    Ok(SelectionReport {
        selected_index: tie_indices[0],
        radii,
        tie_indices,
        procedure: Procedure::MedianDistanceNoisy,
    })
}

fn rows_subset(x: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), x.ncols(), |r, c| x[(idx[r], c)])
}

fn vec_subset(y: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|i| y[*i]))
}

/// Subsampled least squares with median-distance selection: partition the
/// sample into `k` groups, fit each group with ridge weight `lambda`,
/// estimate per-group (or pooled) second moments, and return the candidate
/// whose median quadratic-form distance to the others is smallest.
pub fn heavy_tail_regress(data: &Dataset, config: &RegressionConfig) -> Result<RegressionModel> {
    let k = config.groups.resolve()?;
    let n = data.n();
    let groups = partition_indices(n, k, config.seed)?;

    let mut group_weights = Vec::with_capacity(k);
    let mut per_group_sigmas = Vec::with_capacity(k);
    for idx in &groups {
        let xg = rows_subset(&data.x, idx);
        let yg = vec_subset(&data.y, idx);
        group_weights.push(fit_group_least_squares(&xg, &yg, config.lambda)?);
        per_group_sigmas.push(empirical_second_moment(&xg));
    }

    let (selection_sigmas, group_sigmas) = match config.variant {
        SigmaVariant::PerGroup => (per_group_sigmas.clone(), GroupSigmas::PerGroup(per_group_sigmas)),
        SigmaVariant::Pooled => {
            let union: Vec<usize> = groups.concat();
            let pooled = empirical_second_moment(&rows_subset(&data.x, &union));
            (vec![pooled.clone()], GroupSigmas::Pooled(pooled))
        }
    };

    let report =
        select_candidate_weights(&group_weights, &selection_sigmas, config.lambda, SelfTerm::Exclude)?;
    Ok(RegressionModel {
        weights: group_weights[report.selected_index].clone(),
        report,
        group_weights,
        group_sigmas,
    })
}

/// Fit the full sample directly (empirical risk minimization), for baseline
/// comparisons.
pub fn erm_fit(data: &Dataset, lambda: f64) -> Result<DVector<f64>> {
    fit_group_least_squares(&data.x, &data.y, lambda)
}

/// Excess squared loss `(1/2) (w - w_opt)^T Sigma (w - w_opt)`, following
/// the convention that the squared loss carries a factor 1/2.
pub fn excess_loss(weights: &DVector<f64>, truth: &Truth) -> Result<f64> {
    if weights.len() != truth.w_opt.len() {
        return Err(Error::DimensionMismatch {
            context: "excess loss weights",
            expected: truth.w_opt.len(),
            got: weights.len(),
        });
    }
    let diff = weights - &truth.w_opt;
    Ok(0.5 * quadratic_form(&truth.sigma, &diff, 0.0))
}

/// Excess loss relative to the optimal loss `L_opt = sigma^2 / 2`; requires
/// the dataset's noise variance.
pub fn excess_loss_ratio(weights: &DVector<f64>, truth: &Truth) -> Result<f64> {
    let noise = truth.noise_variance.ok_or(Error::MissingTruth)?;
    if noise <= 0.0 {
        return Err(Error::InvalidArgument(
            "excess loss ratio needs positive noise variance".into(),
        ));
    }
    Ok(excess_loss(weights, truth)? / (0.5 * noise))
}

/// Monte Carlo estimate of the gradient second moment
/// `E || Sigma^{-1/2} x (x^T w_opt - y) ||^2` from a dataset with truth.
pub fn estimate_grad_moment(data: &Dataset) -> Result<f64> {
    let truth = data.truth.as_ref().ok_or(Error::MissingTruth)?;
    let eig = truth.sigma.clone().symmetric_eigen();
    let max_ev = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = max_ev * truth.sigma.nrows() as f64 * f64::EPSILON;
    let inv_sqrt = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues
            .iter()
            .map(|v| if *v > cutoff { 1.0 / v.sqrt() } else { 0.0 }),
    );
    let root = &eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.transpose();
    let mut total = 0.0;
    for i in 0..data.n() {
        let x = data.x.row(i).transpose();
        let residual = x.dot(&truth.w_opt) - data.y[i];
        total += (&root * x * residual).norm_squared();
    }
    Ok(total / data.n() as f64)
}

/// Candidate accuracy scale `2 sqrt(6 gamma k M / (n alpha^2))` given the
/// gradient second moment `M`; diagnostic only.
pub fn loss_epsilon(grad_moment: f64, gamma: f64, k: usize, n: usize, alpha: f64) -> f64 {
    2.0 * (6.0 * gamma * k as f64 * grad_moment / (n as f64 * alpha * alpha)).sqrt()
}

/// Smallest `m` with `m >= 80 r_lambda^2 ln(4 m^2 / delta)`, found by
/// fixed-point iteration. A sample-size heuristic for when a group's
/// empirical second moment is a factor-2 approximation; diagnostic only,
/// never gates execution.
pub fn chernoff_sample_size(r_lambda: f64, delta: f64) -> Result<usize> {
    let delta_ok = 0.0 < delta && delta < 1.0;
    if r_lambda.is_nan() || r_lambda <= 0.0 || !delta_ok {
        return Err(Error::InvalidArgument(format!(
            "need r_lambda > 0 and delta in (0,1), got ({r_lambda}, {delta})"
        )));
    }
    let c = 80.0 * r_lambda * r_lambda;
    let need = |m: f64| c * (4.0 * m * m / delta).ln();
    let mut m = c.max(2.0);
    for _ in 0..200 {
        let next = need(m).max(2.0);
        if (next - m).abs() < 0.5 {
            m = next;
            break;
        }
        m = next;
    }
    let mut out = m.ceil() as usize;
    // Fixed point can overshoot by a step; walk down to the boundary.
    while out > 2 && (out - 1) as f64 >= need((out - 1) as f64) {
        out -= 1;
    }
    Ok(out)
}
