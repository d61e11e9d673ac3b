//! Sparse linear estimation: an l1-penalized least-squares solver, the
//! subsampled heavy-tail variant with Euclidean median-distance selection,
//! and restricted-eigenvalue diagnostics.
//!
//! The solver minimizes `(1/2n) ||X w - y||^2 + lambda ||w||_1` by cyclic
//! coordinate descent with soft-thresholding and certificate-based stopping:
//! iteration ends when the worst per-coordinate stationarity violation falls
//! below `tol`. Checks against the unnormalized objective
//! `(1/2) ||Psi w - y||^2 + lambda_total ||w||_1` convert via
//! `lambda_total = n * lambda`.

use nalgebra::{DMatrix, DVector};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metric_select::{select_median_distance_set, CandidateSet, SelectionReport};
use crate::mom::partition_indices;
use crate::regression::GroupSpec;

fn soft_threshold(z: f64, lambda: f64) -> f64 {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        0.0
    }
}

/// Worst per-coordinate stationarity violation of the l1 objective at `w`:
/// zero coordinates need `|g_j| <= lambda`, active ones
/// `g_j = lambda * sign(w_j)`, where `g_j = (1/n) X_j^T (y - X w)`.
pub fn kkt_gap(x: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>, lambda: f64) -> f64 {
    let n = x.nrows() as f64;
    let residual = y - x * w;
    let mut gap = 0.0f64;
    for j in 0..x.ncols() {
        let g = x.column(j).dot(&residual) / n;
        let v = if w[j] == 0.0 {
            (g.abs() - lambda).max(0.0)
        } else {
            (g - lambda * w[j].signum()).abs()
        };
        gap = gap.max(v);
    }
    gap
}

/// Cyclic coordinate descent for `(1/2n) ||X w - y||^2 + lambda ||w||_1`.
///
/// Stops when the KKT violation is at most `tol`; running out of sweeps
/// yields an error carrying the last iterate and its gap.
pub fn lasso_fit(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<DVector<f64>> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "lambda must be > 0, got {lambda}"
        )));
    }
    if tol.is_nan() || tol <= 0.0 || max_iter == 0 {
        return Err(Error::InvalidArgument(
            "tol must be > 0 and max_iter >= 1".into(),
        ));
    }
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "lasso rows vs responses",
            expected: x.nrows(),
            got: y.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context: "lasso inputs" });
    }
    let n = x.nrows() as f64;
    let d = x.ncols();
    let col_scale: Vec<f64> = (0..d).map(|j| x.column(j).norm_squared() / n).collect();

    let mut w = DVector::zeros(d);
    let mut residual = y.clone();
    for _ in 0..max_iter {
        for j in 0..d {
            if col_scale[j] == 0.0 {
                continue;
            }
            let old = w[j];
            let g = x.column(j).dot(&residual) / n;
            let new = soft_threshold(g + col_scale[j] * old, lambda) / col_scale[j];
            if new != old {
                residual -= x.column(j) * (new - old);
                w[j] = new;
            }
        }
        if kkt_gap(x, y, &w, lambda) <= tol {
            return Ok(w);
        }
    }
    let gap = kkt_gap(x, y, &w, lambda);
    Err(Error::LassoNoConvergence {
        iterations: max_iter,
        iterate: w.iter().copied().collect(),
        kkt_gap: gap,
    })
}

/// Configuration for the subsampled heavy-tail estimator.
#[derive(Debug, Clone)]
pub struct HeavyLassoConfig {
    /// Noise standard-deviation bound.
    pub sigma: f64,
    /// Sparse operator norm of the design's second-moment square root.
    pub eta: f64,
    pub groups: GroupSpec,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl HeavyLassoConfig {
    pub fn new(sigma: f64, eta: f64, delta: f64, seed: u64) -> Self {
        HeavyLassoConfig {
            sigma,
            eta,
            groups: GroupSpec::confidence(delta),
            tol: 1e-8,
            max_iter: 100_000,
            seed,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.groups = GroupSpec::Count(k);
        self
    }
}

/// Per-group penalty `2 sqrt(sigma^2 eta^2 ln(2d) / m)` for groups of size `m`.
pub fn group_lambda(sigma: f64, eta: f64, d: usize, group_size: usize) -> f64 {
    2.0 * (sigma * sigma * eta * eta * (2.0 * d as f64).ln() / group_size as f64).sqrt()
}

/// Subsampled l1 estimation: fit one lasso per group, then select among the
/// candidate weight vectors by median distance under the plain Euclidean
/// metric.
pub fn heavy_tail_lasso(
    data: &Dataset,
    config: &HeavyLassoConfig,
) -> Result<(DVector<f64>, SelectionReport)> {
    if config.sigma.is_nan() || config.sigma <= 0.0 || config.eta.is_nan() || config.eta <= 0.0 {
        return Err(Error::InvalidArgument(
            "sigma and eta must be positive".into(),
        ));
    }
    let k = config.groups.resolve()?;
    let n = data.n();
    if n < 2 * k {
        return Err(Error::InvalidArgument(format!(
            "need n >= 2k samples, got n = {n}, k = {k}"
        )));
    }
    let d = data.d();
    let groups = partition_indices(n, k, config.seed)?;
    let group_size = n / k;
    let lambda = group_lambda(config.sigma, config.eta, d, group_size);

    let mut candidates = Vec::with_capacity(k);
    for idx in &groups {
        let xg = DMatrix::from_fn(idx.len(), d, |r, c| data.x[(idx[r], c)]);
        let yg = DVector::from_iterator(idx.len(), idx.iter().map(|i| data.y[*i]));
        candidates.push(lasso_fit(&xg, &yg, lambda, config.tol, config.max_iter)?);
    }

    let set = CandidateSet::new(candidates)?;
    let report = select_median_distance_set(&set, |a: &DVector<f64>, b: &DVector<f64>| {
        (a - b).norm()
    })?;
    let weights = set[report.selected_index].clone();
    Ok((weights, report))
}

/// Indices of the `s` largest-magnitude coordinates, ties broken by lower
/// index.
fn top_s_support(u: &DVector<f64>, s: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..u.len()).collect();
    order.sort_by(|&a, &b| {
        u[b].abs()
            .partial_cmp(&u[a].abs())
            .unwrap()
            .then(a.cmp(&b))
    });
    order.truncate(s);
    order
}

/// l2 norm of the `s` largest-magnitude coordinates.
pub fn top_s_norm(u: &DVector<f64>, s: usize) -> f64 {
    top_s_support(u, s)
        .iter()
        .map(|&i| u[i] * u[i])
        .sum::<f64>()
        .sqrt()
}

/// Membership in the restricted-eigenvalue cone: the l1 mass off the top-`s`
/// coordinates is at most three times the l1 mass on them.
pub fn in_re_cone(u: &DVector<f64>, s: usize) -> bool {
    let support = top_s_support(u, s);
    let on: f64 = support.iter().map(|&i| u[i].abs()).sum();
    let total: f64 = u.iter().map(|v| v.abs()).sum();
    total - on <= 3.0 * on + 1e-12 * (1.0 + total)
}

/// Grid minimization of `||Psi u||_2 / ||u_[s]||_2` over cone directions.
///
/// The grid enumerates the faces of the unit cube with coordinate step
/// `resolution`; the ratio is scale-invariant, so cube-surface points stand
/// in for sphere directions. Grids at `resolution/2` contain the grid at
/// `resolution`, so refining never increases the result. The returned value
/// is an upper bound on the true constant, tightening as the resolution
/// shrinks; the cost grows like `(2/resolution)^(d-1)`, hence the guard.
pub fn re_constant_gamma(psi: &DMatrix<f64>, s: usize, resolution: f64) -> Result<f64> {
    let d = psi.ncols();
    if d > 6 || s > 2 {
        return Err(Error::DeskScaleGuard(format!(
            "requires d <= 6 and s <= 2, got d = {d}, s = {s}"
        )));
    }
    if s == 0 || s > d {
        return Err(Error::InvalidArgument(format!(
            "s must be in 1..=d, got {s}"
        )));
    }
    if !(resolution > 0.0 && resolution <= 0.05) {
        return Err(Error::DeskScaleGuard(format!(
            "resolution must be in (0, 0.05], got {resolution}"
        )));
    }

    let steps = (1.0 / resolution).floor() as i64;
    let mut best = f64::INFINITY;
    let mut u = DVector::zeros(d);
    // One face per (coordinate, sign); remaining coordinates sweep the grid.
    for face in 0..d {
        for face_sign in [-1.0f64, 1.0] {
            let free: Vec<usize> = (0..d).filter(|c| *c != face).collect();
            let mut counter = vec![-steps; free.len()];
            loop {
                u[face] = face_sign;
                for (slot, c) in free.iter().enumerate() {
                    u[*c] = counter[slot] as f64 * resolution;
                }
                if in_re_cone(&u, s) {
                    let denom = top_s_norm(&u, s);
                    if denom > 0.0 {
                        let ratio = (psi * &u).norm() / denom;
                        if ratio < best {
                            best = ratio;
                        }
                    }
                }
                // Odometer increment over the free coordinates.
                let mut slot = 0;
                loop {
                    if slot == free.len() {
                        break;
                    }
                    counter[slot] += 1;
                    if counter[slot] <= steps {
                        break;
                    }
                    counter[slot] = -steps;
                    slot += 1;
                }
                if slot == free.len() {
                    break;
                }
            }
        }
    }
    Ok(best)
}

/// Exact sparse operator norm: the maximum top singular value over all
/// column submatrices of size `s`. Enumeration is exponential in `s`, hence
/// the guard.
pub fn sparse_operator_norm_eta(psi: &DMatrix<f64>, s: usize) -> Result<f64> {
    let d = psi.ncols();
    if d > 20 || s > 3 {
        return Err(Error::DeskScaleGuard(format!(
            "requires d <= 20 and s <= 3, got d = {d}, s = {s}"
        )));
    }
    if s == 0 || s > d {
        return Err(Error::InvalidArgument(format!(
            "s must be in 1..=d, got {s}"
        )));
    }
    let mut best = 0.0f64;
    let mut subset: Vec<usize> = (0..s).collect();
    loop {
        let sub = DMatrix::from_fn(psi.nrows(), s, |r, c| psi[(r, subset[c])]);
        let top = sub.singular_values().max();
        best = best.max(top);
        // Next lexicographic s-subset of 0..d.
        let mut i = s;
        loop {
            if i == 0 {
                return Ok(best);
            }
            i -= 1;
            if subset[i] != i + d - s {
                subset[i] += 1;
                for j in i + 1..s {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Parameter-error bound `12 lambda sqrt(s) / gamma^2` for the unnormalized
/// objective's multiplier.
pub fn lasso_oracle_bound(lambda: f64, s: usize, gamma: f64) -> Result<f64> {
    if gamma == 0.0 {
        return Err(Error::REConditionFails);
    }
    Ok(12.0 * lambda * (s as f64).sqrt() / (gamma * gamma))
}

/// Restricted-eigenvalue diagnostics for a design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct REReport {
    pub gamma: f64,
    pub eta: f64,
    pub s: usize,
    /// Grid step used for the gamma search.
    pub resolution: f64,
}

impl REReport {
    pub fn compute(psi: &DMatrix<f64>, s: usize, resolution: f64) -> Result<Self> {
        Ok(REReport {
            gamma: re_constant_gamma(psi, s, resolution)?,
            eta: sparse_operator_norm_eta(psi, s)?,
            s,
            resolution,
        })
    }

    /// Key-value text block.
    pub fn to_text(&self) -> String {
        format!(
            "gamma = {}\neta = {}\ns = {}\nresolution = {}\ngamma_method = grid_search\neta_method = exact_support_enum\n",
            self.gamma, self.eta, self.s, self.resolution
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut gamma = None;
        let mut eta = None;
        let mut s = None;
        let mut resolution = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::Parse {
                line: lineno + 1,
                message: "expected `key = value`".into(),
            })?;
            let value = value.trim();
            match key.trim() {
                "gamma" => gamma = value.parse().ok(),
                "eta" => eta = value.parse().ok(),
                "s" => s = value.parse().ok(),
                "resolution" => resolution = value.parse().ok(),
                "gamma_method" | "eta_method" => {}
                other => {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        match (gamma, eta, s, resolution) {
            (Some(gamma), Some(eta), Some(s), Some(resolution)) => Ok(REReport {
                gamma,
                eta,
                s,
                resolution,
            }),
            _ => Err(Error::Parse {
                line: 1,
                message: "missing gamma, eta, s, or resolution".into(),
            }),
        }
    }
}
