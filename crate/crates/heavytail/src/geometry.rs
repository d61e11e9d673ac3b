//! Constructive finite metric spaces and simplex geometry used to probe the
//! selection procedures: worst-case instances where any set-based choice is
//! a factor 3 away from the target, geometric-median traps, and the inradius
//! formulas behind the Hilbert- and Banach-space lower bounds.
//!
//! Everything here is deterministic and desk-scale; the fixtures feed the
//! property tests of [`crate::metric_select`].

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Relative tolerance for triangle-inequality validation. The constructions
/// use small exact integers, so the slack only covers rounding.
pub const TRIANGLE_TOL: f64 = 1e-9;

/// Explicit symmetric distance table over named points, together with the
/// candidate multiset assignment and the admissible target labels.
#[derive(Debug, Clone)]
pub struct FiniteMetric {
    labels: Vec<String>,
    dist: Vec<Vec<f64>>,
    /// Labels (by index) that may play the role of the unknown target.
    pub w_opt_candidates: Vec<usize>,
    /// `(label index, multiplicity)` pairs; multiplicities sum to k.
    pub w_assignment: Vec<(usize, usize)>,
}

/// Report from an exhaustive triangle-inequality check.
#[derive(Debug, Clone)]
pub struct MetricValidation {
    pub valid: bool,
    /// Worst violating triple `(a, b, c)` and its absolute violation
    /// `d(a,c) - d(a,b) - d(b,c)`, when any exists.
    pub worst_violation: Option<(usize, usize, usize, f64)>,
}

/// Exhaustive triangle-inequality check over a square symmetric table.
///
/// Violations are measured relative to the scale of the distances involved.
pub fn verify_metric(table: &[Vec<f64>]) -> MetricValidation {
    let n = table.len();
    let mut worst: Option<(usize, usize, usize, f64)> = None;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let gap = table[a][c] - table[a][b] - table[b][c];
                let scale = table[a][c].abs().max(table[a][b].abs()).max(table[b][c].abs());
                if gap > TRIANGLE_TOL * (1.0 + scale) && worst.is_none_or(|w| gap > w.3) {
                    worst = Some((a, b, c, gap));
                }
            }
        }
    }
    MetricValidation {
        valid: worst.is_none(),
        worst_violation: worst,
    }
}

fn check_table_shape(table: &[Vec<f64>]) -> Result<()> {
    let n = table.len();
    for (i, row) in table.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                context: "distance table row",
                expected: n,
                got: row.len(),
            });
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidMetricValue { i, j, value: v });
            }
            let gap = (v - table[j][i]).abs();
            if gap > TRIANGLE_TOL * (1.0 + v.abs()) {
                return Err(Error::InvalidMetricValue { i, j, value: v });
            }
        }
        if table[i][i] != 0.0 {
            return Err(Error::InvalidMetricValue {
                i,
                j: i,
                value: table[i][i],
            });
        }
    }
    Ok(())
}

impl FiniteMetric {
    pub fn new(
        labels: Vec<String>,
        dist: Vec<Vec<f64>>,
        w_opt_candidates: Vec<usize>,
        w_assignment: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if labels.len() != dist.len() {
            return Err(Error::DimensionMismatch {
                context: "finite metric labels",
                expected: dist.len(),
                got: labels.len(),
            });
        }
        check_table_shape(&dist)?;
        let check = verify_metric(&dist);
        if let Some((a, b, c, violation)) = check.worst_violation {
            return Err(Error::TriangleViolation { a, b, c, violation });
        }
        Ok(Self {
            labels,
            dist,
            w_opt_candidates,
            w_assignment,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i][j]
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.dist
    }

    /// Candidate multiset expanded to label indices, in label order.
    pub fn candidate_points(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for &(label, mult) in &self.w_assignment {
            out.extend(std::iter::repeat_n(label, mult));
        }
        out
    }

    /// Total candidate count k.
    pub fn candidate_count(&self) -> usize {
        self.w_assignment.iter().map(|(_, m)| m).sum()
    }

    /// Distance table rendered in the text format: first line `n`, then `n`
    /// lines of `n` space-separated distances.
    pub fn table_to_string(&self) -> String {
        table_to_string(&self.dist)
    }

    /// Sidecar text listing labels, target candidates, and the multiset.
    pub fn sidecar_to_string(&self) -> String {
        let mut out = String::new();
        writeln!(out, "labels {}", self.labels.join(" ")).unwrap();
        let opts: Vec<&str> = self
            .w_opt_candidates
            .iter()
            .map(|&i| self.labels[i].as_str())
            .collect();
        writeln!(out, "w_opt {}", opts.join(" ")).unwrap();
        for &(label, mult) in &self.w_assignment {
            writeln!(out, "W {} {}", self.labels[label], mult).unwrap();
        }
        out
    }

    pub fn save(&self, table_path: &Path, sidecar_path: &Path) -> Result<()> {
        std::fs::write(table_path, self.table_to_string())?;
        std::fs::write(sidecar_path, self.sidecar_to_string())?;
        Ok(())
    }

    pub fn load(table_path: &Path, sidecar_path: &Path) -> Result<Self> {
        let dist = parse_table(&std::fs::read_to_string(table_path)?)?;
        let sidecar = std::fs::read_to_string(sidecar_path)?;
        let mut labels: Vec<String> = Vec::new();
        let mut w_opt: Vec<String> = Vec::new();
        let mut assignment: Vec<(String, usize)> = Vec::new();
        for (lineno, line) in sidecar.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap();
            match key {
                "labels" => labels = parts.map(|s| s.to_string()).collect(),
                "w_opt" => w_opt = parts.map(|s| s.to_string()).collect(),
                "W" => {
                    let label = parts.next().ok_or_else(|| Error::Parse {
                        line: lineno + 1,
                        message: "W line needs a label".into(),
                    })?;
                    let mult: usize =
                        parts
                            .next()
                            .and_then(|m| m.parse().ok())
                            .ok_or_else(|| Error::Parse {
                                line: lineno + 1,
                                message: "W line needs an integer multiplicity".into(),
                            })?;
                    assignment.push((label.to_string(), mult));
                }
                other => {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: format!("unknown sidecar key `{other}`"),
                    })
                }
            }
        }
        let index_of = |name: &str, labels: &[String]| -> Result<usize> {
            labels
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown label `{name}`")))
        };
        let w_opt_candidates = w_opt
            .iter()
            .map(|l| index_of(l, &labels))
            .collect::<Result<Vec<_>>>()?;
        let w_assignment = assignment
            .iter()
            .map(|(l, m)| index_of(l, &labels).map(|i| (i, *m)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels, dist, w_opt_candidates, w_assignment)
    }
}

/// Render a distance table in the text format.
pub fn table_to_string(table: &[Vec<f64>]) -> String {
    let mut out = String::new();
    writeln!(out, "{}", table.len()).unwrap();
    for row in table {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{}", cells.join(" ")).unwrap();
    }
    out
}

/// Parse and validate a distance table (symmetry and triangle inequality).
pub fn parse_table(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty table".into(),
    })?;
    let n: usize = first.trim().parse().map_err(|_| Error::Parse {
        line: 1,
        message: format!("expected point count, got `{first}`"),
    })?;
    let mut table = Vec::with_capacity(n);
    for _ in 0..n {
        let (lineno, line) = lines.next().ok_or(Error::Parse {
            line: n + 1,
            message: "table ended early".into(),
        })?;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("bad distance `{t}`"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != n {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("expected {n} distances, got {}", row.len()),
            });
        }
        table.push(row);
    }
    check_table_shape(&table)?;
    let check = verify_metric(&table);
    if let Some((a, b, c, violation)) = check.worst_violation {
        return Err(Error::TriangleViolation { a, b, c, violation });
    }
    Ok(table)
}

/// Worst case for set-based procedures: 2n points `a_1..a_n, b_1..b_n` with
/// `d(a_i,a_j) = d(b_i,b_j) = 2`, `d(a_i,b_j) = 1` for `i != j`, and
/// `d(a_i,b_i) = 3`. Candidates sit on the `b` points; any returned `b_i` is
/// at distance 3 from the indistinguishable target `a_i`.
pub fn build_setbased_lb_fixture(alpha: f64) -> Result<FiniteMetric> {
    build_ab_fixture(alpha, 2.0, 3.0)
}

/// Worst case for space-based procedures: as the set-based fixture but with
/// `d(b_i,b_j) = 1` and `d(a_i,b_i) = 2`; every point of the space is at
/// distance at least 2 from some `a_i`.
pub fn build_spacebased_lb_fixture(alpha: f64) -> Result<FiniteMetric> {
    build_ab_fixture(alpha, 1.0, 2.0)
}

fn build_ab_fixture(alpha: f64, bb: f64, abi: f64) -> Result<FiniteMetric> {
    if !(0.0 < alpha && alpha < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be in (0, 1/2), got {alpha}"
        )));
    }
    let n = (1.0 / (0.5 - alpha)).ceil() as usize;
    debug_assert!(n >= 3);
    let total = 2 * n;
    let mut labels = Vec::with_capacity(total);
    for i in 1..=n {
        labels.push(format!("a{i}"));
    }
    for i in 1..=n {
        labels.push(format!("b{i}"));
    }
    let mut dist = vec![vec![0.0; total]; total];
    for (i, row) in dist.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            if i == j {
                continue;
            }
            let (ai, aj) = (i < n, j < n);
            *cell = match (ai, aj) {
                (true, true) => 2.0,
                (false, false) => bb,
                _ => {
                    let (a, b) = if ai { (i, j - n) } else { (j, i - n) };
                    if a == b {
                        abi
                    } else {
                        1.0
                    }
                }
            };
        }
    }
    // Smallest multiple of n that is >= 2n.
    let per_b = 2;
    let w_assignment: Vec<(usize, usize)> = (n..total).map(|i| (i, per_b)).collect();
    let w_opt_candidates: Vec<usize> = (0..n).collect();
    FiniteMetric::new(labels, dist, w_opt_candidates, w_assignment)
}

/// Exact threshold on `beta` at which the y-cluster ties the v-cluster in
/// total distance on the geometric-median fixture:
/// `beta* = (2 + 1/(2 alpha) - 1/(k alpha)) * epsilon`.
pub fn geomedian_boundary_beta(alpha: f64, k: usize, epsilon: f64) -> f64 {
    (2.0 + 1.0 / (2.0 * alpha) - 1.0 / (k as f64 * alpha)) * epsilon
}

/// Geometric-median trap: `n = k(1/2 + alpha)` candidates at distance
/// `epsilon` from the target (mutually `2 epsilon` apart) and `k - n`
/// coincident candidates at distance `beta`, sitting `beta - epsilon` from
/// each near candidate. For `beta` up to [`geomedian_boundary_beta`] the far
/// cluster attains the minimal distance sum.
pub fn build_geomedian_lb_fixture(
    alpha: f64,
    k: usize,
    beta: f64,
    epsilon: f64,
) -> Result<FiniteMetric> {
    if !(0.0 < alpha && alpha < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be in (0, 1/2), got {alpha}"
        )));
    }
    if epsilon <= 0.0 || beta < 2.0 * epsilon {
        return Err(Error::InvalidArgument(format!(
            "need beta >= 2 epsilon > 0 for a valid pseudometric (beta = {beta}, epsilon = {epsilon})"
        )));
    }
    let n_real = k as f64 * (0.5 + alpha);
    if (n_real - n_real.round()).abs() > 1e-9 {
        let suggested_k = (k + 1..k + 10_000)
            .find(|kk| {
                let v = *kk as f64 * (0.5 + alpha);
                (v - v.round()).abs() <= 1e-9
            })
            .unwrap_or(k + 1);
        return Err(Error::IntegralityViolation { suggested_k });
    }
    let n = n_real.round() as usize;
    if n >= k {
        return Err(Error::InvalidArgument(format!(
            "k(1/2+alpha) = {n} leaves no far candidates for k = {k}"
        )));
    }

    let total = 1 + k; // w_opt, v_1..v_n, y_1..y_{k-n}
    let mut labels = Vec::with_capacity(total);
    labels.push("w_opt".to_string());
    for i in 1..=n {
        labels.push(format!("v{i}"));
    }
    for t in 1..=(k - n) {
        labels.push(format!("y{t}"));
    }
    let mut dist = vec![vec![0.0; total]; total];
    let is_v = |i: usize| (1..=n).contains(&i);
    // Symmetric fill writes both (i,j) and (j,i), so plain index loops.
    #[allow(clippy::needless_range_loop)]
    for i in 0..total {
        for j in (i + 1)..total {
            let d = match (i, is_v(i), is_v(j)) {
                (0, _, true) => epsilon,
                (0, _, false) => beta,
                (_, true, true) => 2.0 * epsilon,
                (_, true, false) => beta - epsilon,
                (_, false, false) => 0.0,
                _ => unreachable!(),
            };
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let w_assignment: Vec<(usize, usize)> = (1..total).map(|i| (i, 1)).collect();
    FiniteMetric::new(labels, dist, vec![0], w_assignment)
}

/// Radius of the smallest `p`-norm ball containing the standard basis of
/// `R^n`, i.e. the circumradius of the regular simplex in the `p`-norm.
pub fn simplex_inradius(n: usize, p: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n must be >= 2, got {n}")));
    }
    if p <= 1.0 {
        return Err(Error::InvalidArgument(format!("p must be > 1, got {p}")));
    }
    let m = (n - 1) as f64;
    let inner =
        (1.0 + m.powf(-1.0 / (p - 1.0))).powf(-p) + m * (1.0 + m.powf(1.0 / (p - 1.0))).powf(-p);
    Ok(inner.powf(1.0 / p))
}

/// Coordinate of the optimizing center `x = (a, ..., a)` in
/// [`simplex_inradius`]: `a = (1 + (n-1)^{1/(p-1)})^{-1}`.
pub fn simplex_center_coordinate(n: usize, p: f64) -> Result<f64> {
    if n < 2 || p <= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "need n >= 2 and p > 1, got n = {n}, p = {p}"
        )));
    }
    Ok(1.0 / (1.0 + ((n - 1) as f64).powf(1.0 / (p - 1.0))))
}

/// Simplex vertices and opposing hyperface centers, as coordinate vectors.
pub type SimplexFixture = (Vec<Vec<f64>>, Vec<Vec<f64>>);

/// Regular-simplex fixture in `R^n`: the basis vertices `e_i` and the
/// opposing hyperface centers `b_i` (zero in coordinate `i`, `1/(n-1)`
/// elsewhere).
pub fn build_hilbert_simplex_fixture(n: usize) -> Result<SimplexFixture> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("n must be >= 3, got {n}")));
    }
    let vertices: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|c| if c == i { 1.0 } else { 0.0 }).collect())
        .collect();
    let centers: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|c| if c == i { 0.0 } else { 1.0 / (n - 1) as f64 })
                .collect()
        })
        .collect();
    Ok((vertices, centers))
}

// ---------------------------------------------------------------------------
// Approximation-factor formulas and their normalized optimization.
// ---------------------------------------------------------------------------

/// Set-based median-distance factor (constant in alpha).
pub fn factor_median_distance_set(_alpha: f64) -> f64 {
    3.0
}

/// Space-based median-distance factor (constant in alpha).
pub fn factor_median_distance_space(_alpha: f64) -> f64 {
    2.0
}

/// Set-based geometric-median factor `2 + 1/(2 alpha)`.
pub fn factor_geometric_median_set(alpha: f64) -> f64 {
    2.0 + 1.0 / (2.0 * alpha)
}

/// Space-based geometric-median factor `1 + 1/(2 alpha)`.
pub fn factor_geometric_median_space(alpha: f64) -> f64 {
    1.0 + 1.0 / (2.0 * alpha)
}

/// Hilbert-space geometric-median factor `(1/2 + alpha)/sqrt(2 alpha)`.
pub fn factor_geometric_median_hilbert(alpha: f64) -> f64 {
    (0.5 + alpha) / (2.0 * alpha).sqrt()
}

/// Hilbert-space lower bound for set-based procedures,
/// `sqrt(1 + 2/(ceil(1/(1/2-alpha)) - 2))`.
pub fn hilbert_lower_bound_set(alpha: f64) -> f64 {
    let n = (1.0 / (0.5 - alpha)).ceil();
    (1.0 + 2.0 / (n - 2.0)).sqrt()
}

/// Hilbert-space lower bound for space-based procedures,
/// `sqrt(1 + 1/(n^2 - 2n))` with `n = ceil(1/(1/2-alpha))`.
pub fn hilbert_lower_bound_space(alpha: f64) -> f64 {
    let n = (1.0 / (0.5 - alpha)).ceil();
    (1.0 + 1.0 / (n * n - 2.0 * n)).sqrt()
}

/// Normalized approximation factor `C_alpha / (1/2 - alpha)`: the end-to-end
/// constant once the Markov-inequality step is folded in.
pub fn normalized_factor(factor: impl Fn(f64) -> f64, alpha: f64) -> f64 {
    factor(alpha) / (0.5 - alpha)
}

/// Minimize the normalized factor over `alpha` in the open interval
/// `(0, 1/2)`. Coarse grid bracketing followed by golden-section refinement;
/// returns `(alpha, value)`.
pub fn minimize_normalized_factor(factor: impl Fn(f64) -> f64) -> (f64, f64) {
    let lo = 1e-7;
    let hi = 0.5 - 1e-7;
    let f = |a: f64| normalized_factor(&factor, a);

    let grid = 4000usize;
    let mut best_i = 0;
    let mut best_v = f64::INFINITY;
    for i in 0..=grid {
        let a = lo + (hi - lo) * i as f64 / grid as f64;
        let v = f(a);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let step = (hi - lo) / grid as f64;
    let mut a = (lo + step * best_i as f64 - step).max(lo);
    let mut b = (lo + step * best_i as f64 + step).min(hi);

    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if f(c) <= f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let alpha = 0.5 * (a + b);
    (alpha, f(alpha))
}

/// The four normalized factors over general metric spaces: median distance
/// (set- and space-based) and geometric median (set- and space-based).
#[derive(Debug, Clone, Copy)]
pub struct NormalizedFactors {
    pub median_distance_set: f64,
    pub median_distance_space: f64,
    pub geometric_median_set: f64,
    pub geometric_median_space: f64,
}

/// Numerically minimized normalized factors; exact values are `6`, `4`,
/// `8 + 4 sqrt(3)` and `6 + 4 sqrt(2)`.
pub fn normalized_factor_table() -> NormalizedFactors {
    NormalizedFactors {
        median_distance_set: minimize_normalized_factor(factor_median_distance_set).1,
        median_distance_space: minimize_normalized_factor(factor_median_distance_space).1,
        geometric_median_set: minimize_normalized_factor(factor_geometric_median_set).1,
        geometric_median_space: minimize_normalized_factor(factor_geometric_median_space).1,
    }
}
