//! Robust distance approximation: given k candidate points in a metric
//! space, select one that is close to an unknown target whenever a
//! majority fraction of the candidates is close to it.
//!
//! Four procedures are provided. `select_median_distance_set` picks the
//! candidate whose smallest majority-covering ball has minimal radius
//! (approximation factor 3). `select_median_distance_noisy` replaces exact
//! distances with per-candidate oracle estimates and takes the median of the
//! estimates. `select_geometric_median_set` minimizes the sum of distances
//! over the candidate set, and `geometric_median_euclidean` minimizes it
//! over all of Euclidean space by damped Weiszfeld reweighting.
//!
//! All procedures are pure functions of their inputs; distance tables are
//! filled in a fixed index order so results are bit-identical run to run.

use crate::error::{Error, Result};
use crate::mom::lower_median;

/// Success fraction assumed of a candidate generator: each candidate lands
/// within distance epsilon of the target with at least this probability.
pub const DEFAULT_APPROX_SUCCESS: f64 = 2.0 / 3.0;

/// Accuracy fraction assumed of noisy distance oracles: each per-candidate
/// oracle is within a factor 2 of the truth with at least this probability.
pub const DEFAULT_ORACLE_ACCURACY: f64 = 8.0 / 9.0;

/// Majority margin at which the noisy-selection guarantee
/// `rho(selected, target) <= 9 * delta_radius(target, alpha)` holds.
pub const NOISY_SELECTION_ALPHA: f64 = 5.0 / 36.0;

/// Which selection rule produced a [`SelectionReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Procedure {
    MedianDistanceSet,
    MedianDistanceNoisy,
    GeometricMedianSet,
    GeometricMedianSpace,
}

/// Ordered multiset of candidate points. Duplicates are allowed; indices are
/// stable and zero-based.
#[derive(Debug, Clone)]
pub struct CandidateSet<P> {
    points: Vec<P>,
}

impl<P> CandidateSet<P> {
    pub fn new(points: Vec<P>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCandidateSet);
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }
}

impl<P> std::ops::Index<usize> for CandidateSet<P> {
    type Output = P;
    fn index(&self, i: usize) -> &P {
        &self.points[i]
    }
}

/// Outcome of a selection procedure: the chosen index, the per-candidate
/// score vector `r_i`, and the exact argmin tie set.
#[derive(Debug, Clone)]
pub struct SelectionReport {
    /// Lowest index attaining the minimal radius.
    pub selected_index: usize,
    /// Per-candidate radius or score, in candidate order.
    pub radii: Vec<f64>,
    /// All indices attaining the minimum, ascending.
    pub tie_indices: Vec<usize>,
    pub procedure: Procedure,
}

impl SelectionReport {
    fn from_radii(radii: Vec<f64>, procedure: Procedure) -> Self {
        let min = radii.iter().copied().fold(f64::INFINITY, f64::min);
        let tie_indices: Vec<usize> = radii
            .iter()
            .enumerate()
            .filter(|(_, r)| **r == min)
            .map(|(i, _)| i)
            .collect();
        SelectionReport {
            selected_index: tie_indices[0],
            radii,
            tie_indices,
            procedure,
        }
    }
}

fn check_distance(value: f64, i: usize, j: usize) -> Result<f64> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::InvalidMetricValue { i, j, value });
    }
    Ok(value)
}

/// Number of candidates that must fall inside the ball: the smallest integer
/// strictly greater than `k * (1/2 + alpha)`. The comparison is snapped to
/// the nearest integer within 1e-9 so fractions like 23/36 behave exactly.
fn majority_count(k: usize, alpha: f64) -> usize {
    let t = k as f64 * (0.5 + alpha);
    let r = t.round();
    if (t - r).abs() < 1e-9 {
        r as usize + 1
    } else {
        t.ceil() as usize
    }
}

/// Smallest radius `r` such that strictly more than `k(1/2 + alpha)`
/// candidates lie within distance `r` of `center` (closed balls). Always
/// attainable because the threshold count is at most `k`.
pub fn delta_radius<P>(
    candidates: &CandidateSet<P>,
    center: &P,
    alpha: f64,
    metric: impl Fn(&P, &P) -> f64,
) -> Result<f64> {
    if !(0.0..0.5).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be in [0, 1/2), got {alpha}"
        )));
    }
    let k = candidates.len();
    let mut dists = Vec::with_capacity(k);
    for (j, p) in candidates.points().iter().enumerate() {
        dists.push(check_distance(metric(center, p), j, j)?);
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = majority_count(k, alpha);
    debug_assert!(m >= 1 && m <= k);
    Ok(dists[m - 1])
}

/// Symmetric k x k distance table, filled in fixed order.
fn distance_table<P>(points: &[P], metric: &impl Fn(&P, &P) -> f64) -> Result<Vec<Vec<f64>>> {
    let k = points.len();
    let mut table = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let d = check_distance(metric(&points[i], &points[j]), i, j)?;
            table[i][j] = d;
            table[j][i] = d;
        }
    }
    Ok(table)
}

/// Median-distance selection over the candidate set: `r_i` is the radius of
/// the smallest ball centered at candidate `i` containing strictly more than
/// half of the set (itself included); the lowest-index argmin is selected.
pub fn select_median_distance_set<P>(
    candidates: &CandidateSet<P>,
    metric: impl Fn(&P, &P) -> f64,
) -> Result<SelectionReport> {
    let k = candidates.len();
    let table = distance_table(candidates.points(), &metric)?;
    let m = majority_count(k, 0.0);
    let radii: Vec<f64> = table
        .into_iter()
        .map(|mut row| {
            row.sort_by(|a, b| a.partial_cmp(b).unwrap());
            row[m - 1]
        })
        .collect();
    Ok(SelectionReport::from_radii(radii, Procedure::MedianDistanceSet))
}

/// Median-distance selection with noisy oracles: `r_i` is the lower median
/// of `oracle(j, w_i)` over all `j in 0..k`, the self term included.
///
/// The oracle must be deterministic given its construction inputs; any
/// randomness is fixed at construction time via a seed.
pub fn select_median_distance_noisy<P>(
    candidates: &CandidateSet<P>,
    oracle: impl Fn(usize, &P) -> f64,
) -> Result<SelectionReport> {
    let k = candidates.len();
    let mut radii = Vec::with_capacity(k);
    for w in candidates.points() {
        let mut estimates = Vec::with_capacity(k);
        for j in 0..k {
            let v = oracle(j, w);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: "noisy distance oracle",
                });
            }
            estimates.push(v);
        }
        radii.push(lower_median(&estimates).expect("k >= 1"));
    }
    Ok(SelectionReport::from_radii(radii, Procedure::MedianDistanceNoisy))
}

/// Set-based geometric median: `r_i = sumd(w_i)`, the total distance from
/// candidate `i` to the whole set; the lowest-index argmin is selected.
pub fn select_geometric_median_set<P>(
    candidates: &CandidateSet<P>,
    metric: impl Fn(&P, &P) -> f64,
) -> Result<SelectionReport> {
    let table = distance_table(candidates.points(), &metric)?;
    let radii: Vec<f64> = table.into_iter().map(|row| row.iter().sum()).collect();
    Ok(SelectionReport::from_radii(radii, Procedure::GeometricMedianSet))
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn sum_of_distances(x: &[f64], points: &[Vec<f64>]) -> f64 {
    points.iter().map(|p| euclidean(x, p)).sum()
}

/// Geometric median over Euclidean space by Weiszfeld reweighting with the
/// standard anchor adjustment when an iterate lands on a data point.
///
/// The objective is non-increasing across iterations. Iteration stops once
/// the per-step improvement falls below `tol * (1 + objective)`; exceeding
/// `max_iter` returns an error carrying the best iterate and its objective.
pub fn geometric_median_euclidean(
    points: &[Vec<f64>],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    geometric_median_euclidean_traced(points, tol, max_iter).map(|(x, _)| x)
}

/// Same as [`geometric_median_euclidean`] but also returns the objective
/// value after every iteration, for convergence diagnostics.
pub fn geometric_median_euclidean_traced(
    points: &[Vec<f64>],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if points.is_empty() {
        return Err(Error::EmptyCandidateSet);
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            context: "geometric median points",
            expected: dim,
            got: points.iter().map(|p| p.len()).find(|l| *l != dim).unwrap(),
        });
    }
    if tol.is_nan() || tol <= 0.0 || max_iter == 0 {
        return Err(Error::InvalidArgument(
            "tol must be > 0 and max_iter >= 1".into(),
        ));
    }

    // Scale for deciding when an iterate has hit a data point exactly.
    let spread = points
        .iter()
        .map(|p| euclidean(p, &points[0]))
        .fold(0.0f64, f64::max);
    let anchor_eps = 1e-13 * (1.0 + spread);

    // Start at the centroid.
    let mut x: Vec<f64> = (0..dim)
        .map(|c| points.iter().map(|p| p[c]).sum::<f64>() / points.len() as f64)
        .collect();
    let mut objective = sum_of_distances(&x, points);
    let mut trace = vec![objective];

    for _ in 0..max_iter {
        let mut weight_sum = 0.0;
        let mut weighted = vec![0.0; dim];
        let mut anchors = 0usize;
        let mut pull = vec![0.0; dim];
        for p in points {
            let d = euclidean(&x, p);
            if d <= anchor_eps {
                anchors += 1;
                continue;
            }
            let w = 1.0 / d;
            weight_sum += w;
            for c in 0..dim {
                weighted[c] += p[c] * w;
                pull[c] += (p[c] - x[c]) * w;
            }
        }
        if weight_sum == 0.0 {
            // Every point coincides with the iterate.
            return Ok((x, trace));
        }
        let next = if anchors == 0 {
            weighted.iter().map(|v| v / weight_sum).collect::<Vec<f64>>()
        } else {
            let pull_norm = pull.iter().map(|v| v * v).sum::<f64>().sqrt();
            if pull_norm <= anchors as f64 {
                // The anchor point is the geometric median.
                return Ok((x, trace));
            }
            let step = 1.0 - anchors as f64 / pull_norm;
            (0..dim)
                .map(|c| x[c] + step * pull[c] / weight_sum)
                .collect()
        };
        let next_objective = sum_of_distances(&next, points);
        if next_objective > objective {
            // Floating-point floor reached; keep the better iterate.
            return Ok((x, trace));
        }
        let improvement = objective - next_objective;
        x = next;
        objective = next_objective;
        trace.push(objective);
        if improvement <= tol * (1.0 + objective) {
            return Ok((x, trace));
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        best: x,
        objective,
    })
}

/// Realized approximation factor `rho(selected, w_opt) / delta_radius(w_opt, alpha)`.
///
/// A zero denominator yields `+inf` when the numerator is nonzero and `0.0`
/// when both vanish.
pub fn approximation_factor<P>(
    candidates: &CandidateSet<P>,
    w_opt: &P,
    selected: &P,
    alpha: f64,
    metric: impl Fn(&P, &P) -> f64,
) -> Result<f64> {
    let numerator = check_distance(metric(selected, w_opt), 0, 0)?;
    let delta = delta_radius(candidates, w_opt, alpha, &metric)?;
    if delta == 0.0 {
        return Ok(if numerator == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(numerator / delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn line_metric(a: &f64, b: &f64) -> f64 {
        (a - b).abs()
    }

    fn set(points: &[f64]) -> CandidateSet<f64> {
        CandidateSet::new(points.to_vec()).unwrap()
    }

    /// Independent oracle: scan every candidate distance as a radius and take
    /// the smallest that covers strictly more than k(1/2+alpha) points.
    fn delta_radius_oracle(points: &[f64], center: f64, alpha: f64) -> f64 {
        let k = points.len() as f64;
        let mut radii: Vec<f64> = points.iter().map(|p| (p - center).abs()).collect();
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for r in &radii {
            let count = points.iter().filter(|p| (*p - center).abs() <= *r).count();
            if count as f64 > k * (0.5 + alpha) + 1e-12 {
                return *r;
            }
        }
        unreachable!("max radius always covers all k > k(1/2+alpha) points");
    }

    #[test]
    fn delta_radius_examples() {
        assert_eq!(
            delta_radius(&set(&[0.0, 2.0, 4.0]), &0.0, 0.0, line_metric).unwrap(),
            2.0
        );
        assert_eq!(
            delta_radius(&set(&[5.0, 5.0, 5.0]), &5.0, 0.4, line_metric).unwrap(),
            0.0
        );
        assert_eq!(
            delta_radius(&set(&[0.0, 0.0, 0.0, 10.0]), &0.0, 0.2, line_metric).unwrap(),
            0.0
        );
    }

    #[test]
    fn delta_radius_rejects_bad_alpha() {
        assert!(delta_radius(&set(&[1.0]), &0.0, 0.5, line_metric).is_err());
        assert!(delta_radius(&set(&[1.0]), &0.0, -0.1, line_metric).is_err());
    }

    #[test]
    fn empty_candidate_set_is_rejected() {
        assert!(matches!(
            CandidateSet::<f64>::new(vec![]),
            Err(Error::EmptyCandidateSet)
        ));
    }

    #[test]
    fn median_distance_set_tightness_fixture() {
        // epsilon = 1 construction: 3 points at 0, 2 at 2, 3 at 4.
        let w = set(&[0.0, 0.0, 0.0, 2.0, 2.0, 4.0, 4.0, 4.0]);
        let report = select_median_distance_set(&w, line_metric).unwrap();
        assert_eq!(report.radii, vec![2.0; 8]);
        assert_eq!(report.tie_indices, (0..8).collect::<Vec<_>>());
        assert_eq!(report.selected_index, 0);
    }

    #[test]
    fn median_distance_set_singleton() {
        let report = select_median_distance_set(&set(&[7.0]), line_metric).unwrap();
        assert_eq!(report.radii, vec![0.0]);
        assert_eq!(report.selected_index, 0);
    }

    #[test]
    fn median_distance_set_majority_cluster() {
        let w = set(&[0.0, 0.0, 0.0, 0.0, 0.0, 9.0, 9.0, 9.0]);
        let report = select_median_distance_set(&w, line_metric).unwrap();
        assert!(report.selected_index < 5);
        for i in 0..5 {
            assert_eq!(report.radii[i], 0.0);
        }
        for i in 5..8 {
            assert_eq!(report.radii[i], 9.0);
        }
    }

    #[test]
    fn invalid_metric_is_reported() {
        let w = set(&[0.0, 1.0]);
        let err = select_median_distance_set(&w, |_, _| -1.0).unwrap_err();
        assert!(err.to_string().contains("invalid metric value"));
        assert!(select_median_distance_set(&w, |_, _| f64::NAN).is_err());
    }

    #[test]
    fn noisy_matches_exact_metric_oracle() {
        let points = [0.0, 0.0, 0.0, 0.0, 0.0, 9.0, 9.0, 9.0];
        let w = set(&points);
        let exact = select_median_distance_set(&w, line_metric).unwrap();
        let noisy =
            select_median_distance_noisy(&w, |j, v| (points[j] - v).abs()).unwrap();
        assert!(noisy.selected_index < 5);
        assert_eq!(
            points[noisy.selected_index], points[exact.selected_index],
            "both must land in the majority cluster"
        );
    }

    #[test]
    fn noisy_singleton() {
        let w = set(&[3.0]);
        let report = select_median_distance_noisy(&w, |_, _| 0.0).unwrap();
        assert_eq!(report.radii, vec![0.0]);
        assert_eq!(report.selected_index, 0);
    }

    #[test]
    fn noisy_doubled_distances_preserve_argmin() {
        let points = [0.0, 0.0, 0.0, 0.0, 0.0, 9.0, 9.0, 9.0];
        let w = set(&points);
        let exact = select_median_distance_noisy(&w, |j, v| (points[j] - v).abs()).unwrap();
        let doubled =
            select_median_distance_noisy(&w, |j, v| 2.0 * (points[j] - v).abs()).unwrap();
        assert_eq!(doubled.selected_index, exact.selected_index);
        assert_eq!(doubled.tie_indices, exact.tie_indices);
    }

    #[test]
    fn noisy_rejects_non_finite_oracle() {
        let w = set(&[0.0, 1.0]);
        assert!(select_median_distance_noisy(&w, |_, _| f64::INFINITY).is_err());
    }

    #[test]
    fn geometric_median_set_examples() {
        let report = select_geometric_median_set(&set(&[0.0, 1.0, 10.0]), line_metric).unwrap();
        assert_eq!(report.radii, vec![11.0, 10.0, 19.0]);
        assert_eq!(report.selected_index, 1);

        let constant = select_geometric_median_set(&set(&[4.0, 4.0, 4.0]), line_metric).unwrap();
        assert_eq!(constant.radii, vec![0.0, 0.0, 0.0]);
        assert_eq!(constant.selected_index, 0);
        assert_eq!(constant.tie_indices, vec![0, 1, 2]);
    }

    #[test]
    fn weiszfeld_one_dimensional_median() {
        let points = vec![vec![0.0], vec![0.0], vec![3.0]];
        let x = geometric_median_euclidean(&points, 1e-12, 10_000).unwrap();
        assert!(x[0].abs() < 1e-6, "got {}", x[0]);
    }

    #[test]
    fn weiszfeld_square_center() {
        let points = vec![
            vec![0.0, 0.0],
            vec![4.0, 0.0],
            vec![0.0, 4.0],
            vec![4.0, 4.0],
        ];
        let x = geometric_median_euclidean(&points, 1e-12, 10_000).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-9);
        assert!((x[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn weiszfeld_fermat_point_matches_grid_oracle() {
        let points = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let x = geometric_median_euclidean(&points, 1e-12, 100_000).unwrap();
        let fitted = sum_of_distances(&x, &points);

        // Dense grid oracle over [0,1]^2 at resolution 1e-3.
        let mut best = f64::INFINITY;
        for i in 0..=1000 {
            for j in 0..=1000 {
                let cand = [i as f64 / 1000.0, j as f64 / 1000.0];
                best = best.min(sum_of_distances(&cand, &points));
            }
        }
        assert!(
            fitted <= best + 1e-4,
            "fitted objective {fitted} vs grid oracle {best}"
        );
    }

    #[test]
    fn weiszfeld_objective_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let points: Vec<Vec<f64>> = (0..12)
                .map(|_| vec![rng.random::<f64>() * 10.0, rng.random::<f64>() * 10.0])
                .collect();
            let (_, trace) = geometric_median_euclidean_traced(&points, 1e-11, 5_000).unwrap();
            for w in trace.windows(2) {
                assert!(w[1] <= w[0], "objective increased: {} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn weiszfeld_coincident_points() {
        let points = vec![vec![2.0, -1.0]; 5];
        let x = geometric_median_euclidean(&points, 1e-9, 100).unwrap();
        assert_eq!(x, vec![2.0, -1.0]);
    }

    #[test]
    fn weiszfeld_non_convergence_carries_best() {
        let points = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        match geometric_median_euclidean(&points, 1e-15, 1) {
            Err(Error::NoConvergence { best, objective, .. }) => {
                assert_eq!(best.len(), 2);
                assert!(objective.is_finite());
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn approximation_factor_fixtures() {
        // Set-based tightness fixture, adversarial pick at 4.
        let w = set(&[0.0, 0.0, 0.0, 2.0, 2.0, 4.0, 4.0, 4.0]);
        let f = approximation_factor(&w, &1.0, &4.0, 0.0, line_metric).unwrap();
        assert_eq!(f, 3.0);

        let f0 = approximation_factor(&w, &1.0, &1.0, 0.0, line_metric).unwrap();
        assert_eq!(f0, 0.0);

        // Space-based fixture: 2 points at 0, 3 at 2, 3 at 3; target at 1.
        let w2 = set(&[0.0, 0.0, 2.0, 2.0, 2.0, 3.0, 3.0, 3.0]);
        let f2 = approximation_factor(&w2, &1.0, &3.0, 0.0, line_metric).unwrap();
        assert_eq!(f2, 2.0);
    }

    #[test]
    fn approximation_factor_zero_delta_sentinels() {
        let w = set(&[1.0, 1.0, 1.0]);
        assert_eq!(
            approximation_factor(&w, &1.0, &1.0, 0.0, line_metric).unwrap(),
            0.0
        );
        assert_eq!(
            approximation_factor(&w, &1.0, &5.0, 0.0, line_metric).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn tightness_fixture_argmin_membership() {
        // Every point at 4 is a member of the argmin tie set, so adversarial
        // tie-breaking attains the factor 3.
        let points = [0.0, 0.0, 0.0, 2.0, 2.0, 4.0, 4.0, 4.0];
        let report = select_median_distance_set(&set(&points), line_metric).unwrap();
        for (i, p) in points.iter().enumerate() {
            if *p == 4.0 {
                assert!(report.tie_indices.contains(&i));
            }
        }
    }

    proptest! {
        #[test]
        fn delta_radius_matches_brute_force(
            points in prop::collection::vec(-50.0f64..50.0, 1..12),
            center in -50.0f64..50.0,
            alpha in 0.0f64..0.49,
        ) {
            let w = CandidateSet::new(points.clone()).unwrap();
            let got = delta_radius(&w, &center, alpha, line_metric).unwrap();
            let want = delta_radius_oracle(&points, center, alpha);
            prop_assert_eq!(got, want);
        }

        #[test]
        fn delta_radius_order_statistic_property(
            points in prop::collection::vec(-50.0f64..50.0, 1..12),
            center in -50.0f64..50.0,
            alpha in 0.0f64..0.49,
        ) {
            let k = points.len() as f64;
            let w = CandidateSet::new(points.clone()).unwrap();
            let r = delta_radius(&w, &center, alpha, line_metric).unwrap();
            let count = points.iter().filter(|p| (*p - center).abs() <= r).count();
            prop_assert!(count as f64 > k * (0.5 + alpha) - 1e-9);
            // No strictly smaller attained radius achieves the count.
            let smaller: Vec<f64> = points
                .iter()
                .map(|p| (p - center).abs())
                .filter(|d| *d < r)
                .collect();
            if let Some(r2) = smaller.iter().copied().fold(None::<f64>, |acc, d| {
                Some(acc.map_or(d, |m| m.max(d)))
            }) {
                let count2 = points.iter().filter(|p| (*p - center).abs() <= r2).count();
                prop_assert!(count2 as f64 <= k * (0.5 + alpha) + 1e-9);
            }
        }

        #[test]
        fn genmed_factor_three(
            seed in 0u64..1_000,
            k in 1usize..10,
        ) {
            // Random planar instance with a forced majority within eps of the
            // probe point: the selected candidate is within 3 eps.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let probe = [rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() * 4.0 - 2.0];
            let eps = 0.1 + rng.random::<f64>();
            let close = k / 2 + 1;
            let mut points: Vec<[f64; 2]> = Vec::with_capacity(k);
            for i in 0..k {
                if i < close {
                    let angle = rng.random::<f64>() * std::f64::consts::TAU;
                    let radius = rng.random::<f64>() * eps;
                    points.push([probe[0] + radius * angle.cos(), probe[1] + radius * angle.sin()]);
                } else {
                    points.push([rng.random::<f64>() * 40.0 - 20.0, rng.random::<f64>() * 40.0 - 20.0]);
                }
            }
            let metric = |a: &[f64; 2], b: &[f64; 2]| euclidean(a.as_slice(), b.as_slice());
            let w = CandidateSet::new(points.clone()).unwrap();
            prop_assert!(delta_radius(&w, &probe, 0.0, metric).unwrap() <= eps + 1e-12);
            let report = select_median_distance_set(&w, metric).unwrap();
            let chosen = &points[report.selected_index];
            prop_assert!(metric(chosen, &probe) <= 3.0 * eps + 1e-9);
        }

        #[test]
        fn monotone_transform_invariance(
            seed in 0u64..500,
            k in 2usize..9,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let points: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * 10.0).collect();
            let scales: Vec<f64> = (0..k).map(|_| 0.5 + rng.random::<f64>()).collect();
            let base = {
                let points = points.clone();
                move |j: usize, v: &f64| (points[j] - v).abs() * scales[j]
            };
            let w = CandidateSet::new(points.clone()).unwrap();
            let plain = select_median_distance_noisy(&w, |j, v| base(j, v)).unwrap();
            // Strictly increasing map applied to every oracle output.
            let mapped = select_median_distance_noisy(&w, |j, v| {
                let x = base(j, v);
                x * x * x + 2.0 * x
            }).unwrap();
            prop_assert_eq!(plain.tie_indices, mapped.tie_indices);
        }
    }
}
