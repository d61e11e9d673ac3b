//! Scalar median-of-means estimation and its deviation-bound calculator.
//!
//! The estimator shuffles the sample with a seeded permutation, splits it
//! into `k` groups of `floor(n/k)` points (dropping the remainder), averages
//! each group, and returns the lower median of the group means. With only a
//! finite variance assumption the estimate concentrates exponentially in `k`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Group count and shuffle seed for the estimator.
#[derive(Debug, Clone, Copy)]
pub struct MomConfig {
    /// Number of groups; must satisfy `1 <= k <= n` at call time.
    pub k: usize,
    /// Seed for the partition shuffle.
    pub seed: u64,
}

/// Lower median: the `ceil(m/2)`-th order statistic.
///
/// For even counts this is always an attained value, which keeps pigeonhole
/// arguments about ball membership exact. Returns `None` on empty input.
pub fn lower_median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite value in median"));
    Some(sorted[values.len().div_ceil(2) - 1])
}

/// Seeded uniform shuffle of `0..n`, split into `k` contiguous groups of
/// `floor(n/k)` indices each. The `n - k * floor(n/k)` remainder indices are
/// dropped so every group has equal size.
pub fn partition_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k == 0 {
        return Err(Error::InvalidArgument("group count k must be >= 1".into()));
    }
    if k > n {
        return Err(Error::MoreGroupsThanSamples { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let group_size = n / k;
    Ok((0..k)
        .map(|g| order[g * group_size..(g + 1) * group_size].to_vec())
        .collect())
}

/// Partition a scalar sample into `k` seeded groups of equal size.
pub fn partition(sample: &[f64], k: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let groups = partition_indices(sample.len(), k, seed)?;
    Ok(groups
        .into_iter()
        .map(|idx| idx.into_iter().map(|i| sample[i]).collect())
        .collect())
}

/// Lower median of the group means. Building block for [`median_of_means`];
/// callers that need a fixed partition (no shuffle) can pass groups directly.
pub fn median_of_means_grouped(groups: &[Vec<f64>]) -> Result<f64> {
    if groups.is_empty() || groups.iter().any(|g| g.is_empty()) {
        return Err(Error::EmptyCandidateSet);
    }
    let means: Vec<f64> = groups
        .iter()
        .map(|g| g.iter().sum::<f64>() / g.len() as f64)
        .collect();
    Ok(lower_median(&means).expect("nonempty means"))
}

/// Median-of-means estimate of the population mean.
pub fn median_of_means(sample: &[f64], config: &MomConfig) -> Result<f64> {
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "median_of_means sample",
        });
    }
    let groups = partition(sample, config.k, config.seed)?;
    median_of_means_grouped(&groups)
}

/// Deviation bound `sigma * sqrt(6k/n)`, valid with probability at least
/// `1 - exp(-k/4.5)`.
pub fn mom_deviation_bound(sigma: f64, n: usize, k: usize) -> f64 {
    sigma * (6.0 * k as f64 / n as f64).sqrt()
}

/// Group count for a target confidence: `k = ceil(4.5 * ln(1/delta))`, the
/// conservative rounding of the deviation bound's exponent.
pub fn groups_for_confidence(delta: f64) -> usize {
    assert!(delta > 0.0 && delta < 1.0, "delta must be in (0,1)");
    (4.5 * (1.0 / delta).ln()).ceil() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn lower_median_conventions() {
        assert_eq!(lower_median(&[3.0]), Some(3.0));
        assert_eq!(lower_median(&[1.0, 2.0]), Some(1.0));
        assert_eq!(lower_median(&[2.0, 1.0, 3.0]), Some(2.0));
        assert_eq!(lower_median(&[4.0, 1.0, 3.0, 2.0]), Some(2.0));
        assert_eq!(lower_median(&[]), None);
    }

    #[test]
    fn partition_divisible() {
        let sample: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let groups = partition(&sample, 3, 7).unwrap();
        assert_eq!(groups.len(), 3);
        for g in &groups {
            assert_eq!(g.len(), 2);
        }
        let mut all: Vec<f64> = groups.concat();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(all, sample);
    }

    #[test]
    fn partition_drops_remainder() {
        let sample: Vec<f64> = (0..7).map(|i| i as f64).collect();
        let groups = partition(&sample, 3, 11).unwrap();
        assert_eq!(groups.len(), 3);
        for g in &groups {
            assert_eq!(g.len(), 2);
        }
        // Union is a sub-multiset of the sample with exactly one element dropped.
        let mut used: Vec<f64> = groups.concat();
        used.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(used.len(), 6);
        for v in &used {
            assert!(sample.contains(v));
        }
        used.dedup();
        assert_eq!(used.len(), 6, "sample values are distinct, groups must be too");
    }

    #[test]
    fn partition_single_group_is_shuffled_sample() {
        let sample: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let groups = partition(&sample, 1, 3).unwrap();
        assert_eq!(groups.len(), 1);
        let mut g = groups[0].clone();
        g.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(g, sample);
    }

    #[test]
    fn partition_rejects_k_above_n() {
        assert!(matches!(
            partition(&[1.0, 2.0], 3, 0),
            Err(Error::MoreGroupsThanSamples { k: 3, n: 2 })
        ));
    }

    #[test]
    fn constant_sample_returns_constant() {
        let sample = vec![4.25; 30];
        for k in [1, 3, 7, 30] {
            let est = median_of_means(&sample, &MomConfig { k, seed: 5 }).unwrap();
            assert_eq!(est, 4.25);
        }
    }

    #[test]
    fn fixed_partition_hand_evaluation() {
        // Identity grouping of (1..=6) into three pairs: means (1.5, 3.5, 5.5).
        let groups = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]];
        assert_eq!(median_of_means_grouped(&groups).unwrap(), 3.5);
    }

    #[test]
    fn k_equals_n_is_sample_median() {
        let sample = vec![9.0, 1.0, 5.0, 3.0, 7.0];
        let est = median_of_means(&sample, &MomConfig { k: 5, seed: 2 }).unwrap();
        assert_eq!(est, 5.0);
    }

    #[test]
    fn rejects_non_finite() {
        let sample = vec![1.0, f64::NAN, 2.0];
        assert!(median_of_means(&sample, &MomConfig { k: 1, seed: 0 }).is_err());
    }

    #[test]
    fn deviation_bound_values() {
        assert!((mom_deviation_bound(1.0, 1200, 24) - 0.12f64.sqrt()).abs() < 1e-15);
        assert_eq!(mom_deviation_bound(0.0, 100, 4), 0.0);
        assert!((mom_deviation_bound(2.0, 600, 6) - 2.0 * 0.06f64.sqrt()).abs() < 1e-15);
        assert!((mom_deviation_bound(2.0, 600, 6) - 0.4898979485566356).abs() < 1e-12);
    }

    #[test]
    fn groups_for_confidence_rounds_up() {
        assert_eq!(groups_for_confidence(0.1), 11);
        assert_eq!(groups_for_confidence(0.01), 21);
        assert_eq!(groups_for_confidence(0.001), 32);
    }

    #[test]
    fn translation_scale_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let sample: Vec<f64> = (0..200).map(|_| rng.random::<f64>() * 10.0 - 5.0).collect();
        // Positive scales for any k; negative scales need an odd group count
        // so the lower median is the unique middle value.
        for (a, b, k) in [(2.5, 7.0, 8), (0.3, -1.0, 8), (-2.5, 7.0, 7)] {
            let cfg = MomConfig { k, seed: 42 };
            let base = median_of_means(&sample, &cfg).unwrap();
            let mapped: Vec<f64> = sample.iter().map(|x| a * x + b).collect();
            let est = median_of_means(&mapped, &cfg).unwrap();
            assert!((est - (a * base + b)).abs() < 1e-12);
        }
    }

    /// Two-sample Kolmogorov-Smirnov distance.
    fn ks_distance(a: &mut [f64], b: &mut [f64]) -> f64 {
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let (n, m) = (a.len(), b.len());
        let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
        while i < n && j < m {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
        }
        d
    }

    #[test]
    fn permutation_invariance_in_distribution() {
        // Same data in two different orders, fresh shuffle seeds per trial:
        // the estimator's distribution must agree (two-sample KS at 1e-3).
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let data: Vec<f64> = (0..100).map(|_| rng.random::<f64>().powi(3) * 20.0).collect();
        let mut reordered = data.clone();
        reordered.reverse();
        reordered.swap(3, 57);

        let trials = 10_000usize;
        let mut ests_a = Vec::with_capacity(trials);
        let mut ests_b = Vec::with_capacity(trials);
        for t in 0..trials as u64 {
            let cfg_a = MomConfig { k: 5, seed: 1000 + t };
            let cfg_b = MomConfig { k: 5, seed: 900_000 + t };
            ests_a.push(median_of_means(&data, &cfg_a).unwrap());
            ests_b.push(median_of_means(&reordered, &cfg_b).unwrap());
        }
        let d = ks_distance(&mut ests_a, &mut ests_b);
        // Critical value at level 1e-3: sqrt(ln(2/alpha)/2) * sqrt((n+m)/(nm)).
        let alpha: f64 = 1e-3;
        let c = ((2.0 / alpha).ln() / 2.0).sqrt();
        let crit = c * ((2.0 * trials as f64) / (trials as f64 * trials as f64)).sqrt();
        assert!(d < crit, "KS distance {d} exceeds critical value {crit}");
    }
}
