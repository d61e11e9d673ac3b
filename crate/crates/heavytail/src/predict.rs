//! Output-space aggregation: predict with the median of an ensemble's
//! predictions. Useful when no reasonable metric exists on the predictors
//! themselves; a majority of low-risk members bounds the aggregate risk by
//! `(1/(2 gamma) + 1)` times theirs, for any link convex in the prediction.

use crate::error::{Error, Result};
use crate::mom::lower_median;

/// A boxed prediction function.
pub type Predictor<'a, X> = Box<dyn Fn(&X) -> f64 + Send + Sync + 'a>;

/// An ensemble of prediction functions with a majority margin `gamma`:
/// at least `(1/2 + gamma) k` members are assumed good.
pub struct PredictorEnsemble<'a, X> {
    predictors: Vec<Predictor<'a, X>>,
    pub gamma: f64,
}

impl<'a, X> PredictorEnsemble<'a, X> {
    pub fn new(predictors: Vec<Predictor<'a, X>>, gamma: f64) -> Result<Self> {
        if predictors.is_empty() {
            return Err(Error::EmptyCandidateSet);
        }
        if !(gamma > 0.0 && gamma <= 0.5) {
            return Err(Error::InvalidArgument(format!(
                "gamma must be in (0, 1/2], got {gamma}"
            )));
        }
        Ok(Self { predictors, gamma })
    }

    pub fn len(&self) -> usize {
        self.predictors.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All member predictions at `x`, in member order.
    pub fn predictions(&self, x: &X) -> Result<Vec<f64>> {
        let out: Vec<f64> = self.predictors.iter().map(|f| f(x)).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "ensemble prediction",
            });
        }
        Ok(out)
    }
}

/// Lower median of the ensemble's predictions at `x`.
pub fn median_prediction<X>(ensemble: &PredictorEnsemble<'_, X>, x: &X) -> Result<f64> {
    let preds = ensemble.predictions(x)?;
    Ok(lower_median(&preds).expect("ensemble is nonempty"))
}

/// Risk bound `(1/(2 gamma) + 1) * ell_bar` for median aggregation when at
/// least `(1/2 + gamma) k` members have risk at most `ell_bar`.
pub fn aggregate_risk_bound(gamma: f64, ell_bar: f64) -> Result<f64> {
    if gamma == 0.0 {
        return Err(Error::InvalidArgument("gamma must be nonzero".into()));
    }
    if !(gamma > 0.0 && gamma <= 0.5) || ell_bar < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "need gamma in (0, 1/2] and ell_bar >= 0, got ({gamma}, {ell_bar})"
        )));
    }
    Ok((1.0 / (2.0 * gamma) + 1.0) * ell_bar)
}

/// Squared link `(p - y)^2`; convex in the prediction.
pub fn squared_link(prediction: f64, truth: f64) -> f64 {
    (prediction - truth) * (prediction - truth)
}

/// Absolute link `|p - y|`; convex in the prediction.
pub fn absolute_link(prediction: f64, truth: f64) -> f64 {
    (prediction - truth).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn constant_ensemble(values: &[f64]) -> PredictorEnsemble<'static, f64> {
        let predictors: Vec<Predictor<'static, f64>> = values
            .iter()
            .map(|v| {
                let v = *v;
                Box::new(move |_: &f64| v) as Predictor<'static, f64>
            })
            .collect();
        PredictorEnsemble::new(predictors, 0.25).unwrap()
    }

    #[test]
    fn median_prediction_examples() {
        assert_eq!(
            median_prediction(&constant_ensemble(&[1.0, 2.0, 10.0]), &0.0).unwrap(),
            2.0
        );
        assert_eq!(
            median_prediction(&constant_ensemble(&[7.5]), &0.0).unwrap(),
            7.5
        );
        assert_eq!(
            median_prediction(&constant_ensemble(&[0.0, 0.0, 5.0, 5.0]), &0.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn non_finite_predictions_are_rejected() {
        let predictors: Vec<Predictor<'static, f64>> = vec![Box::new(|_| f64::NAN)];
        let ensemble = PredictorEnsemble::new(predictors, 0.5).unwrap();
        assert!(median_prediction(&ensemble, &0.0).is_err());
    }

    #[test]
    fn risk_bound_values() {
        assert!((aggregate_risk_bound(0.5, 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(aggregate_risk_bound(0.25, 0.0).unwrap(), 0.0);
        assert!((aggregate_risk_bound(0.25, 2.0).unwrap() - 6.0).abs() < 1e-15);
        assert!(aggregate_risk_bound(0.0, 1.0).is_err());
        assert!(aggregate_risk_bound(0.7, 1.0).is_err());
    }

    #[test]
    fn median_breakdown_resists_minority_corruption() {
        // With the majority pinned at a constant, corrupting strictly fewer
        // than ceil(k/2) members cannot move the median.
        for k in 2..10usize {
            let corrupt = k.div_ceil(2) - 1;
            let mut values = vec![3.0; k];
            for (i, slot) in values.iter_mut().take(corrupt).enumerate() {
                *slot = if i % 2 == 0 { 1e9 } else { -1e9 };
            }
            let ensemble = constant_ensemble(&values);
            assert_eq!(
                median_prediction(&ensemble, &0.0).unwrap(),
                3.0,
                "k = {k}, corrupt = {corrupt}"
            );
        }
    }

    #[test]
    fn squared_link_risk_bound_monte_carlo() {
        // Biased ensemble members: good members have small bias, bad members
        // a huge one. The aggregate squared-loss risk respects the bound up
        // to Monte Carlo error.
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for (gamma, k) in [(1.0 / 6.0, 6usize), (0.25, 8), (0.5, 4)] {
            let good = ((0.5 + gamma) * k as f64).round() as usize;
            let biases: Vec<f64> = (0..k)
                .map(|i| if i < good { 0.1 * (i as f64 + 1.0) } else { 50.0 })
                .collect();
            let predictors: Vec<Predictor<'static, f64>> = biases
                .iter()
                .map(|b| {
                    let b = *b;
                    Box::new(move |x: &f64| x + b) as Predictor<'static, f64>
                })
                .collect();
            let ensemble = PredictorEnsemble::new(predictors, gamma).unwrap();

            // Population risk of member i is bias^2 + noise variance.
            let noise_sd = 0.5;
            let ell_bar = biases[..good]
                .iter()
                .map(|b| b * b + noise_sd * noise_sd)
                .fold(0.0f64, f64::max);

            let test_points = 10_000;
            let mut losses = Vec::with_capacity(test_points);
            for _ in 0..test_points {
                let x: f64 = rng.random::<f64>() * 4.0 - 2.0;
                let y = x + noise_sd * (rng.random::<f64>() + rng.random::<f64>() + rng.random::<f64>()
                    + rng.random::<f64>()
                    - 2.0)
                    * (3.0f64).sqrt();
                let pred = median_prediction(&ensemble, &x).unwrap();
                losses.push(squared_link(pred, y));
            }
            let mean = losses.iter().sum::<f64>() / losses.len() as f64;
            let var = losses
                .iter()
                .map(|l| (l - mean) * (l - mean))
                .sum::<f64>()
                / losses.len() as f64;
            let stderr = (var / losses.len() as f64).sqrt();
            let bound = aggregate_risk_bound(gamma, ell_bar).unwrap();
            assert!(
                mean <= bound + 3.0 * stderr,
                "gamma {gamma}: risk {mean} above bound {bound} + 3se {stderr}"
            );
        }
    }
}
