//! The uniform-basis design: exact recovery without noise, and the scalar
//! mean-estimation variance law per coordinate.

use heavytail::regression::fit_group_least_squares;
use heavytail::synth::gen_minimax_design;
use nalgebra::DVector;

#[test]
fn zero_noise_recovers_exactly() {
    let d = 4;
    let w_star = DVector::from_vec(vec![1.5, -2.0, 0.25, 3.0]);
    let design = gen_minimax_design(400, d, 0.0, &w_star, 77).unwrap();
    assert!(design.basis_counts.iter().all(|c| *c > 0));
    let fitted = fit_group_least_squares(&design.dataset.x, &design.dataset.y, 0.0).unwrap();
    assert!((fitted - w_star).amax() < 1e-10);
}

#[test]
fn per_coordinate_error_variance_scales_inversely_with_count() {
    // With x uniform over the basis and Gaussian noise, coordinate j of the
    // least-squares fit is the mean of n_j independent N(w_j, sigma^2)
    // draws, so n_j * (error_j)^2 has expectation sigma^2.
    let d = 4;
    let sigma = 0.7;
    let w_star = DVector::from_vec(vec![0.5, 1.0, -1.0, 2.0]);
    let replicates = 500;
    let mut scaled_sq_errors = Vec::with_capacity(replicates * d);
    for rep in 0..replicates as u64 {
        let design = gen_minimax_design(400, d, sigma, &w_star, 1000 + rep).unwrap();
        let fitted =
            fit_group_least_squares(&design.dataset.x, &design.dataset.y, 0.0).unwrap();
        for j in 0..d {
            let err = fitted[j] - w_star[j];
            scaled_sq_errors.push(design.basis_counts[j] as f64 * err * err);
        }
    }
    let mean = scaled_sq_errors.iter().sum::<f64>() / scaled_sq_errors.len() as f64;
    let target = sigma * sigma;
    assert!(
        (mean - target).abs() < 0.1 * target,
        "scaled squared error {mean} vs sigma^2 {target}"
    );
}
