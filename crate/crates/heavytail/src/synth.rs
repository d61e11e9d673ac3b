//! Seeded generators for heavy-tailed scalars, covariate designs, and linear
//! model datasets.
//!
//! Reproducibility contract: every generator is a pure function of its
//! inputs, and per-trial streams are derived from `(seed, trial)` without
//! sequencing, so trials can run in parallel in any order. The generator is
//! ChaCha8 keyed through a SplitMix-style mix; the crate pins the RNG stack
//! in its lockfile so sampled values are stable across builds.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal, Pareto, StudentT};

use crate::dataset::{Dataset, Truth};
use crate::error::{Error, Result};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Pure derivation of a sub-stream seed: distinct `stream` values give
/// non-overlapping generators without any sequencing between them.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ stream.wrapping_mul(0xA076_1D64_78BD_642F))
}

/// Deterministic RNG for one trial of a seeded experiment.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, trial))
}

/// Scalar distribution families used for covariate noise and experiment
/// inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum DistSpec {
    Gaussian { mean: f64, sd: f64 },
    StudentT { dof: f64 },
    Pareto { shape: f64, scale: f64, centered: bool },
    LogNormal { mu: f64, sigma: f64 },
    TwoPoint { values: Vec<f64>, probs: Vec<f64> },
}

impl DistSpec {
    pub fn standard_gaussian() -> Self {
        DistSpec::Gaussian { mean: 0.0, sd: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DistSpec::Gaussian { mean, sd } => {
                if !mean.is_finite() || !sd.is_finite() || *sd < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "gaussian requires finite mean and sd >= 0, got ({mean}, {sd})"
                    )));
                }
            }
            DistSpec::StudentT { dof } => {
                if dof.is_nan() || *dof <= 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "student t requires dof > 0, got {dof}"
                    )));
                }
            }
            DistSpec::Pareto { shape, scale, .. } => {
                if shape.is_nan() || *shape <= 0.0 || scale.is_nan() || *scale <= 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "pareto requires shape > 0 and scale > 0, got ({shape}, {scale})"
                    )));
                }
            }
            DistSpec::LogNormal { mu, sigma } => {
                if !mu.is_finite() || sigma.is_nan() || *sigma < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "lognormal requires finite mu and sigma >= 0, got ({mu}, {sigma})"
                    )));
                }
            }
            DistSpec::TwoPoint { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return Err(Error::InvalidArgument(
                        "two_point needs matching nonempty values and probs".into(),
                    ));
                }
                if probs.iter().any(|p| *p < 0.0) {
                    return Err(Error::InvalidArgument("two_point probs must be >= 0".into()));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidArgument(format!(
                        "two_point probs must sum to 1, got {total}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Population mean, when defined and finite.
    pub fn population_mean(&self) -> Option<f64> {
        match self {
            DistSpec::Gaussian { mean, .. } => Some(*mean),
            DistSpec::StudentT { dof } => (*dof > 1.0).then_some(0.0),
            DistSpec::Pareto {
                shape,
                scale,
                centered,
            } => {
                if *shape <= 1.0 {
                    None
                } else if *centered {
                    Some(0.0)
                } else {
                    Some(shape * scale / (shape - 1.0))
                }
            }
            DistSpec::LogNormal { mu, sigma } => Some((mu + sigma * sigma / 2.0).exp()),
            DistSpec::TwoPoint { values, probs } => {
                Some(values.iter().zip(probs).map(|(v, p)| v * p).sum())
            }
        }
    }

    /// Population variance, when defined and finite.
    pub fn population_variance(&self) -> Option<f64> {
        match self {
            DistSpec::Gaussian { sd, .. } => Some(sd * sd),
            DistSpec::StudentT { dof } => (*dof > 2.0).then(|| dof / (dof - 2.0)),
            DistSpec::Pareto { shape, scale, .. } => (*shape > 2.0).then(|| {
                scale * scale * shape / ((shape - 1.0) * (shape - 1.0) * (shape - 2.0))
            }),
            DistSpec::LogNormal { mu, sigma } => {
                let s2 = sigma * sigma;
                Some(((s2).exp_m1()) * (2.0 * mu + s2).exp())
            }
            DistSpec::TwoPoint { values, probs } => {
                let mean = self.population_mean()?;
                Some(
                    values
                        .iter()
                        .zip(probs)
                        .map(|(v, p)| (v - mean) * (v - mean) * p)
                        .sum(),
                )
            }
        }
    }

    fn sample_into(&self, rng: &mut ChaCha8Rng, n: usize) -> Result<Vec<f64>> {
        self.validate()?;
        let out = match self {
            DistSpec::Gaussian { mean, sd } => {
                let dist = Normal::new(*mean, *sd)
                    .map_err(|e| Error::InvalidArgument(e.to_string()))?;
                (0..n).map(|_| dist.sample(rng)).collect()
            }
            DistSpec::StudentT { dof } => {
                let dist = StudentT::new(*dof)
                    .map_err(|e| Error::InvalidArgument(e.to_string()))?;
                (0..n).map(|_| dist.sample(rng)).collect()
            }
            DistSpec::Pareto {
                shape,
                scale,
                centered,
            } => {
                if *centered && *shape <= 1.0 {
                    return Err(Error::MeanUndefined { shape: *shape });
                }
                let dist = Pareto::new(*scale, *shape)
                    .map_err(|e| Error::InvalidArgument(e.to_string()))?;
                let shift = if *centered {
                    shape * scale / (shape - 1.0)
                } else {
                    0.0
                };
                (0..n).map(|_| dist.sample(rng) - shift).collect()
            }
            DistSpec::LogNormal { mu, sigma } => {
                let dist = LogNormal::new(*mu, *sigma)
                    .map_err(|e| Error::InvalidArgument(e.to_string()))?;
                (0..n).map(|_| dist.sample(rng)).collect()
            }
            DistSpec::TwoPoint { values, probs } => {
                let mut cumulative = Vec::with_capacity(probs.len());
                let mut acc = 0.0;
                for p in probs {
                    acc += p;
                    cumulative.push(acc);
                }
                (0..n)
                    .map(|_| {
                        let u: f64 = rng.random();
                        let idx = cumulative
                            .iter()
                            .position(|c| u < *c)
                            .unwrap_or(values.len() - 1);
                        values[idx]
                    })
                    .collect()
            }
        };
        Ok(out)
    }
}

impl std::fmt::Display for DistSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DistSpec::Gaussian { mean, sd } => write!(f, "gaussian({mean},{sd})"),
            DistSpec::StudentT { dof } => write!(f, "student_t({dof})"),
            DistSpec::Pareto {
                shape,
                scale,
                centered,
            } => {
                if *centered {
                    write!(f, "pareto({shape},{scale},centered)")
                } else {
                    write!(f, "pareto({shape},{scale})")
                }
            }
            DistSpec::LogNormal { mu, sigma } => write!(f, "lognormal({mu},{sigma})"),
            DistSpec::TwoPoint { values, probs } => {
                let pairs: Vec<String> = values
                    .iter()
                    .zip(probs)
                    .map(|(v, p)| format!("{v}:{p}"))
                    .collect();
                write!(f, "two_point({})", pairs.join(","))
            }
        }
    }
}

impl std::str::FromStr for DistSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |msg: &str| Error::InvalidArgument(format!("bad distribution `{s}`: {msg}"));
        let (name, args) = match s.find('(') {
            Some(open) => {
                if !s.ends_with(')') {
                    return Err(bad("missing `)`"));
                }
                (&s[..open], &s[open + 1..s.len() - 1])
            }
            None => (s, ""),
        };
        let nums = |args: &str| -> Result<Vec<f64>> {
            args.split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| t.trim().parse::<f64>().map_err(|_| bad("bad number")))
                .collect()
        };
        let spec = match name.trim() {
            "gaussian" | "normal" => {
                let v = nums(args)?;
                match v.len() {
                    0 => DistSpec::standard_gaussian(),
                    2 => DistSpec::Gaussian { mean: v[0], sd: v[1] },
                    _ => return Err(bad("gaussian takes 0 or 2 parameters")),
                }
            }
            "student_t" => {
                let v = nums(args)?;
                if v.len() != 1 {
                    return Err(bad("student_t takes 1 parameter"));
                }
                DistSpec::StudentT { dof: v[0] }
            }
            "pareto" => {
                let parts: Vec<&str> = args.split(',').map(str::trim).collect();
                let centered = parts.last() == Some(&"centered");
                let numeric = if centered {
                    &parts[..parts.len() - 1]
                } else {
                    &parts[..]
                };
                if numeric.len() != 2 {
                    return Err(bad("pareto takes shape, scale[, centered]"));
                }
                let shape = numeric[0].parse().map_err(|_| bad("bad shape"))?;
                let scale = numeric[1].parse().map_err(|_| bad("bad scale"))?;
                DistSpec::Pareto {
                    shape,
                    scale,
                    centered,
                }
            }
            "lognormal" => {
                let v = nums(args)?;
                if v.len() != 2 {
                    return Err(bad("lognormal takes 2 parameters"));
                }
                DistSpec::LogNormal { mu: v[0], sigma: v[1] }
            }
            "two_point" => {
                let mut values = Vec::new();
                let mut probs = Vec::new();
                for pair in args.split(',').filter(|t| !t.trim().is_empty()) {
                    let (v, p) = pair.split_once(':').ok_or_else(|| bad("expected v:p pairs"))?;
                    values.push(v.trim().parse().map_err(|_| bad("bad value"))?);
                    probs.push(p.trim().parse().map_err(|_| bad("bad prob"))?);
                }
                DistSpec::TwoPoint { values, probs }
            }
            other => return Err(bad(&format!("unknown family `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Draw `n` i.i.d. scalars. Deterministic given `(spec, n, seed)`.
pub fn sample_scalar(spec: &DistSpec, n: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));
    spec.sample_into(&mut rng, n)
}

/// Covariate designs for linear-model generation.
#[derive(Debug, Clone)]
pub enum CovSpec {
    /// Standard Gaussian rows, population second moment `I`.
    Identity,
    /// Gaussian rows with the given PSD second-moment matrix.
    ExplicitPsd(DMatrix<f64>),
    /// Rows drawn uniformly from the standard basis vectors, population
    /// second moment `(1/d) I`.
    OrthonormalBasisUniform,
}

/// Symmetric PSD square root via eigendecomposition. Eigenvalues below
/// `-1e-9` are rejected; small negatives are clamped to zero.
fn psd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    for ev in eig.eigenvalues.iter() {
        if *ev < -1e-9 {
            return Err(Error::NotPsd { eigenvalue: *ev });
        }
    }
    let sqrt_vals = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|ev| ev.max(0.0).sqrt()),
    );
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose())
}

/// Linear-model dataset: rows per `cov_spec`, `y = x . w_star + eps` with a
/// centered noise distribution; truth fields populated.
pub fn gen_linear_model(
    n: usize,
    w_star: &DVector<f64>,
    cov_spec: &CovSpec,
    noise_spec: &DistSpec,
    seed: u64,
) -> Result<Dataset> {
    let d = w_star.len();
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument("need n >= 1 and d >= 1".into()));
    }
    match noise_spec.population_mean() {
        Some(m) if m.abs() <= 1e-12 => {}
        Some(m) => {
            return Err(Error::InvalidArgument(format!(
                "noise spec must be centered (population mean {m})"
            )))
        }
        None => {
            return Err(Error::InvalidArgument(
                "noise spec must have a defined mean".into(),
            ))
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1));
    let (x, sigma) = match cov_spec {
        CovSpec::Identity => {
            let normal = Normal::new(0.0, 1.0).unwrap();
            let x = DMatrix::from_fn(n, d, |_, _| normal.sample(&mut rng));
            (x, DMatrix::identity(d, d))
        }
        CovSpec::ExplicitPsd(sigma) => {
            if sigma.nrows() != d || sigma.ncols() != d {
                return Err(Error::DimensionMismatch {
                    context: "covariance spec",
                    expected: d,
                    got: sigma.nrows(),
                });
            }
            let root = psd_sqrt(sigma)?;
            let normal = Normal::new(0.0, 1.0).unwrap();
            let z = DMatrix::from_fn(n, d, |_, _| normal.sample(&mut rng));
            (z * root.transpose(), sigma.clone())
        }
        CovSpec::OrthonormalBasisUniform => {
            let mut x = DMatrix::zeros(n, d);
            for i in 0..n {
                let j = rng.random_range(0..d);
                x[(i, j)] = 1.0;
            }
            (x, DMatrix::identity(d, d) / d as f64)
        }
    };

    let mut noise_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2));
    let eps = noise_spec.sample_into(&mut noise_rng, n)?;
    let y = DVector::from_iterator(n, (0..n).map(|i| x.row(i).transpose().dot(w_star) + eps[i]));
    Ok(Dataset::new(x, y)?.with_truth(Truth {
        w_opt: w_star.clone(),
        sigma,
        noise_variance: noise_spec.population_variance(),
    }))
}

/// Minimax design: covariates uniform over the standard basis and Gaussian
/// responses `y = x . w_star + N(0, sigma^2)`. Also reports how many rows
/// landed on each basis vector.
#[derive(Debug, Clone)]
pub struct MinimaxDesign {
    pub dataset: Dataset,
    pub basis_counts: Vec<usize>,
}

pub fn gen_minimax_design(
    n: usize,
    d: usize,
    sigma: f64,
    w_star: &DVector<f64>,
    seed: u64,
) -> Result<MinimaxDesign> {
    if w_star.len() != d {
        return Err(Error::DimensionMismatch {
            context: "minimax design weights",
            expected: d,
            got: w_star.len(),
        });
    }
    let dataset = gen_linear_model(
        n,
        w_star,
        &CovSpec::OrthonormalBasisUniform,
        &DistSpec::Gaussian { mean: 0.0, sd: sigma },
        seed,
    )?;
    let mut basis_counts = vec![0usize; d];
    for i in 0..n {
        let j = (0..d)
            .find(|j| dataset.x[(i, *j)] != 0.0)
            .expect("basis row has one nonzero");
        basis_counts[j] += 1;
    }
    Ok(MinimaxDesign {
        dataset,
        basis_counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_constant_is_constant() {
        let spec = DistSpec::TwoPoint {
            values: vec![0.0],
            probs: vec![1.0],
        };
        let xs = sample_scalar(&spec, 100, 4).unwrap();
        assert!(xs.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn pareto_mean_matches_analytic() {
        let spec = DistSpec::Pareto {
            shape: 3.0,
            scale: 1.0,
            centered: false,
        };
        let xs = sample_scalar(&spec, 1_000_000, 7).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 1.5).abs() < 0.01, "mean = {mean}");
        assert_eq!(spec.population_mean(), Some(1.5));
    }

    #[test]
    fn student_t_variance_matches_analytic() {
        let spec = DistSpec::StudentT { dof: 3.0 };
        let xs = sample_scalar(&spec, 1_000_000, 0).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64;
        assert!((var - 3.0).abs() < 0.1, "var = {var}");
    }

    #[test]
    fn centered_pareto_is_mean_zero() {
        let spec = DistSpec::Pareto {
            shape: 3.0,
            scale: 1.0,
            centered: true,
        };
        let xs = sample_scalar(&spec, 500_000, 9).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.01, "mean = {mean}");
    }

    #[test]
    fn centered_pareto_rejects_undefined_mean() {
        let spec = DistSpec::Pareto {
            shape: 0.9,
            scale: 1.0,
            centered: true,
        };
        assert!(matches!(
            sample_scalar(&spec, 10, 0),
            Err(Error::MeanUndefined { .. })
        ));
    }

    #[test]
    fn sampling_is_reproducible() {
        let spec = DistSpec::StudentT { dof: 2.5 };
        let a = sample_scalar(&spec, 1000, 42).unwrap();
        let b = sample_scalar(&spec, 1000, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_scalar(&spec, 1000, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn trial_streams_are_distinct() {
        let seeds: Vec<u64> = (0..100).map(|t| derive_seed(5, t)).collect();
        let mut unique = seeds.clone();
        unique.sort_unstable();
        unique.dedup();
        assert_eq!(unique.len(), seeds.len());

        let mut a = trial_rng(5, 0);
        let mut b = trial_rng(5, 1);
        let xa: Vec<u64> = (0..8).map(|_| a.random()).collect();
        let xb: Vec<u64> = (0..8).map(|_| b.random()).collect();
        assert_ne!(xa, xb);
    }

    #[test]
    fn dist_spec_parse_roundtrip() {
        for text in [
            "gaussian(0,1)",
            "gaussian(-2.5,3)",
            "student_t(2.5)",
            "pareto(3,1)",
            "pareto(3,1,centered)",
            "lognormal(0,1)",
            "two_point(0:0.5,10:0.5)",
        ] {
            let spec: DistSpec = text.parse().unwrap();
            let rendered = spec.to_string();
            let again: DistSpec = rendered.parse().unwrap();
            assert_eq!(spec, again, "roundtrip failed for {text}");
        }
        assert_eq!(
            "gaussian".parse::<DistSpec>().unwrap(),
            DistSpec::standard_gaussian()
        );
        assert!("two_point(0:0.4,1:0.4)".parse::<DistSpec>().is_err());
        assert!("cauchy(1)".parse::<DistSpec>().is_err());
    }

    #[test]
    fn zero_noise_model_is_exact() {
        let w = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let noise = DistSpec::TwoPoint {
            values: vec![0.0],
            probs: vec![1.0],
        };
        let ds = gen_linear_model(50, &w, &CovSpec::Identity, &noise, 3).unwrap();
        let residual = &ds.y - &ds.x * &w;
        assert!(residual.amax() == 0.0);
        assert_eq!(ds.truth.as_ref().unwrap().noise_variance, Some(0.0));
    }

    #[test]
    fn identity_design_second_moment_near_identity() {
        let w = DVector::from_vec(vec![0.0; 4]);
        let ds = gen_linear_model(
            100_000,
            &w,
            &CovSpec::Identity,
            &DistSpec::standard_gaussian(),
            10,
        )
        .unwrap();
        let m = ds.x.transpose() * &ds.x / ds.n() as f64;
        let diff = &m - DMatrix::identity(4, 4);
        let spectral = diff.symmetric_eigen().eigenvalues.amax();
        assert!(spectral < 0.02, "spectral deviation {spectral}");
    }

    #[test]
    fn basis_design_frequencies() {
        let d = 4;
        let n = 10_000;
        let w = DVector::from_vec(vec![0.0; d]);
        let ds = gen_linear_model(
            n,
            &w,
            &CovSpec::OrthonormalBasisUniform,
            &DistSpec::standard_gaussian(),
            11,
        )
        .unwrap();
        for j in 0..d {
            let count = (0..n).filter(|i| ds.x[(*i, j)] == 1.0).count() as f64;
            let expect = n as f64 / d as f64;
            assert!(
                (count - expect).abs() <= 3.0 * (n as f64).sqrt(),
                "basis {j}: count {count}"
            );
        }
    }

    #[test]
    fn rejects_uncentered_noise() {
        let w = DVector::from_vec(vec![1.0]);
        let noise = DistSpec::Pareto {
            shape: 3.0,
            scale: 1.0,
            centered: false,
        };
        assert!(gen_linear_model(10, &w, &CovSpec::Identity, &noise, 0).is_err());
    }

    #[test]
    fn explicit_psd_rejects_indefinite() {
        let w = DVector::from_vec(vec![1.0, 1.0]);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            gen_linear_model(
                10,
                &w,
                &CovSpec::ExplicitPsd(bad),
                &DistSpec::standard_gaussian(),
                0
            ),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn minimax_counts_sum_to_n() {
        let w = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let design = gen_minimax_design(1000, 3, 0.5, &w, 21).unwrap();
        assert_eq!(design.basis_counts.iter().sum::<usize>(), 1000);
        assert_eq!(design.dataset.n(), 1000);
    }
}
