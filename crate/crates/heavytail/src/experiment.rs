//! Seeded Monte Carlo experiment harness behind the `heavytail-est` CLI.
//!
//! Each experiment runs `trials` independent replicates, one CSV row per
//! trial, with per-trial RNG streams derived from `(seed, trial)` so runs
//! are byte-reproducible regardless of the parallelism cap
//! (`HEAVYTAIL_THREADS`). The CSV carries a `# schema=1` header, a
//! timestamped `# generated=` line (the only line that varies between
//! identical runs), and a trailing summary block of requested quantiles.
//!
//! Config files are plain `key = value` text; see the repository README for
//! the grammar.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::covariance::{cov_median_select, kolt_bound_check, spectral_distance, trace_norm_shrink};
use crate::error::{Error, Result};
use crate::geometry::{
    factor_geometric_median_hilbert, factor_geometric_median_set, factor_geometric_median_space,
    factor_median_distance_set, factor_median_distance_space, hilbert_lower_bound_set,
    hilbert_lower_bound_space, minimize_normalized_factor,
};
use crate::lasso::{heavy_tail_lasso, HeavyLassoConfig};
use crate::mom::{groups_for_confidence, median_of_means, MomConfig};
use crate::regression::{
    erm_fit, excess_loss, heavy_tail_regress, GroupSpec, RegressionConfig, SigmaVariant,
};
use crate::synth::{derive_seed, DistSpec};
use crate::synth::{gen_linear_model, CovSpec};

/// Which Monte Carlo suite to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    MomVsEmpirical,
    RegressHeavy,
    LassoHeavy,
    CovShrink,
    GeometryTables,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::MomVsEmpirical => "mom_vs_empirical",
            ExperimentKind::RegressHeavy => "regress_heavy",
            ExperimentKind::LassoHeavy => "lasso_heavy",
            ExperimentKind::CovShrink => "cov_shrink",
            ExperimentKind::GeometryTables => "geometry_tables",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mom_vs_empirical" => Some(ExperimentKind::MomVsEmpirical),
            "regress_heavy" => Some(ExperimentKind::RegressHeavy),
            "lasso_heavy" => Some(ExperimentKind::LassoHeavy),
            "cov_shrink" => Some(ExperimentKind::CovShrink),
            "geometry_tables" => Some(ExperimentKind::GeometryTables),
            _ => None,
        }
    }
}

/// Full experiment configuration; parses from and renders to the key-value
/// text format.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub trials: usize,
    pub seed: u64,
    pub n: usize,
    pub d: usize,
    /// Explicit group count. Mutually exclusive with `delta`.
    pub k: Option<usize>,
    /// Confidence level mapping to a group count. Mutually exclusive with `k`.
    pub delta: Option<f64>,
    pub lambda: f64,
    /// Data distribution for scalar experiments.
    pub dist: DistSpec,
    /// Noise distribution for regression experiments.
    pub noise: DistSpec,
    pub sigma: f64,
    pub eta: f64,
    pub s: usize,
    /// Failure probabilities for the quantile summary.
    pub quantile_deltas: Vec<f64>,
    pub output_path: PathBuf,
}

impl ExperimentConfig {
    pub fn defaults(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment,
            trials: 100,
            seed: 1,
            n: 1200,
            d: 5,
            k: Some(24),
            delta: None,
            lambda: 0.2,
            dist: DistSpec::StudentT { dof: 2.5 },
            noise: DistSpec::StudentT { dof: 2.5 },
            sigma: 1.0,
            eta: 1.0,
            s: 1,
            quantile_deltas: vec![0.1, 0.01, 0.001],
            output_path: PathBuf::from("results.csv"),
        }
    }

    /// Resolved group count: explicit `k`, or the deviation-bound mapping of
    /// `delta`, or the default.
    pub fn groups(&self) -> usize {
        match (self.k, self.delta) {
            (Some(k), _) => k,
            (None, Some(delta)) => groups_for_confidence(delta),
            (None, None) => 24,
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("experiment = {}\n", self.experiment.name()));
        out.push_str(&format!("trials = {}\n", self.trials));
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("n = {}\n", self.n));
        out.push_str(&format!("d = {}\n", self.d));
        if let Some(k) = self.k {
            out.push_str(&format!("k = {k}\n"));
        }
        if let Some(delta) = self.delta {
            out.push_str(&format!("delta = {delta}\n"));
        }
        out.push_str(&format!("lambda = {}\n", self.lambda));
        out.push_str(&format!("dist = {}\n", self.dist));
        out.push_str(&format!("noise = {}\n", self.noise));
        out.push_str(&format!("sigma = {}\n", self.sigma));
        out.push_str(&format!("eta = {}\n", self.eta));
        out.push_str(&format!("s = {}\n", self.s));
        let deltas: Vec<String> = self.quantile_deltas.iter().map(|d| format!("{d}")).collect();
        out.push_str(&format!("quantile_deltas = {}\n", deltas.join(",")));
        out.push_str(&format!("out = {}\n", self.output_path.display()));
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut experiment: Option<ExperimentKind> = None;
        let mut fields: Vec<(usize, String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::InvalidConfig {
                line: lineno + 1,
                field: line.to_string(),
                message: "expected `key = value`".into(),
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key == "experiment" {
                experiment = Some(ExperimentKind::parse(&value).ok_or_else(|| {
                    Error::InvalidConfig {
                        line: lineno + 1,
                        field: key.clone(),
                        message: format!("unknown experiment `{value}`"),
                    }
                })?);
            } else {
                fields.push((lineno + 1, key, value));
            }
        }
        let experiment = experiment.ok_or_else(|| Error::InvalidConfig {
            line: 1,
            field: "experiment".into(),
            message: "missing `experiment = <name>`".into(),
        })?;
        let mut cfg = ExperimentConfig::defaults(experiment);
        cfg.k = None;
        for (line, key, value) in fields {
            let invalid = |message: String| Error::InvalidConfig {
                line,
                field: key.clone(),
                message,
            };
            match key.as_str() {
                "trials" => cfg.trials = value.parse().map_err(|_| invalid("bad integer".into()))?,
                "seed" => cfg.seed = value.parse().map_err(|_| invalid("bad integer".into()))?,
                "n" => cfg.n = value.parse().map_err(|_| invalid("bad integer".into()))?,
                "d" => cfg.d = value.parse().map_err(|_| invalid("bad integer".into()))?,
                "k" => cfg.k = Some(value.parse().map_err(|_| invalid("bad integer".into()))?),
                "delta" => {
                    cfg.delta = Some(value.parse().map_err(|_| invalid("bad number".into()))?)
                }
                "lambda" => cfg.lambda = value.parse().map_err(|_| invalid("bad number".into()))?,
                "dist" => cfg.dist = value.parse().map_err(|e| invalid(format!("{e}")))?,
                "noise" => cfg.noise = value.parse().map_err(|e| invalid(format!("{e}")))?,
                "sigma" => cfg.sigma = value.parse().map_err(|_| invalid("bad number".into()))?,
                "eta" => cfg.eta = value.parse().map_err(|_| invalid("bad number".into()))?,
                "s" => cfg.s = value.parse().map_err(|_| invalid("bad integer".into()))?,
                "quantile_deltas" => {
                    cfg.quantile_deltas = value
                        .split(',')
                        .map(|t| t.trim().parse::<f64>())
                        .collect::<std::result::Result<Vec<f64>, _>>()
                        .map_err(|_| invalid("bad number list".into()))?;
                }
                "out" => cfg.output_path = PathBuf::from(value),
                other => return Err(invalid(format!("unknown key `{other}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidConfig {
            line: 0,
            field: "config".into(),
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |field: &str, message: String| Error::InvalidConfig {
            line: 0,
            field: field.into(),
            message,
        };
        if self.trials == 0 {
            return Err(invalid("trials", "must be >= 1".into()));
        }
        if self.k.is_some() && self.delta.is_some() {
            return Err(invalid("k", "supply exactly one of k and delta".into()));
        }
        if let Some(delta) = self.delta {
            if !(0.0 < delta && delta < 1.0) {
                return Err(invalid("delta", "must be in (0,1)".into()));
            }
        }
        if self.quantile_deltas.is_empty()
            || self.quantile_deltas.iter().any(|d| !(0.0 < *d && *d < 1.0))
        {
            return Err(invalid("quantile_deltas", "each must be in (0,1)".into()));
        }
        self.dist.validate().map_err(|e| invalid("dist", e.to_string()))?;
        self.noise.validate().map_err(|e| invalid("noise", e.to_string()))?;
        match self.experiment {
            ExperimentKind::MomVsEmpirical => {
                if self.dist.population_mean().is_none() {
                    return Err(invalid("dist", "data distribution needs a finite mean".into()));
                }
                if self.groups() > self.n {
                    return Err(invalid("k", "more groups than samples".into()));
                }
            }
            ExperimentKind::RegressHeavy | ExperimentKind::LassoHeavy => {
                if self.d == 0 || self.n == 0 {
                    return Err(invalid("n", "need n >= 1 and d >= 1".into()));
                }
                if self.groups() * 2 > self.n {
                    return Err(invalid("k", "need n >= 2k".into()));
                }
            }
            ExperimentKind::CovShrink => {
                if self.groups() > self.n {
                    return Err(invalid("k", "more groups than samples".into()));
                }
            }
            ExperimentKind::GeometryTables => {}
        }
        Ok(())
    }
}

/// Nearest-rank lower quantiles: for each failure probability `delta`, the
/// value at rank `ceil((1-delta) * n)` of the ascending order statistics.
pub fn quantile_report(values: &[f64], deltas: &[f64]) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("empty quantile input".into()));
    }
    if deltas.iter().any(|d| !(0.0 < *d && *d < 1.0)) {
        return Err(Error::InvalidArgument("deltas must be in (0,1)".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    Ok(deltas
        .iter()
        .map(|delta| {
            let rank = ((1.0 - delta) * n as f64).ceil().max(1.0) as usize;
            (*delta, sorted[rank.min(n) - 1])
        })
        .collect())
}

/// Output of a finished experiment: the CSV text written to disk and the
/// human summary printed to standard output.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub csv: String,
    pub summary: String,
}

fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let cap = std::env::var("HEAVYTAIL_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|t| *t >= 1);
    match cap {
        Some(threads) => match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

fn now_unix() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

struct Table {
    header: String,
    rows: Vec<String>,
    summary: Vec<String>,
}

fn mom_vs_empirical(cfg: &ExperimentConfig) -> Result<Table> {
    let mean = cfg
        .dist
        .population_mean()
        .expect("validated: finite mean");
    let ks: Vec<usize> = cfg
        .quantile_deltas
        .iter()
        .map(|d| groups_for_confidence(*d).min(cfg.n))
        .collect();

    let mut header = String::from("trial,seed,emp_dev");
    for delta in &cfg.quantile_deltas {
        header.push_str(&format!(",mom_dev_d{delta}"));
    }

    let rows: Vec<(String, f64, Vec<f64>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<(String, f64, Vec<f64>)> {
            let trial_seed = derive_seed(cfg.seed, trial as u64);
            let data = crate::synth::sample_scalar(&cfg.dist, cfg.n, trial_seed)?;
            let emp = data.iter().sum::<f64>() / data.len() as f64;
            let emp_dev = (emp - mean).abs();
            let mut mom_devs = Vec::with_capacity(ks.len());
            for (j, k) in ks.iter().enumerate() {
                let est = median_of_means(
                    &data,
                    &MomConfig {
                        k: *k,
                        seed: derive_seed(trial_seed, 100 + j as u64),
                    },
                )?;
                mom_devs.push((est - mean).abs());
            }
            let mut row = format!("{trial},{trial_seed},{emp_dev}");
            for dev in &mom_devs {
                row.push_str(&format!(",{dev}"));
            }
            Ok((row, emp_dev, mom_devs))
        })
        .collect::<Result<Vec<_>>>()?;

    let emp_devs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let mut summary = Vec::new();
    for (j, delta) in cfg.quantile_deltas.iter().enumerate() {
        let mom_devs: Vec<f64> = rows.iter().map(|r| r.2[j]).collect();
        let q_emp = quantile_report(&emp_devs, &[*delta])?[0].1;
        let q_mom = quantile_report(&mom_devs, &[*delta])?[0].1;
        let ratio = if q_mom > 0.0 { q_emp / q_mom } else { f64::NAN };
        summary.push(format!(
            "# summary delta={delta} k={} q_emp={q_emp} q_mom={q_mom} ratio={ratio}",
            ks[j]
        ));
    }
    Ok(Table {
        header,
        rows: rows.into_iter().map(|r| r.0).collect(),
        summary,
    })
}

fn default_weights(d: usize) -> DVector<f64> {
    DVector::from_fn(d, |i, _| (i as f64 + 1.0) / d as f64)
}

fn regress_heavy(cfg: &ExperimentConfig) -> Result<Table> {
    let w_star = default_weights(cfg.d);
    let k = cfg.groups();
    let rows: Vec<(String, f64, f64)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<(String, f64, f64)> {
            let trial_seed = derive_seed(cfg.seed, trial as u64);
            let ds = gen_linear_model(cfg.n, &w_star, &CovSpec::Identity, &cfg.noise, trial_seed)?;
            let truth = ds.truth.clone().expect("generator populates truth");
            let model = heavy_tail_regress(
                &ds,
                &RegressionConfig {
                    lambda: cfg.lambda,
                    groups: GroupSpec::Count(k),
                    variant: SigmaVariant::PerGroup,
                    seed: derive_seed(trial_seed, 7),
                },
            )?;
            let excess_alg = excess_loss(&model.weights, &truth)?;
            let erm = erm_fit(&ds, cfg.lambda)?;
            let excess_erm = excess_loss(&erm, &truth)?;
            Ok((
                format!("{trial},{trial_seed},{excess_alg},{excess_erm}"),
                excess_alg,
                excess_erm,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let alg: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let erm: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let mut summary = Vec::new();
    for delta in &cfg.quantile_deltas {
        let q_alg = quantile_report(&alg, &[*delta])?[0].1;
        let q_erm = quantile_report(&erm, &[*delta])?[0].1;
        summary.push(format!(
            "# summary delta={delta} k={k} q_excess_alg={q_alg} q_excess_erm={q_erm}"
        ));
    }
    Ok(Table {
        header: "trial,seed,excess_alg,excess_erm".into(),
        rows: rows.into_iter().map(|r| r.0).collect(),
        summary,
    })
}

fn lasso_heavy(cfg: &ExperimentConfig) -> Result<Table> {
    let mut w_star = DVector::zeros(cfg.d);
    for j in 0..cfg.s.min(cfg.d) {
        w_star[j] = 1.0;
    }
    let k = cfg.groups();
    let rows: Vec<(String, f64)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<(String, f64)> {
            let trial_seed = derive_seed(cfg.seed, trial as u64);
            let ds = gen_linear_model(cfg.n, &w_star, &CovSpec::Identity, &cfg.noise, trial_seed)?;
            let lasso_cfg = HeavyLassoConfig {
                sigma: cfg.sigma,
                eta: cfg.eta,
                groups: GroupSpec::Count(k),
                tol: 1e-8,
                max_iter: 100_000,
                seed: derive_seed(trial_seed, 7),
            };
            let (w, report) = heavy_tail_lasso(&ds, &lasso_cfg)?;
            let err = (&w - &w_star).norm();
            Ok((
                format!("{trial},{trial_seed},{err},{}", report.selected_index),
                err,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let errs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let mut summary = Vec::new();
    for delta in &cfg.quantile_deltas {
        let q = quantile_report(&errs, &[*delta])?[0].1;
        summary.push(format!("# summary delta={delta} k={k} q_l2_err={q}"));
    }
    Ok(Table {
        header: "trial,seed,l2_err,selected".into(),
        rows: rows.into_iter().map(|r| r.0).collect(),
        summary,
    })
}

fn cov_shrink(cfg: &ExperimentConfig) -> Result<Table> {
    // Near-low-rank truth: two strong directions, the rest faint.
    let sigma_true: DMatrix<f64> = DMatrix::from_fn(cfg.d, cfg.d, |i, j| {
        if i != j {
            0.0
        } else if i == 0 {
            3.0
        } else if i == 1 && cfg.d > 1 {
            1.0
        } else {
            0.05
        }
    });
    let root = DMatrix::from_fn(cfg.d, cfg.d, |i, j| {
        if i == j {
            sigma_true[(i, i)].sqrt()
        } else {
            0.0
        }
    });
    let k = cfg.groups();
    let rows: Vec<(String, f64, f64, bool, bool)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<(String, f64, f64, bool, bool)> {
            let trial_seed = derive_seed(cfg.seed, trial as u64);
            let z = crate::synth::sample_scalar(
                &DistSpec::standard_gaussian(),
                cfg.n * cfg.d,
                trial_seed,
            )?;
            let zmat = DMatrix::from_row_slice(cfg.n, cfg.d, &z);
            let samples = zmat * &root;
            let (sigma_hat, _) = cov_median_select(&samples, k, derive_seed(trial_seed, 7))?;
            let sigma_lambda = trace_norm_shrink(&sigma_hat, cfg.lambda)?;
            let spec_err = spectral_distance(&sigma_hat, &sigma_true);
            let frob_shrunk = (&sigma_lambda - &sigma_true).norm();
            let report =
                kolt_bound_check(&sigma_lambda, &sigma_true, &sigma_hat, cfg.lambda, None)?;
            let applicable = !report.vacuous;
            let holds = report.all_hold();
            Ok((
                format!(
                    "{trial},{trial_seed},{spec_err},{frob_shrunk},{},{}",
                    applicable as u8, holds as u8
                ),
                spec_err,
                frob_shrunk,
                applicable,
                holds,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let spec_errs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let frob: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let applicable = rows.iter().filter(|r| r.3).count();
    let held = rows.iter().filter(|r| r.3 && r.4).count();
    let mut summary = vec![format!(
        "# summary lambda={} applicable={applicable} held={held}",
        cfg.lambda
    )];
    for delta in &cfg.quantile_deltas {
        let q_spec = quantile_report(&spec_errs, &[*delta])?[0].1;
        let q_frob = quantile_report(&frob, &[*delta])?[0].1;
        summary.push(format!(
            "# summary delta={delta} k={k} q_spec_err={q_spec} q_frob_shrunk={q_frob}"
        ));
    }
    Ok(Table {
        header: "trial,seed,spec_err,frob_shrunk,kolt_applicable,kolt_holds".into(),
        rows: rows.into_iter().map(|r| r.0).collect(),
        summary,
    })
}

fn geometry_tables(_cfg: &ExperimentConfig) -> Result<Table> {
    let mut rows = Vec::new();
    type FactorFn = fn(f64) -> f64;
    let entries: [(&str, FactorFn); 4] = [
        ("median_distance_set", factor_median_distance_set),
        ("median_distance_space", factor_median_distance_space),
        ("geometric_median_set", factor_geometric_median_set),
        ("geometric_median_space", factor_geometric_median_space),
    ];
    for (name, factor) in entries {
        let (alpha, value) = minimize_normalized_factor(factor);
        rows.push(format!("normalized_factor_{name},{value},{alpha}"));
    }
    for alpha in [0.3, 0.4, 0.45, 0.49, 0.499, 0.5] {
        rows.push(format!(
            "hilbert_geometric_median_factor_alpha_{alpha},{},",
            factor_geometric_median_hilbert(alpha)
        ));
    }
    for alpha in [0.1, 0.25, 0.4] {
        rows.push(format!(
            "hilbert_lower_bound_set_alpha_{alpha},{},",
            hilbert_lower_bound_set(alpha)
        ));
        rows.push(format!(
            "hilbert_lower_bound_space_alpha_{alpha},{},",
            hilbert_lower_bound_space(alpha)
        ));
    }
    Ok(Table {
        header: "quantity,value,argmin_alpha".into(),
        rows,
        summary: vec!["# summary table=normalized_approximation_factors".into()],
    })
}

/// Run the configured experiment, write its CSV, and return the output.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let table = with_thread_cap(|| match cfg.experiment {
        ExperimentKind::MomVsEmpirical => mom_vs_empirical(cfg),
        ExperimentKind::RegressHeavy => regress_heavy(cfg),
        ExperimentKind::LassoHeavy => lasso_heavy(cfg),
        ExperimentKind::CovShrink => cov_shrink(cfg),
        ExperimentKind::GeometryTables => geometry_tables(cfg),
    })?;

    let mut csv = String::new();
    csv.push_str("# schema=1\n");
    csv.push_str(&format!("# generated=unix:{}\n", now_unix()));
    csv.push_str(&format!("# experiment={}\n", cfg.experiment.name()));
    csv.push_str(&format!("# seed={} trials={}\n", cfg.seed, cfg.trials));
    csv.push_str(&table.header);
    csv.push('\n');
    for row in &table.rows {
        csv.push_str(row);
        csv.push('\n');
    }
    for line in &table.summary {
        csv.push_str(line);
        csv.push('\n');
    }

    if let Some(parent) = cfg.output_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(&cfg.output_path, &csv)?;

    let summary = table.summary.join("\n");
    Ok(RunOutput { csv, summary })
}
