//! Robust estimation under heavy-tailed data.
//!
//! The common scheme: split the sample into disjoint groups, produce one
//! candidate estimate per group, then select a single candidate by a
//! median-style rule in a suitable metric. A majority of merely-okay
//! candidates yields a selected estimate whose deviation tail decays
//! exponentially in the group count, with no boundedness or subgaussian
//! assumptions on the data.
//!
//! Modules:
//! - [`mom`]: scalar median-of-means and its deviation bound.
//! - [`metric_select`]: candidate selection in arbitrary (pseudo)metric
//!   spaces, with exact or noisy distances, plus geometric-median variants.
//! - [`regression`]: subsampled least squares / ridge with selection under
//!   data-dependent quadratic-form metrics.
//! - [`lasso`]: sparse estimation with coordinate descent and
//!   restricted-eigenvalue diagnostics.
//! - [`covariance`]: covariance selection under the spectral norm and
//!   trace-norm shrinkage.
//! - [`predict`]: output-space median aggregation of predictor ensembles.
//! - [`geometry`]: adversarial finite-metric and simplex fixtures with the
//!   approximation-factor tables.
//! - [`synth`]: seeded heavy-tailed data generators.
//! - [`experiment`]: the Monte Carlo harness behind the `heavytail-est` CLI.

pub mod covariance;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod lasso;
pub mod metric_select;
pub mod mom;
pub mod predict;
pub mod regression;
pub mod synth;

pub use dataset::{Dataset, Truth};
pub use error::{Error, Result};
pub use metric_select::{CandidateSet, Procedure, SelectionReport};
pub use mom::{lower_median, median_of_means, mom_deviation_bound, MomConfig};
