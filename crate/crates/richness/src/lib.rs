//! Species-richness estimation from abundance frequency counts.
//!
//! Given a sample of `n` observations in which `N` distinct species appear,
//! with `n_j` species observed exactly `j` times, this crate estimates the
//! total number of species `T` in the underlying population (observed plus
//! unobserved), reconstructs a plausible probability vector for the full
//! population, and evaluates the estimators by Monte Carlo simulation.
//!
//! The centerpiece is a smoothing estimator built on a symmetric Dirichlet
//! posterior: the pseudo-count `λ` that makes the posterior's expected sum of
//! squared species probabilities agree with the Good-Toulmin estimate of that
//! sum has a closed-form solution, and plugging it into the add-λ occupancy
//! identity yields the richness estimate `t_lambda_hat`. Classical
//! comparison estimators (Turing-Good coverage, Esty, Chao-Lee, jackknife)
//! are included, along with percentile-bootstrap confidence intervals.
//!
//! Modules:
//! - [`freq`]: ingestion and validation of frequency-of-frequency data.
//! - [`posterior`]: exact moments of the symmetric Dirichlet posterior.
//! - [`lambda`]: the moment-matching equation in `λ` and its closed-form
//!   solution.
//! - [`estimators`]: the full estimator family and a combined report.
//! - [`reconstruct`]: population reconstruction with a geometric tail for
//!   the unobserved species.
//! - [`montecarlo`]: seeded, reproducible simulation studies and bootstrap
//!   confidence intervals.

pub mod estimators;
pub mod freq;
pub mod lambda;
pub mod montecarlo;
pub mod numeric;
pub mod posterior;
pub mod reconstruct;
pub mod rng;

pub use estimators::{EstimatorError, EstimatorReport, JackknifeEstimate, SecondMomentT};
pub use freq::{FreqError, FrequencyData};
pub use lambda::{LambdaBranch, LambdaError, LambdaHat, LambdaSolution};
pub use montecarlo::{
    BootstrapCi, ConfidenceRun, EstimatorStats, Generator, PopulationSpec, ReplicateSummary,
};
pub use posterior::{PosteriorError, PosteriorParams};
pub use reconstruct::{ReconstructError, ReconstructedPopulation, TailMode, TailStrategy};
