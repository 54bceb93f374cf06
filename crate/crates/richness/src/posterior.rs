//! Closed-form moments of the Bayesian posterior over species
//! probabilities under a symmetric Dirichlet prior.
//!
//! Assume the population holds exactly `T` species with probability vector
//! `p` drawn from a symmetric Dirichlet(λ) prior, and that the sample
//! produced multiplicities `m_1, …, m_N` (with `m_i = 0` for the `T - N`
//! unobserved species). The posterior is Dirichlet with parameters
//! `m_i + λ`, giving closed forms:
//!
//! ```text
//! E[p_i]      = (m_i + λ) / (Tλ + n)
//! E[p_i²]     = (m_i + λ)(m_i + λ + 1) / ((Tλ + n + 1)(Tλ + n))
//! E[p_i p_j]  = (m_i + λ)(m_j + λ)     / ((Tλ + n + 1)(Tλ + n))   (i ≠ j)
//! Σ_i E[p_i²] = (q + n(2λ + 1) + T(λ² + λ)) / ((Tλ + n + 1)(Tλ + n))
//! ```
//!
//! where `q = Σ m_i²`. The posterior mass expected on unobserved species is
//! `(T - N)λ / (Tλ + n)`. These moments are the raw material for the
//! λ-matching equation in [`crate::lambda`] and for population
//! reconstruction in [`crate::reconstruct`].

use serde::Serialize;
use thiserror::Error;

use crate::freq::FrequencyData;

/// Errors from posterior parameter validation and moment queries.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PosteriorError {
    /// `T` must cover every observed species.
    #[error("assumed total {total} is smaller than the {observed} observed species")]
    TotalBelowObserved { total: u64, observed: u64 },
    /// λ must be a positive, finite real (≥ 1 for the standard entry point).
    /// The `λ = ∞` branch of the solver has no finite-λ posterior; callers
    /// use the documented uniform limits instead.
    #[error("invalid prior parameter lambda = {0}: must be finite and {1}")]
    InvalidLambda(f64, &'static str),
    /// Species index outside `1..=T`.
    #[error("species index {index} out of range 1..={total}")]
    IndexOutOfRange { index: usize, total: u64 },
    /// Cross moments need two distinct indices.
    #[error("cross moment requires distinct indices (both were {0})")]
    EqualIndices(usize),
}

/// Validated parameters `(T, λ, sample)` of one posterior.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorParams {
    total: u64,
    lambda: f64,
    counts: Vec<u64>,
    sample_size: u64,
    count_square_sum: u64,
}

impl PosteriorParams {
    /// Standard entry point: requires `λ ≥ 1`.
    pub fn new(total: u64, lambda: f64, freq: &FrequencyData) -> Result<Self, PosteriorError> {
        if !(lambda.is_finite() && lambda >= 1.0) {
            return Err(PosteriorError::InvalidLambda(lambda, "≥ 1"));
        }
        Self::from_counts_unchecked(total, lambda, freq.counts().to_vec())
    }

    /// Relaxed entry point permitting any `λ > 0`, for moment-matching
    /// searches that roam below 1.
    pub fn relaxed(total: u64, lambda: f64, freq: &FrequencyData) -> Result<Self, PosteriorError> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(PosteriorError::InvalidLambda(lambda, "> 0"));
        }
        Self::from_counts_unchecked(total, lambda, freq.counts().to_vec())
    }

    /// Build directly from raw multiplicities; an empty slice expresses the
    /// no-data posterior (pure prior). Requires `λ ≥ 1`.
    pub fn from_counts(total: u64, lambda: f64, counts: &[u64]) -> Result<Self, PosteriorError> {
        if !(lambda.is_finite() && lambda >= 1.0) {
            return Err(PosteriorError::InvalidLambda(lambda, "≥ 1"));
        }
        Self::from_counts_unchecked(total, lambda, counts.to_vec())
    }

    fn from_counts_unchecked(
        total: u64,
        lambda: f64,
        counts: Vec<u64>,
    ) -> Result<Self, PosteriorError> {
        let observed = counts.len() as u64;
        if total < observed {
            return Err(PosteriorError::TotalBelowObserved { total, observed });
        }
        let sample_size = counts.iter().sum();
        let count_square_sum = counts.iter().map(|m| m * m).sum();
        Ok(Self {
            total,
            lambda,
            counts,
            sample_size,
            count_square_sum,
        })
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn observed(&self) -> u64 {
        self.counts.len() as u64
    }

    pub fn sample_size(&self) -> u64 {
        self.sample_size
    }

    /// Multiplicity of species `index` (1-based), 0 for unobserved indices.
    fn multiplicity(&self, index: usize) -> Result<f64, PosteriorError> {
        if index == 0 || index as u64 > self.total {
            return Err(PosteriorError::IndexOutOfRange {
                index,
                total: self.total,
            });
        }
        Ok(self.counts.get(index - 1).copied().unwrap_or(0) as f64)
    }

    /// Posterior total pseudo-count `Tλ + n`, the common denominator.
    fn concentration(&self) -> f64 {
        self.total as f64 * self.lambda + self.sample_size as f64
    }

    /// Posterior mean `E[p_i] = (m_i + λ)/(Tλ + n)`.
    pub fn mean_p(&self, index: usize) -> Result<f64, PosteriorError> {
        let m = self.multiplicity(index)?;
        Ok((m + self.lambda) / self.concentration())
    }

    /// Posterior second moment
    /// `E[p_i²] = (m_i + λ)(m_i + λ + 1)/((Tλ + n + 1)(Tλ + n))`.
    pub fn second_moment_p(&self, index: usize) -> Result<f64, PosteriorError> {
        let m = self.multiplicity(index)?;
        let a = m + self.lambda;
        let c = self.concentration();
        Ok(a * (a + 1.0) / ((c + 1.0) * c))
    }

    /// Posterior cross moment
    /// `E[p_i p_j] = (m_i + λ)(m_j + λ)/((Tλ + n + 1)(Tλ + n))` for `i ≠ j`.
    pub fn cross_moment_p(&self, i: usize, j: usize) -> Result<f64, PosteriorError> {
        if i == j {
            return Err(PosteriorError::EqualIndices(i));
        }
        let mi = self.multiplicity(i)?;
        let mj = self.multiplicity(j)?;
        let c = self.concentration();
        Ok((mi + self.lambda) * (mj + self.lambda) / ((c + 1.0) * c))
    }

    /// Closed form for `Σ_{i=1}^{T} E[p_i²]`.
    pub fn sum_second_moments(&self) -> f64 {
        sum_second_moments_real(
            self.count_square_sum as f64,
            self.sample_size as f64,
            self.total as f64,
            self.lambda,
        )
    }

    /// Posterior mass expected on the unobserved species:
    /// `Σ_{i=N+1}^{T} E[p_i] = (T - N)λ/(Tλ + n)`.
    pub fn unseen_mass(&self) -> f64 {
        (self.total - self.observed()) as f64 * self.lambda / self.concentration()
    }
}

/// `Σ_i E[p_i²]` with a real-valued total. The λ-matching equation treats
/// the assumed total as the (non-integer) occupancy solution, so the sum is
/// needed off the integer grid as well.
pub(crate) fn sum_second_moments_real(q: f64, n: f64, total: f64, lambda: f64) -> f64 {
    let c = total * lambda + n;
    (q + n * (2.0 * lambda + 1.0) + total * (lambda * lambda + lambda)) / ((c + 1.0) * c)
}
