//! The moment-matching equation in the Dirichlet prior parameter λ and its
//! closed-form solution.
//!
//! For a candidate λ, the occupancy identity fixes the (real-valued) total
//! species count
//!
//! ```text
//! T_λ = n(N + n₁/λ) / (n - n₁) = (N + n·u/λ) / (1 - u),
//! ```
//!
//! the unique `T` for which the posterior's expected unseen mass equals the
//! unseen-probability estimate `u`. Matching the posterior's expected sum of
//! squared probabilities to the sample estimate `v` defines
//!
//! ```text
//! f(λ) = v - Σ_k E[p_k²]   evaluated at T = T_λ,
//! ```
//!
//! a rational function of λ with poles `β₁ = -n/N` and `β₂ = β₁ - (1-u)/N`,
//! roots `λ₁ = n(u-2)/N ≤ 0` and `λ₂ = (1-u-v+uv-uvn)/(Nv+u-1)`, ordering
//! `λ₁ ≤ β₂ < β₁ < 0`, and `f` strictly increasing on `(β₁, ∞)` with
//! `lim_{λ→∞} f(λ) = (Nv+u-1)/N`. Minimizing `|f|` over `λ ≥ 1` therefore
//! has a three-branch closed form on the sample statistics:
//!
//! ```text
//! λ̂ = ∞    iff  0 ≤ u ≤ 1 - N·v          (f stays negative; |f| ↓ to its limit)
//! λ̂ = λ₂   iff  1 - N·v < u ≤ (2 - v(N+1)) / (2 - v + v·n)   (interior root, ≥ 1)
//! λ̂ = 1    iff  u above that threshold    (root falls below 1; clamp)
//! ```
//!
//! All three conditions are evaluated in exact integer arithmetic on the
//! underlying counts, so branch selection never suffers floating-point
//! boundary noise. The reciprocal `γ̂² = 1/λ̂` is the implied coefficient of
//! variation of the species probabilities (0 when `λ̂ = ∞`, the uniform
//! population).

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::freq::FrequencyData;

/// Errors from evaluating `f` or solving for λ̂.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LambdaError {
    /// Every observation was a singleton (`n₁ = n`): the occupancy identity
    /// divides by `n - n₁` and no estimator in this family is defined.
    #[error("degenerate sample: every species was observed exactly once (u = 1), so coverage-based estimators are undefined")]
    DegenerateAllSingletons,
    /// `f` is only defined (and increasing) to the right of its largest
    /// pole `β₁ = -n/N`.
    #[error("lambda = {lambda} is at or below the pole beta1 = {pole}; f is only evaluated for lambda > beta1")]
    AtOrBelowPole { lambda: f64, pole: f64 },
}

/// The matched prior parameter: a finite real `≥ 1` or the uniform limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaHat {
    Finite(f64),
    Infinite,
}

impl LambdaHat {
    /// The implied squared coefficient of variation `γ̂² = 1/λ̂`
    /// (0 for the uniform limit).
    pub fn gamma2(&self) -> f64 {
        match self {
            LambdaHat::Finite(l) => 1.0 / l,
            LambdaHat::Infinite => 0.0,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, LambdaHat::Infinite)
    }

    /// Finite value, if any.
    pub fn finite(&self) -> Option<f64> {
        match self {
            LambdaHat::Finite(l) => Some(*l),
            LambdaHat::Infinite => None,
        }
    }
}

impl std::fmt::Display for LambdaHat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LambdaHat::Finite(l) => write!(f, "{l}"),
            LambdaHat::Infinite => write!(f, "inf"),
        }
    }
}

/// Serialized as the number itself, or `null` for the uniform limit (JSON
/// has no infinity literal).
impl Serialize for LambdaHat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            LambdaHat::Finite(l) => serializer.serialize_f64(*l),
            LambdaHat::Infinite => serializer.serialize_none(),
        }
    }
}

/// Which of the three closed-form branches produced λ̂.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaBranch {
    /// The interior root fell below 1; λ̂ is clamped to 1.
    ClampedToOne,
    /// λ̂ is the interior root λ₂ of `f`.
    InteriorRoot,
    /// `f` never vanishes on `[1, ∞)`; `|f|` is minimized in the λ → ∞
    /// limit (uniform population, γ̂² = 0).
    Infinite,
}

/// Full solver output: λ̂ with its branch, plus the roots and poles of `f`
/// as diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSolution {
    pub lambda_hat: LambdaHat,
    pub branch: LambdaBranch,
    /// Non-positive root `λ₁ = n(u-2)/N`.
    pub lambda1: f64,
    /// Root `λ₂ = (1-u-v+uv-uvn)/(Nv+u-1)`; `None` when the denominator is
    /// exactly zero (the λ̂ = ∞ boundary).
    pub lambda2: Option<f64>,
    /// Largest pole `β₁ = -n/N`.
    pub beta1: f64,
    /// Smaller pole `β₂ = -n/N - (1-u)/N`.
    pub beta2: f64,
    /// `1/λ̂` (0 when λ̂ = ∞).
    pub gamma2_hat: f64,
}

impl Serialize for LambdaSolution {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("LambdaSolution", 7)?;
        s.serialize_field("lambda_hat", &self.lambda_hat)?;
        s.serialize_field("lambda_branch", &self.branch)?;
        s.serialize_field("gamma2_hat", &self.gamma2_hat)?;
        s.serialize_field("lambda1", &self.lambda1)?;
        s.serialize_field("lambda2", &self.lambda2)?;
        s.serialize_field("beta1", &self.beta1)?;
        s.serialize_field("beta2", &self.beta2)?;
        s.end()
    }
}

/// Largest pole `β₁ = -n/N` of `f` for this sample.
fn beta1_of(freq: &FrequencyData) -> f64 {
    -(freq.sample_size() as f64) / freq.species_observed() as f64
}

/// The real-valued occupancy total `T_λ = (N + n·u/λ)/(1-u)`.
///
/// Shared with the estimator module via `pub(crate)`; callers guarantee
/// `u < 1` and `λ ≠ 0`.
pub(crate) fn t_lambda_real(freq: &FrequencyData, lambda: f64) -> f64 {
    let n = freq.sample_size() as f64;
    let n1 = freq.singletons() as f64;
    let species = freq.species_observed() as f64;
    n * (species + n1 / lambda) / (n - n1)
}

/// The moment-matching objective `f(λ) = v - Σ_k E[p_k²]` at `T = T_λ`.
///
/// Defined for any `λ > β₁` except 0 is fine too: the composition
/// simplifies to a rational function whose only poles at or left of β₁ are
/// excluded by the domain check, so negative λ in `(β₁, 0]` are accepted
/// (the monotonicity lemma covers that range).
pub fn f_of_lambda(freq: &FrequencyData, lambda: f64) -> Result<f64, LambdaError> {
    if freq.is_all_singletons() {
        return Err(LambdaError::DegenerateAllSingletons);
    }
    let pole = beta1_of(freq);
    if !lambda.is_finite() || lambda <= pole {
        return Err(LambdaError::AtOrBelowPole { lambda, pole });
    }
    let n = freq.sample_size() as f64;
    let species = freq.species_observed() as f64;
    let u = freq.unseen_probability();
    let v = freq.squared_prob_sum();
    let q = freq.count_square_sum() as f64;
    // T_λ·λ = (Nλ + n·u)/(1-u) stays finite as λ → 0, so evaluate the
    // composed rational function rather than T_λ itself.
    let coverage = 1.0 - u;
    let t_lambda_times_lambda = (species * lambda + n * u) / coverage;
    let concentration = t_lambda_times_lambda + n; // = (Nλ + n)/(1-u)
    let numerator = q + n * (2.0 * lambda + 1.0) + (lambda + 1.0) * t_lambda_times_lambda;
    Ok(v - numerator / ((concentration + 1.0) * concentration))
}

/// The λ → ∞ limit of `f`: `(Nv + u - 1)/N`.
pub fn f_limit(freq: &FrequencyData) -> f64 {
    let species = freq.species_observed() as f64;
    (species * freq.squared_prob_sum() + freq.unseen_probability() - 1.0) / species
}

/// Exact integer branch comparisons. All quantities fit comfortably in
/// `i128` (bounded by n³·N with realistic n).
pub(crate) struct BranchArithmetic {
    n: i128,
    n1: i128,
    species: i128,
    pairs: i128,
    w: i128, // n(n-1)
}

impl BranchArithmetic {
    pub(crate) fn new(freq: &FrequencyData) -> Self {
        let n = freq.sample_size() as i128;
        Self {
            n,
            n1: freq.singletons() as i128,
            species: freq.species_observed() as i128,
            pairs: freq.pair_count_sum() as i128,
            w: n * (n - 1),
        }
    }

    /// `u ≤ 1 - N·v`, equivalently `n₁(n-1) + N·s ≤ n(n-1)`.
    pub(crate) fn unseen_below_uniform_gap(&self) -> bool {
        self.n1 * (self.n - 1) + self.species * self.pairs <= self.w
    }

    /// `u ≤ (2 - v(N+1)) / (2 - v + v·n)`, equivalently
    /// `n₁(2w + s(n-1)) ≤ n(2w - s(N+1))`.
    fn root_at_least_one(&self) -> bool {
        self.n1 * (2 * self.w + self.pairs * (self.n - 1))
            <= self.n * (2 * self.w - self.pairs * (self.species + 1))
    }

    /// λ₂ as an exact integer ratio (numerator, denominator), both scaled
    /// by `n·w`; `None` when the denominator `Nv + u - 1` is exactly zero.
    fn lambda2_ratio(&self) -> Option<(i128, i128)> {
        let num = self.n * self.w - self.n1 * self.w - self.n * self.pairs + self.n1 * self.pairs
            - self.n * self.n1 * self.pairs;
        let den = self.species * self.n * self.pairs + self.n1 * self.w - self.n * self.w;
        if den == 0 {
            None
        } else {
            Some((num, den))
        }
    }
}

/// Solve `λ̂ = arg inf_{λ≥1} |f(λ)|` by the closed-form branch conditions.
pub fn solve_lambda(freq: &FrequencyData) -> Result<LambdaSolution, LambdaError> {
    if freq.is_all_singletons() {
        return Err(LambdaError::DegenerateAllSingletons);
    }
    let n = freq.sample_size() as f64;
    let species = freq.species_observed() as f64;
    let u = freq.unseen_probability();
    let beta1 = -n / species;
    let beta2 = beta1 - (1.0 - u) / species;
    let lambda1 = n * (u - 2.0) / species;

    let arith = BranchArithmetic::new(freq);
    let lambda2 = arith
        .lambda2_ratio()
        .map(|(num, den)| num as f64 / den as f64);

    let (lambda_hat, branch) = if arith.unseen_below_uniform_gap() {
        (LambdaHat::Infinite, LambdaBranch::Infinite)
    } else if arith.root_at_least_one() {
        // In this region λ₂ exists and is ≥ 1; the max() only guards the
        // last float ulp of the integer-ratio division.
        let root = lambda2.expect("interior branch implies Nv + u - 1 > 0");
        (LambdaHat::Finite(root.max(1.0)), LambdaBranch::InteriorRoot)
    } else {
        (LambdaHat::Finite(1.0), LambdaBranch::ClampedToOne)
    };

    Ok(LambdaSolution {
        gamma2_hat: lambda_hat.gamma2(),
        lambda_hat,
        branch,
        lambda1,
        lambda2,
        beta1,
        beta2,
    })
}

/// Test utility: is `f` nondecreasing along a sorted grid of λ values
/// (all above β₁)?
pub fn verify_monotonicity(freq: &FrequencyData, grid: &[f64]) -> Result<bool, LambdaError> {
    let mut previous: Option<f64> = None;
    for &lambda in grid {
        let value = f_of_lambda(freq, lambda)?;
        if let Some(prev) = previous {
            // Strict growth up to float noise on near-flat stretches.
            if value < prev - 1e-12 * (1.0 + prev.abs()) {
                return Ok(false);
            }
        }
        previous = Some(value);
    }
    Ok(true)
}
