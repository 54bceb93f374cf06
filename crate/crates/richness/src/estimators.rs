//! Point estimators of the total species count `T` and of the squared
//! coefficient of variation `γ²` of the species probabilities, collected in
//! one comparable report.
//!
//! All coverage-based estimators build on the unseen-probability estimate
//! `u = n₁/n` and the squared-probability-sum estimate
//! `v = Σ_j j(j-1)n_j / (n(n-1))`:
//!
//! ```text
//! T̂_TG      = N/(1-u) = nN/(n-n₁)                (coverage baseline)
//! T̂_Esty(k) = T̂_TG + n·u/((1-u)·k)               (ad hoc k, default 2)
//! T̂_CL      = T̂_TG + n·u/(1-u) · γ̂²_CL,  γ̂²_CL = max(T̂_TG·v - 1, 0)
//! T̂₁        = same form at γ̂₁², the one-shot simultaneous solution
//! T̂₂        = T̂_λ at λ̂₂, the second-moment match (numeric)
//! T̂_λ̂       = n(N + n₁/λ̂)/(n-n₁) at the closed-form λ̂  (headline)
//! T̂_{+1}    = n(N + n₁)/(n-n₁)                    (λ = 1 upper anchor)
//! ```
//!
//! plus an order-selected jackknife as an external baseline. `T̂_λ` is
//! decreasing in λ and λ̂ ∈ [1, ∞], so `T̂_TG ≤ T̂_λ̂ ≤ T̂_{+1}` always.
//! Every estimator requires n₁ < n; an all-singleton sample has estimated
//! coverage zero and the family is undefined there.

use serde::Serialize;
use thiserror::Error;

use crate::freq::FrequencyData;
use crate::lambda::{
    solve_lambda, t_lambda_real, BranchArithmetic, LambdaError, LambdaHat, LambdaSolution,
};
use crate::numeric::golden_section_min;

/// Errors shared by the estimator family.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    /// Every observation was a singleton: estimated coverage is zero and
    /// `n - n₁` denominators vanish.
    #[error("degenerate sample: every species was observed exactly once (u = 1), so coverage-based estimators are undefined")]
    DegenerateAllSingletons,
    /// The numeric second-moment search produced a non-finite objective.
    #[error("second-moment solver failed: {detail}")]
    SolverFailure { detail: String },
}

impl From<LambdaError> for EstimatorError {
    fn from(err: LambdaError) -> Self {
        match err {
            LambdaError::DegenerateAllSingletons => EstimatorError::DegenerateAllSingletons,
            // Unreachable from solve_lambda, which never evaluates f at a pole.
            LambdaError::AtOrBelowPole { lambda, pole } => EstimatorError::SolverFailure {
                detail: format!(
                    "objective evaluated at lambda = {lambda}, at or below pole {pole}"
                ),
            },
        }
    }
}

fn require_coverage(freq: &FrequencyData) -> Result<(), EstimatorError> {
    if freq.is_all_singletons() {
        Err(EstimatorError::DegenerateAllSingletons)
    } else {
        Ok(())
    }
}

/// Coverage baseline `T̂_TG = nN/(n-n₁)`.
pub fn t_httg(freq: &FrequencyData) -> Result<f64, EstimatorError> {
    require_coverage(freq)?;
    let n = freq.sample_size() as f64;
    let n1 = freq.singletons() as f64;
    Ok(n * freq.species_observed() as f64 / (n - n1))
}

/// Esty-style correction `T̂_TG + n·u/((1-u)·k)` for a configured `k > 0`.
pub fn t_esty(freq: &FrequencyData, k: f64) -> Result<f64, EstimatorError> {
    assert!(k > 0.0, "Esty k must be positive, got {k}");
    let base = t_httg(freq)?;
    let u = freq.unseen_probability();
    Ok(base + freq.sample_size() as f64 * u / ((1.0 - u) * k))
}

/// The clamped plug-in dispersion `γ̂²_CL = max(T̂_TG·v - 1, 0)`.
pub fn gamma2_chao_lee(freq: &FrequencyData) -> Result<f64, EstimatorError> {
    let base = t_httg(freq)?;
    Ok((base * freq.squared_prob_sum() - 1.0).max(0.0))
}

/// The coverage estimator with plug-in dispersion,
/// `T̂_CL = T̂_TG + n·u/(1-u)·γ̂²_CL`.
pub fn t_chao_lee(freq: &FrequencyData) -> Result<f64, EstimatorError> {
    let gamma2 = gamma2_chao_lee(freq)?;
    coverage_family(freq, gamma2)
}

/// The shared functional form `T(γ²) = N/(1-u) + n·u/(1-u)·γ²`.
fn coverage_family(freq: &FrequencyData, gamma2: f64) -> Result<f64, EstimatorError> {
    let base = t_httg(freq)?;
    let u = freq.unseen_probability();
    Ok(base + freq.sample_size() as f64 * u / (1.0 - u) * gamma2)
}

/// One-shot simultaneous solution of `T = T(γ²)` and the dispersion
/// matching problem: minimize `|(1-u+nuv)γ² + 1-u-Nv|` over `γ² ≥ 0`,
/// giving
///
/// ```text
/// γ̂₁² = 0                        if u ≤ 1 - N·v   (exact integer test)
/// γ̂₁² = (Nv-1+u)/(1-u+nuv)       otherwise
/// ```
///
/// and `T̂₁ = T(γ̂₁²)`. Returns `(t_1, gamma2_1)`.
pub fn t_one(freq: &FrequencyData) -> Result<(f64, f64), EstimatorError> {
    require_coverage(freq)?;
    let gamma2 = if BranchArithmetic::new(freq).unseen_below_uniform_gap() {
        0.0
    } else {
        let n = freq.sample_size() as f64;
        let species = freq.species_observed() as f64;
        let u = freq.unseen_probability();
        let v = freq.squared_prob_sum();
        (species * v - 1.0 + u) / (1.0 - u + n * u * v)
    };
    Ok((coverage_family(freq, gamma2)?, gamma2))
}

/// `T̂_{+1} = n(N + n₁)/(n - n₁)`, the λ = 1 member of the occupancy family
/// and the upper anchor of the headline estimator.
pub fn t_plus_one(freq: &FrequencyData) -> Result<f64, EstimatorError> {
    require_coverage(freq)?;
    let n = freq.sample_size() as f64;
    let n1 = freq.singletons() as f64;
    Ok(n * (freq.species_observed() as f64 + n1) / (n - n1))
}

/// Where the total `T` inside the second-moment objective comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SecondMomentT {
    /// `T` held fixed at the coverage baseline `T̂_TG` while λ varies.
    /// This is the reading under which the solver reproduces the worked
    /// reference samples, so it is the default.
    #[default]
    HeldAtTuringGood,
    /// `T` re-solved from the occupancy identity at each candidate λ
    /// (the fully coupled system). Under this reading the objective is
    /// minimized at λ → 0 for some samples, sending T̂ → ∞.
    ResolvedPerLambda,
}

/// Second-moment estimator: `λ̂₂` minimizes `|Σ_k p̂_k(λ)² - v|` where the
/// smoothed probabilities are `(m_k+λ)/(Tλ+n)` for observed species and
/// `λ/(Tλ+n)` for each of the `T-N` unseen slots. Returns `(t_2, λ̂₂)`
/// with `t_2 = T̂_λ(λ̂₂)` (or `T̂_TG` when `λ̂₂ = ∞`).
pub fn t_two(freq: &FrequencyData) -> Result<(f64, LambdaHat), EstimatorError> {
    t_two_with(freq, SecondMomentT::default())
}

/// The smoothed squared-probability sum `Σ_k p̂_k(λ)²` given a total `T`:
/// `(q + 2nλ + Tλ²)/(Tλ + n)²`.
fn smoothed_square_sum(q: f64, n: f64, total: f64, lambda: f64) -> f64 {
    let concentration = total * lambda + n;
    (q + 2.0 * n * lambda + total * lambda * lambda) / (concentration * concentration)
}

/// See [`t_two`]; `mode` selects how `T` enters the objective.
pub fn t_two_with(
    freq: &FrequencyData,
    mode: SecondMomentT,
) -> Result<(f64, LambdaHat), EstimatorError> {
    let base = t_httg(freq)?;
    let n = freq.sample_size() as f64;
    let q = freq.count_square_sum() as f64;
    let u = freq.unseen_probability();
    let species = freq.species_observed() as f64;
    let v = freq.squared_prob_sum();

    let objective = |lambda: f64| -> f64 {
        let sum = match mode {
            SecondMomentT::HeldAtTuringGood => smoothed_square_sum(q, n, base, lambda),
            SecondMomentT::ResolvedPerLambda => {
                // T̂_λ·λ + n = (Nλ + n)/(1-u); T̂_λ·λ² = λ(Nλ + nu)/(1-u).
                let concentration = (species * lambda + n) / (1.0 - u);
                (q + 2.0 * n * lambda + lambda * (species * lambda + n * u) / (1.0 - u))
                    / (concentration * concentration)
            }
        };
        (sum - v).abs()
    };
    // Both readings share the same λ → ∞ objective limit, |1/T̂_TG - v|.
    let limit_objective = (1.0 / base - v).abs();

    // 200-point bracketing scan on log₁₀ λ ∈ [-3, 6].
    const POINTS: usize = 200;
    let (lo, hi) = (-3.0_f64, 6.0_f64);
    let step = (hi - lo) / (POINTS - 1) as f64;
    let mut best_index = 0;
    let mut best_value = f64::INFINITY;
    let mut monotone_nonincreasing = true;
    let mut previous = f64::INFINITY;
    for i in 0..POINTS {
        let h = objective(10f64.powf(lo + step * i as f64));
        if !h.is_finite() {
            return Err(EstimatorError::SolverFailure {
                detail: format!("objective not finite at grid point {i}"),
            });
        }
        if i > 0 && h > previous + 1e-12 * (1.0 + previous.abs()) {
            monotone_nonincreasing = false;
        }
        if h < best_value {
            best_value = h;
            best_index = i;
        }
        previous = h;
    }

    if monotone_nonincreasing && limit_objective <= best_value + 1e-9 {
        // No interior minimum: the objective keeps improving toward the
        // uniform limit, where the occupancy total collapses to T̂_TG.
        return Ok((base, LambdaHat::Infinite));
    }

    let bracket_lo = lo + step * best_index.saturating_sub(1) as f64;
    let bracket_hi = lo + step * (best_index + 1).min(POINTS - 1) as f64;
    let log_min = golden_section_min(
        |x| objective(10f64.powf(x)),
        bracket_lo,
        bracket_hi,
        1e-12,
        300,
    );
    let lambda2 = 10f64.powf(log_min);
    Ok((t_lambda_real(freq, lambda2), LambdaHat::Finite(lambda2)))
}

/// Headline estimator: the closed-form λ̂ and the occupancy total there,
/// `T̂_λ̂ = n(N + n₁/λ̂)/(n-n₁)` (equal to `T̂_TG` when λ̂ = ∞). Returns the
/// real value, its nearest integer (half away from zero), and the full
/// solver diagnostics.
pub fn t_lambda_hat(freq: &FrequencyData) -> Result<(f64, u64, LambdaSolution), EstimatorError> {
    let solution = solve_lambda(freq)?;
    let t = match solution.lambda_hat {
        LambdaHat::Finite(lambda) => t_lambda_real(freq, lambda),
        LambdaHat::Infinite => t_httg(freq)?,
    };
    Ok((t, t.round() as u64, solution))
}

/// An order-selected jackknife estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JackknifeEstimate {
    pub value: f64,
    /// Selected order, 1..=5.
    pub order: u8,
}

/// Coefficient of `n_j` (j = 1..=k) in the order-k jackknife
/// `T̂_k = N + Σ_j c_{k,j} n_j`. Standard closed forms; all denominators
/// are nonzero because callers enforce `n ≥ k + 1`.
fn jackknife_coefficients(order: u8, n: f64) -> Vec<f64> {
    let d1 = n;
    let d2 = n * (n - 1.0);
    let d3 = d2 * (n - 2.0);
    let d4 = d3 * (n - 3.0);
    let d5 = d4 * (n - 4.0);
    match order {
        1 => vec![(n - 1.0) / d1],
        2 => vec![(2.0 * n - 3.0) / d1, -(n - 2.0).powi(2) / d2],
        3 => vec![
            (3.0 * n - 6.0) / d1,
            -(3.0 * n * n - 15.0 * n + 19.0) / d2,
            (n - 3.0).powi(3) / d3,
        ],
        4 => vec![
            (4.0 * n - 10.0) / d1,
            -(6.0 * n * n - 36.0 * n + 55.0) / d2,
            (4.0 * n.powi(3) - 42.0 * n * n + 148.0 * n - 175.0) / d3,
            -(n - 4.0).powi(4) / d4,
        ],
        5 => vec![
            (5.0 * n - 15.0) / d1,
            -(10.0 * n * n - 70.0 * n + 125.0) / d2,
            (10.0 * n.powi(3) - 120.0 * n * n + 485.0 * n - 660.0) / d3,
            -((n - 4.0).powi(5) - (n - 5.0).powi(5)) / d4,
            (n - 5.0).powi(5) / d5,
        ],
        _ => unreachable!("jackknife orders are 1..=5"),
    }
}

/// Order-k jackknife richness estimate, `None` when the sample cannot
/// support that order (`k > n - 1`: leave-k-out denominators degenerate).
pub fn jackknife_order(freq: &FrequencyData, order: u8) -> Option<f64> {
    let n = freq.sample_size();
    if order == 0 || order > 5 || u64::from(order) > n.saturating_sub(1) {
        return None;
    }
    let coefficients = jackknife_coefficients(order, n as f64);
    let mut value = freq.species_observed() as f64;
    for (j, c) in coefficients.iter().enumerate() {
        value += c * freq.prevalence(j as u64 + 1) as f64;
    }
    Some(value)
}

/// Jackknife with the standard sequential order selection: starting at
/// order 1, keep increasing while the step `T̂_{k+1} - T̂_k` is significant
/// (|z| ≥ 1.96 under the usual variance estimate), up to
/// `K_max = min(5, n-1)`. Absent when the sample supports no order or a
/// variance denominator degenerates.
pub fn t_jackknife(freq: &FrequencyData) -> Option<JackknifeEstimate> {
    let n = freq.sample_size();
    let k_max = 5u8.min(u8::try_from(n.saturating_sub(1).min(5)).expect("capped at 5"));
    if k_max == 0 {
        return None;
    }
    let n_real = n as f64;
    let estimates: Vec<f64> = (1..=k_max)
        .map(|k| jackknife_order(freq, k).expect("orders up to n-1 are supported"))
        .collect();
    if estimates.iter().any(|t| !t.is_finite()) {
        return None;
    }
    for k in 1..k_max {
        let (current, next) = (estimates[k as usize - 1], estimates[k as usize]);
        let diff = next - current;
        let lower = jackknife_coefficients(k, n_real);
        let upper = jackknife_coefficients(k + 1, n_real);
        let mut weighted_square_sum = 0.0;
        for (j, coeff) in upper.iter().enumerate() {
            let b = coeff - lower.get(j).copied().unwrap_or(0.0);
            weighted_square_sum += b * b * freq.prevalence(j as u64 + 1) as f64;
        }
        let variance = n_real / (n_real - 1.0) * (weighted_square_sum - diff * diff / n_real);
        if !variance.is_finite() || variance < 0.0 {
            return None;
        }
        if variance == 0.0 {
            if diff == 0.0 {
                return Some(JackknifeEstimate {
                    value: current,
                    order: k,
                });
            }
            continue; // zero variance, nonzero step: treat as significant
        }
        if (diff / variance.sqrt()).abs() < 1.96 {
            return Some(JackknifeEstimate {
                value: current,
                order: k,
            });
        }
    }
    Some(JackknifeEstimate {
        value: estimates[k_max as usize - 1],
        order: k_max,
    })
}

/// Every estimator evaluated on one sample, for side-by-side comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorReport {
    pub species_observed: u64,
    pub sample_size: u64,
    pub singletons: u64,
    pub t_httg: f64,
    /// The `k` used for the Esty-style correction.
    pub esty_k: f64,
    pub t_esty: f64,
    pub gamma2_chao_lee: f64,
    pub t_chao_lee: f64,
    pub t_one: f64,
    pub gamma2_one: f64,
    pub t_two: f64,
    pub lambda_second: LambdaHat,
    pub t_plus_one: f64,
    pub t_lambda_hat: f64,
    pub t_lambda_hat_rounded: u64,
    pub lambda_solution: LambdaSolution,
    pub t_jackknife: Option<JackknifeEstimate>,
}

impl EstimatorReport {
    /// Evaluate the whole family. `esty_k` is the Esty correction constant
    /// (2 is the conventional default).
    pub fn compute(freq: &FrequencyData, esty_k: f64) -> Result<Self, EstimatorError> {
        let (t_lambda, t_lambda_rounded, lambda_solution) = t_lambda_hat(freq)?;
        let (t_one_value, gamma2_one) = t_one(freq)?;
        let (t_two_value, lambda_second) = t_two(freq)?;
        Ok(EstimatorReport {
            species_observed: freq.species_observed(),
            sample_size: freq.sample_size(),
            singletons: freq.singletons(),
            t_httg: t_httg(freq)?,
            esty_k,
            t_esty: t_esty(freq, esty_k)?,
            gamma2_chao_lee: gamma2_chao_lee(freq)?,
            t_chao_lee: t_chao_lee(freq)?,
            t_one: t_one_value,
            gamma2_one,
            t_two: t_two_value,
            lambda_second,
            t_plus_one: t_plus_one(freq)?,
            t_lambda_hat: t_lambda,
            t_lambda_hat_rounded: t_lambda_rounded,
            lambda_solution,
            t_jackknife: t_jackknife(freq),
        })
    }
}
