//! Reconstruction of the full species probability vector of length T̂:
//! posterior means for the N observed species, a two-parameter geometric
//! tail for the T̂ - N unobserved ones.
//!
//! Observed species keep their smoothed posterior means
//!
//! ```text
//! p̂_i = (m_i + λ̂)/(T̂λ̂ + n),   i = 1..N     (uniform 1/T̂ when λ̂ = ∞)
//! ```
//!
//! while the unobserved block is modeled as `p_{N+k} = c·α^k`, k = 1..M,
//! with `(c, α)` chosen so the tail reproduces the unseen-mass estimate and
//! a target second moment:
//!
//! ```text
//! Σ_tail p = c·α(1-α^M)/(1-α)        = Û_TG
//! Σ_tail p² = c²·α²(1-α^{2M})/(1-α²) = Ṽ
//! Ṽ = max(V̂_GT, Σ_k E[p_k²]) - Σ_{k≤N} E[p_k]²   (clamped ≥ Û²/M)
//! ```
//!
//! Eliminating c gives a strictly decreasing ratio
//! `r(α) = (1+α^M)(1-α)/((1+α)(1-α^M))` mapping (0,1] onto [1/M, 1), so a
//! single bisection finds α; the boundary `Ṽ = Û²/M` is the uniform split
//! `α = 1, c = Û/M`, and `Ṽ ≥ Û²` is unattainable by any positive tail
//! (the solver reports it, the composer falls back to the uniform split).
//!
//! The headline total is an integer (rounded), which breaks the exact
//! reconciliation identity by O(1/n); each block is therefore rescaled to
//! its own exact mass — observed to 1-Û, tail to Û — so the full vector
//! sums to 1 and the tail invariants survive the rounding.

use serde::Serialize;
use thiserror::Error;

use crate::estimators::{t_lambda_hat, EstimatorError};
use crate::freq::FrequencyData;
use crate::lambda::{LambdaHat, LambdaSolution};
use crate::numeric::{bisect, CompensatedSum};
use crate::posterior::sum_second_moments_real;

/// Errors from reconstruction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReconstructError {
    /// The supplied total is below the observed species count (or not a
    /// finite number).
    #[error(
        "invalid total {t_hat}: must be finite and at least the observed species count {observed}"
    )]
    InvalidT { t_hat: f64, observed: u64 },
    /// The tail target was requested for a population with no unobserved
    /// species (T̂ = N).
    #[error("no unobserved species: the estimated total equals the observed species count")]
    NoUnobservedSpecies,
    /// No positive geometric tail of the given length can reach the target
    /// second moment.
    #[error("infeasible tail second moment {v_target}: achievable range is [{floor}, {ceiling})")]
    InfeasibleTail {
        v_target: f64,
        floor: f64,
        ceiling: f64,
    },
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

/// How the unobserved block was filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMode {
    /// Two-parameter geometric tail matching both moments.
    GeometricTail,
    /// Uniform split of the unseen mass (α = 1 boundary, forced M = 1, or
    /// fallback when the second-moment target is unattainable).
    UniformTail,
    /// T̂ = N: there is no tail.
    NoUnobserved,
}

/// Tail family selector for [`reconstruct_population_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailStrategy {
    /// Geometric tail matched to (Û, Ṽ) — the standard construction.
    #[default]
    Geometric,
    /// Uniform split of Û over the unobserved slots, ignoring Ṽ.
    UniformSplit,
}

/// The reconstructed probability vector with its tail diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructedPopulation {
    /// Length T̂; entries 0..observed are the observed species (input
    /// order), the rest the decreasing tail.
    pub probs: Vec<f64>,
    /// Number of observed species at the front of `probs`.
    pub observed: usize,
    /// Tail scale c (0 when there is no tail).
    pub c: f64,
    /// Tail ratio α ∈ (0, 1]; 1 for uniform or absent tails.
    pub alpha: f64,
    /// Target tail second moment Ṽ (0 when there is no tail).
    pub v_tilde: f64,
    pub mode: TailMode,
}

impl ReconstructedPopulation {
    /// Total number of species in the reconstruction (T̂).
    pub fn total(&self) -> usize {
        self.probs.len()
    }

    /// The unobserved block.
    pub fn tail(&self) -> &[f64] {
        &self.probs[self.observed..]
    }

    /// CSV export: `index,probability`, 1-based indices, observed first.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,probability\n");
        for (i, p) in self.probs.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, p));
        }
        out
    }
}

/// Posterior-mean probabilities for the observed species given a total
/// `t_hat` (real-valued totals are accepted; reconstruction passes the
/// rounded integer). Uniform `1/t_hat` when λ̂ = ∞.
pub fn observed_probs(
    freq: &FrequencyData,
    solution: &LambdaSolution,
    t_hat: f64,
) -> Result<Vec<f64>, ReconstructError> {
    let observed = freq.species_observed();
    if !t_hat.is_finite() || t_hat < observed as f64 {
        return Err(ReconstructError::InvalidT { t_hat, observed });
    }
    let probs = match solution.lambda_hat {
        LambdaHat::Finite(lambda) => {
            let concentration = t_hat * lambda + freq.sample_size() as f64;
            freq.counts()
                .iter()
                .map(|&m| (m as f64 + lambda) / concentration)
                .collect()
        }
        LambdaHat::Infinite => vec![1.0 / t_hat; observed as usize],
    };
    Ok(probs)
}

/// Posterior mean and second-moment sums at `(t_hat, λ̂)`, in the λ̂ = ∞
/// limit when applicable: (Σ_{k≤N} E[p_k]², Σ_{k≤T̂} E[p_k²]).
fn posterior_sums(freq: &FrequencyData, solution: &LambdaSolution, t_hat: f64) -> (f64, f64) {
    match solution.lambda_hat {
        LambdaHat::Finite(lambda) => {
            let n = freq.sample_size() as f64;
            let concentration = t_hat * lambda + n;
            let mut mean_sq = CompensatedSum::new();
            for &m in freq.counts() {
                let p = (m as f64 + lambda) / concentration;
                mean_sq.add(p * p);
            }
            let second = sum_second_moments_real(freq.count_square_sum() as f64, n, t_hat, lambda);
            (mean_sq.value(), second)
        }
        LambdaHat::Infinite => {
            let observed = freq.species_observed() as f64;
            (observed / (t_hat * t_hat), 1.0 / t_hat)
        }
    }
}

/// Target tail second moment
/// `Ṽ = max(V̂_GT, Σ_k E[p_k²]) - Σ_{k≤N} E[p_k]²`, clamped from below at
/// the Cauchy-Schwarz floor `Û²/(T̂-N)` (the minimum of Σp² over positive
/// tails with the fixed first moment Û).
pub fn v_tilde(
    freq: &FrequencyData,
    solution: &LambdaSolution,
    t_hat: u64,
) -> Result<f64, ReconstructError> {
    let observed = freq.species_observed();
    if t_hat < observed {
        return Err(ReconstructError::InvalidT {
            t_hat: t_hat as f64,
            observed,
        });
    }
    if t_hat == observed {
        return Err(ReconstructError::NoUnobservedSpecies);
    }
    let (mean_sq_sum, second_sum) = posterior_sums(freq, solution, t_hat as f64);
    let raw = freq.squared_prob_sum().max(second_sum) - mean_sq_sum;
    let u = freq.unseen_probability();
    let floor = u * u / (t_hat - observed) as f64;
    Ok(raw.max(floor))
}

/// The c-eliminated moment ratio `r = (1+α^M)(1-α)/((1+α)(1-α^M))` written
/// in `x = -ln α`, so `r` increases from 1/M (x→0, the uniform split) to 1
/// (x→∞, a point mass). `exp_m1` keeps both differences fully accurate near
/// the uniform boundary, where the direct α-form cancels catastrophically
/// and would hand bisection a noise-dominated sign.
fn moment_ratio_log(x: f64, slots: f64) -> f64 {
    let em = (-slots * x).exp_m1(); // α^M - 1, negative
    let e1 = (-x).exp_m1(); // α - 1, negative
    (2.0 + em) * e1 / ((2.0 + e1) * em)
}

/// Finite geometric first-moment sum `S₁ = α(1-α^M)/(1-α)` in `x = -ln α`.
fn tail_first_moment_sum_log(x: f64, slots: f64) -> f64 {
    (-x).exp() * (-slots * x).exp_m1() / (-x).exp_m1()
}

/// Solve the geometric tail `p_k = c·α^k` (k = 1..M) for
/// `Σ p_k = u_target` and `Σ p_k² = v_target`. The α = 1 boundary (the
/// uniform split) is returned analytically; `M = 1` forces the single
/// value `u_target` and ignores `v_target`.
pub fn solve_tail(
    u_target: f64,
    v_target: f64,
    slots: u64,
) -> Result<(f64, f64, TailMode), ReconstructError> {
    assert!(
        u_target > 0.0 && u_target.is_finite(),
        "tail mass must be positive, got {u_target}"
    );
    assert!(slots >= 1, "tail needs at least one slot");
    if slots == 1 {
        return Ok((u_target, 1.0, TailMode::UniformTail));
    }
    let m = slots as f64;
    let floor = u_target * u_target / m;
    let ceiling = u_target * u_target;
    // The floor comparison tolerates the last-ulp noise of computing the
    // same bound through a different expression tree.
    if v_target < floor * (1.0 - 1e-9) || v_target >= ceiling {
        return Err(ReconstructError::InfeasibleTail {
            v_target,
            floor,
            ceiling,
        });
    }
    let ratio = v_target / (u_target * u_target);
    // Targets within arithmetic dust of the r = 1/M boundary are the
    // uniform split exactly; resolving them by root finding would only
    // recover the boundary with avoidable noise.
    if ratio * m <= 1.0 + 1e-12 {
        return Ok((u_target / m, 1.0, TailMode::UniformTail));
    }
    // Near the point-mass boundary r = 1 the decay rate is no longer
    // resolvable in doubles; treat as unattainable.
    if ratio >= 1.0 - 2e-12 {
        return Err(ReconstructError::InfeasibleTail {
            v_target,
            floor,
            ceiling,
        });
    }
    // x = 64 already evaluates to r = 1 exactly, so the bracket always
    // straddles the root.
    let x = bisect(|x| moment_ratio_log(x, m) - ratio, 1e-18, 64.0, 1e-13, 200).ok_or(
        ReconstructError::InfeasibleTail {
            v_target,
            floor,
            ceiling,
        },
    )?;
    let alpha = (-x).exp();
    let c = u_target / tail_first_moment_sum_log(x, m);
    Ok((c, alpha, TailMode::GeometricTail))
}

/// Full reconstruction with the standard geometric tail.
pub fn reconstruct_population(
    freq: &FrequencyData,
) -> Result<ReconstructedPopulation, ReconstructError> {
    reconstruct_population_with(freq, TailStrategy::default())
}

/// Full reconstruction; `strategy` selects the tail family.
pub fn reconstruct_population_with(
    freq: &FrequencyData,
    strategy: TailStrategy,
) -> Result<ReconstructedPopulation, ReconstructError> {
    let (_, t_rounded, solution) = t_lambda_hat(freq)?;
    let observed = freq.species_observed();
    let mut probs = observed_probs(freq, &solution, t_rounded as f64)?;

    if t_rounded == observed {
        // No tail: the observed block carries all the mass.
        normalize_block(&mut probs, 1.0);
        return Ok(ReconstructedPopulation {
            probs,
            observed: observed as usize,
            c: 0.0,
            alpha: 1.0,
            v_tilde: 0.0,
            mode: TailMode::NoUnobserved,
        });
    }

    let slots = t_rounded - observed;
    let u = freq.unseen_probability();
    let target_v = v_tilde(freq, &solution, t_rounded)?;

    let (mut tail, c, alpha, mode) = match strategy {
        TailStrategy::UniformSplit => uniform_tail(u, slots),
        TailStrategy::Geometric => match solve_tail(u, target_v, slots) {
            Ok((c, alpha, TailMode::GeometricTail)) => {
                let tail: Vec<f64> = (1..=slots).map(|k| c * alpha.powi(k as i32)).collect();
                // A deep tail can underflow to zero; strict positivity of
                // the vector wins over the second-moment match.
                if tail.iter().any(|p| *p <= 0.0 || !p.is_finite()) {
                    uniform_tail(u, slots)
                } else {
                    (tail, c, alpha, TailMode::GeometricTail)
                }
            }
            Ok((c, alpha, mode)) => (vec![u / slots as f64; slots as usize], c, alpha, mode),
            // Unattainable target (Ṽ ≥ Û²): boundary fallback.
            Err(ReconstructError::InfeasibleTail { .. }) => uniform_tail(u, slots),
            Err(other) => return Err(other),
        },
    };

    // Rounding T̂ to an integer broke the exact reconciliation identity, so
    // pin each block to its exact mass.
    normalize_block(&mut probs, 1.0 - u);
    normalize_block(&mut tail, u);
    probs.extend_from_slice(&tail);

    Ok(ReconstructedPopulation {
        probs,
        observed: observed as usize,
        c,
        alpha,
        v_tilde: target_v,
        mode,
    })
}

fn uniform_tail(u: f64, slots: u64) -> (Vec<f64>, f64, f64, TailMode) {
    let each = u / slots as f64;
    (vec![each; slots as usize], each, 1.0, TailMode::UniformTail)
}

fn normalize_block(block: &mut [f64], mass: f64) {
    let mut sum = CompensatedSum::new();
    for p in block.iter() {
        sum.add(*p);
    }
    let total = sum.value();
    if total > 0.0 {
        let scale = mass / total;
        for p in block.iter_mut() {
            *p *= scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::{solve_lambda, LambdaBranch};
    use crate::posterior::PosteriorParams;
    use approx::assert_relative_eq;

    fn freq(counts: &[u64]) -> FrequencyData {
        FrequencyData::from_counts(counts).unwrap()
    }

    fn random_freq(state: &mut u64) -> FrequencyData {
        loop {
            let len = 1 + (crate::rng::splitmix64(state) % 12) as usize;
            let counts: Vec<u64> = (0..len)
                .map(|_| 1 + crate::rng::splitmix64(state) % 9)
                .collect();
            let f = freq(&counts);
            if !f.is_all_singletons() {
                return f;
            }
        }
    }

    #[test]
    fn observed_probs_worked_example() {
        // At the real-valued total the reconciliation identity is exact.
        let f = freq(&[3, 3, 1, 1]);
        let solution = solve_lambda(&f).unwrap();
        let probs = observed_probs(&f, &solution, 64.0 / 9.0).unwrap();
        assert_eq!(probs.len(), 4);
        assert_relative_eq!(probs[0], 27.0 / 112.0, epsilon = 1e-15);
        let total: f64 = probs.iter().sum();
        assert_relative_eq!(total + f.unseen_probability(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn observed_probs_uniform_when_lambda_infinite() {
        let f = freq(&[2, 2, 1]);
        let solution = solve_lambda(&f).unwrap();
        let probs = observed_probs(&f, &solution, 4.0).unwrap();
        assert_eq!(probs, vec![0.25, 0.25, 0.25]);
    }

    #[test]
    fn observed_probs_rejects_bad_totals() {
        let f = freq(&[2, 2, 1]);
        let solution = solve_lambda(&f).unwrap();
        assert!(matches!(
            observed_probs(&f, &solution, 2.0),
            Err(ReconstructError::InvalidT { .. })
        ));
        assert!(matches!(
            observed_probs(&f, &solution, f64::NAN),
            Err(ReconstructError::InvalidT { .. })
        ));
    }

    #[test]
    fn v_tilde_agrees_with_per_index_posterior_sums() {
        // Frozen from exact rational arithmetic at (T̂, λ̂) = (7, 1.5):
        // Ṽ = 313/1443 - 212/1369 = 3313/53391.
        let f = freq(&[3, 3, 1, 1]);
        let solution = solve_lambda(&f).unwrap();
        let value = v_tilde(&f, &solution, 7).unwrap();
        assert_relative_eq!(value, 3313.0 / 53391.0, epsilon = 1e-12);

        let posterior = PosteriorParams::new(7, 1.5, &f).unwrap();
        let mut per_index = 0.0;
        for k in 1..=7 {
            per_index += posterior.second_moment_p(k).unwrap();
        }
        for k in 1..=4 {
            let mean = posterior.mean_p(k).unwrap();
            per_index -= mean * mean;
        }
        // Plain V̂_GT loses to the posterior sum here (interior root ties
        // break toward the posterior side after rounding T̂ up to 7).
        assert_relative_eq!(value, per_index, epsilon = 1e-12);
    }

    #[test]
    fn v_tilde_respects_cauchy_schwarz_floor() {
        let mut state = 0xF100D_u64;
        for _ in 0..200 {
            let f = random_freq(&mut state);
            let solution = solve_lambda(&f).unwrap();
            let (_, t_rounded, _) = t_lambda_hat(&f).unwrap();
            if t_rounded == f.species_observed() {
                continue;
            }
            let value = v_tilde(&f, &solution, t_rounded).unwrap();
            let u = f.unseen_probability();
            let floor = u * u / (t_rounded - f.species_observed()) as f64;
            assert!(value >= floor - 1e-15, "{f:?}");
        }
    }

    #[test]
    fn v_tilde_switch_matches_objective_sign() {
        // The max(V̂, Σ E[p²]) switch mirrors the sign of the matching
        // objective f = V̂ - Σ E[p²] at λ̂: the posterior sum wins exactly
        // when no λ lifts the smoothed moment up to V̂ (f < 0 throughout,
        // the ∞ branch) and loses when the root clamps at λ = 1 (f(1) ≥ 0).
        // Interior roots sit on the tie f(λ̂) = 0 by construction, so only
        // the boundary branches are decisive; sweep a singleton-heavy
        // family that hits both, comparing at the real-valued total and
        // keeping samples whose margin dominates the perturbation from
        // rounding T̂.
        let mut state = 0x51C6_u64;
        let mut decisive = 0;
        for _ in 0..400 {
            let f = loop {
                let len = 3 + (crate::rng::splitmix64(&mut state) % 10) as usize;
                let counts: Vec<u64> = (0..len)
                    .map(|_| {
                        let r = crate::rng::splitmix64(&mut state) % 10;
                        match r {
                            0..=5 => 1,
                            6 | 7 => 2,
                            _ => 3 + r % 4,
                        }
                    })
                    .collect();
                let f = freq(&counts);
                if !f.is_all_singletons() {
                    break f;
                }
            };
            let solution = solve_lambda(&f).unwrap();
            let (t_real, t_rounded, _) = t_lambda_hat(&f).unwrap();
            if t_rounded == f.species_observed() {
                continue;
            }
            let v = f.squared_prob_sum();
            let (_, second_real) = posterior_sums(&f, &solution, t_real);
            let (_, second_rounded) = posterior_sums(&f, &solution, t_rounded as f64);
            let margin = (v - second_real).abs();
            let perturbation = (second_rounded - second_real).abs();
            if margin <= 2.0 * perturbation + 1e-9 {
                continue; // interior roots and near-ties cannot be attributed
            }
            decisive += 1;
            let picked_posterior = second_rounded > v;
            let objective_negative = second_real > v;
            assert_eq!(picked_posterior, objective_negative, "{f:?}");
            match solution.branch {
                LambdaBranch::Infinite => assert!(objective_negative, "{f:?}"),
                LambdaBranch::ClampedToOne => assert!(!objective_negative, "{f:?}"),
                LambdaBranch::InteriorRoot => {}
            }
        }
        assert!(decisive > 100, "only {decisive} decisive samples");
    }

    #[test]
    fn v_tilde_domain_errors() {
        let f = freq(&[6, 2]);
        let solution = solve_lambda(&f).unwrap();
        assert_eq!(
            v_tilde(&f, &solution, 2).unwrap_err(),
            ReconstructError::NoUnobservedSpecies
        );
        assert!(matches!(
            v_tilde(&f, &solution, 1).unwrap_err(),
            ReconstructError::InvalidT { .. }
        ));
    }

    #[test]
    fn tail_solver_forced_and_boundary_cases() {
        // M = 1: the single slot takes the whole mass, v_target ignored.
        let (c, alpha, mode) = solve_tail(0.2, 123.0, 1).unwrap();
        assert_eq!((c, alpha, mode), (0.2, 1.0, TailMode::UniformTail));

        // Exactly at the floor: uniform split attains it.
        let (c, alpha, mode) = solve_tail(0.2, 0.01, 4).unwrap();
        assert_relative_eq!(c, 0.05, epsilon = 1e-12);
        assert_eq!((alpha, mode), (1.0, TailMode::UniformTail));
    }

    #[test]
    fn tail_solver_reproduces_both_moments() {
        let (c, alpha, mode) = solve_tail(0.2, 0.02, 3).unwrap();
        assert_eq!(mode, TailMode::GeometricTail);
        assert!(alpha > 0.0 && alpha < 1.0);
        let first: f64 = (1..=3).map(|k| c * alpha.powi(k)).sum();
        let second: f64 = (1..=3).map(|k| (c * alpha.powi(k)).powi(2)).sum();
        assert_relative_eq!(first, 0.2, epsilon = 1e-10);
        assert_relative_eq!(second, 0.02, epsilon = 1e-10);
    }

    #[test]
    fn tail_solver_rejects_unattainable_targets() {
        // Below the Cauchy-Schwarz floor.
        assert!(matches!(
            solve_tail(0.2, 0.009, 4),
            Err(ReconstructError::InfeasibleTail { .. })
        ));
        // At or above the single-point-mass ceiling u².
        assert!(matches!(
            solve_tail(0.2, 0.04, 4),
            Err(ReconstructError::InfeasibleTail { .. })
        ));
    }

    #[test]
    fn reconstruction_worked_example() {
        let f = freq(&[3, 3, 1, 1]);
        let pop = reconstruct_population(&f).unwrap();
        assert_eq!(pop.total(), 7);
        assert_eq!(pop.observed, 4);
        assert_eq!(pop.mode, TailMode::GeometricTail);
        let total: f64 = pop.probs.iter().sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-10);
        let tail_sum: f64 = pop.tail().iter().sum();
        assert_relative_eq!(tail_sum, 0.25, epsilon = 1e-8);
        let tail_square: f64 = pop.tail().iter().map(|p| p * p).sum();
        assert_relative_eq!(tail_square, pop.v_tilde, epsilon = 1e-8);
        for pair in pop.tail().windows(2) {
            assert!(pair[0] >= pair[1], "tail not decreasing: {pair:?}");
        }
        assert!(pop.probs.iter().all(|p| *p > 0.0));
    }

    #[test]
    fn reconstruction_no_unobserved() {
        // u = 0 collapses the total to N: all mass stays observed.
        let f = freq(&[6, 2]);
        let pop = reconstruct_population(&f).unwrap();
        assert_eq!(pop.mode, TailMode::NoUnobserved);
        assert_eq!(pop.total(), 2);
        assert_relative_eq!(pop.probs[0], 9.0 / 14.0, epsilon = 1e-12);
        assert_relative_eq!(pop.probs[1], 5.0 / 14.0, epsilon = 1e-12);
    }

    #[test]
    fn reconstruction_falls_back_to_uniform_tail() {
        // Clamped-branch sample whose Ṽ exceeds the u² ceiling: no
        // geometric tail exists, the unseen mass is split evenly.
        let f = freq(&[9, 9, 1, 1]);
        let pop = reconstruct_population(&f).unwrap();
        assert_eq!(pop.mode, TailMode::UniformTail);
        let slots = (pop.total() - pop.observed) as f64;
        for p in pop.tail() {
            assert_relative_eq!(*p, f.unseen_probability() / slots, epsilon = 1e-12);
        }
    }

    #[test]
    fn uniform_split_strategy_flag() {
        let f = freq(&[3, 3, 1, 1]);
        let pop = reconstruct_population_with(&f, TailStrategy::UniformSplit).unwrap();
        assert_eq!(pop.mode, TailMode::UniformTail);
        assert_eq!(pop.alpha, 1.0);
        let tail_sum: f64 = pop.tail().iter().sum();
        assert_relative_eq!(tail_sum, 0.25, epsilon = 1e-12);
        for p in pop.tail() {
            assert_relative_eq!(*p, 0.25 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn reconstruction_invariants_on_random_samples() {
        let mut state = 0xDECADE_u64;
        for _ in 0..200 {
            let f = random_freq(&mut state);
            let pop = reconstruct_population(&f).unwrap();
            let total: f64 = pop.probs.iter().sum();
            assert_relative_eq!(total, 1.0, epsilon = 1e-10);
            assert!(pop.probs.iter().all(|p| *p > 0.0), "{f:?}");
            if pop.mode != TailMode::NoUnobserved {
                let tail_sum: f64 = pop.tail().iter().sum();
                assert_relative_eq!(tail_sum, f.unseen_probability(), epsilon = 1e-8);
                for pair in pop.tail().windows(2) {
                    assert!(pair[0] >= pair[1] - 1e-15, "{f:?}");
                }
            }
            if pop.mode == TailMode::GeometricTail {
                let tail_square: f64 = pop.tail().iter().map(|p| p * p).sum();
                assert_relative_eq!(tail_square, pop.v_tilde, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn csv_export_shape() {
        let pop = reconstruct_population(&freq(&[3, 3, 1, 1])).unwrap();
        let csv = pop.to_csv();
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines[0], "index,probability");
        assert_eq!(lines.len(), 1 + pop.total());
        assert!(lines[1].starts_with("1,"));
    }
}
