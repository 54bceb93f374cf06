//! Frequency-of-frequency data: ingestion, validation, and the sample
//! statistics every estimator consumes.
//!
//! A sample of `n` observations is reduced to its *prevalences*: `n_j` is
//! the number of species observed exactly `j` times, so `n = Σ j·n_j` and
//! the number of observed species is `N = Σ n_j`. Two derived statistics
//! drive everything downstream:
//!
//! ```text
//! u = n_1 / n                          (unseen-probability estimate)
//! v = Σ_j j(j-1)·n_j / (n(n-1))        (sum-of-squared-probabilities estimate)
//! ```
//!
//! `u` estimates the total probability of the species that never appeared;
//! `1 - u` is the sample coverage. `v` estimates `Σ_k p_k²` over the whole
//! population. Both are exact rationals of the integer counts, and any valid
//! sample satisfies:
//!
//! ```text
//! 0 ≤ u ≤ 1,   0 ≤ v ≤ 1,   u + v ≤ 1,
//! N + u - 1 - n·u ≥ 0,   v·n·N - v·N + N - n ≥ 0.
//! ```
//!
//! The last relation is equivalent to `q·N ≥ n²` for `q = Σ_k m_k²` (the
//! Cauchy-Schwarz bound on the species multiplicities `m_k`), and all five
//! are enforced as property tests rather than runtime checks.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use thiserror::Error;

/// Errors raised while ingesting sample data.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FreqError {
    /// The sample contained no observations.
    #[error("empty sample: at least one observation is required")]
    EmptySample,
    /// A species multiplicity of zero was supplied; absent species must be
    /// omitted, not listed with count 0.
    #[error("invalid count 0: species multiplicities must be positive")]
    InvalidCount,
    /// A prevalence entry was malformed (zero multiplicity class or zero
    /// species count).
    #[error("invalid prevalence entry ({multiplicity}, {species}): both values must be positive")]
    InvalidPrevalence { multiplicity: u64, species: u64 },
    /// The same multiplicity class appeared twice in a prevalence listing.
    #[error("duplicate prevalence entry for multiplicity {multiplicity}")]
    DuplicatePrevalence { multiplicity: u64 },
}

/// Validated frequency-of-frequency data for one sample.
///
/// Construction always succeeds into a consistent state: the multiplicity
/// list is sorted descending, the prevalence map matches it, and the scalar
/// statistics are precomputed. A sample in which every species is a
/// singleton (`u = 1`) is representable — consumers that cannot handle it
/// raise their own degeneracy errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyData {
    /// Species multiplicities `m_1 ≥ m_2 ≥ … ≥ m_N ≥ 1`.
    counts: Vec<u64>,
    /// Map from multiplicity `j` to the number of species `n_j` seen `j` times.
    prevalences: BTreeMap<u64, u64>,
    /// Total observations `n = Σ j·n_j`.
    sample_size: u64,
    /// Observed species `N = Σ n_j`.
    species_observed: u64,
    /// `q = Σ_k m_k² = Σ_j j²·n_j`.
    count_square_sum: u64,
}

impl FrequencyData {
    /// Build from a stream of raw observations (species labels).
    ///
    /// Labels only need equality and hashing; their identity is forgotten
    /// once multiplicities are counted.
    pub fn from_raw_sample<I>(tokens: I) -> Result<Self, FreqError>
    where
        I: IntoIterator,
        I::Item: Eq + Hash,
    {
        let mut multiplicities: HashMap<I::Item, u64> = HashMap::new();
        for token in tokens {
            *multiplicities.entry(token).or_insert(0) += 1;
        }
        if multiplicities.is_empty() {
            return Err(FreqError::EmptySample);
        }
        Ok(Self::from_sorted_counts(
            multiplicities.into_values().collect(),
        ))
    }

    /// Build from the multiset of species multiplicities.
    pub fn from_counts(counts: &[u64]) -> Result<Self, FreqError> {
        if counts.is_empty() {
            return Err(FreqError::EmptySample);
        }
        if counts.contains(&0) {
            return Err(FreqError::InvalidCount);
        }
        Ok(Self::from_sorted_counts(counts.to_vec()))
    }

    /// Build from `(multiplicity, species)` prevalence pairs.
    pub fn from_prevalences<I>(pairs: I) -> Result<Self, FreqError>
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        let mut prevalences = BTreeMap::new();
        for (multiplicity, species) in pairs {
            if multiplicity == 0 || species == 0 {
                return Err(FreqError::InvalidPrevalence {
                    multiplicity,
                    species,
                });
            }
            if prevalences.insert(multiplicity, species).is_some() {
                return Err(FreqError::DuplicatePrevalence { multiplicity });
            }
        }
        if prevalences.is_empty() {
            return Err(FreqError::EmptySample);
        }
        let mut counts = Vec::new();
        for (&multiplicity, &species) in prevalences.iter().rev() {
            counts.extend(std::iter::repeat_n(multiplicity, species as usize));
        }
        Ok(Self::from_sorted_counts(counts))
    }

    /// Internal constructor: takes validated positive counts in any order.
    fn from_sorted_counts(mut counts: Vec<u64>) -> Self {
        counts.sort_unstable_by(|a, b| b.cmp(a));
        let mut prevalences = BTreeMap::new();
        let mut sample_size = 0u64;
        let mut count_square_sum = 0u64;
        for &m in &counts {
            *prevalences.entry(m).or_insert(0) += 1;
            sample_size += m;
            count_square_sum += m * m;
        }
        let species_observed = counts.len() as u64;
        Self {
            counts,
            prevalences,
            sample_size,
            species_observed,
            count_square_sum,
        }
    }

    /// Species multiplicities, sorted descending.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Prevalence map `j -> n_j`.
    pub fn prevalences(&self) -> &BTreeMap<u64, u64> {
        &self.prevalences
    }

    /// Number of species observed exactly `j` times (0 if none).
    pub fn prevalence(&self, multiplicity: u64) -> u64 {
        self.prevalences.get(&multiplicity).copied().unwrap_or(0)
    }

    /// Total observations `n`.
    pub fn sample_size(&self) -> u64 {
        self.sample_size
    }

    /// Number of distinct species observed, `N`.
    pub fn species_observed(&self) -> u64 {
        self.species_observed
    }

    /// Number of species seen exactly once, `n_1`.
    pub fn singletons(&self) -> u64 {
        self.prevalence(1)
    }

    /// `q = Σ_k m_k²`.
    pub fn count_square_sum(&self) -> u64 {
        self.count_square_sum
    }

    /// `Σ_j j(j-1)·n_j = q - n`: the number of ordered observation pairs
    /// falling on the same species. This is the numerator of `v`.
    pub fn pair_count_sum(&self) -> u64 {
        self.count_square_sum - self.sample_size
    }

    /// The unseen-probability estimate `u = n_1/n`.
    pub fn unseen_probability(&self) -> f64 {
        self.singletons() as f64 / self.sample_size as f64
    }

    /// The squared-probability-sum estimate
    /// `v = Σ_j j(j-1)·n_j / (n(n-1))`, defined as 0 when `n = 1`.
    pub fn squared_prob_sum(&self) -> f64 {
        if self.sample_size <= 1 {
            return 0.0;
        }
        self.pair_count_sum() as f64 / (self.sample_size as f64 * (self.sample_size - 1) as f64)
    }

    /// Sample coverage `1 - u`.
    pub fn coverage(&self) -> f64 {
        1.0 - self.unseen_probability()
    }

    /// True when every observed species is a singleton (`u = 1`), the case
    /// in which all coverage-based estimators are undefined.
    pub fn is_all_singletons(&self) -> bool {
        self.singletons() == self.sample_size
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn counts_2_2_1_statistics() {
        let f = FrequencyData::from_counts(&[2, 2, 1]).unwrap();
        assert_eq!(f.sample_size(), 5);
        assert_eq!(f.species_observed(), 3);
        assert_eq!(f.singletons(), 1);
        assert_eq!(f.count_square_sum(), 9);
        assert_eq!(f.unseen_probability(), 0.2);
        assert_eq!(f.squared_prob_sum(), 0.2);
        assert_eq!(f.coverage(), 0.8);
    }

    #[test]
    fn counts_3_3_1_1_statistics() {
        let f = FrequencyData::from_counts(&[3, 3, 1, 1]).unwrap();
        assert_eq!(f.sample_size(), 8);
        assert_eq!(f.species_observed(), 4);
        assert_eq!(f.singletons(), 2);
        assert_eq!(f.count_square_sum(), 20);
        assert_eq!(f.unseen_probability(), 0.25);
        assert_eq!(f.squared_prob_sum(), 3.0 / 14.0);
    }

    #[test]
    fn counts_3_1_1_1_statistics() {
        let f = FrequencyData::from_counts(&[3, 1, 1, 1]).unwrap();
        assert_eq!(f.sample_size(), 6);
        assert_eq!(f.species_observed(), 4);
        assert_eq!(f.singletons(), 3);
        assert_eq!(f.unseen_probability(), 0.5);
        assert_eq!(f.squared_prob_sum(), 0.2);
    }

    #[test]
    fn ingestion_paths_agree() {
        let tokens = FrequencyData::from_raw_sample(["a", "b", "a", "c", "b"]).unwrap();
        let counts = FrequencyData::from_counts(&[2, 2, 1]).unwrap();
        let prevalences = FrequencyData::from_prevalences([(1, 1), (2, 2)]).unwrap();
        assert_eq!(tokens, counts);
        assert_eq!(counts, prevalences);
        assert_eq!(counts.counts(), &[2, 2, 1]);
    }

    #[test]
    fn single_observation_is_representable() {
        let f = FrequencyData::from_raw_sample(["only"]).unwrap();
        assert_eq!(f.sample_size(), 1);
        assert_eq!(f.unseen_probability(), 1.0);
        // v is defined as 0 when n = 1.
        assert_eq!(f.squared_prob_sum(), 0.0);
        assert!(f.is_all_singletons());
    }

    #[test]
    fn empty_sample_is_rejected() {
        assert_eq!(
            FrequencyData::from_raw_sample(Vec::<&str>::new()).unwrap_err(),
            FreqError::EmptySample
        );
        assert_eq!(
            FrequencyData::from_counts(&[]).unwrap_err(),
            FreqError::EmptySample
        );
        assert_eq!(
            FrequencyData::from_prevalences([]).unwrap_err(),
            FreqError::EmptySample
        );
    }

    #[test]
    fn zero_entries_are_rejected() {
        assert_eq!(
            FrequencyData::from_counts(&[2, 0, 1]).unwrap_err(),
            FreqError::InvalidCount
        );
        assert_eq!(
            FrequencyData::from_prevalences([(1, 2), (0, 3)]).unwrap_err(),
            FreqError::InvalidPrevalence {
                multiplicity: 0,
                species: 3
            }
        );
        assert_eq!(
            FrequencyData::from_prevalences([(2, 1), (2, 2)]).unwrap_err(),
            FreqError::DuplicatePrevalence { multiplicity: 2 }
        );
    }

    /// Exact integer forms of the five sample relations listed in the module
    /// docs; `f` carries only integers, so no floating-point slack is needed.
    fn assert_sample_relations(f: &FrequencyData) {
        let n = f.sample_size() as u128;
        let n1 = f.singletons() as u128;
        let species = f.species_observed() as u128;
        let pairs = f.pair_count_sum() as u128;
        let q = f.count_square_sum() as u128;
        // 0 ≤ u ≤ 1.
        assert!(n1 <= n);
        if n > 1 {
            // 0 ≤ v ≤ 1.
            assert!(pairs <= n * (n - 1));
            // u + v ≤ 1.
            assert!(n1 * (n - 1) + pairs <= n * (n - 1));
            // N + u - 1 - n·u ≥ 0.
            assert!((species - 1) * n >= n1 * (n - 1));
        }
        // v·n·N - v·N + N - n ≥ 0, equivalently q·N ≥ n².
        assert!(q * species >= n * n);
    }

    proptest! {
        #[test]
        fn sample_relations_hold(counts in proptest::collection::vec(1u64..40, 1..60)) {
            let f = FrequencyData::from_counts(&counts).unwrap();
            assert_sample_relations(&f);
        }

        #[test]
        fn raw_sample_matches_counts(labels in proptest::collection::vec(0u8..20, 1..200)) {
            let from_tokens = FrequencyData::from_raw_sample(labels.iter()).unwrap();
            let mut multiplicities = HashMap::new();
            for l in &labels {
                *multiplicities.entry(*l).or_insert(0u64) += 1;
            }
            let counts: Vec<u64> = multiplicities.into_values().collect();
            let from_counts = FrequencyData::from_counts(&counts).unwrap();
            prop_assert_eq!(from_tokens, from_counts);
        }

        #[test]
        fn q_identity(counts in proptest::collection::vec(1u64..30, 1..40)) {
            // q = v·n(n-1) + n ties the prevalence view to the count view.
            let f = FrequencyData::from_counts(&counts).unwrap();
            let n = f.sample_size() as f64;
            let recomposed = f.squared_prob_sum() * n * (n - 1.0) + n;
            prop_assert!((recomposed - f.count_square_sum() as f64).abs() < 1e-9);
        }
    }
}
