//! Shared sample machinery for the acceptance suite: a deterministic
//! splitmix-driven generator of bounded random frequency data.

use richness::rng::splitmix64;
use richness::FrequencyData;

/// Random multiplicity multiset: up to 50 species with counts capped so the
/// sample size stays at or below 500.
pub fn random_counts(state: &mut u64) -> Vec<u64> {
    let species = 1 + (splitmix64(state) % 50) as usize;
    let cap = (500 / species as u64).clamp(1, 9);
    (0..species).map(|_| 1 + splitmix64(state) % cap).collect()
}

/// Random frequency data with at least one repeated species (u < 1), so the
/// matching solver and every downstream estimator are defined.
pub fn random_freq(state: &mut u64) -> FrequencyData {
    loop {
        let counts = random_counts(state);
        let f = FrequencyData::from_counts(&counts).expect("positive counts");
        if !f.is_all_singletons() {
            return f;
        }
    }
}
