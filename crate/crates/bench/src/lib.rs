//! Fixture builders shared by the benchmark suite: deterministic synthetic
//! populations and samples at representative sizes.

use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use richness::montecarlo::{generate_population, Generator, PopulationSpec};
use richness::rng::stream_rng;
use richness::FrequencyData;

/// The weight vector of an exponential-abundance population with `t`
/// species, fully determined by `seed`.
pub fn exponential_population(t: u64, seed: u64) -> Vec<f64> {
    generate_population(&PopulationSpec {
        t,
        generator: Generator::Exponential1,
        seed,
    })
}

/// Draw one frequency sample of size `n` from that population.
pub fn exponential_sample(t: u64, n: u64, seed: u64) -> FrequencyData {
    let probs = exponential_population(t, seed);
    let alias = WeightedAliasIndex::new(probs).expect("valid weights");
    let mut rng = stream_rng(seed, 1);
    let tokens = (0..n).map(|_| alias.sample(&mut rng));
    FrequencyData::from_raw_sample(tokens).expect("nonempty sample")
}
