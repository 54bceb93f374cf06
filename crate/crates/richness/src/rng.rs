//! Deterministic stream derivation for reproducible, parallel simulation.
//!
//! Every randomized unit of work (a Monte Carlo replicate, a bootstrap
//! resample, an outer coverage repeat) receives its own ChaCha8 generator
//! seeded from a SplitMix64 expansion of `(seed, stream)`. Results therefore
//! depend only on the master seed and the work item's index, never on thread
//! count or scheduling order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One step of the SplitMix64 sequence (Steele, Lea & Flood's constants).
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent child seed from a master seed and an index.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    let mut state = seed;
    let base = splitmix64(&mut state);
    let mut state = base ^ index.wrapping_mul(0xA24B_AED4_963E_E407);
    splitmix64(&mut state)
}

/// ChaCha8 generator for stream `stream` of master seed `seed`.
///
/// The 32-byte ChaCha seed is filled from four SplitMix64 outputs, so
/// distinct `(seed, stream)` pairs get well-separated states.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut state = child_seed(seed, stream);
    let mut bytes = [0u8; 32];
    for chunk in bytes.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}
