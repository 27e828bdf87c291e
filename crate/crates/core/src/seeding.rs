//! Deterministic random streams.
//!
//! Every randomized stage draws from a ChaCha stream addressed by
//! `(purpose, index)` on top of one master seed, so regenerating a single
//! stage never perturbs the draws of any other.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Which randomized stage a stream feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamPurpose {
    /// Instance coefficients (costs, prices, capacities).
    GameGeneration = 1,
    /// Starting estimates.
    Initialization = 2,
    /// Sample points for constant estimation.
    ConstantSampling = 3,
    /// Sample pairs for the monotonicity probe.
    MonotonicityProbe = 4,
}

/// An independent generator for `(seed, purpose, index)`.
pub fn stream_rng(seed: u64, purpose: StreamPurpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 32) | index);
    rng
}
