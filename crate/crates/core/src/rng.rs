//! Counter-based random streams.
//!
//! Every chain gets its own ChaCha8 stream: the user seed selects the key and
//! the stream id selects the 64-bit nonce, so chains never overlap and a run
//! is replayable from `(seed, stream)` alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ChainRng = ChaCha8Rng;

/// Algorithm name written into trace headers.
pub const RNG_ALGORITHM: &str = "ChaCha8";

pub fn stream(seed: u64, stream_id: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Well-known stream ids so the dataset generator and the chains never share
/// a stream under the same seed.
pub mod streams {
    pub const DATA: u64 = 0;
    pub const CHAIN: u64 = 1;
    pub const INIT: u64 = 2;
    pub const GEWEKE_PRIOR: u64 = 3;
    pub const GEWEKE_CHAIN: u64 = 4;
}
