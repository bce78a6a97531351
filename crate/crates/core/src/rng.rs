//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream keyed by
//! a 64-bit seed and a stream number, so results do not depend on thread
//! scheduling or on the order in which independent runs execute.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SmcRng = ChaCha8Rng;

/// Stream `stream` of the generator keyed by `seed`.
pub fn stream(seed: u64, stream: u64) -> SmcRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream numbers reserved by the experiment harness.
pub mod streams {
    pub const DATASET: u64 = 0;
    pub const GIBBS: u64 = 1;
    /// Filter variants use `FILTER_BASE + variant index`.
    pub const FILTER_BASE: u64 = 16;
}
