//! Seed plumbing. A run is determined by one root seed; every consumer of
//! randomness draws from its own ChaCha stream so that adding draws in one
//! place never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Learner,
    Adversary,
    Delay,
    /// Per-player learner streams in multi-agent runs.
    Player(u32),
    /// Fresh learner randomness after the doubling wrapper restarts.
    SuperEpoch(u32),
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Learner => 1,
            Stream::Adversary => 2,
            Stream::Delay => 3,
            Stream::Player(n) => (1 << 32) | n as u64,
            Stream::SuperEpoch(n) => (2 << 32) | n as u64,
        }
    }
}

/// Independent generator for `stream` under `root`.
pub fn substream(root: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(stream.id());
    rng
}

/// Root seed of the `index`-th replicate of an experiment.
pub fn replicate_seed(root: u64, index: u64) -> u64 {
    // splitmix64 finaliser keeps neighbouring replicates decorrelated
    let mut z = root.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
