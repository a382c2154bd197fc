//! Reproducible random substreams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by
//! the user seed (expanded with `seed_from_u64`) and positioned on a
//! 64-bit stream id. ChaCha is counter based, so stream `r` of seed `s` is a
//! fixed function of `(s, r)` and never overlaps another stream. Replica `r`
//! of an experiment always uses stream `r`; single sequences use stream 0.
//! Results therefore do not depend on how replicas are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for stream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer. Used to derive secondary seeds (for example the
/// probe points of a diagnostic) from a user seed and a fixed tag.
pub fn mix_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
