//! Seeded random streams.
//!
//! Every random draw in the simulator comes from a ChaCha8 generator. The run
//! seed selects the key and a stream id selects one of 2^64 independent
//! streams under that key, so the environment and each agent's policy draw
//! from disjoint sequences regardless of execution order.

use rand::SeedableRng;

pub use rand_chacha::ChaCha8Rng as SimRng;

/// Stream used by the environment itself.
pub const ENV_STREAM: u64 = 0;

/// Opens stream `stream` under `seed`.
pub fn stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream for agent `agent`'s policy (exploration, scripted tie-breaks).
pub fn policy_stream(seed: u64, agent: usize) -> SimRng {
    stream(seed, 1 + agent as u64)
}

/// SplitMix64 finalizer over `seed ^ salt`. Used to derive per-episode
/// environment seeds from a run seed.
pub fn mix(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
