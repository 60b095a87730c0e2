//! Seed derivation.
//!
//! Every random stream in a run is derived from one master seed with a
//! splitmix64 mix of `(master, stream, index)`. Streams are fixed constants so
//! that caching the pool on disk does not shift the ensemble draws.

/// Stream tag for base-pool generation.
pub const STREAM_POOL: u64 = 0x706f_6f6c;
/// Stream tag for per-repetition ensemble sampling.
pub const STREAM_ENSEMBLE: u64 = 0x656e_736d;
/// Stream tag for per-partition k-means runs inside a pool.
pub const STREAM_KMEANS: u64 = 0x6b6d_6e73;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// One splitmix64 output step.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of item `index` in `stream` under `master`.
pub fn derive(master: u64, stream: u64, index: u64) -> u64 {
    let a = splitmix64(master);
    let b = splitmix64(a ^ stream.wrapping_mul(GOLDEN_GAMMA));
    splitmix64(b ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03))
}
