//! Counter-based randomness.
//!
//! Edge weights are drawn from a hash of `(master seed, stream, edge slot)` so
//! that a configuration does not depend on the order in which edges are
//! visited, nor on how the work is split across threads.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finaliser.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn counter_bits(seed: u64, stream: u64, counter: u64) -> u64 {
    let s = mix64(seed.wrapping_add(GOLDEN));
    let t = mix64(s ^ stream.wrapping_mul(GOLDEN).wrapping_add(0x632B_E59B_D9B4_E019));
    mix64(t ^ counter.wrapping_mul(0xD6E8_FEB8_6659_FD93).wrapping_add(GOLDEN))
}

/// Uniform in the open interval (0, 1).
#[inline]
pub fn open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

#[inline]
pub fn uniform(seed: u64, stream: u64, counter: u64) -> f64 {
    open_unit(counter_bits(seed, stream, counter))
}

/// Derive a child seed, used to give independent sub-experiments their own
/// seed space.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    mix64(seed ^ mix64(tag.wrapping_add(0x1234_5678_9ABC_DEF1)))
}
