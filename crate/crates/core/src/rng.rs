//! Counter-based randomness.
//!
//! Perturbation draws are keyed by `(seed, u, v)` so that the decision for a
//! vertex pair is a pure function of the key: results do not depend on the
//! order pairs are visited, which makes parallel construction and incremental
//! queries reproducible.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer.
#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw in [0,1) for an unordered vertex pair under `seed`.
#[inline]
pub fn pair_uniform(seed: u64, u: u32, v: u32) -> f64 {
    let (a, b) = if u <= v { (u, v) } else { (v, u) };
    let mut z = mix(seed.wrapping_add(GOLDEN));
    z = mix(z ^ (((a as u64) << 32) | b as u64));
    z = mix(z.wrapping_add(GOLDEN));
    to_unit(z)
}

/// Derive the seed for trial `index` from a base seed. Distinct indices get
/// statistically independent streams.
#[inline]
pub fn trial_seed(base_seed: u64, index: u64) -> u64 {
    mix(base_seed.wrapping_add(GOLDEN.wrapping_mul(index.wrapping_add(1))))
}

/// Derive a sub-stream seed (e.g. cloud sampling vs. perturbation) from a
/// trial seed.
#[inline]
pub fn substream_seed(seed: u64, stream: u64) -> u64 {
    mix(seed ^ mix(stream.wrapping_add(GOLDEN)))
}

#[inline]
fn to_unit(z: u64) -> f64 {
    // 53 high bits -> [0,1)
    (z >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
