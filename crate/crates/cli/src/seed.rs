//! Seed derivation for independent, reproducible job streams.

/// Method index reserved for per-repeat instance generation (bandit
/// parameters and candidate actions, hv-check point sets), shared by every
/// method of that repeat.
pub const INSTANCE_STREAM: u64 = u64::MAX;

/// Method index reserved for the Monte-Carlo weights of a repeat, so that
/// all methods of one repeat are scored with the same weights.
pub const HV_WEIGHT_STREAM: u64 = u64::MAX - 1;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of job `(repeat, method_index)` under `master_seed`.
///
/// Each component is folded in with a splitmix64 finalizer:
/// `mix(mix(mix(master) ^ repeat) ^ method_index)`. Every stage is a
/// bijection, so for a fixed master seed two jobs that differ in exactly one
/// component never collide. Only wrapping 64-bit integer arithmetic is used,
/// so results are identical on every platform.
pub fn seed_derivation(master_seed: u64, repeat: u64, method_index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ repeat) ^ method_index)
}
