//! Per-trial seed derivation.
//!
//! Campaigns must be reproducible under any worker count, so every trial's
//! randomness is a pure function of (master seed, trial index).  The mixing
//! function is SplitMix64, applied to the master seed offset by the trial
//! index times the 64-bit golden ratio; it is fixed, public, and documented
//! in the README.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stream tag for adversary choices (window placement, base graphs) so they
/// never collide with trial seeds.
pub const ADVERSARY_STREAM: u64 = 0xADE5_EED0_0B5E_55ED;

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// seed_i = SplitMix64(master + i · golden).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_mul(GOLDEN)))
}
