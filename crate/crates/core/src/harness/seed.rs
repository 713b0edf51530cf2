//! Stream seed derivation.
//!
//! Every random stream of a run is seeded from the master seed, the
//! replication index and a text label:
//!
//! ```text
//!   seed = mix(mix(master ^ mix(replication + 0x9E3779B97F4A7C15)) ^ fnv1a64(label))
//! ```
//!
//! where `mix` is the SplitMix64 finalizer and `fnv1a64` is 64-bit FNV-1a
//! over the UTF-8 bytes of the label. Labels used by the runner are `"env"`
//! for contexts, the policy tag (e.g. `"mvts_d"`) for a policy's own draws,
//! and `"<tag>/reward"` for the reward noise that policy observes.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

pub fn derive_seed(master: u64, replication: u64, label: &str) -> u64 {
    let rep = splitmix64(replication.wrapping_add(GOLDEN_GAMMA));
    splitmix64(splitmix64(master ^ rep) ^ fnv1a64(label.as_bytes()))
}
