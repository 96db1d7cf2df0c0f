//! Deterministic seed streams for parallel replications.
//!
//! A replication seed is `mix(master, phase, model, rep)` where `mix` chains
//! SplitMix64 finalizers and `model` is hashed with 64-bit FNV-1a. The result
//! depends only on these inputs, so replications can run in any order on any
//! number of workers.

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// 64-bit FNV-1a hash of a string.
pub fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Chains `parts` into a single seed.
pub fn mix(master: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(master), |h, &p| splitmix64(h ^ splitmix64(p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Calibration,
    Test,
    Data,
}

impl Phase {
    pub fn tag(self) -> u64 {
        match self {
            Phase::Calibration => 1,
            Phase::Test => 2,
            Phase::Data => 3,
        }
    }
}

/// Seed of replication `rep` of `model` in the given phase.
pub fn replication_seed(master: u64, phase: Phase, model: &str, rep: u64) -> u64 {
    mix(master, &[phase.tag(), fnv1a(model), rep])
}
