//! Seed derivation for repetition batches.
//!
//! Each repetition gets its own stream derived from the base seed so that
//! streams are decorrelated even for adjacent repetition indices.

/// SplitMix64 finalizer; bijective on u64.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Stream seed for repetition `rep` of a batch keyed by `base`.
pub fn repetition_seed(base: u64, rep: u64) -> u64 {
    splitmix64(base ^ splitmix64(rep))
}

/// Derive a sub-stream seed for a named component within one repetition.
pub fn component_seed(rep_seed: u64, component: u64) -> u64 {
    splitmix64(rep_seed ^ splitmix64(component.wrapping_mul(0xa076_1d64_78bd_642f)))
}
