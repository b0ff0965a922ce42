//! Benchmark instances shared by the criterion targets.

use owa_core::fixtures::preset;
use owa_core::generate::{generate, Density};
use owa_core::{Instance, OwaWeights};

/// Seeded clique paired with a bundled weight preset.
pub fn case(n: usize, preset_name: &str, seed: u64) -> (Instance, OwaWeights) {
    let w = preset(preset_name).expect("known preset");
    let inst = generate(n, w.len(), seed, Density::Clique).expect("valid size");
    (inst, w)
}
