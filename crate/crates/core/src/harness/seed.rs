//! Deterministic seed derivation.

use crate::dataset::{Region, WindowSpec};

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `parts` into `base` one at a time.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix(base), |acc, &p| splitmix(acc ^ splitmix(p)))
}

fn region_code(region: Region) -> u64 {
    match region {
        Region::ThrowingArm => 1,
        Region::LeadingArm => 2,
        Region::Trunk => 3,
        Region::PivotLeg => 4,
        Region::LeadingLeg => 5,
        Region::WholeBody => 6,
    }
}

/// Seed of one training run.
pub fn fold_seed(base: u64, fold: usize, repeat: usize, region: Region, window: WindowSpec) -> u64 {
    derive_seed(
        base,
        &[fold as u64, repeat as u64, region_code(region), window.index() as u64],
    )
}
