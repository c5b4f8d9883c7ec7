//! Frozen experiment presets. The JSON copies under `presets/` at the
//! repository root are generated from these and checked by tests.

use droneplace_core::SystemConfig;

use crate::crowd::CrowdSpec;

pub const REFERENCE_N: usize = 500;
pub const REFERENCE_SCENARIO_SEED: u64 = 2021;
/// Drone count of the fixed-`k` method comparison.
pub const COMPARISON_K: usize = 10;

/// Urban defaults with the drone-count search bounded by the fleet size
/// only: the backhaul-derived bound (6) sits below the counts the
/// comparison deploys (10 and more).
pub fn experiment_config() -> SystemConfig {
    SystemConfig { ignore_backhaul_k_cap: true, ..SystemConfig::urban_default() }
}

pub fn reference_crowd(n: usize) -> CrowdSpec {
    CrowdSpec::reference(n, REFERENCE_SCENARIO_SEED)
}
