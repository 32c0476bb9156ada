//! Shared inputs for the benchmarks.

use projsq_core::spin::{apply_one_axis_twist, coherent_spin_state};
use projsq_core::{DensityOperator, EngineConfig, EngineKind, PureState, SystemSpec};

/// Sizes covered by the dense-state benchmarks.
pub const SIZES: [usize; 3] = [4, 8, 12];
/// Sizes within reach of the density-matrix engine.
pub const KRAUS_SIZES: [usize; 3] = [4, 6, 8];

pub fn spec(n: usize) -> SystemSpec {
    SystemSpec::new(n).expect("benchmark size within limits")
}

/// Coherent spin state after a short twist, so amplitudes carry phases.
pub fn squeezed(n: usize) -> PureState {
    apply_one_axis_twist(coherent_spin_state(&spec(n)), 0.15)
}

pub fn squeezed_density(n: usize) -> DensityOperator {
    DensityOperator::from_pure(&squeezed(n))
}

pub fn config(n: usize, chi_t: f64, engine: EngineKind) -> EngineConfig {
    EngineConfig::standard(&spec(n), 1.0, chi_t, engine).expect("valid engine config")
}
