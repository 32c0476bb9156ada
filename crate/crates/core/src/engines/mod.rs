//! Time evolution of the squeezing stage under decoherence.

pub mod config;
pub mod ensemble;
pub mod kraus;
pub mod stats;
pub mod trajectory;

pub use config::{EngineConfig, EngineKind, StepSegment, DEFAULT_KRAUS_MAX_QUBITS};
pub use ensemble::{ensemble_expectation, ensemble_post_select, ensemble_summary, TrajectoryEnsemble};
pub use kraus::{drift_bound, is_permutation_invariant, kraus_squeeze, kraus_squeeze_step, kraus_step};
pub use stats::{convergence_monitor, weighted_summary, MetricSummary, TrajectoryStats};
pub use trajectory::{run_trajectories, trajectory_rng, trajectory_squeeze, trajectory_squeeze_with};
