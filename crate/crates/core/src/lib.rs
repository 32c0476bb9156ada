//! Collective-spin simulation of projected squeezed (PS) states and
//! macroscopic superposition states (MSS) under local decoherence.
//!
//! Qubit 0 is the most significant bit of a basis index; bit value 0 is `|↑⟩`.

pub mod channels;
pub mod engines;
pub mod error;
pub mod measurement;
pub mod metrics;
pub mod protocols;
pub mod spin;
pub mod state;
pub mod system;

pub use channels::{build_rate_model, ChannelKind, ChannelSet, RateModel, DEFAULT_DT, DEFAULT_J};
pub use engines::{EngineConfig, EngineKind, MetricSummary, TrajectoryEnsemble};
pub use error::{Error, Result};
pub use measurement::{PostSelectionPdf, PovmSpec, WidthConvention};
pub use metrics::{QfiMethod, QfiResult};
pub use protocols::{
    EngineSettings, IntervalReport, MssProtocolParams, PreparedState, ProtocolResult, PsProtocolParams,
    SweepAxis,
};
pub use spin::CollectiveAxis;
pub use state::{DensityOperator, PureState};
pub use system::SystemSpec;
