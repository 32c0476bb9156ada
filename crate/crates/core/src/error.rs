use thiserror::Error;

/// Errors raised by the simulator.
///
/// Variants fall into three groups that front ends map to distinct exit
/// statuses: invalid input ([`Error::is_usage`]), engine guards
/// ([`Error::is_engine_guard`]) and numerical-invariant violations
/// ([`Error::is_numerical`]).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit count {n} outside supported range {min}..={max}")]
    QubitCount { n: usize, min: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("excitation number {m} out of range for {n} qubits")]
    ExcitationOutOfRange { m: usize, n: usize },

    #[error("qubit index {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("jump {kind} on qubit {qubit} has no support in the current state")]
    ImpossibleJump { kind: &'static str, qubit: usize },

    #[error("total single-jump probability {total:.3e} per step exceeds {limit:.3e}; reduce dt")]
    JumpBudget { total: f64, limit: f64 },

    #[error("trace drift {drift:.3e} in one Kraus step exceeds bound {bound:.3e}; reduce dt")]
    StepSizeViolation { drift: f64, bound: f64 },

    #[error("{engine} engine supports at most {max} qubits, got {n}")]
    EngineGuard { engine: &'static str, n: usize, max: usize },

    #[error("GHZ-equivalence pathway requires an even qubit count, got {0}")]
    OddQubitCount(usize),

    #[error("state is not permutation symmetric (residual {residual:.3e})")]
    NotSymmetric { residual: f64 },

    #[error("quadrature grid too narrow: completeness deviation {deviation:.3e}")]
    GridTooNarrow { deviation: f64 },

    #[error("density operator has eigenvalue {0:.3e} below the clamp threshold")]
    NegativeEigenvalue(f64),

    #[error("quantum Fisher information is zero; phase variance is unbounded")]
    ZeroQfi,

    #[error("numerical invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn is_engine_guard(&self) -> bool {
        matches!(
            self,
            Error::EngineGuard { .. } | Error::JumpBudget { .. } | Error::StepSizeViolation { .. }
        )
    }

    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NegativeEigenvalue(_)
                | Error::Invariant(_)
                | Error::ImpossibleJump { .. }
                | Error::NotSymmetric { .. }
        )
    }

    pub fn is_usage(&self) -> bool {
        !self.is_engine_guard() && !self.is_numerical()
    }
}

pub type Result<T> = std::result::Result<T, Error>;
