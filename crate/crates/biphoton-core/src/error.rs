use thiserror::Error;

/// Errors raised by state construction, optical transforms, the counting
/// model and the fringe lock.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    /// All input amplitudes were zero; there is no direction to normalize.
    #[error("degenerate state: amplitudes have zero norm")]
    DegenerateState,

    /// A transform matrix failed the unitarity check.
    #[error("non-unitary element: deviation {deviation:.3e} exceeds tolerance {tolerance:.1e}")]
    NonUnitary { deviation: f64, tolerance: f64 },

    /// Signal bases mix interferometer-path labels with analyzer-port labels.
    #[error("mixed signal basis: path and port labels cannot be combined")]
    MixedSignalBasis,

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("unknown mode label {0} for this state")]
    UnknownMode(String),

    #[error("mixture needs at least one component")]
    EmptyMixture,

    #[error("mixture weights must be nonnegative with a positive sum")]
    BadWeights,

    #[error("{0}")]
    InvalidParameter(String),

    /// The fringe slope vanishes at the requested operating point, so an
    /// intensity error carries no sign information.
    #[error("unlockable setpoint: fringe slope is zero at mismatch {mismatch_nm} nm")]
    UnlockableSetpoint { mismatch_nm: f64 },

    #[error("visibility undefined: coincidence and accidental rates are both zero")]
    VisibilityUndefined,

    #[error("qber undefined: zero coincidence rate on port {0}")]
    ZeroCoincidenceRate(&'static str),
}

pub type Result<T> = std::result::Result<T, CoreError>;
