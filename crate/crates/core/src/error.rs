use alloc::string::String;

use crate::spectral::Mode;

/// Which structural invariant of a coefficient set failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Invariant {
    /// `(u_k, k) = 0`
    Incompressibility,
    /// `conj(u_{-k}) = u_k`
    Reality,
    /// A velocity component outside the physical dimension is nonzero.
    Planarity,
    /// NaN or infinite coefficient.
    Finiteness,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("the zero mode is excluded from every mode container")]
    ZeroMode,

    #[error("dimension must be 2 or 3, got {0}")]
    BadDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("mode set is not symmetric: {0} present but its negative is missing")]
    Asymmetric(Mode),

    #[error("mode {0} is not part of the mode set")]
    ModeNotInSet(Mode),

    #[error("coefficient count {found} does not match mode count {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("{kind:?} violated at mode {mode} (index {index}), residual {residual:e}")]
    InvariantViolation {
        mode: Mode,
        index: usize,
        kind: Invariant,
        residual: f64,
    },

    #[error("grid resolution {given} is below the alias-free minimum {required}")]
    ResolutionTooSmall { given: usize, required: usize },

    #[error("pressure right-hand side at {mode} is not parallel to k (residual {residual:e})")]
    PressureInconsistent { mode: Mode, residual: f64 },

    #[error("hypothesis failed: {0}")]
    Hypothesis(String),

    #[error("threshold failed: {0}")]
    Threshold(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invariant drift {drift:e} at t = {time} exceeds tolerance; reduce the step")]
    StepRejected { time: f64, drift: f64 },

    #[error("modulus facet at {0} is degenerate (|u_k| = 0)")]
    DegenerateFacet(Mode),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
