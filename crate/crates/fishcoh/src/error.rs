//! Crate-wide error type.
//!
//! Every variant names the violated invariant and carries the measured
//! quantity that violated it, so callers can report diagnostics without
//! re-deriving them.

use thiserror::Error;

/// Errors produced by state construction, channel validation, and the
/// information-theoretic operations built on them.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix that must be square is not.
    #[error("matrix is not square: {rows} rows, {cols} columns")]
    NotSquare { rows: usize, cols: usize },

    /// Operands whose dimensions must agree do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A density matrix failed the Hermiticity invariant.
    #[error("state is not Hermitian: max entrywise residual {residual:.3e}")]
    NotHermitian { residual: f64 },

    /// A density matrix failed the unit-trace invariant.
    #[error("state trace is not 1: got {trace:.12}")]
    TraceNotOne { trace: f64 },

    /// A density matrix failed positive semidefiniteness.
    #[error("state is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    /// A serialized state or channel had malformed shape (row lengths,
    /// entry arity) inconsistent with its declared dimension.
    #[error("malformed serialized payload: {what}")]
    MalformedPayload { what: String },

    /// A phase rate lies outside the admissible interval [0, 1].
    #[error("phase rate out of range [0, 1]: column {index} has rate {value}")]
    RateOutOfRange { index: usize, value: f64 },

    /// A runtime invariant of a constructed value failed.
    #[error("invariant violated: {what}")]
    InvariantViolated { what: String },

    /// A positivity witness was requested for a state with no usable
    /// off-diagonal entry.
    #[error(
        "state is incoherent at the witness threshold: \
         max off-diagonal modulus {max_offdiagonal:.3e}"
    )]
    StateIncoherent { max_offdiagonal: f64 },

    /// A channel is not trace preserving: the summed Kraus Gram matrix
    /// deviates from the identity by more than the completeness tolerance.
    #[error("channel incomplete: max residual {residual:.3e} at parameter offset {at_offset:.6}")]
    Incomplete { residual: f64, at_offset: f64 },

    /// A channel has no Kraus operators above the weight floor.
    #[error("channel has no Kraus operators with nonvanishing weight")]
    EmptyChannel,

    /// An outcome has vanishing probability but non-vanishing derivative,
    /// so its Fisher-information contribution diverges.
    #[error(
        "singular outcome {index}: probability {probability:.3e} \
         with derivative {derivative:.3e}"
    )]
    SingularOutcome {
        index: usize,
        probability: f64,
        derivative: f64,
    },

    /// A state family's derivative has weight outside the state's support,
    /// so the symmetric-logarithmic-derivative quotient is ill-defined.
    #[error("state family singular: derivative weight {kernel_block_norm:.3e} outside support")]
    SingularFamily { kernel_block_norm: f64 },

    /// An operation that requires a pure state received a mixed one.
    #[error("state is not pure: purity {purity:.12}")]
    NotPure { purity: f64 },

    /// An operation defined only for qubits received a larger state.
    #[error("operation requires a qubit, got dimension {dim}")]
    NotQubit { dim: usize },

    /// An exhaustive search was requested above its dimension ceiling.
    #[error("dimension {dim} exceeds the exhaustive-search ceiling {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    /// A structured channel parametrization violated one of its invariants.
    #[error("invalid channel parametrization: {what}")]
    InvalidFamilyPoint { what: String },

    /// An optimizer or suite configuration is unusable.
    #[error("invalid configuration: {what}")]
    InvalidConfig { what: String },

    /// A serialized document failed to parse as JSON.
    #[error("JSON parse failure: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name of the violated invariant.
    ///
    /// Unlike the `Display` text, these strings are part of the
    /// diagnostic contract: tooling may match on them, so they never
    /// change once published.  Incompleteness is split by where it was
    /// detected — at the anchor parameter or at a shifted grid point —
    /// because the two have different likely causes (bad coefficients
    /// versus phase interference between operators).
    pub fn invariant_name(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "NotSquare",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::TraceNotOne { .. } => "TraceNotOne",
            Error::NotPositive { .. } => "NotPositive",
            Error::MalformedPayload { .. } => "MalformedPayload",
            Error::RateOutOfRange { .. } => "RateOutOfRange",
            Error::InvariantViolated { .. } => "InvariantViolated",
            Error::StateIncoherent { .. } => "StateIncoherent",
            Error::Incomplete { at_offset, .. } => {
                if *at_offset == 0.0 {
                    "IncompleteAtTheta0"
                } else {
                    "IncompleteAtOffset"
                }
            }
            Error::EmptyChannel => "EmptyChannel",
            Error::SingularOutcome { .. } => "SingularOutcome",
            Error::SingularFamily { .. } => "SingularFamily",
            Error::NotPure { .. } => "NotPure",
            Error::NotQubit { .. } => "NotQubit",
            Error::DimensionTooLarge { .. } => "DimensionTooLarge",
            Error::InvalidFamilyPoint { .. } => "InvalidFamilyPoint",
            Error::InvalidConfig { .. } => "InvalidConfig",
            Error::Json(_) => "MalformedJson",
        }
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
