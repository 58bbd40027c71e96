//! Numerical tolerances, grouped by the kind of arithmetic that produced
//! the quantity being checked.
//!
//! Three regimes are kept deliberately distinct:
//!
//! - **Exact-arithmetic identities** (`EXACT`): quantities that would be
//!   exactly zero in real arithmetic and are touched only by a handful of
//!   floating-point operations (Hermiticity residuals, probability
//!   normalization, closed-form comparisons).
//! - **Eigensolver-limited identities** (`SPECTRAL`): quantities routed
//!   through an iterative Hermitian eigendecomposition, where backward
//!   error of order `1e-14 * dim` accumulates (eigenvalue floors,
//!   reconstruction residuals, trace checks after spectral surgery).
//! - **Classification thresholds** (`CLASSIFY` and coarser): decisions
//!   that gate behavior (is this state coherent? is this channel
//!   complete?) where a looser threshold avoids flapping on noise.

/// Residuals of identities that are exact in real arithmetic.
pub const EXACT: f64 = 1e-12;

/// Residuals limited by iterative eigensolver accuracy.
pub const SPECTRAL: f64 = 1e-10;

/// User-facing classification decisions (coherent vs. incoherent,
/// agreement of independently computed values).
pub const CLASSIFY: f64 = 1e-9;

/// Completeness residual allowed at the anchor parameter (and for static
/// Kraus sets): largest entrywise deviation of the summed Kraus Gram
/// matrix from the identity. Eigensolver-free, so it sits between the
/// exact and spectral regimes.
pub const COMPLETENESS_ANCHOR: f64 = 1e-10;

/// Completeness residual allowed on the fallback parameter grid when the
/// exact group-diagonal certificate does not apply; looser because the
/// grid check accumulates phase-evaluation roundoff across operators.
pub const COMPLETENESS_GRID: f64 = 1e-8;

/// Outcome probabilities at or below this floor are treated as vanishing
/// when accumulating classical Fisher information.
pub const PROB_FLOOR: f64 = 1e-14;

/// Outcome-distribution derivatives at or below this floor are treated as
/// vanishing; a vanishing probability with a derivative above it is a
/// genuine singularity rather than a removable `0/0`.
pub const DERIV_FLOOR: f64 = 1e-10;

/// Eigenvalue-pair support cutoff for the symmetric-logarithmic-derivative
/// quotient: pairs with combined weight at or below this are excluded.
pub const SLD_SUPPORT: f64 = 1e-12;

/// Largest derivative weight tolerated outside the support of a state
/// family before quantum Fisher information is declared ill-defined.
pub const KERNEL_LEAK: f64 = 1e-8;

/// Kraus operators (and refined rank-one components) with total weight at
/// or below this floor are dropped as numerically absent.
pub const WEIGHT_FLOOR: f64 = 1e-12;

/// Central finite-difference step used by derivative cross-checks and the
/// optimizer gradient: large enough to dominate roundoff in `f64`, small
/// enough that the `O(step^2)` truncation error stays near `1e-12`.
pub const FD_STEP: f64 = 1e-6;
