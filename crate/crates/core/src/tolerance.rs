//! Numerical tolerances shared by construction checks.

/// Hermiticity and reconstruction tolerance.
pub const HERMITIAN: f64 = 1e-10;

/// Trace (normalization) tolerance.
pub const TRACE: f64 = 1e-10;

/// Eigenvalues in `[-POSITIVITY, 0)` are clamped to zero.
pub const POSITIVITY: f64 = 1e-12;

/// `tr AA†` below this is treated as the zero matrix.
pub const ZERO_MATRIX: f64 = 1e-300;
