//! Numerical tolerances shared across the crate.

/// Default algebraic tolerance (Hermiticity, trace, positivity checks).
pub const DEFAULT: f64 = 1e-9;

/// Eigen-residual tolerance relative to the operator norm.
pub const EIG_RESIDUAL: f64 = 1e-10;

/// Eigenvalues above this count toward the rank of a density matrix.
pub const RANK: f64 = 1e-12;

/// Relative level below which eigenvalues are treated as exact zeros when
/// taking matrix square roots.
pub const SPECTRAL_FLOOR: f64 = 1e-14;

/// Unitarity tolerance for gates and Stinespring dilations.
pub const UNITARY: f64 = 1e-10;
