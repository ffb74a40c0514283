//! Numeric tolerances shared by every module.

/// Equality of weights, beliefs and symmetry checks.
pub const EQ: f64 = 1e-12;

/// Largest row-sum deviation that is repaired by renormalization.
pub const STOCHASTIC: f64 = 1e-9;

/// Convergence tolerance for power iteration.
pub const POWER_TOL: f64 = 1e-12;

/// Iteration cap for power iteration.
pub const POWER_MAX_ITER: usize = 1_000_000;

/// Horizon for average convergence time.
pub const TAU_HORIZON: usize = 1_000_000;

/// Default period cap for belief dynamics.
pub const T_MAX: usize = 100_000;

/// Belief spread below which small test networks count as converged.
pub const EPS_SMALL: f64 = 1e-3;

/// Belief spread used for the meeting-network experiments.
pub const EPS_SWEEP: f64 = 1e-4;
