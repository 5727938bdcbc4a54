//! Numerical and statistical thresholds used by the verification suites.

/// Symplecticity `‖MᵀΩM − Ω‖∞` of regularized output.
pub const SYMPLECTIC_DEFECT: f64 = 1e-10;

/// Relative residual `‖Q² − T‖∞ / max(1, ‖T‖∞)` of the principal square root.
pub const SQRT_RESIDUAL: f64 = 1e-12;

/// Lipschitz constant of `√·` on `‖T − 1‖∞ < 1/2`.
pub const SQRT_LIPSCHITZ: f64 = 2.0 - std::f64::consts::SQRT_2;

/// Agreement between two exact computations of the same moments, relative
/// to `max(1, ‖V‖∞)`.
pub const MOMENT_AGREEMENT: f64 = 1e-10;

/// Frobenius deviation of an empirical covariance, in units of `‖Σ‖_F/√N`.
pub const COVARIANCE_SIGMAS: f64 = 5.0;

/// Two-sample Monte-Carlo comparisons, in standard errors.
pub const MONTE_CARLO_SIGMAS: f64 = 6.0;

/// Success-rate floor is `1 − δ − k·√(δ(1−δ)/trials)` with this `k`.
pub const BINOMIAL_SIGMAS: f64 = 3.0;

/// Slack on bound dominance checks.
pub const BOUND_DOMINANCE: f64 = 1e-9;

/// Slack when comparing monotone sequences of bound values.
pub const MONOTONE_SLACK: f64 = 1e-15;

/// `‖Ŝ − S*‖∞` target in the single-shot, large-`η` regime.
pub const LARGE_ETA_ERROR: f64 = 1e-3;

/// Required fraction of single-shot trials meeting [`LARGE_ETA_ERROR`].
pub const LARGE_ETA_RATE: f64 = 0.99;

pub fn binomial_floor(delta: f64, trials: u64, sigmas: f64) -> f64 {
    1.0 - delta - sigmas * (delta * (1.0 - delta) / trials as f64).sqrt()
}
