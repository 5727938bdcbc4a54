use alloc::format;

use num_traits::Float;

use crate::linalg::{distance_from_identity, is_finite, operator_norm, require_square, RealMatrix};
use crate::{Error, Result};

/// Settings for [`principal_sqrt_with`].
#[derive(Debug, Clone, Copy)]
pub struct SqrtConfig {
    /// Relative residual target `‖Q² − T‖∞ ≤ tol · max(1, ‖T‖∞)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Reject inputs with `‖T − 1‖∞ ≥ 1`, where the principal root is
    /// guaranteed to exist and the Lipschitz bound applies.
    pub enforce_gate: bool,
}

impl Default for SqrtConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100,
            enforce_gate: true,
        }
    }
}

/// Principal square root with the default settings and residual tolerance `tol`.
pub fn principal_sqrt(t: &RealMatrix, tol: f64) -> Result<RealMatrix> {
    principal_sqrt_with(
        t,
        &SqrtConfig {
            tol,
            ..SqrtConfig::default()
        },
    )
}

/// Principal square root by the Denman–Beavers iteration with determinant
/// scaling in the early phase.
pub fn principal_sqrt_with(t: &RealMatrix, cfg: &SqrtConfig) -> Result<RealMatrix> {
    let n = require_square(t, "matrix")?;
    if !is_finite(t) {
        return Err(Error::NonFinite);
    }
    if n == 0 {
        return Ok(t.clone());
    }
    if cfg.enforce_gate {
        let d = distance_from_identity(t);
        if !(d < 1.0) {
            return Err(Error::domain(
                "principal_sqrt input",
                format!("need ||T - 1|| < 1, got {d}"),
            ));
        }
    }

    let scale = operator_norm(t).max(1.0);
    let residual_of = |y: &RealMatrix| operator_norm(&(y * y - t)) / scale;
    let mut y = t.clone();
    let mut zm = RealMatrix::identity(n, n);
    let mut scaling = true;
    let mut residual = residual_of(&y);
    for iteration in 1..=cfg.max_iter {
        if scaling {
            let det = (y.determinant() * zm.determinant()).abs();
            if det.is_finite() && det > 0.0 {
                let mu = Float::powf(det, -1.0 / (2.0 * n as f64));
                y *= mu;
                zm *= mu;
            }
        }
        let y_inv = y
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numeric("singular iterate in square-root iteration".into()))?;
        let z_inv = zm
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numeric("singular iterate in square-root iteration".into()))?;
        let y_next = (&y + z_inv) * 0.5;
        let z_next = (&zm + y_inv) * 0.5;
        let step = (&y_next - &y).norm() / y_next.norm().max(f64::MIN_POSITIVE);
        y = y_next;
        zm = z_next;
        if step < 1e-2 {
            scaling = false;
        }
        if step < 1e-6 {
            residual = residual_of(&y);
            if residual <= cfg.tol {
                return Ok(y);
            }
            if step < 4.0 * f64::EPSILON {
                return Err(Error::Convergence {
                    iterations: iteration,
                    residual,
                });
            }
        }
    }
    Err(Error::Convergence {
        iterations: cfg.max_iter,
        residual,
    })
}
