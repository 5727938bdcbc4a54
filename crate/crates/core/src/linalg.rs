//! Small dense helpers on top of nalgebra.

use alloc::format;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::{Error, Result};

pub type RealMatrix = DMatrix<f64>;
pub type RealVector = DVector<f64>;

/// Spectral norm (largest singular value). Zero for empty matrices.
pub fn operator_norm(m: &RealMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0, |acc: f64, &s| acc.max(s))
}

/// `‖m - 1‖∞` for a square matrix.
pub fn distance_from_identity(m: &RealMatrix) -> f64 {
    let n = m.nrows();
    operator_norm(&(m - RealMatrix::identity(n, n)))
}

pub fn frobenius_norm(m: &RealMatrix) -> f64 {
    m.norm()
}

pub fn max_abs(m: &RealMatrix) -> f64 {
    m.iter().fold(0.0, |acc: f64, &x| acc.max(x.abs()))
}

pub fn is_finite(m: &RealMatrix) -> bool {
    m.iter().all(|x| x.is_finite())
}

pub fn symmetrize(m: &RealMatrix) -> RealMatrix {
    (m + m.transpose()) * 0.5
}

/// Smallest eigenvalue of a symmetric matrix (the matrix is symmetrized first).
pub fn min_eigenvalue(m: &RealMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |acc, &x| acc.min(x))
}

/// Block-diagonal `a ⊕ b`.
pub fn direct_sum(a: &RealMatrix, b: &RealMatrix) -> RealMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = RealMatrix::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

pub fn concat(a: &RealVector, b: &RealVector) -> RealVector {
    RealVector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
}

pub(crate) fn require_square(m: &RealMatrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

pub(crate) fn require_even_square(m: &RealMatrix, what: &str) -> Result<usize> {
    let n = require_square(m, what)?;
    if n == 0 || n % 2 != 0 {
        return Err(Error::dimension(format!(
            "{what} must be 2m x 2m with m >= 1, got {n}x{n}"
        )));
    }
    Ok(n / 2)
}

/// Lower-triangular `L` with `L Lᵀ ≈ cov`.
///
/// Falls back to a diagonal jitter of `1e-12 · max(1, max|cov|)` when the
/// plain Cholesky fails on a numerically singular covariance.
pub fn gaussian_factor(cov: &RealMatrix) -> Result<RealMatrix> {
    require_square(cov, "covariance")?;
    if !is_finite(cov) {
        return Err(Error::NonFinite);
    }
    let sym = symmetrize(cov);
    if let Some(ch) = Cholesky::new(sym.clone()) {
        return Ok(ch.l());
    }
    let n = sym.nrows();
    let jitter = 1e-12 * max_abs(&sym).max(1.0);
    let mut shifted = sym;
    for i in 0..n {
        shifted[(i, i)] += jitter;
    }
    Cholesky::new(shifted)
        .map(|ch| ch.l())
        .ok_or_else(|| Error::Numeric("covariance is not positive semidefinite".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operator_norm_of_diagonal() {
        let m = RealMatrix::from_diagonal(&RealVector::from_vec(alloc::vec![1.0, -3.0, 2.0]));
        assert!((operator_norm(&m) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn factor_handles_singular_covariance() {
        let cov = RealMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let l = gaussian_factor(&cov).unwrap();
        assert!(max_abs(&(&l * l.transpose() - &cov)) < 1e-10);
    }

    #[test]
    fn factor_rejects_indefinite() {
        let cov = RealMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(gaussian_factor(&cov).is_err());
    }

    #[test]
    fn direct_sum_places_blocks() {
        let a = RealMatrix::identity(1, 1) * 2.0;
        let b = RealMatrix::identity(2, 2) * 3.0;
        let d = direct_sum(&a, &b);
        assert_eq!(d[(0, 0)], 2.0);
        assert_eq!(d[(2, 2)], 3.0);
        assert_eq!(d[(0, 1)], 0.0);
    }
}
