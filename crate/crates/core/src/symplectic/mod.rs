//! Real symplectic group `Sp(2m)`: validation, Euler decomposition, random
//! sampling, principal square roots and projection onto the group.

mod euler;
mod sqrt;

use alloc::format;

use crate::linalg::{self, is_finite, operator_norm, require_even_square, RealMatrix};
use crate::{Error, Result};

pub use euler::{
    euler_decompose, random_passive, random_symplectic, squeezing_matrix, unitary_to_orthogonal,
    EulerFactors,
};
pub use sqrt::{principal_sqrt, principal_sqrt_with, SqrtConfig};

/// Default tolerance for `‖MᵀΩM − Ω‖∞`.
pub const SYMPL_TOL: f64 = 1e-10;

/// The symplectic form `Ω = ⊕_{j=1}^m [[0, 1], [-1, 0]]`.
pub fn omega(m: usize) -> RealMatrix {
    let mut o = RealMatrix::zeros(2 * m, 2 * m);
    for j in 0..m {
        o[(2 * j, 2 * j + 1)] = 1.0;
        o[(2 * j + 1, 2 * j)] = -1.0;
    }
    o
}

/// `Z = ⊕_{j=1}^m diag(1, -1)`, the phase-conjugation reflection.
pub fn pauli_z_block(m: usize) -> RealMatrix {
    let mut z = RealMatrix::zeros(2 * m, 2 * m);
    for j in 0..m {
        z[(2 * j, 2 * j)] = 1.0;
        z[(2 * j + 1, 2 * j + 1)] = -1.0;
    }
    z
}

/// `‖MᵀΩM − Ω‖∞`.
pub fn symplectic_defect(m: &RealMatrix) -> Result<f64> {
    let modes = require_even_square(m, "symplectic candidate")?;
    let o = omega(modes);
    Ok(operator_norm(&(m.transpose() * &o * m - o)))
}

pub fn is_symplectic(m: &RealMatrix, tol: f64) -> Result<bool> {
    if !is_finite(m) {
        return Err(Error::NonFinite);
    }
    Ok(symplectic_defect(m)? <= tol)
}

/// `−Ω Mᵀ Ω`, which equals `M⁻¹` when `M` is symplectic.
pub fn symplectic_inverse_formula(m: &RealMatrix) -> Result<RealMatrix> {
    let modes = require_even_square(m, "matrix")?;
    let o = omega(modes);
    Ok(-(&o * m.transpose() * &o))
}

/// `T = −Ω Ŝᵀ Ω Ŝ`. Equals the identity exactly when `Ŝ` is symplectic.
pub fn twisted_gram(s_hat: &RealMatrix) -> Result<RealMatrix> {
    Ok(symplectic_inverse_formula(s_hat)? * s_hat)
}

/// A matrix verified to lie in `Sp(2m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    data: RealMatrix,
}

impl SymplecticMatrix {
    /// Validates `data` against the tolerance `tol`.
    pub fn new(data: RealMatrix, tol: f64) -> Result<Self> {
        if !is_finite(&data) {
            return Err(Error::NonFinite);
        }
        let defect = symplectic_defect(&data)?;
        if defect > tol {
            return Err(Error::NotSymplectic { defect, tol });
        }
        Ok(Self { data })
    }

    /// Validates with the default tolerance [`SYMPL_TOL`].
    pub fn try_from_matrix(data: RealMatrix) -> Result<Self> {
        Self::new(data, SYMPL_TOL)
    }

    /// Wraps a matrix that is symplectic by construction (products, inverses).
    pub(crate) fn from_matrix_unchecked(data: RealMatrix) -> Self {
        debug_assert!(data.nrows() == data.ncols() && data.nrows() % 2 == 0);
        Self { data }
    }

    pub fn identity(m: usize) -> Self {
        Self {
            data: RealMatrix::identity(2 * m, 2 * m),
        }
    }

    pub fn modes(&self) -> usize {
        self.data.nrows() / 2
    }

    pub fn as_matrix(&self) -> &RealMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> RealMatrix {
        self.data
    }

    /// `S⁻¹ = −Ω Sᵀ Ω`.
    pub fn inverse(&self) -> Self {
        let o = omega(self.modes());
        Self {
            data: -(&o * self.data.transpose() * &o),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            data: self.data.transpose(),
        }
    }

    /// `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.modes() != other.modes() {
            return Err(Error::dimension(format!(
                "cannot compose symplectic matrices on {} and {} modes",
                self.modes(),
                other.modes()
            )));
        }
        Ok(Self {
            data: &self.data * &other.data,
        })
    }

    /// `self ⊕ other`, acting on the concatenated register.
    pub fn direct_sum(&self, other: &Self) -> Self {
        Self {
            data: linalg::direct_sum(&self.data, &other.data),
        }
    }

    pub fn operator_norm(&self) -> f64 {
        operator_norm(&self.data)
    }

    pub fn defect(&self) -> f64 {
        operator_norm(&(self.data.transpose() * omega(self.modes()) * &self.data - omega(self.modes())))
    }
}

/// Projects a noisy estimate `Ŝ` onto `Sp(2m)` via `S̃ = Ŝ (√T)⁻¹` with
/// `T = −ΩŜᵀΩŜ`.
///
/// The correction multiplies from the right: `S̃ᵀΩS̃ = Q⁻ᵀ ŜᵀΩŜ Q⁻¹ = Ω`
/// because `Qᵀ = Ω Q Ω⁻¹`. The same matrix is `Q'⁻¹ Ŝ` with
/// `Q' = √(−Ŝ Ω Ŝᵀ Ω)`; `Q⁻¹ Ŝ` with the `T` above is not symplectic in general.
///
/// Requires `‖T − 1‖∞ < 1/2`. Given `‖Ŝ − S‖∞ ≤ ε` for a symplectic `S`
/// with `‖S‖∞ ≤ z` and `(2z + 1)ε < 1/2`, the output satisfies
/// `‖S̃ − S‖∞ ≤ 9z²ε`.
pub fn regularize(s_hat: &RealMatrix) -> Result<SymplecticMatrix> {
    Ok(regularize_detailed(s_hat)?.s_tilde)
}

/// Intermediate quantities of [`regularize`].
#[derive(Debug, Clone)]
pub struct Regularization {
    pub s_tilde: SymplecticMatrix,
    /// `‖T − 1‖∞`.
    pub t_deviation: f64,
    /// `Q = √T`.
    pub sqrt_t: RealMatrix,
}

pub fn regularize_detailed(s_hat: &RealMatrix) -> Result<Regularization> {
    if !is_finite(s_hat) {
        return Err(Error::NonFinite);
    }
    let t = twisted_gram(s_hat)?;
    let t_deviation = linalg::distance_from_identity(&t);
    if !(t_deviation < 0.5) {
        return Err(Error::RegularizationDomain {
            deviation: t_deviation,
        });
    }
    let q = principal_sqrt(&t, SqrtConfig::default().tol)?;
    // S̃ = Ŝ Q⁻¹, computed as (Qᵀ \ Ŝᵀ)ᵀ.
    let s_tilde = q
        .transpose()
        .lu()
        .solve(&s_hat.transpose())
        .ok_or_else(|| Error::Numeric("square root of T is singular".into()))?
        .transpose();
    let s_tilde = SymplecticMatrix::new(s_tilde, SYMPL_TOL)?;
    Ok(Regularization {
        s_tilde,
        t_deviation,
        sqrt_t: q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RealVector;
    use alloc::vec;
    use proptest::prelude::*;

    fn perturb(s: &RealMatrix, eps: f64, seed: u64) -> RealMatrix {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        let n = s.nrows();
        let e = RealMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
        let scale = eps / operator_norm(&e);
        s + e * scale
    }

    #[test]
    fn omega_squares_to_minus_identity() {
        let o = omega(3);
        assert_eq!(&o * &o, -RealMatrix::identity(6, 6));
    }

    #[test]
    fn rejects_non_symplectic() {
        let m = RealMatrix::from_diagonal(&RealVector::from_vec(vec![2.0, 2.0]));
        assert!(matches!(
            SymplecticMatrix::try_from_matrix(m),
            Err(Error::NotSymplectic { .. })
        ));
        let odd = RealMatrix::identity(3, 3);
        assert!(matches!(is_symplectic(&odd, 1e-10), Err(Error::Dimension(_))));
    }

    #[test]
    fn regularize_fixes_symplectic_input() {
        let s = random_symplectic(2, 3.0, 11).unwrap();
        let r = regularize(s.as_matrix()).unwrap();
        assert!(operator_norm(&(r.as_matrix() - s.as_matrix())) < 1e-10);
    }

    #[test]
    fn regularize_rejects_far_input() {
        let s = RealMatrix::identity(2, 2) * 2.0;
        assert!(matches!(
            regularize(&s),
            Err(Error::RegularizationDomain { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn inverse_formula_inverts(m in 1usize..4, z in 1.0f64..5.0, seed in any::<u64>()) {
            let s = random_symplectic(m, z, seed).unwrap();
            let prod = s.as_matrix() * s.inverse().as_matrix();
            prop_assert!(linalg::distance_from_identity(&prod) < 1e-10 * z * z);
        }

        #[test]
        fn regularize_meets_guarantee(
            m in 1usize..4,
            z in 1.0f64..4.0,
            frac in 0.01f64..0.99,
            seed in any::<u64>(),
        ) {
            let s = random_symplectic(m, z, seed).unwrap();
            let eps = frac * 0.5 / (2.0 * z + 1.0);
            let s_hat = perturb(s.as_matrix(), eps, seed ^ 0x5a5a);
            let s_tilde = regularize(&s_hat).unwrap();
            prop_assert!(s_tilde.defect() <= SYMPL_TOL);
            prop_assert!(operator_norm(&(s_tilde.as_matrix() - s.as_matrix())) <= 9.0 * z * z * eps);
        }
    }
}
