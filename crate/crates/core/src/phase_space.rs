//! Gaussian states, Gaussian unitaries and the moment bookkeeping of the
//! two-mode-squeezed probe used by the displacement learner.

use alloc::format;
use alloc::string::ToString;

use num_traits::Float;

use crate::linalg::{
    self, concat, direct_sum, is_finite, max_abs, min_eigenvalue, operator_norm, RealMatrix,
    RealVector,
};
use crate::symplectic::{omega, pauli_z_block, SymplecticMatrix};
use crate::{Error, Result};

/// Relative tolerance on covariance symmetry.
const SYMMETRY_TOL: f64 = 1e-10;
/// Relative slack on the uncertainty relation `V + iΩ ⪰ 0`.
const UNCERTAINTY_TOL: f64 = 1e-8;

/// An `n`-mode Gaussian state given by its first two moments.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    n: usize,
    mean: RealVector,
    cov: RealMatrix,
}

impl GaussianState {
    /// Validates dimensions, symmetry and the uncertainty relation.
    pub fn new(mean: RealVector, cov: RealMatrix) -> Result<Self> {
        let state = Self::from_parts(mean, cov)?;
        state.validate()?;
        Ok(state)
    }

    /// Checks dimensions only. Useful for intermediate objects whose
    /// physicality follows from construction.
    pub fn from_parts(mean: RealVector, cov: RealMatrix) -> Result<Self> {
        let d = mean.len();
        if d == 0 || d % 2 != 0 {
            return Err(Error::dimension(format!(
                "mean must have even positive length, got {d}"
            )));
        }
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::dimension(format!(
                "covariance is {}x{}, mean has length {d}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if !mean.iter().all(|x| x.is_finite()) || !is_finite(&cov) {
            return Err(Error::NonFinite);
        }
        Ok(Self { n: d / 2, mean, cov })
    }

    pub fn validate(&self) -> Result<()> {
        let scale = max_abs(&self.cov).max(1.0);
        let asym = max_abs(&(&self.cov - self.cov.transpose()));
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::InvalidState(format!(
                "covariance asymmetry {asym:e} exceeds {:e}",
                SYMMETRY_TOL * scale
            )));
        }
        // V + iΩ ⪰ 0  ⇔  [[V, -Ω], [Ω, V]] ⪰ 0.
        let om = omega(self.n);
        let d = 2 * self.n;
        let sym = linalg::symmetrize(&self.cov);
        let mut embed = RealMatrix::zeros(2 * d, 2 * d);
        embed.view_mut((0, 0), (d, d)).copy_from(&sym);
        embed.view_mut((d, d), (d, d)).copy_from(&sym);
        embed.view_mut((0, d), (d, d)).copy_from(&(-&om));
        embed.view_mut((d, 0), (d, d)).copy_from(&om);
        let lowest = min_eigenvalue(&embed);
        let slack = UNCERTAINTY_TOL * operator_norm(&sym).max(1.0);
        if lowest < -slack {
            return Err(Error::InvalidState(format!(
                "uncertainty relation violated: min eigenvalue {lowest:e}"
            )));
        }
        Ok(())
    }

    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> &RealVector {
        &self.mean
    }

    pub fn cov(&self) -> &RealMatrix {
        &self.cov
    }

    pub fn into_parts(self) -> (RealVector, RealMatrix) {
        (self.mean, self.cov)
    }

    /// `ρ ⊗ σ` with `self` first.
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        GaussianState {
            n: self.n + other.n,
            mean: concat(&self.mean, &other.mean),
            cov: direct_sum(&self.cov, &other.cov),
        }
    }

    /// Mean photon number `tr(V − 1)/4 + ‖m‖²/2`.
    pub fn mean_photon_number(&self) -> f64 {
        (self.cov.trace() - 2.0 * self.n as f64) / 4.0 + self.mean.norm_squared() / 2.0
    }
}

pub fn mean_photon_number(state: &GaussianState) -> f64 {
    state.mean_photon_number()
}

pub fn vacuum(n: usize) -> GaussianState {
    GaussianState {
        n,
        mean: RealVector::zeros(2 * n),
        cov: RealMatrix::identity(2 * n, 2 * n),
    }
}

/// Coherent state with mean `mean` and vacuum covariance.
pub fn coherent(mean: RealVector) -> Result<GaussianState> {
    let d = mean.len();
    GaussianState::from_parts(mean, RealMatrix::identity(d, d))
}

/// Which quadrature a single-mode squeezed probe has its small variance in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SqueezeOrientation {
    /// Covariance `⊕ diag(z, 1/z)`: momentum is squeezed.
    Momentum,
    /// Covariance `⊕ diag(1/z, z)`: position is squeezed.
    Position,
}

/// Product of `n` identical single-mode squeezed vacua with squeezing `z ≥ 1`.
pub fn single_mode_squeezed(z: f64, n: usize, orientation: SqueezeOrientation) -> Result<GaussianState> {
    if !(z >= 1.0 && z.is_finite()) {
        return Err(Error::domain("squeezing", format!("need z >= 1, got {z}")));
    }
    let (a, b) = match orientation {
        SqueezeOrientation::Momentum => (z, 1.0 / z),
        SqueezeOrientation::Position => (1.0 / z, z),
    };
    let mut cov = RealMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        cov[(2 * j, 2 * j)] = a;
        cov[(2 * j + 1, 2 * j + 1)] = b;
    }
    GaussianState::from_parts(RealVector::zeros(2 * n), cov)
}

/// `S_ν = [[√ν 1, √(ν−1) Z], [√(ν−1) Z, √ν 1]]` on `(signal | ancilla)`.
pub fn tmsv_symplectic(nu: f64, m: usize) -> Result<SymplecticMatrix> {
    if !(nu >= 1.0 && nu.is_finite()) {
        return Err(Error::domain("nu", format!("need nu >= 1, got {nu}")));
    }
    if m == 0 {
        return Err(Error::dimension("mode count must be positive"));
    }
    let d = 2 * m;
    let a = Float::sqrt(nu);
    let b = Float::sqrt(nu - 1.0);
    let z = pauli_z_block(m);
    let mut s = RealMatrix::zeros(2 * d, 2 * d);
    s.view_mut((0, 0), (d, d)).copy_from(&(RealMatrix::identity(d, d) * a));
    s.view_mut((d, d), (d, d)).copy_from(&(RealMatrix::identity(d, d) * a));
    s.view_mut((0, d), (d, d)).copy_from(&(&z * b));
    s.view_mut((d, 0), (d, d)).copy_from(&(&z * b));
    Ok(SymplecticMatrix::from_matrix_unchecked(s))
}

/// `m` two-mode squeezed vacua, covariance `S_ν S_νᵀ`, mean photon number `2m(ν−1)`.
pub fn tmsv(nu: f64, m: usize) -> Result<GaussianState> {
    let s = tmsv_symplectic(nu, m)?;
    let cov = linalg::symmetrize(&(s.as_matrix() * s.as_matrix().transpose()));
    GaussianState::from_parts(RealVector::zeros(4 * m), cov)
}

/// A Gaussian unitary `G_{r,S} = D_r U_S` acting as `(m, V) ↦ (S m + r, S V Sᵀ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianUnitary {
    r: RealVector,
    s: SymplecticMatrix,
}

impl GaussianUnitary {
    pub fn new(r: RealVector, s: SymplecticMatrix) -> Result<Self> {
        if r.len() != s.as_matrix().nrows() {
            return Err(Error::dimension(format!(
                "displacement has length {}, symplectic matrix acts on {} quadratures",
                r.len(),
                s.as_matrix().nrows()
            )));
        }
        if !r.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { r, s })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            r: RealVector::zeros(2 * m),
            s: SymplecticMatrix::identity(m),
        }
    }

    pub fn passive(s: SymplecticMatrix) -> Self {
        let d = s.as_matrix().nrows();
        Self {
            r: RealVector::zeros(d),
            s,
        }
    }

    pub fn modes(&self) -> usize {
        self.s.modes()
    }

    pub fn displacement(&self) -> &RealVector {
        &self.r
    }

    pub fn symplectic(&self) -> &SymplecticMatrix {
        &self.s
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &GaussianUnitary) -> Result<Self> {
        let s = self.s.compose(&first.s)?;
        let r = &self.r + self.s.as_matrix() * &first.r;
        Ok(Self { r, s })
    }

    /// `G⁻¹ = G_{−S⁻¹r, S⁻¹}`.
    pub fn inverse(&self) -> Self {
        let s_inv = self.s.inverse();
        let r = -(s_inv.as_matrix() * &self.r);
        Self { r, s: s_inv }
    }

    /// `G ⊗ 1` on an `n`-mode register whose first `m` modes carry `G`.
    pub fn embed(&self, n: usize) -> Result<Self> {
        embed_on_first_modes(self, n)
    }
}

/// Extends `g` by the identity on modes `m..n`.
pub fn embed_on_first_modes(g: &GaussianUnitary, n: usize) -> Result<GaussianUnitary> {
    let m = g.modes();
    if n < m {
        return Err(Error::dimension(format!(
            "cannot embed a {m}-mode unitary into {n} modes"
        )));
    }
    let rest = SymplecticMatrix::identity(n - m);
    let s = if n == m { g.s.clone() } else { g.s.direct_sum(&rest) };
    let r = concat(&g.r, &RealVector::zeros(2 * (n - m)));
    Ok(GaussianUnitary { r, s })
}

/// `(m, V) ↦ (S m + r, S V Sᵀ)`. The covariance is re-symmetrized.
pub fn apply_unitary(g: &GaussianUnitary, state: &GaussianState) -> Result<GaussianState> {
    if g.modes() != state.n {
        return Err(Error::dimension(format!(
            "unitary acts on {} modes, state has {}",
            g.modes(),
            state.n
        )));
    }
    let s = g.s.as_matrix();
    let mean = s * &state.mean + &g.r;
    let cov = linalg::symmetrize(&(s * &state.cov * s.transpose()));
    GaussianState::from_parts(mean, cov)
}

/// First and second moments of the displacement-learning probe
/// `(U_{S̃}⁻¹ ⊗ 1) (G ⊗ 1) |tmsv_ν⟩`, split into signal/ancilla blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolMoments {
    /// Mean of the signal block, `√ν r`.
    pub mean_signal: RealVector,
    /// Mean of the ancilla block, `−√(ν−1) Z r`.
    pub mean_ancilla: RealVector,
    /// Signal-signal covariance block.
    pub a: RealMatrix,
    /// Ancilla-ancilla covariance block.
    pub b: RealMatrix,
    /// Signal-ancilla covariance block.
    pub c: RealMatrix,
}

impl ProtocolMoments {
    pub fn mean(&self) -> RealVector {
        concat(&self.mean_signal, &self.mean_ancilla)
    }

    pub fn covariance(&self) -> RealMatrix {
        let d = self.a.nrows();
        let mut v = RealMatrix::zeros(2 * d, 2 * d);
        v.view_mut((0, 0), (d, d)).copy_from(&self.a);
        v.view_mut((d, d), (d, d)).copy_from(&self.b);
        v.view_mut((0, d), (d, d)).copy_from(&self.c);
        v.view_mut((d, 0), (d, d)).copy_from(&self.c.transpose());
        v
    }
}

/// Moments of the displacement probe after the final `S_ν⁻¹` on both registers.
///
/// With `W = S_ν⁻¹ (S S̃⁻¹ ⊕ 1) S_ν`, the covariance is `W Wᵀ`; the mean is
/// `S_ν⁻¹ (r ⊕ 0)`, i.e. `(√ν r, −√(ν−1) Z r)`, independent of `S̃`.
pub fn tmsv_protocol_moments(
    r: &RealVector,
    s: &SymplecticMatrix,
    s_tilde: &SymplecticMatrix,
    nu: f64,
) -> Result<ProtocolMoments> {
    let m = s.modes();
    if s_tilde.modes() != m || r.len() != 2 * m {
        return Err(Error::dimension(
            "displacement, S and S~ must act on the same modes".to_string(),
        ));
    }
    let s_nu = tmsv_symplectic(nu, m)?;
    let s_nu_inv = s_nu.inverse();
    let mismatch = s.as_matrix() * s_tilde.inverse().as_matrix();
    let d = 2 * m;
    let inner = direct_sum(&mismatch, &RealMatrix::identity(d, d));
    let w = s_nu_inv.as_matrix() * inner * s_nu.as_matrix();
    let v = linalg::symmetrize(&(&w * w.transpose()));
    let mean = s_nu_inv.as_matrix() * concat(r, &RealVector::zeros(d));
    Ok(ProtocolMoments {
        mean_signal: mean.rows(0, d).into_owned(),
        mean_ancilla: mean.rows(d, d).into_owned(),
        a: v.view((0, 0), (d, d)).into_owned(),
        b: v.view((d, d), (d, d)).into_owned(),
        c: v.view((0, d), (d, d)).into_owned(),
    })
}

/// Which coefficient family to use for the closed-form probe blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentCoefficients {
    /// The blocks of `W Wᵀ` expanded exactly:
    /// `A = 1 + ν(Δ+Δᵀ) + ν(2ν−1)ΔΔᵀ`,
    /// `B = Z[1 − (ν−1)(Δ+Δᵀ) + (ν−1)(2ν−1)ΔΔᵀ]Z`.
    Expanded,
    /// `(2ν+1)` and `(ν+1)(2ν+1)` on the `ΔΔᵀ` terms and no `Z` conjugation
    /// in `B`. Kept to quantify how far this variant is from the exact moments.
    Alternate,
}

/// Closed-form `(A, B, C)` as polynomials in `Δ = S S̃⁻¹ − 1`.
pub fn protocol_blocks_closed_form(
    delta: &RealMatrix,
    nu: f64,
    coefficients: MomentCoefficients,
) -> (RealMatrix, RealMatrix, RealMatrix) {
    let d = delta.nrows();
    let id = RealMatrix::identity(d, d);
    let z = pauli_z_block(d / 2);
    let sym = delta + delta.transpose();
    let ddt = delta * delta.transpose();
    let root = Float::sqrt(nu * (nu - 1.0));
    let (ka, kb) = match coefficients {
        MomentCoefficients::Expanded => (nu * (2.0 * nu - 1.0), (nu - 1.0) * (2.0 * nu - 1.0)),
        MomentCoefficients::Alternate => (nu * (2.0 * nu + 1.0), (nu + 1.0) * (2.0 * nu + 1.0)),
    };
    let a = &id + &sym * nu + &ddt * ka;
    let b_inner = &id - &sym * (nu - 1.0) + &ddt * kb;
    let b = match coefficients {
        MomentCoefficients::Expanded => &z * b_inner * &z,
        MomentCoefficients::Alternate => b_inner,
    };
    let c = (-(&ddt * ((2.0 * nu - 1.0) * root)) - delta.transpose() * root + delta * root) * z;
    (a, b, c)
}

/// `S S̃⁻¹ − 1`.
pub fn mismatch_delta(s: &SymplecticMatrix, s_tilde: &SymplecticMatrix) -> RealMatrix {
    let d = s.as_matrix().nrows();
    s.as_matrix() * s_tilde.inverse().as_matrix() - RealMatrix::identity(d, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::random_symplectic;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn vacuum_has_no_photons() {
        let v = vacuum(3);
        assert_eq!(v.mean_photon_number(), 0.0);
        assert!(v.validate().is_ok());
    }

    #[test]
    fn tmsv_photon_number() {
        for (nu, m) in [(1.0, 1), (2.5, 2), (100.0, 3)] {
            let st = tmsv(nu, m).unwrap();
            assert!((st.mean_photon_number() - 2.0 * m as f64 * (nu - 1.0)).abs() < 1e-9 * nu);
            st.validate().unwrap();
        }
    }

    #[test]
    fn squeezed_orientation() {
        let st = single_mode_squeezed(4.0, 1, SqueezeOrientation::Momentum).unwrap();
        assert_eq!(st.cov()[(1, 1)], 0.25);
        let st = single_mode_squeezed(4.0, 1, SqueezeOrientation::Position).unwrap();
        assert_eq!(st.cov()[(0, 0)], 0.25);
        assert!(single_mode_squeezed(0.5, 1, SqueezeOrientation::Position).is_err());
    }

    #[test]
    fn rejects_unphysical_covariance() {
        let cov = RealMatrix::from_diagonal(&RealVector::from_vec(vec![0.5, 0.5]));
        assert!(matches!(
            GaussianState::new(RealVector::zeros(2), cov),
            Err(Error::InvalidState(_))
        ));
        let asym = RealMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(GaussianState::new(RealVector::zeros(2), asym).is_err());
        assert!(GaussianState::new(RealVector::zeros(3), RealMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn protocol_mean_is_scaled_displacement() {
        let s = random_symplectic(2, 2.0, 5).unwrap();
        let r = RealVector::from_vec(vec![0.3, -0.2, 0.7, 0.1]);
        let nu = 9.0;
        let mom = tmsv_protocol_moments(&r, &s, &s, nu).unwrap();
        assert!((&mom.mean_signal - &r * 3.0).norm() < 1e-12);
        let z = pauli_z_block(2);
        assert!((&mom.mean_ancilla + z * &r * Float::sqrt(8.0)).norm() < 1e-12);
        assert!(linalg::distance_from_identity(&mom.covariance()) < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn apply_preserves_physicality(m in 1usize..4, z in 1.0f64..4.0, seed in any::<u64>(), nu in 1.0f64..20.0) {
            let s = random_symplectic(m, z, seed).unwrap();
            let g = GaussianUnitary::new(RealVector::from_element(2 * m, 0.3), s).unwrap();
            let probe = tmsv(nu, m).unwrap();
            let out = apply_unitary(&g.embed(2 * m).unwrap(), &probe).unwrap();
            prop_assert!(out.validate().is_ok());
            let back = apply_unitary(&g.inverse().embed(2 * m).unwrap(), &out).unwrap();
            prop_assert!(max_abs(&(back.cov() - probe.cov())) <= 1e-9 * nu * z.powi(4));
        }

        #[test]
        fn closed_form_matches_product(m in 1usize..4, z in 1.0f64..3.0, seed in any::<u64>(), nu in 1.0f64..50.0, eps in 0.0f64..0.05) {
            let s = random_symplectic(m, z, seed).unwrap();
            let s_tilde = crate::symplectic::random_symplectic(m, 1.0 + eps, seed ^ 1).unwrap().compose(&s).unwrap();
            let mom = tmsv_protocol_moments(&RealVector::zeros(2 * m), &s, &s_tilde, nu).unwrap();
            let delta = mismatch_delta(&s, &s_tilde);
            let (a, b, c) = protocol_blocks_closed_form(&delta, nu, MomentCoefficients::Expanded);
            let scale = nu * nu;
            prop_assert!(max_abs(&(a - &mom.a)) <= 1e-10 * scale);
            prop_assert!(max_abs(&(b - &mom.b)) <= 1e-10 * scale);
            prop_assert!(max_abs(&(c - &mom.c)) <= 1e-10 * scale);
        }
    }
}
