//! Energy-constrained diamond-distance bounds, shot-count formulas and the
//! end-to-end query planner.
//!
//! Every function here is a deterministic closed form. Bound values are
//! returned unclamped; [`clamp_unit`] caps them at 1 for presentation.

use alloc::format;

use num_traits::Float;

use crate::linalg::{distance_from_identity, RealMatrix, RealVector};
use crate::symplectic::SymplecticMatrix;
use crate::{Error, Result};

const SQRT_2: f64 = core::f64::consts::SQRT_2;

/// Bound on `½‖D_{r1} − D_{r2}‖⋄,n̄`:
/// `sin(min{(√n̄ + √(n̄+1))/√2 · ‖r1 − r2‖₂, π/2})`.
pub fn displacement_diamond_bound(r1: &RealVector, r2: &RealVector, n_bar: f64) -> Result<f64> {
    if r1.len() != r2.len() {
        return Err(Error::dimension(format!(
            "displacements have lengths {} and {}",
            r1.len(),
            r2.len()
        )));
    }
    if !(n_bar >= 0.0) {
        return Err(Error::domain("n_bar", format!("need n_bar >= 0, got {n_bar}")));
    }
    Ok(displacement_term((r1 - r2).norm(), n_bar))
}

fn displacement_term(dist: f64, n_bar: f64) -> f64 {
    let slope = (Float::sqrt(n_bar) + Float::sqrt(n_bar + 1.0)) / SQRT_2;
    Float::sin((slope * dist).min(core::f64::consts::FRAC_PI_2))
}

/// `g(x) = √(π/(x+1)) + √(2x)`.
pub fn g(x: f64) -> f64 {
    Float::sqrt(core::f64::consts::PI / (x + 1.0)) + Float::sqrt(2.0 * x)
}

/// Bound on `½‖U_{S1} − U_{S2}‖⋄,n̄`:
/// `√((√6 + √10 + 5√(2m))(n̄+1)) · g(‖S2⁻¹S1‖∞) · √‖S2⁻¹S1 − 1‖₂`.
pub fn symplectic_diamond_bound(s1: &SymplecticMatrix, s2: &SymplecticMatrix, n_bar: f64) -> Result<f64> {
    if s1.modes() != s2.modes() {
        return Err(Error::dimension(format!(
            "symplectic matrices act on {} and {} modes",
            s1.modes(),
            s2.modes()
        )));
    }
    if !(n_bar >= 0.0) {
        return Err(Error::domain("n_bar", format!("need n_bar >= 0, got {n_bar}")));
    }
    if s1.as_matrix() == s2.as_matrix() {
        return Ok(0.0);
    }
    let m = s1.modes() as f64;
    let rel = s2.inverse().as_matrix() * s1.as_matrix();
    let d = rel.nrows();
    let frob = (&rel - RealMatrix::identity(d, d)).norm();
    let prefactor = Float::sqrt((Float::sqrt(6.0) + Float::sqrt(10.0) + 5.0 * Float::sqrt(2.0 * m)) * (n_bar + 1.0));
    Ok(prefactor * g(crate::linalg::operator_norm(&rel)) * Float::sqrt(frob))
}

/// Bound on `½‖G̃ − G‖⋄,n̄` from `ε_S = ‖S̃ − S‖∞` and `ε_r = ‖r̃ − r‖₂`:
/// `6√(9√(2m)(n̄+1)) √(z√(2m) ε_S) + √2 √(z²n̄+1) ε_r`.
///
/// The leading constant is 6: the symplectic chain bounds the full norm
/// `‖U_{S̃} − U_S‖⋄,n̄` by `12√(…)√(…)`, so its half-norm share is `6√(…)√(…)`.
/// With this constant the budgets of [`QueryPlan`] give exactly `ε/2 + ε/2`.
/// Requires `z ε_S < 1/2`.
pub fn combined_diamond_bound(eps_s: f64, eps_r: f64, m: usize, z: f64, n_bar: f64) -> Result<f64> {
    if !(eps_s >= 0.0 && eps_r >= 0.0 && n_bar >= 0.0 && z >= 1.0) || m == 0 {
        return Err(Error::BoundDomain(format!(
            "need eps_S, eps_r, n_bar >= 0, z >= 1, m >= 1 (got {eps_s}, {eps_r}, {n_bar}, {z}, {m})"
        )));
    }
    if !(z * eps_s < 0.5) {
        return Err(Error::BoundDomain(format!(
            "z * eps_S = {} must be below 1/2",
            z * eps_s
        )));
    }
    let r2m = Float::sqrt(2.0 * m as f64);
    let sym = 6.0 * Float::sqrt(9.0 * r2m * (n_bar + 1.0)) * Float::sqrt(z * r2m * eps_s);
    let disp = SQRT_2 * Float::sqrt(z * z * n_bar + 1.0) * eps_r;
    Ok(sym + disp)
}

/// The two terms bounded inside [`combined_diamond_bound`], evaluated directly
/// on the matrices: `symplectic_diamond_bound(S, S̃, n̄)` plus
/// `displacement_diamond_bound(r̃, r, z²n̄)`.
pub fn derivation_path_bound(
    s: &SymplecticMatrix,
    s_tilde: &SymplecticMatrix,
    r: &RealVector,
    r_tilde: &RealVector,
    z: f64,
    n_bar: f64,
) -> Result<f64> {
    Ok(symplectic_diamond_bound(s, s_tilde, n_bar)? + displacement_diamond_bound(r_tilde, r, z * z * n_bar)?)
}

/// `‖S̃⁻¹S − 1‖∞ ≤ 2zε_S`, valid for `z ε_S < 1/2`.
pub fn additive_to_multiplicative(eps_s: f64, z: f64) -> Result<f64> {
    if !(eps_s >= 0.0 && z >= 1.0) {
        return Err(Error::BoundDomain(format!(
            "need eps_S >= 0 and z >= 1, got {eps_s} and {z}"
        )));
    }
    if !(z * eps_s < 0.5) {
        return Err(Error::BoundDomain(format!(
            "z * eps_S = {} must be below 1/2",
            z * eps_s
        )));
    }
    Ok(2.0 * z * eps_s)
}

/// Measured `‖S̃⁻¹S − 1‖∞`.
pub fn multiplicative_error(s: &SymplecticMatrix, s_tilde: &SymplecticMatrix) -> f64 {
    distance_from_identity(&(s_tilde.inverse().as_matrix() * s.as_matrix()))
}

pub fn clamp_unit(bound: f64) -> f64 {
    bound.min(1.0)
}

fn ln(x: f64) -> f64 {
    Float::ln(x)
}

fn sqrt(x: f64) -> f64 {
    Float::sqrt(x)
}

fn square(x: f64) -> f64 {
    x * x
}

/// Shot count for the vacuum-shared estimator to reach `‖Ŝ − S‖∞ ≤ ε` w.p. `1 − δ`:
/// `4m‖S‖²(√(2m) + √(2 log(2m/δ)))² / (η²ε²)`.
pub fn ns_vacuum_shared(m: usize, s_norm: f64, eta: f64, eps: f64, delta: f64) -> f64 {
    let m = m as f64;
    4.0 * m * square(s_norm) * square(sqrt(2.0 * m) + sqrt(2.0 * ln(2.0 * m / delta))) / square(eta * eps)
}

/// Shot count per probe for the symmetric estimator:
/// `‖S‖²(2√(2m) + √(2 log(1/δ)))² / (2η²ε²)`.
pub fn ns_symmetric(m: usize, s_norm: f64, eta: f64, eps: f64, delta: f64) -> f64 {
    let m = m as f64;
    square(s_norm) * square(2.0 * sqrt(2.0 * m) + sqrt(2.0 * ln(1.0 / delta))) / (2.0 * square(eta * eps))
}

/// Vacuum-shared shot count for `‖S̃ − S‖∞ ≤ τ` after regularization:
/// `324 m z⁶ (√(2m) + √(2 log(2m/δ)))² / (η²τ²)`.
pub fn ns_regularized_vacuum_shared(m: usize, z: f64, eta: f64, tau: f64, delta: f64) -> f64 {
    let mf = m as f64;
    324.0 * mf * z.powi(6) * square(sqrt(2.0 * mf) + sqrt(2.0 * ln(2.0 * mf / delta))) / square(eta * tau)
}

/// Symmetric-probe shot count after regularization:
/// `81 z⁶ (2√(2m) + √(2 log(1/δ)))² / (2η²τ²)`.
pub fn ns_regularized_symmetric(m: usize, z: f64, eta: f64, tau: f64, delta: f64) -> f64 {
    let mf = m as f64;
    81.0 * z.powi(6) * square(2.0 * sqrt(2.0 * mf) + sqrt(2.0 * ln(1.0 / delta))) / (2.0 * square(eta * tau))
}

/// TMSV displacement learner:
/// `(1 + ν‖Δ‖ + 1.5(ν‖Δ‖)²)(√(2m) + √(2 log(1/δ)))² / (νε²)`.
pub fn nr_tmsv(m: usize, nu: f64, delta_norm: f64, eps: f64, delta: f64) -> f64 {
    let mf = m as f64;
    let x = nu * delta_norm;
    (1.0 + x + 1.5 * x * x) * square(sqrt(2.0 * mf) + sqrt(2.0 * ln(1.0 / delta))) / (nu * eps * eps)
}

/// Single-mode-squeezed displacement learner (per quadrature pass):
/// `2(√(2m) + √(2 log(2/δ)))²/ε² · ((1 + ‖Δ‖)²/z_in + z_in‖Δ‖²)`.
pub fn nr_single_mode(m: usize, z_in: f64, delta_norm: f64, eps: f64, delta: f64) -> f64 {
    let mf = m as f64;
    2.0 * square(sqrt(2.0 * mf) + sqrt(2.0 * ln(2.0 / delta))) / (eps * eps)
        * single_mode_noise(z_in, delta_norm)
}

/// `(1 + ‖Δ‖)²/z_in + z_in‖Δ‖²`, twice the per-pass covariance norm bound.
pub fn single_mode_noise(z_in: f64, delta_norm: f64) -> f64 {
    square(1.0 + delta_norm) / z_in + z_in * square(delta_norm)
}

/// End-to-end displacement shot count with `‖Δ‖` replaced by `2zε_S`:
/// `(1 + 2νzε_S + 6(νzε_S)²)(√(2m) + √(log(2/δ)))² / (ν ε_r²)`.
pub fn nr_end_to_end(m: usize, z: f64, nu: f64, eps_s: f64, eps_r: f64, delta: f64) -> f64 {
    let mf = m as f64;
    let x = nu * z * eps_s;
    (1.0 + 2.0 * x + 6.0 * x * x) * square(sqrt(2.0 * mf) + sqrt(ln(2.0 / delta))) / (nu * eps_r * eps_r)
}

/// `⌈bound⌉`, at least 1.
pub fn shots(bound: f64) -> Result<u64> {
    if !bound.is_finite() || bound < 0.0 {
        return Err(Error::Planning(format!("shot bound {bound} is not a finite non-negative number")));
    }
    let c = Float::ceil(bound);
    if c >= 9.0e18 {
        return Err(Error::Planning(format!("shot bound {bound:e} overflows the query counter")));
    }
    Ok((c as u64).max(1))
}

/// Symplectic-stage design.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SymplecticVariant {
    /// Vacuum plus `2m` coherent probes `η e_i`: `(2m+1) N_S` queries.
    VacuumShared,
    /// Probes `±η e_i`: `4m N_S` queries.
    Symmetric,
}

/// Displacement-stage design.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DisplacementVariant {
    /// Two-mode squeezed probe with heterodyne: `N_r` queries.
    Tmsv,
    /// Single-mode squeezed probes with homodyne: `2 N_r` queries.
    SingleMode,
}

impl SymplecticVariant {
    pub fn queries(self, m: usize, n_s: u64) -> u64 {
        match self {
            SymplecticVariant::VacuumShared => (2 * m as u64 + 1) * n_s,
            SymplecticVariant::Symmetric => 4 * m as u64 * n_s,
        }
    }
}

impl DisplacementVariant {
    pub fn queries(self, n_r: u64) -> u64 {
        match self {
            DisplacementVariant::Tmsv => n_r,
            DisplacementVariant::SingleMode => 2 * n_r,
        }
    }
}

/// Problem parameters for [`plan_queries`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Problem {
    pub m: usize,
    pub z: f64,
    pub n_bar: f64,
    pub n_bar_in: f64,
    pub epsilon: f64,
    pub delta: f64,
}

/// Protocol parameters and shot counts for one end-to-end run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QueryPlan {
    pub problem: Problem,
    pub sym_variant: SymplecticVariant,
    pub disp_variant: DisplacementVariant,
    pub eta: f64,
    pub nu: f64,
    /// Squeezing of the single-mode probes; `None` for the TMSV variant.
    pub z_in: Option<f64>,
    pub eps_s: f64,
    pub eps_r: f64,
    /// Unrounded shot-count bounds.
    pub n_s_bound: f64,
    pub n_r_bound: f64,
    pub n_s: u64,
    pub n_r: u64,
    pub n_tot: u64,
}

impl QueryPlan {
    pub fn symplectic_queries(&self) -> u64 {
        self.sym_variant.queries(self.problem.m, self.n_s)
    }

    pub fn displacement_queries(&self) -> u64 {
        self.disp_variant.queries(self.n_r)
    }

    /// Same plan with explicit shot counts; `n_tot` is recomputed.
    pub fn with_shots(&self, n_s: u64, n_r: u64) -> QueryPlan {
        let mut p = self.clone();
        p.n_s = n_s.max(1);
        p.n_r = n_r.max(1);
        p.n_tot = p.symplectic_queries() + p.displacement_queries();
        p
    }
}

/// Largest `z_in` whose `m` single-mode squeezed vacua carry at most `n_bar_in`
/// photons, i.e. the larger root of `m(z + 1/z − 2)/4 = n_bar_in`.
pub fn single_mode_energy_cap(m: usize, n_bar_in: f64) -> f64 {
    let c = 4.0 * n_bar_in / m as f64 + 2.0;
    (c + sqrt(c * c - 4.0)) / 2.0
}

/// Plans an end-to-end run with `η = √n̄_in`, `ν = n̄_in^{1/4} + 1`,
/// `ε_S = ε²/(2592 m z (n̄+1)(n̄_in+1)^{1/4})` and `ε_r = ε/(2√2 √(z²n̄+1))`.
///
/// The vacuum-shared `N_S` uses the regularized 324-formula at `τ = ε_S`, the
/// symmetric `N_S` the 81-formula. The TMSV `N_r` uses the end-to-end formula;
/// the single-mode `N_r` uses the single-mode formula with `‖Δ‖ ← 2zε_S` and
/// `z_in = min(√n̄_in, energy cap)`. Requires `n̄_in ≥ (2m)^{4/3}`.
pub fn plan_queries(
    problem: Problem,
    sym_variant: SymplecticVariant,
    disp_variant: DisplacementVariant,
) -> Result<QueryPlan> {
    let Problem {
        m,
        z,
        n_bar,
        n_bar_in,
        epsilon,
        delta,
    } = problem;
    if m == 0 {
        return Err(Error::Planning("m must be positive".into()));
    }
    if !(z >= 1.0 && z.is_finite()) {
        return Err(Error::Planning(format!("need z >= 1, got {z}")));
    }
    if !(n_bar > 0.0 && n_bar.is_finite()) || !(n_bar_in > 0.0 && n_bar_in.is_finite()) {
        return Err(Error::Planning(format!(
            "photon numbers must be positive and finite, got n_bar = {n_bar}, n_bar_in = {n_bar_in}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Planning(format!(
            "epsilon and delta must lie in (0, 1), got {epsilon} and {delta}"
        )));
    }
    let mf = m as f64;
    let min_energy = Float::powf(2.0 * mf, 4.0 / 3.0);
    if n_bar_in < min_energy {
        return Err(Error::Planning(format!(
            "n_bar_in = {n_bar_in} is below (2m)^(4/3) = {min_energy}"
        )));
    }
    let eta = sqrt(n_bar_in);
    let nu = Float::powf(n_bar_in, 0.25) + 1.0;
    if nu > 1.0 + n_bar_in / (2.0 * mf) {
        return Err(Error::Planning(format!(
            "nu = {nu} exceeds 1 + n_bar_in/(2m) = {}",
            1.0 + n_bar_in / (2.0 * mf)
        )));
    }
    let eps_s = epsilon * epsilon / (2592.0 * mf * z * (n_bar + 1.0) * Float::powf(n_bar_in + 1.0, 0.25));
    let eps_r = epsilon / (2.0 * SQRT_2 * sqrt(z * z * n_bar + 1.0));

    let n_s_bound = match sym_variant {
        SymplecticVariant::VacuumShared => ns_regularized_vacuum_shared(m, z, eta, eps_s, delta),
        SymplecticVariant::Symmetric => ns_regularized_symmetric(m, z, eta, eps_s, delta),
    };
    let (n_r_bound, z_in) = match disp_variant {
        DisplacementVariant::Tmsv => (nr_end_to_end(m, z, nu, eps_s, eps_r, delta), None),
        DisplacementVariant::SingleMode => {
            let z_in = sqrt(n_bar_in).min(single_mode_energy_cap(m, n_bar_in)).max(1.0);
            let d = additive_to_multiplicative(eps_s, z)?;
            (nr_single_mode(m, z_in, d, eps_r, delta), Some(z_in))
        }
    };
    let n_s = shots(n_s_bound)?;
    let n_r = shots(n_r_bound)?;
    let sym_q = sym_variant.queries(m, n_s);
    let n_tot = sym_q
        .checked_add(disp_variant.queries(n_r))
        .ok_or_else(|| Error::Planning("total query count overflows".into()))?;
    Ok(QueryPlan {
        problem,
        sym_variant,
        disp_variant,
        eta,
        nu,
        z_in,
        eps_s,
        eps_r,
        n_s_bound,
        n_r_bound,
        n_s,
        n_r,
        n_tot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{random_symplectic, squeezing_matrix};
    use alloc::vec;
    use proptest::prelude::*;

    fn problem(m: usize, z: f64, n_bar: f64, n_bar_in: f64, epsilon: f64, delta: f64) -> Problem {
        Problem {
            m,
            z,
            n_bar,
            n_bar_in,
            epsilon,
            delta,
        }
    }

    #[test]
    fn g_anchor() {
        assert!(g(2.0) <= 4.0);
        assert!((g(2.0) - ((core::f64::consts::PI / 3.0).sqrt() + 2.0)).abs() < 1e-15);
    }

    #[test]
    fn displacement_bound_limits() {
        let r = RealVector::from_vec(vec![1.0, 2.0]);
        assert_eq!(displacement_diamond_bound(&r, &r, 1.0).unwrap(), 0.0);
        let far = RealVector::from_vec(vec![1e6, 0.0]);
        assert_eq!(displacement_diamond_bound(&far, &r, 1.0).unwrap(), 1.0);
        let a = RealVector::from_vec(vec![0.1, 0.0]);
        let b = RealVector::zeros(2);
        let want = ((1.0 + 2f64.sqrt()) / 2f64.sqrt() * 0.1).sin();
        assert!((displacement_diamond_bound(&a, &b, 1.0).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn symplectic_bound_single_mode_example() {
        let s1 = SymplecticMatrix::try_from_matrix(squeezing_matrix(&[1.1])).unwrap();
        let s2 = SymplecticMatrix::identity(1);
        let frob = ((0.1f64).powi(2) + (1.0 / 1.1 - 1.0f64).powi(2)).sqrt();
        let want = ((6f64.sqrt() + 10f64.sqrt() + 5.0 * 2f64.sqrt()) * 2.0).sqrt() * g(1.1) * frob.sqrt();
        let got = symplectic_diamond_bound(&s1, &s2, 1.0).unwrap();
        assert!((got - want).abs() < 1e-13 * want);
        assert_eq!(symplectic_diamond_bound(&s1, &s1, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn combined_bound_zero_and_domain() {
        assert_eq!(combined_diamond_bound(0.0, 0.0, 2, 2.0, 1.0).unwrap(), 0.0);
        assert!(matches!(
            combined_diamond_bound(0.3, 0.0, 2, 2.0, 1.0),
            Err(Error::BoundDomain(_))
        ));
    }

    #[test]
    fn combined_bound_two_path_value() {
        let got = combined_diamond_bound(1e-4, 1e-2, 2, 2.0, 1.0).unwrap();
        let sym = 6.0 * (9.0 * 2.0 * 2.0f64).sqrt() * (2.0 * 2.0 * 1e-4f64).sqrt();
        let disp = 2f64.sqrt() * 5f64.sqrt() * 1e-2;
        assert!((got - (sym + disp)).abs() < 1e-14);
    }

    #[test]
    fn additive_to_multiplicative_values() {
        assert_eq!(additive_to_multiplicative(0.0, 3.0).unwrap(), 0.0);
        assert!((additive_to_multiplicative(0.1, 2.0).unwrap() - 0.4).abs() < 1e-15);
        assert!(additive_to_multiplicative(0.3, 2.0).is_err());
    }

    #[test]
    fn budgets_at_equality_meet_epsilon() {
        for m in [1usize, 2, 4] {
            for z in [1.0, 2.0, 4.0] {
                for n_bar in [0.5, 1.0, 4.0] {
                    for eps in [0.1, 0.5] {
                        let eps_s = eps * eps / (2592.0 * m as f64 * z * (n_bar + 1.0));
                        let eps_r = eps / (2.0 * SQRT_2 * (z * z * n_bar + 1.0).sqrt());
                        let b = combined_diamond_bound(eps_s, eps_r, m, z, n_bar).unwrap();
                        assert!(b <= eps * (1.0 + 1e-12), "m={m} z={z} n={n_bar} eps={eps}: {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn plan_counts_match_variants() {
        let p = problem(2, 2.0, 1.0, 1e6, 0.5, 0.1);
        let a = plan_queries(p, SymplecticVariant::VacuumShared, DisplacementVariant::Tmsv).unwrap();
        assert_eq!(a.n_tot, 5 * a.n_s + a.n_r);
        let b = plan_queries(p, SymplecticVariant::Symmetric, DisplacementVariant::SingleMode).unwrap();
        assert_eq!(b.n_tot, 8 * b.n_s + 2 * b.n_r);
        assert!(b.z_in.unwrap() >= 1.0);
        assert!(a.eps_s <= 0.25 / (2592.0 * 2.0 * 2.0 * 2.0));
        assert!(a.eta <= 1e3 + 1e-9);
    }

    #[test]
    fn plan_rejects_low_energy() {
        let p = problem(4, 2.0, 1.0, 10.0, 0.5, 0.1);
        assert!(matches!(
            plan_queries(p, SymplecticVariant::VacuumShared, DisplacementVariant::Tmsv),
            Err(Error::Planning(_))
        ));
    }

    #[test]
    fn doubling_epsilon_divides_ns_by_sixteen() {
        let a = plan_queries(problem(2, 2.0, 1.0, 1e6, 0.2, 0.1), SymplecticVariant::VacuumShared, DisplacementVariant::Tmsv).unwrap();
        let b = plan_queries(problem(2, 2.0, 1.0, 1e6, 0.4, 0.1), SymplecticVariant::VacuumShared, DisplacementVariant::Tmsv).unwrap();
        assert!((a.n_s_bound / b.n_s_bound - 16.0).abs() < 1e-9);
    }

    #[test]
    fn energy_cap_is_root() {
        let cap = single_mode_energy_cap(3, 50.0);
        assert!((3.0 * (cap + 1.0 / cap - 2.0) / 4.0 - 50.0).abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn smaller_delta_needs_more_shots(d1 in 0.01f64..0.5, shrink in 0.05f64..1.0, n_bar_in in 100.0f64..1e9) {
            let d2 = d1 * shrink;
            let a = plan_queries(problem(2, 2.0, 1.0, n_bar_in, 0.5, d1), SymplecticVariant::VacuumShared, DisplacementVariant::Tmsv).unwrap();
            let b = plan_queries(problem(2, 2.0, 1.0, n_bar_in, 0.5, d2), SymplecticVariant::VacuumShared, DisplacementVariant::Tmsv).unwrap();
            prop_assert!(b.n_s >= a.n_s && b.n_r >= a.n_r);
        }

        #[test]
        fn multiplicative_error_dominated(m in 1usize..4, z in 1.0f64..4.0, seed in any::<u64>(), frac in 0.0f64..0.99) {
            let s = random_symplectic(m, z, seed).unwrap();
            let eps = frac * 0.5 / (2.0 * z + 1.0) / 9.0 / z / z;
            let mut rng = <rand_chacha::ChaCha20Rng as rand::SeedableRng>::seed_from_u64(seed ^ 7);
            let o = crate::symplectic::random_passive(m, &mut rng);
            let mut zs = vec![1.0; m];
            zs[0] = 1.0 + eps;
            let pert = o.as_matrix() * squeezing_matrix(&zs) * o.as_matrix().transpose();
            let s_tilde = SymplecticMatrix::try_from_matrix(pert * s.as_matrix()).unwrap();
            let actual = crate::linalg::operator_norm(&(s_tilde.as_matrix() - s.as_matrix()));
            prop_assume!(z * actual < 0.5);
            let measured = multiplicative_error(&s, &s_tilde);
            prop_assert!(measured <= additive_to_multiplicative(actual, s.operator_norm().max(1.0)).unwrap() + 1e-12);
        }

        #[test]
        fn bounds_monotone_along_rays(t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let dir = RealVector::from_vec(vec![0.3, -0.7, 0.2, 0.5]);
            let base = RealVector::zeros(4);
            let a = displacement_diamond_bound(&(&base + &dir * lo), &base, 1.0).unwrap();
            let b = displacement_diamond_bound(&(&base + &dir * hi), &base, 1.0).unwrap();
            prop_assert!(a <= b + 1e-15);
        }
    }
}
