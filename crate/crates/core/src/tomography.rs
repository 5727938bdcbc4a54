//! Query-counting black-box oracle and the learners for the symplectic and
//! displacement parts of a Gaussian unitary.
//!
//! Each learner has a seeded form and a `_with` form taking any [`Sampler`];
//! passing [`ExactSampler`](crate::measurement::ExactSampler) replaces every
//! empirical mean by its expectation.

use alloc::format;
use alloc::vec::Vec;

use num_traits::Float;

use crate::bounds::{
    self, additive_to_multiplicative, combined_diamond_bound, DisplacementVariant, QueryPlan,
    SymplecticVariant,
};
use crate::linalg::{operator_norm, RealMatrix, RealVector};
use crate::measurement::{heterodyne_law, homodyne_law, marginal, Quadrature, Sampler, SeededSampler};
use crate::phase_space::{
    apply_unitary, coherent, mismatch_delta, single_mode_squeezed, tmsv, tmsv_symplectic, vacuum,
    GaussianState, GaussianUnitary, SqueezeOrientation,
};
use crate::rng::{stream, stream_rng};
use crate::symplectic::{regularize, SymplecticMatrix};
use crate::{Error, Result};

/// Relative slack on the photon budget, absorbing rounding in `η = √n̄_in`.
pub const BUDGET_SLACK: f64 = 1e-12;

/// Which state the photon budget is checked on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Accounting {
    /// The canonical probe, before any pre-processing unitary.
    #[default]
    Paper,
    /// The state actually fed to the oracle.
    Strict,
}

/// Black-box access to a hidden Gaussian unitary with an input-energy budget.
#[derive(Debug, Clone)]
pub struct UnitaryOracle {
    hidden: GaussianUnitary,
    query_count: u64,
    n_bar_in: f64,
    accounting: Accounting,
}

impl UnitaryOracle {
    pub fn new(hidden: GaussianUnitary, n_bar_in: f64, accounting: Accounting) -> Result<Self> {
        if !(n_bar_in > 0.0) {
            return Err(Error::domain("n_bar_in", format!("need a positive budget, got {n_bar_in}")));
        }
        Ok(Self {
            hidden,
            query_count: 0,
            n_bar_in,
            accounting,
        })
    }

    pub fn modes(&self) -> usize {
        self.hidden.modes()
    }

    pub fn query_count(&self) -> u64 {
        self.query_count
    }

    pub fn n_bar_in(&self) -> f64 {
        self.n_bar_in
    }

    pub fn accounting(&self) -> Accounting {
        self.accounting
    }

    /// Ground truth, for validation only.
    pub fn reveal(&self) -> &GaussianUnitary {
        &self.hidden
    }

    fn check_budget(&self, state: &GaussianState) -> Result<()> {
        let photons = state.mean_photon_number();
        if photons > self.n_bar_in * (1.0 + BUDGET_SLACK) + BUDGET_SLACK {
            return Err(Error::EnergyConstraint {
                photons,
                budget: self.n_bar_in,
            });
        }
        Ok(())
    }

    fn apply(&self, input: &GaussianState) -> Result<GaussianState> {
        let n = input.modes();
        if n < self.modes() {
            return Err(Error::dimension(format!(
                "input has {n} modes, the oracle acts on {}",
                self.modes()
            )));
        }
        apply_unitary(&self.hidden.embed(n)?, input)
    }

    /// One query. The hidden unitary acts on the first `m` modes of `input`.
    pub fn query(&mut self, input: &GaussianState) -> Result<GaussianState> {
        self.query_batch(input, 1)
    }

    /// `count` identical queries on `input`; returns the common output state.
    pub fn query_batch(&mut self, input: &GaussianState, count: u64) -> Result<GaussianState> {
        self.check_budget(input)?;
        self.run(input, count)
    }

    /// `count` queries on `prep(probe)`. Under [`Accounting::Paper`] the budget
    /// is checked on `probe`, under [`Accounting::Strict`] on `prep(probe)`.
    pub fn query_prepared(
        &mut self,
        probe: &GaussianState,
        prep: &GaussianUnitary,
        count: u64,
    ) -> Result<GaussianState> {
        let input = apply_unitary(&prep.embed(probe.modes())?, probe)?;
        match self.accounting {
            Accounting::Paper => self.check_budget(probe)?,
            Accounting::Strict => self.check_budget(&input)?,
        }
        self.run(&input, count)
    }

    fn run(&mut self, input: &GaussianState, count: u64) -> Result<GaussianState> {
        if count == 0 {
            return Err(Error::domain("query count", "need at least one query"));
        }
        let out = self.apply(input)?;
        self.query_count = self
            .query_count
            .checked_add(count)
            .ok_or_else(|| Error::Numeric("query counter overflow".into()))?;
        Ok(out)
    }
}

/// Regularized symplectic estimate.
#[derive(Debug, Clone)]
pub struct SymplecticEstimate {
    pub s_hat: RealMatrix,
    pub s_tilde: SymplecticMatrix,
    pub eps_s_budget: f64,
    pub queries_used: u64,
}

/// Displacement estimate.
#[derive(Debug, Clone)]
pub struct DisplacementEstimate {
    pub r_tilde: RealVector,
    /// Target accuracy, when the learner was run against one.
    pub eps_r_budget: Option<f64>,
    pub queries_used: u64,
}

fn check_probe_args(eta: f64, n_s: u64) -> Result<()> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::domain("eta", format!("need eta > 0, got {eta}")));
    }
    if n_s == 0 {
        return Err(Error::domain("N_S", "need at least one shot per probe"));
    }
    Ok(())
}

fn basis_probe(m: usize, i: usize, amplitude: f64) -> Result<GaussianState> {
    let mut mean = RealVector::zeros(2 * m);
    mean[i] = amplitude;
    coherent(mean)
}

fn mean_heterodyne<S: Sampler + ?Sized>(
    oracle: &mut UnitaryOracle,
    probe: &GaussianState,
    n_s: u64,
    sampler: &mut S,
) -> Result<RealVector> {
    let out = oracle.query_batch(probe, n_s)?;
    let (mean, cov) = heterodyne_law(&out);
    sampler.draw_mean(&mean, &cov, n_s)
}

/// Vacuum plus `2m` coherent probes `η e_i`, `N_S` heterodyne shots each;
/// column `i` of `Ŝ` is `(Ȳ_i − Ȳ₀)/η`. Uses `(2m+1) N_S` queries.
pub fn learn_symplectic_vacuum_shared(
    oracle: &mut UnitaryOracle,
    eta: f64,
    n_s: u64,
    rng_seed: u64,
) -> Result<RealMatrix> {
    learn_symplectic_vacuum_shared_with(oracle, eta, n_s, &mut SeededSampler::new(rng_seed))
}

pub fn learn_symplectic_vacuum_shared_with<S: Sampler + ?Sized>(
    oracle: &mut UnitaryOracle,
    eta: f64,
    n_s: u64,
    sampler: &mut S,
) -> Result<RealMatrix> {
    check_probe_args(eta, n_s)?;
    let m = oracle.modes();
    let baseline = mean_heterodyne(oracle, &vacuum(m), n_s, sampler)?;
    let mut s_hat = RealMatrix::zeros(2 * m, 2 * m);
    for i in 0..2 * m {
        let y = mean_heterodyne(oracle, &basis_probe(m, i, eta)?, n_s, sampler)?;
        s_hat.set_column(i, &((y - &baseline) / eta));
    }
    Ok(s_hat)
}

/// Probes `±η e_i`, `N_S` heterodyne shots each; column `i` of `Ŝ` is
/// `(Ȳ_i⁺ − Ȳ_i⁻)/(2η)`. Uses `4m N_S` queries.
pub fn learn_symplectic_symmetric(
    oracle: &mut UnitaryOracle,
    eta: f64,
    n_s: u64,
    rng_seed: u64,
) -> Result<RealMatrix> {
    learn_symplectic_symmetric_with(oracle, eta, n_s, &mut SeededSampler::new(rng_seed))
}

pub fn learn_symplectic_symmetric_with<S: Sampler + ?Sized>(
    oracle: &mut UnitaryOracle,
    eta: f64,
    n_s: u64,
    sampler: &mut S,
) -> Result<RealMatrix> {
    check_probe_args(eta, n_s)?;
    let m = oracle.modes();
    let mut s_hat = RealMatrix::zeros(2 * m, 2 * m);
    for i in 0..2 * m {
        let plus = mean_heterodyne(oracle, &basis_probe(m, i, eta)?, n_s, sampler)?;
        let minus = mean_heterodyne(oracle, &basis_probe(m, i, -eta)?, n_s, sampler)?;
        s_hat.set_column(i, &((plus - minus) / (2.0 * eta)));
    }
    Ok(s_hat)
}

/// Shot count per probe that makes the regularized output `τ`-accurate with
/// probability `1 − δ`, given `‖S*‖∞ ≤ z`.
pub fn regularized_shots(
    variant: SymplecticVariant,
    m: usize,
    z: f64,
    eta: f64,
    tau: f64,
    delta: f64,
) -> Result<u64> {
    if !(tau > 0.0 && tau < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(
            "tau/delta",
            format!("need tau, delta in (0, 1), got {tau} and {delta}"),
        ));
    }
    if !(z >= 1.0) {
        return Err(Error::domain("z", format!("need z >= 1, got {z}")));
    }
    let bound = match variant {
        SymplecticVariant::VacuumShared => bounds::ns_regularized_vacuum_shared(m, z, eta, tau, delta),
        SymplecticVariant::Symmetric => bounds::ns_regularized_symmetric(m, z, eta, tau, delta),
    };
    bounds::shots(bound)
}

/// Runs the chosen estimator with the shot count of [`regularized_shots`] and
/// projects the result onto `Sp(2m)`.
pub fn learn_symplectic_regularized(
    oracle: &mut UnitaryOracle,
    variant: SymplecticVariant,
    eta: f64,
    tau: f64,
    delta: f64,
    z: f64,
    rng_seed: u64,
) -> Result<SymplecticEstimate> {
    let n_s = regularized_shots(variant, oracle.modes(), z, eta, tau, delta)?;
    learn_symplectic_regularized_with(oracle, variant, eta, n_s, tau, &mut SeededSampler::new(rng_seed))
}

/// As [`learn_symplectic_regularized`] with an explicit shot count.
pub fn learn_symplectic_regularized_with<S: Sampler + ?Sized>(
    oracle: &mut UnitaryOracle,
    variant: SymplecticVariant,
    eta: f64,
    n_s: u64,
    tau: f64,
    sampler: &mut S,
) -> Result<SymplecticEstimate> {
    let start = oracle.query_count();
    let s_hat = match variant {
        SymplecticVariant::VacuumShared => learn_symplectic_vacuum_shared_with(oracle, eta, n_s, sampler)?,
        SymplecticVariant::Symmetric => learn_symplectic_symmetric_with(oracle, eta, n_s, sampler)?,
    };
    let s_tilde = regularize(&s_hat)?;
    Ok(SymplecticEstimate {
        s_hat,
        s_tilde,
        eps_s_budget: tau,
        queries_used: oracle.query_count() - start,
    })
}

fn require_estimate_modes(oracle: &UnitaryOracle, s_tilde: &SymplecticMatrix) -> Result<usize> {
    let m = oracle.modes();
    if s_tilde.modes() != m {
        return Err(Error::dimension(format!(
            "estimate acts on {} modes, the oracle on {m}",
            s_tilde.modes()
        )));
    }
    Ok(m)
}

/// Two-mode squeezed probe: `U_{S̃⁻¹}` on the signal block, one query,
/// `U_{S_ν}⁻¹`, heterodyne of the signal block. `r̃ = μ̂/√ν`. Uses `N_r` queries.
pub fn learn_displacement_tmsv(
    oracle: &mut UnitaryOracle,
    s_tilde: &SymplecticMatrix,
    nu: f64,
    n_r: u64,
    rng_seed: u64,
) -> Result<DisplacementEstimate> {
    learn_displacement_tmsv_with(oracle, s_tilde, nu, n_r, &mut SeededSampler::new(rng_seed))
}

pub fn learn_displacement_tmsv_with<S: Sampler + ?Sized>(
    oracle: &mut UnitaryOracle,
    s_tilde: &SymplecticMatrix,
    nu: f64,
    n_r: u64,
    sampler: &mut S,
) -> Result<DisplacementEstimate> {
    let m = require_estimate_modes(oracle, s_tilde)?;
    if n_r == 0 {
        return Err(Error::domain("N_r", "need at least one query"));
    }
    let probe = tmsv(nu, m)?;
    let prep = GaussianUnitary::passive(s_tilde.inverse());
    let start = oracle.query_count();
    let out = oracle.query_prepared(&probe, &prep, n_r)?;
    let unsqueeze = GaussianUnitary::passive(tmsv_symplectic(nu, m)?.inverse());
    let decoded = apply_unitary(&unsqueeze, &out)?;
    let signal: Vec<usize> = (0..m).collect();
    let (mean, cov) = heterodyne_law(&marginal(&decoded, &signal)?);
    let mu = sampler.draw_mean(&mean, &cov, n_r)?;
    Ok(DisplacementEstimate {
        r_tilde: mu / Float::sqrt(nu),
        eps_r_budget: None,
        queries_used: oracle.query_count() - start,
    })
}

/// Single-mode squeezed probes: momentum pass with `diag(z_in, 1/z_in)` and
/// homodyne `p`, position pass with `diag(1/z_in, z_in)` and homodyne `x`,
/// `N_r` queries each, both after `U_{S̃⁻¹}`. Uses `2 N_r` queries.
pub fn learn_displacement_single_mode(
    oracle: &mut UnitaryOracle,
    s_tilde: &SymplecticMatrix,
    z_in: f64,
    n_r: u64,
    rng_seed: u64,
) -> Result<DisplacementEstimate> {
    learn_displacement_single_mode_with(oracle, s_tilde, z_in, n_r, &mut SeededSampler::new(rng_seed))
}

pub fn learn_displacement_single_mode_with<S: Sampler + ?Sized>(
    oracle: &mut UnitaryOracle,
    s_tilde: &SymplecticMatrix,
    z_in: f64,
    n_r: u64,
    sampler: &mut S,
) -> Result<DisplacementEstimate> {
    let m = require_estimate_modes(oracle, s_tilde)?;
    if n_r == 0 {
        return Err(Error::domain("N_r", "need at least one query"));
    }
    let prep = GaussianUnitary::passive(s_tilde.inverse());
    let start = oracle.query_count();
    let mut r_tilde = RealVector::zeros(2 * m);
    for (orientation, quadrature, offset) in [
        (SqueezeOrientation::Momentum, Quadrature::Momentum, 1),
        (SqueezeOrientation::Position, Quadrature::Position, 0),
    ] {
        let probe = single_mode_squeezed(z_in, m, orientation)?;
        let out = oracle.query_prepared(&probe, &prep, n_r)?;
        let (mean, cov) = homodyne_law(&out, quadrature);
        let est = sampler.draw_mean(&mean, &cov, n_r)?;
        for j in 0..m {
            r_tilde[2 * j + offset] = est[j];
        }
    }
    Ok(DisplacementEstimate {
        r_tilde,
        eps_r_budget: None,
        queries_used: oracle.query_count() - start,
    })
}

/// Stage of [`learn_unitary`] that produced an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Stage {
    Symplectic,
    Displacement,
    Report,
}

/// An aborted end-to-end run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    pub stage: Stage,
    pub error: Error,
    pub queries_used: u64,
}

/// Ground-truth diagnostics of an end-to-end run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrialReport {
    /// `‖S̃ − S*‖∞`.
    pub eps_s_true: f64,
    /// `‖r̃ − r*‖₂`.
    pub eps_r_true: f64,
    /// `‖S* S̃⁻¹ − 1‖∞`, the mismatch seen by the TMSV protocol.
    pub delta_protocol: f64,
    /// `‖S̃⁻¹ S* − 1‖∞`.
    pub delta_lemma: f64,
    /// `combined_diamond_bound(eps_s_true, eps_r_true, …)`; `None` when
    /// `z · eps_s_true ≥ 1/2`.
    pub combined_bound: Option<f64>,
    pub symplectic_queries: u64,
    pub displacement_queries: u64,
    pub total_queries: u64,
}

#[derive(Debug, Clone)]
pub struct LearningOutcome {
    pub displacement: DisplacementEstimate,
    pub symplectic: SymplecticEstimate,
    pub report: TrialReport,
}

/// End-to-end run of `plan`: regularized symplectic learning followed by the
/// selected displacement learner. Stage samplers come from independent
/// streams of `rng_seed`.
pub fn learn_unitary(
    oracle: &mut UnitaryOracle,
    plan: &QueryPlan,
    rng_seed: u64,
) -> core::result::Result<LearningOutcome, TrialFailure> {
    let mut sym = SeededSampler::from_rng(stream_rng(rng_seed, 0, stream::SYMPLECTIC), rng_seed);
    let mut disp = SeededSampler::from_rng(stream_rng(rng_seed, 0, stream::DISPLACEMENT), rng_seed);
    learn_unitary_with(oracle, plan, &mut sym, &mut disp)
}

pub fn learn_unitary_with<S: Sampler + ?Sized, D: Sampler + ?Sized>(
    oracle: &mut UnitaryOracle,
    plan: &QueryPlan,
    sym_sampler: &mut S,
    disp_sampler: &mut D,
) -> core::result::Result<LearningOutcome, TrialFailure> {
    let start = oracle.query_count();
    let fail = |stage, error, oracle: &UnitaryOracle| TrialFailure {
        stage,
        error,
        queries_used: oracle.query_count() - start,
    };
    let m = plan.problem.m;
    if m != oracle.modes() {
        let e = Error::dimension(format!("plan is for {m} modes, the oracle acts on {}", oracle.modes()));
        return Err(fail(Stage::Symplectic, e, oracle));
    }

    let symplectic = learn_symplectic_regularized_with(
        oracle,
        plan.sym_variant,
        plan.eta,
        plan.n_s,
        plan.eps_s,
        sym_sampler,
    )
    .map_err(|e| fail(Stage::Symplectic, e, oracle))?;

    let displacement = match plan.disp_variant {
        DisplacementVariant::Tmsv => {
            learn_displacement_tmsv_with(oracle, &symplectic.s_tilde, plan.nu, plan.n_r, disp_sampler)
        }
        DisplacementVariant::SingleMode => {
            let z_in = plan.z_in.unwrap_or_else(|| Float::sqrt(plan.problem.n_bar_in));
            learn_displacement_single_mode_with(oracle, &symplectic.s_tilde, z_in, plan.n_r, disp_sampler)
        }
    };
    let mut displacement = displacement.map_err(|e| fail(Stage::Displacement, e, oracle))?;
    displacement.eps_r_budget = Some(plan.eps_r);

    let hidden = oracle.reveal();
    let s_star = hidden.symplectic();
    let eps_s_true = operator_norm(&(symplectic.s_tilde.as_matrix() - s_star.as_matrix()));
    let eps_r_true = (&displacement.r_tilde - hidden.displacement()).norm();
    let delta_protocol = operator_norm(&mismatch_delta(s_star, &symplectic.s_tilde));
    let delta_lemma = bounds::multiplicative_error(s_star, &symplectic.s_tilde);
    let p = &plan.problem;
    let combined_bound = match combined_diamond_bound(eps_s_true, eps_r_true, m, p.z, p.n_bar) {
        Ok(b) => Some(b),
        Err(Error::BoundDomain(_)) => None,
        Err(e) => return Err(fail(Stage::Report, e, oracle)),
    };
    let report = TrialReport {
        eps_s_true,
        eps_r_true,
        delta_protocol,
        delta_lemma,
        combined_bound,
        symplectic_queries: symplectic.queries_used,
        displacement_queries: displacement.queries_used,
        total_queries: oracle.query_count() - start,
    };
    Ok(LearningOutcome {
        displacement,
        symplectic,
        report,
    })
}

/// `2zε_S`, the bound substituted for `‖Δ‖∞` when planning.
pub fn planned_mismatch(plan: &QueryPlan) -> Result<f64> {
    additive_to_multiplicative(plan.eps_s, plan.problem.z)
}
