//! Classical sampling models for heterodyne and homodyne detection.
//!
//! Heterodyne on a state with moments `(m, V)` yields `N(m, (V + 1)/2)`.
//! Homodyne of one quadrature type yields `N(m_q, V_qq / 2)` restricted to the
//! measured coordinates.

use alloc::format;
use alloc::vec::Vec;

use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{gaussian_factor, RealMatrix, RealVector};
use crate::phase_space::{apply_unitary, GaussianState, GaussianUnitary};
use crate::symplectic::{pauli_z_block, SymplecticMatrix};
use crate::{Error, Result};

/// Shots drawn one by one before [`Sampler::draw_mean`] switches to sampling
/// the empirical mean directly from `N(μ, Σ/N)`.
pub const DIRECT_MEAN_LIMIT: u64 = 4096;

/// `count` shots of a `dim`-dimensional measurement, one shot per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub data: RealMatrix,
    /// Seed of the generator that produced the batch (0 for exact samplers).
    pub seed_trace: u64,
}

impl SampleBatch {
    pub fn count(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn shot(&self, i: usize) -> RealVector {
        self.data.row(i).transpose()
    }

    pub fn mean(&self) -> RealVector {
        self.data.row_mean().transpose()
    }

    /// Unbiased sample covariance (`1/(N−1)` normalization).
    pub fn covariance(&self) -> RealMatrix {
        let n = self.count();
        let mu = self.data.row_mean();
        let mut centered = self.data.clone();
        for mut row in centered.row_iter_mut() {
            row -= &mu;
        }
        let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
        centered.transpose() * centered / denom
    }

    /// Applies `y ↦ a y` to every shot.
    pub fn map_linear(&self, a: &RealMatrix) -> SampleBatch {
        SampleBatch {
            data: &self.data * a.transpose(),
            seed_trace: self.seed_trace,
        }
    }
}

/// Source of Gaussian samples. Learners take a sampler so tests can swap in
/// [`ExactSampler`], which returns distribution means.
pub trait Sampler {
    /// `count` i.i.d. draws from `N(mean, cov)`.
    fn draw(&mut self, mean: &RealVector, cov: &RealMatrix, count: usize) -> Result<SampleBatch>;

    /// The empirical mean of `count` i.i.d. draws from `N(mean, cov)`.
    fn draw_mean(&mut self, mean: &RealVector, cov: &RealMatrix, count: u64) -> Result<RealVector>;
}

/// ChaCha20-backed sampler.
#[derive(Debug, Clone)]
pub struct SeededSampler {
    rng: ChaCha20Rng,
    seed: u64,
}

impl SeededSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
            seed,
        }
    }

    pub fn from_rng(rng: ChaCha20Rng, seed_trace: u64) -> Self {
        Self {
            rng,
            seed: seed_trace,
        }
    }

    fn standard_normal(&mut self, dim: usize) -> RealVector {
        RealVector::from_iterator(dim, (0..dim).map(|_| StandardNormal.sample(&mut self.rng)))
    }
}

fn check_law(mean: &RealVector, cov: &RealMatrix) -> Result<()> {
    if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
        return Err(Error::dimension(format!(
            "mean has length {}, covariance is {}x{}",
            mean.len(),
            cov.nrows(),
            cov.ncols()
        )));
    }
    Ok(())
}

impl Sampler for SeededSampler {
    fn draw(&mut self, mean: &RealVector, cov: &RealMatrix, count: usize) -> Result<SampleBatch> {
        check_law(mean, cov)?;
        if count == 0 {
            return Err(Error::domain("shot count", "need at least one shot"));
        }
        let l = gaussian_factor(cov)?;
        let dim = mean.len();
        let mut data = RealMatrix::zeros(count, dim);
        for i in 0..count {
            let y = mean + &l * self.standard_normal(dim);
            data.set_row(i, &y.transpose());
        }
        Ok(SampleBatch {
            data,
            seed_trace: self.seed,
        })
    }

    fn draw_mean(&mut self, mean: &RealVector, cov: &RealMatrix, count: u64) -> Result<RealVector> {
        check_law(mean, cov)?;
        if count == 0 {
            return Err(Error::domain("shot count", "need at least one shot"));
        }
        if count <= DIRECT_MEAN_LIMIT {
            return Ok(self.draw(mean, cov, count as usize)?.mean());
        }
        // The mean of N i.i.d. Gaussian shots is exactly N(μ, Σ/N).
        let l = gaussian_factor(cov)?;
        let xi = self.standard_normal(mean.len());
        Ok(mean + l * xi / Float::sqrt(count as f64))
    }
}

/// Noise-free sampler: every shot equals the distribution mean.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactSampler;

impl Sampler for ExactSampler {
    fn draw(&mut self, mean: &RealVector, cov: &RealMatrix, count: usize) -> Result<SampleBatch> {
        check_law(mean, cov)?;
        if count == 0 {
            return Err(Error::domain("shot count", "need at least one shot"));
        }
        let mut data = RealMatrix::zeros(count, mean.len());
        for i in 0..count {
            data.set_row(i, &mean.transpose());
        }
        Ok(SampleBatch { data, seed_trace: 0 })
    }

    fn draw_mean(&mut self, mean: &RealVector, cov: &RealMatrix, count: u64) -> Result<RealVector> {
        check_law(mean, cov)?;
        if count == 0 {
            return Err(Error::domain("shot count", "need at least one shot"));
        }
        Ok(mean.clone())
    }
}

/// Which quadrature a homodyne detector measures on every mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Quadrature {
    Position,
    Momentum,
}

impl Quadrature {
    /// Interleaved indices of this quadrature on `n` modes.
    pub fn indices(self, n: usize) -> Vec<usize> {
        let offset = match self {
            Quadrature::Position => 0,
            Quadrature::Momentum => 1,
        };
        (0..n).map(|j| 2 * j + offset).collect()
    }
}

/// `(m, (V + 1)/2)`.
pub fn heterodyne_law(state: &GaussianState) -> (RealVector, RealMatrix) {
    let d = 2 * state.modes();
    (
        state.mean().clone(),
        (state.cov() + RealMatrix::identity(d, d)) * 0.5,
    )
}

/// Law of a homodyne measurement of the quadratures at `indices`:
/// `(m_I, V_II / 2)`.
pub fn quadrature_law(state: &GaussianState, indices: &[usize]) -> Result<(RealVector, RealMatrix)> {
    let d = 2 * state.modes();
    if let Some(&bad) = indices.iter().find(|&&i| i >= d) {
        return Err(Error::dimension(format!(
            "quadrature index {bad} out of range for {d} coordinates"
        )));
    }
    let k = indices.len();
    let mean = RealVector::from_iterator(k, indices.iter().map(|&i| state.mean()[i]));
    let cov = RealMatrix::from_fn(k, k, |a, b| state.cov()[(indices[a], indices[b])] * 0.5);
    Ok((mean, cov))
}

pub fn homodyne_law(state: &GaussianState, quadrature: Quadrature) -> (RealVector, RealMatrix) {
    quadrature_law(state, &quadrature.indices(state.modes()))
        .expect("indices generated in range")
}

pub fn heterodyne(state: &GaussianState, count: usize, rng_seed: u64) -> Result<SampleBatch> {
    heterodyne_with(state, count, &mut SeededSampler::new(rng_seed))
}

pub fn heterodyne_with<S: Sampler + ?Sized>(
    state: &GaussianState,
    count: usize,
    sampler: &mut S,
) -> Result<SampleBatch> {
    let (mean, cov) = heterodyne_law(state);
    sampler.draw(&mean, &cov, count)
}

pub fn homodyne(
    state: &GaussianState,
    quadrature: Quadrature,
    count: usize,
    rng_seed: u64,
) -> Result<SampleBatch> {
    homodyne_with(state, quadrature, count, &mut SeededSampler::new(rng_seed))
}

pub fn homodyne_with<S: Sampler + ?Sized>(
    state: &GaussianState,
    quadrature: Quadrature,
    count: usize,
    sampler: &mut S,
) -> Result<SampleBatch> {
    let (mean, cov) = homodyne_law(state, quadrature);
    sampler.draw(&mean, &cov, count)
}

/// Reduced state on the listed modes, in the listed order.
pub fn marginal(state: &GaussianState, mode_indices: &[usize]) -> Result<GaussianState> {
    let n = state.modes();
    for (k, &i) in mode_indices.iter().enumerate() {
        if i >= n {
            return Err(Error::dimension(format!(
                "mode index {i} out of range for {n} modes"
            )));
        }
        if mode_indices[..k].contains(&i) {
            return Err(Error::dimension(format!("mode index {i} repeated")));
        }
    }
    if mode_indices.is_empty() {
        return Err(Error::dimension("marginal needs at least one mode"));
    }
    let quads: Vec<usize> = mode_indices.iter().flat_map(|&i| [2 * i, 2 * i + 1]).collect();
    let k = quads.len();
    let mean = RealVector::from_iterator(k, quads.iter().map(|&i| state.mean()[i]));
    let cov = RealMatrix::from_fn(k, k, |a, b| state.cov()[(quads[a], quads[b])]);
    GaussianState::from_parts(mean, cov)
}

/// Linear-optics pipeline that reproduces heterodyne after `U_S` without
/// applying `U_S` to the signal.
///
/// 1. Prepare an auxiliary pure state with covariance `Z S⁻¹ S⁻ᵀ Z`.
/// 2. Mix signal mode `j` with auxiliary mode `j` on a balanced beam splitter
///    `(a, b) = ((ρ + σ)/√2, (ρ − σ)/√2)`.
/// 3. Homodyne `x` on arm `a` and `p` on arm `b` for every mode pair.
/// 4. Rescale `q = √2 (x_a, p_b)` and output `S q`.
///
/// Step 3 returns `q = (x_ρ + x_σ, p_ρ − p_σ)`, so the auxiliary noise enters
/// through `Z`. Preparing `Z S⁻¹S⁻ᵀ Z` (the phase conjugate of the squeezed
/// vacuum `S⁻¹S⁻ᵀ`) gives `q ~ N(m, (V + S⁻¹S⁻ᵀ)/2)` and hence
/// `S q ~ N(S m, (S V Sᵀ + 1)/2)`.
#[derive(Debug, Clone)]
pub struct PassiveHeterodyne {
    /// Joint `(signal | auxiliary)` state after the beam splitters.
    pub mixed: GaussianState,
    /// Interleaved indices of the homodyned quadratures in `mixed`.
    pub measured: Vec<usize>,
    /// Post-processing `S · √2`.
    pub post: RealMatrix,
}

/// Balanced beam splitter on `(signal | auxiliary)` registers of `n` modes each.
pub fn balanced_beam_splitter(n: usize) -> SymplecticMatrix {
    let d = 2 * n;
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let mut b = RealMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        b[(i, i)] = h;
        b[(i, d + i)] = h;
        b[(d + i, i)] = h;
        b[(d + i, d + i)] = -h;
    }
    SymplecticMatrix::from_matrix_unchecked(b)
}

impl PassiveHeterodyne {
    pub fn new(state: &GaussianState, s: &SymplecticMatrix) -> Result<Self> {
        let n = state.modes();
        if s.modes() != n {
            return Err(Error::dimension(format!(
                "state has {n} modes, S acts on {}",
                s.modes()
            )));
        }
        let s_inv = s.inverse();
        let z = pauli_z_block(n);
        let aux_cov = crate::linalg::symmetrize(&(&z * s_inv.as_matrix() * s_inv.as_matrix().transpose() * &z));
        let aux = GaussianState::from_parts(RealVector::zeros(2 * n), aux_cov)?;
        let joint = state.tensor(&aux);
        let mixed = apply_unitary(&GaussianUnitary::passive(balanced_beam_splitter(n)), &joint)?;
        let measured = (0..n).flat_map(|j| [2 * j, 2 * n + 2 * j + 1]).collect();
        let post = s.as_matrix() * core::f64::consts::SQRT_2;
        Ok(Self {
            mixed,
            measured,
            post,
        })
    }

    /// Mean and covariance of the post-processed output `S q`.
    pub fn law(&self) -> (RealVector, RealMatrix) {
        let (mu, cov) = quadrature_law(&self.mixed, &self.measured).expect("indices in range");
        (&self.post * mu, &self.post * cov * self.post.transpose())
    }

    pub fn sample<S: Sampler + ?Sized>(&self, count: usize, sampler: &mut S) -> Result<SampleBatch> {
        let (mu, cov) = quadrature_law(&self.mixed, &self.measured)?;
        Ok(sampler.draw(&mu, &cov, count)?.map_linear(&self.post))
    }
}

pub fn passive_heterodyne_law(
    state: &GaussianState,
    s: &SymplecticMatrix,
) -> Result<(RealVector, RealMatrix)> {
    Ok(PassiveHeterodyne::new(state, s)?.law())
}

pub fn passive_heterodyne(
    state: &GaussianState,
    s: &SymplecticMatrix,
    count: usize,
    rng_seed: u64,
) -> Result<SampleBatch> {
    PassiveHeterodyne::new(state, s)?.sample(count, &mut SeededSampler::new(rng_seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::phase_space::{tmsv, vacuum};
    use crate::symplectic::random_symplectic;
    use alloc::vec;

    #[test]
    fn heterodyne_is_deterministic_per_seed() {
        let st = tmsv(3.0, 1).unwrap();
        let a = heterodyne(&st, 50, 17).unwrap();
        let b = heterodyne(&st, 50, 17).unwrap();
        let c = heterodyne(&st, 50, 18).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.dim(), 4);
        assert_eq!(a.count(), 50);
    }

    #[test]
    fn tmsv_signal_marginal_is_thermal() {
        let nu = 4.0;
        let st = tmsv(nu, 1).unwrap();
        let sig = marginal(&st, &[0]).unwrap();
        assert!(max_abs(&(sig.cov() - RealMatrix::identity(2, 2) * (2.0 * nu - 1.0))) < 1e-12);
        assert!(marginal(&st, &[2]).is_err());
        assert!(marginal(&st, &[0, 0]).is_err());
    }

    #[test]
    fn homodyne_picks_interleaved_block() {
        let mut cov = RealMatrix::identity(4, 4);
        cov[(1, 1)] = 0.25;
        cov[(3, 3)] = 0.5;
        let st = GaussianState::new(RealVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]), {
            cov[(0, 0)] = 4.0;
            cov[(2, 2)] = 2.0;
            cov
        })
        .unwrap();
        let (m, v) = homodyne_law(&st, Quadrature::Momentum);
        assert_eq!(m.as_slice(), &[2.0, 4.0]);
        assert_eq!(v[(0, 0)], 0.125);
        assert_eq!(v[(1, 1)], 0.25);
        let (m, _) = homodyne_law(&st, Quadrature::Position);
        assert_eq!(m.as_slice(), &[1.0, 3.0]);
    }

    #[test]
    fn exact_sampler_returns_mean() {
        let mean = RealVector::from_vec(vec![1.0, -1.0]);
        let cov = RealMatrix::identity(2, 2);
        let b = ExactSampler.draw(&mean, &cov, 3).unwrap();
        assert_eq!(b.mean(), mean);
        assert_eq!(ExactSampler.draw_mean(&mean, &cov, 1 << 40).unwrap(), mean);
    }

    #[test]
    fn batched_mean_has_right_spread() {
        let mean = RealVector::zeros(1);
        let cov = RealMatrix::identity(1, 1);
        let mut s = SeededSampler::new(3);
        let n = 1u64 << 20;
        let reps = 2000;
        let mut acc = 0.0;
        for _ in 0..reps {
            let m = s.draw_mean(&mean, &cov, n).unwrap()[0];
            acc += m * m;
        }
        let var = acc / reps as f64 * n as f64;
        assert!((var - 1.0).abs() < 0.15, "scaled variance {var}");
    }

    #[test]
    fn passive_matches_active_analytically() {
        for seed in 0..10u64 {
            let s = random_symplectic(2, 3.0, seed).unwrap();
            let prep = random_symplectic(2, 2.0, seed + 100).unwrap();
            let st = apply_unitary(
                &GaussianUnitary::new(RealVector::from_vec(vec![0.5, -1.0, 0.2, 0.0]), prep).unwrap(),
                &vacuum(2),
            )
            .unwrap();
            let (pm, pc) = passive_heterodyne_law(&st, &s).unwrap();
            let out = apply_unitary(&GaussianUnitary::passive(s), &st).unwrap();
            let (hm, hc) = heterodyne_law(&out);
            assert!((pm - hm).amax() < 1e-10);
            assert!(max_abs(&(pc - hc)) < 1e-10);
        }
    }

    #[test]
    fn auxiliary_state_is_physical() {
        let s = random_symplectic(3, 4.0, 1).unwrap();
        let p = PassiveHeterodyne::new(&vacuum(3), &s).unwrap();
        p.mixed.validate().unwrap();
        assert!(balanced_beam_splitter(3).defect() < 1e-14);
    }
}
