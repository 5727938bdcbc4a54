use alloc::vec::Vec;
use alloc::{format, vec};

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{omega, SymplecticMatrix, SYMPL_TOL};
use crate::linalg::{distance_from_identity, operator_norm, symmetrize, RealMatrix, RealVector};
use crate::{Error, Result};

/// `S = O₁ · diag(z₁, 1/z₁, …, z_m, 1/z_m) · O₂` with `O₁`, `O₂` orthogonal
/// symplectic and `z₁ ≥ … ≥ z_m ≥ 1`.
#[derive(Debug, Clone)]
pub struct EulerFactors {
    pub o1: RealMatrix,
    pub o2: RealMatrix,
    pub z: Vec<f64>,
}

impl EulerFactors {
    pub fn squeezing(&self) -> RealMatrix {
        squeezing_matrix(&self.z)
    }

    pub fn reconstruct(&self) -> RealMatrix {
        &self.o1 * self.squeezing() * &self.o2
    }
}

/// `⊕_j diag(z_j, 1/z_j)`.
pub fn squeezing_matrix(z: &[f64]) -> RealMatrix {
    let mut d = RealMatrix::zeros(2 * z.len(), 2 * z.len());
    for (j, &zj) in z.iter().enumerate() {
        d[(2 * j, 2 * j)] = zj;
        d[(2 * j + 1, 2 * j + 1)] = 1.0 / zj;
    }
    d
}

/// Euler (Bloch–Messiah) decomposition.
///
/// Works from the eigenvectors of `SᵀS`: for each squeezing value the
/// eigenvector `v` with eigenvalue `z²` is paired with `w = −Ωv`, which has
/// eigenvalue `1/z²`. Degenerate clusters (in particular the unsqueezed
/// eigenvalue 1) are resolved by a pivoted symplectic Gram–Schmidt pass.
pub fn euler_decompose(s: &SymplecticMatrix) -> Result<EulerFactors> {
    let m = s.modes();
    let n = 2 * m;
    let mat = s.as_matrix();
    let gram = symmetrize(&(mat.transpose() * mat));
    let eig = SymmetricEigen::new(gram.clone());
    let om = omega(m);

    let mut candidates: Vec<(f64, RealVector)> = (0..n)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors.column(k).into_owned()))
        .collect();
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut basis = RealMatrix::zeros(n, n);
    let mut z = Vec::with_capacity(m);
    let mut used = vec![false; n];
    for pair in 0..m {
        let mut best: Option<(usize, f64, RealVector)> = None;
        for (k, (lambda, v)) in candidates.iter().enumerate() {
            if used[k] {
                continue;
            }
            let mut u = v.clone();
            for _ in 0..2 {
                for j in 0..2 * pair {
                    let c = basis.column(j);
                    let overlap = c.dot(&u);
                    u.axpy(-overlap, &c, 1.0);
                }
            }
            let score = u.norm_squared() * lambda.max(0.0);
            if best.as_ref().map_or(true, |b| score > b.1) {
                best = Some((k, score, u));
            }
        }
        let (k, _, u) = best.ok_or_else(|| Error::Decomposition("ran out of candidates".into()))?;
        let norm = u.norm();
        if norm < 1e-6 {
            return Err(Error::Decomposition(format!(
                "residual norm {norm:e} too small for pair {pair}"
            )));
        }
        used[k] = true;
        let v = u / norm;
        let w = -(&om * &v);
        let rayleigh = v.dot(&(&gram * &v));
        z.push(Float::sqrt(rayleigh.max(1.0)));
        basis.set_column(2 * pair, &v);
        basis.set_column(2 * pair + 1, &w);
    }

    let o2 = basis.transpose();
    let zinv = squeezing_matrix(&z.iter().map(|x| 1.0 / x).collect::<Vec<_>>());
    let o1 = mat * &basis * zinv;
    let factors = EulerFactors { o1, o2, z };

    let scale = s.operator_norm().max(1.0);
    let tol = SYMPL_TOL * scale * scale;
    for (name, o) in [("O1", &factors.o1), ("O2", &factors.o2)] {
        let orth = distance_from_identity(&(o.transpose() * o));
        let sympl = super::symplectic_defect(o)?;
        if orth > tol || sympl > tol {
            return Err(Error::Decomposition(format!(
                "{name} is not orthogonal symplectic (orthogonality {orth:e}, symplecticity {sympl:e})"
            )));
        }
    }
    let recon = operator_norm(&(factors.reconstruct() - mat));
    if recon > 1e-8 * scale {
        return Err(Error::Decomposition(format!(
            "reconstruction error {recon:e}"
        )));
    }
    Ok(factors)
}

/// Real `2m × 2m` image of an `m × m` unitary `U = X + iY` under the
/// interleaved convention: block `(j, k)` is `[[X_jk, −Y_jk], [Y_jk, X_jk]]`.
pub fn unitary_to_orthogonal(u: &DMatrix<Complex<f64>>) -> RealMatrix {
    let m = u.nrows();
    let mut o = RealMatrix::zeros(2 * m, 2 * m);
    for j in 0..m {
        for k in 0..m {
            let c = u[(j, k)];
            o[(2 * j, 2 * k)] = c.re;
            o[(2 * j, 2 * k + 1)] = -c.im;
            o[(2 * j + 1, 2 * k)] = c.im;
            o[(2 * j + 1, 2 * k + 1)] = c.re;
        }
    }
    o
}

/// Haar-random passive (orthogonal symplectic) transformation.
pub fn random_passive<R: Rng + ?Sized>(m: usize, rng: &mut R) -> SymplecticMatrix {
    let g = DMatrix::<Complex<f64>>::from_fn(m, m, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..m {
        let d = r[(k, k)];
        let norm = Float::sqrt(d.re * d.re + d.im * d.im);
        let phase = if norm > 0.0 { d / norm } else { Complex::new(1.0, 0.0) };
        for i in 0..m {
            q[(i, k)] *= phase;
        }
    }
    SymplecticMatrix::from_matrix_unchecked(unitary_to_orthogonal(&q))
}

/// Random `S = O₁ D(z) O₂` with Haar passive factors, `z₁ = z_max` and the
/// other squeezing values log-uniform in `[1, z_max]`, so `‖S‖∞ = z_max`.
pub fn random_symplectic(m: usize, z_max: f64, seed: u64) -> Result<SymplecticMatrix> {
    if m == 0 {
        return Err(Error::dimension("mode count must be positive"));
    }
    if !(z_max >= 1.0 && z_max.is_finite()) {
        return Err(Error::domain("z_max", format!("need z_max >= 1, got {z_max}")));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let o1 = random_passive(m, &mut rng);
    let o2 = random_passive(m, &mut rng);
    let ln_z = Float::ln(z_max);
    let z: Vec<f64> = (0..m)
        .map(|j| {
            if j == 0 {
                z_max
            } else {
                Float::exp(rng.random::<f64>() * ln_z)
            }
        })
        .collect();
    let s = o1.as_matrix() * squeezing_matrix(&z) * o2.as_matrix();
    let tol = SYMPL_TOL * z_max * z_max;
    SymplecticMatrix::new(s, tol.max(SYMPL_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_decomposes() {
        let f = euler_decompose(&SymplecticMatrix::identity(3)).unwrap();
        assert!(f.z.iter().all(|&z| (z - 1.0).abs() < 1e-12));
        assert!(operator_norm(&(f.reconstruct() - RealMatrix::identity(6, 6))) < 1e-12);
    }

    #[test]
    fn passive_is_orthogonal() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let o = random_passive(4, &mut rng);
        assert!(distance_from_identity(&(o.as_matrix().transpose() * o.as_matrix())) < 1e-12);
        assert!(o.defect() < 1e-12);
    }

    #[test]
    fn rejects_bad_squeezing() {
        assert!(random_symplectic(2, 0.5, 0).is_err());
        assert!(random_symplectic(0, 2.0, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn euler_round_trip(m in 1usize..6, z in 1.0f64..8.0, seed in any::<u64>()) {
            let s = random_symplectic(m, z, seed).unwrap();
            let f = euler_decompose(&s).unwrap();
            prop_assert!(operator_norm(&(f.reconstruct() - s.as_matrix())) <= 1e-8);
            prop_assert!((f.z[0] - z).abs() <= 1e-8 * z);
            prop_assert!(f.z.windows(2).all(|w| w[0] >= w[1] - 1e-9));
            prop_assert!(f.z.iter().all(|&zj| zj >= 1.0));
        }

        #[test]
        fn random_norm_is_z_max(m in 1usize..6, z in 1.0f64..8.0, seed in any::<u64>()) {
            let s = random_symplectic(m, z, seed).unwrap();
            prop_assert!((s.operator_norm() - z).abs() <= 1e-9 * z);
        }
    }

    #[test]
    fn degenerate_squeezing_decomposes() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let o1 = random_passive(3, &mut rng);
        let o2 = random_passive(3, &mut rng);
        let s = o1.as_matrix() * squeezing_matrix(&[2.0, 2.0, 1.0]) * o2.as_matrix();
        let s = SymplecticMatrix::try_from_matrix(s).unwrap();
        let f = euler_decompose(&s).unwrap();
        assert!(operator_norm(&(f.reconstruct() - s.as_matrix())) < 1e-9);
        assert!((f.z[1] - 2.0).abs() < 1e-9);
    }
}
