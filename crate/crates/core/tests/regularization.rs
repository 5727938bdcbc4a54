use gaussian_tomo_core::linalg::{distance_from_identity, operator_norm, RealMatrix, RealVector};
use gaussian_tomo_core::symplectic::{
    omega, principal_sqrt, random_symplectic, regularize, regularize_detailed, symplectic_defect,
    twisted_gram, SYMPL_TOL,
};
use nalgebra::SymmetricEigen;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

fn unit_direction(n: usize, rng: &mut ChaCha20Rng) -> RealMatrix {
    let e = RealMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let norm = operator_norm(&e);
    e / norm
}

#[test]
fn left_correction_is_not_symplectic() {
    let mut rng = ChaCha20Rng::seed_from_u64(21);
    let s = random_symplectic(2, 2.0, 5).unwrap();
    let s_hat = s.as_matrix() + unit_direction(4, &mut rng) * 0.05;
    let reg = regularize_detailed(&s_hat).unwrap();
    let q_inv = reg.sqrt_t.clone().try_inverse().unwrap();
    let left = &q_inv * &s_hat;
    let right = &s_hat * &q_inv;
    assert!(symplectic_defect(&left).unwrap() > 1e-4);
    assert!(symplectic_defect(&right).unwrap() < SYMPL_TOL);
    assert!(operator_norm(&(right - reg.s_tilde.as_matrix())) < 1e-12);
}

#[test]
fn right_correction_equals_left_form_with_outer_gram() {
    let mut rng = ChaCha20Rng::seed_from_u64(22);
    let s = random_symplectic(3, 1.5, 8).unwrap();
    let s_hat = s.as_matrix() + unit_direction(6, &mut rng) * 0.02;
    let o = omega(3);
    let outer = -(&s_hat * &o * s_hat.transpose() * &o);
    let q_outer = principal_sqrt(&outer, 1e-12).unwrap();
    let left = q_outer.try_inverse().unwrap() * &s_hat;
    let s_tilde = regularize(&s_hat).unwrap();
    assert!(operator_norm(&(left - s_tilde.as_matrix())) < 1e-11);
}

// Oracle: T = P diag(λ) P⁻¹ with known λ > 0, so √T = P diag(√λ) P⁻¹.
#[test]
fn principal_sqrt_matches_diagonalization() {
    let mut rng = ChaCha20Rng::seed_from_u64(23);
    for _ in 0..50 {
        let n = 6;
        let p = RealMatrix::identity(n, n) + unit_direction(n, &mut rng) * 0.3;
        let p_inv = p.clone().try_inverse().unwrap();
        let lambda: Vec<f64> = (0..n).map(|_| 1.0 + 0.25 * (2.0 * rand::Rng::random::<f64>(&mut rng) - 1.0)).collect();
        let d = RealMatrix::from_diagonal(&RealVector::from_vec(lambda.clone()));
        let t = &p * d * &p_inv;
        if distance_from_identity(&t) >= 1.0 {
            continue;
        }
        let root = RealMatrix::from_diagonal(&RealVector::from_vec(lambda.iter().map(|x| x.sqrt()).collect()));
        let want = &p * root * &p_inv;
        let got = principal_sqrt(&t, 1e-12).unwrap();
        assert!(operator_norm(&(got - want)) < 1e-11);
    }
}

// On a symmetric positive T the principal root is the eigenvalue root.
#[test]
fn principal_sqrt_matches_symmetric_eigen() {
    let mut rng = ChaCha20Rng::seed_from_u64(24);
    for _ in 0..50 {
        let x = unit_direction(8, &mut rng);
        let t = RealMatrix::identity(8, 8) + (&x + x.transpose()) * 0.2;
        let eig = SymmetricEigen::new(t.clone());
        let want = &eig.eigenvectors
            * RealMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
            * eig.eigenvectors.transpose();
        let got = principal_sqrt(&t, 1e-12).unwrap();
        assert!(operator_norm(&(got - want)) < 1e-12);
    }
}

#[test]
fn twisted_gram_deviation_bound() {
    let mut rng = ChaCha20Rng::seed_from_u64(25);
    for &(m, z) in &[(1, 1.0), (2, 2.0), (4, 4.0)] {
        let s = random_symplectic(m, z, 3).unwrap();
        for k in 1..20 {
            let eps = k as f64 * 0.5 / (2.0 * z + 1.0) / 20.0;
            let s_hat = s.as_matrix() + unit_direction(2 * m, &mut rng) * eps;
            let dev = distance_from_identity(&twisted_gram(&s_hat).unwrap());
            assert!(dev <= (2.0 * z + eps) * eps + 1e-12);
        }
    }
}

#[test]
fn regularize_is_identity_on_group() {
    for seed in 0..20 {
        let s = random_symplectic(3, 3.0, seed).unwrap();
        let s_tilde = regularize(s.as_matrix()).unwrap();
        assert!(operator_norm(&(s_tilde.as_matrix() - s.as_matrix())) < 1e-10);
    }
}
