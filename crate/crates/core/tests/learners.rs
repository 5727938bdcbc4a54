use gaussian_tomo_core::bounds::{nr_single_mode, nr_tmsv, SymplecticVariant};
use gaussian_tomo_core::linalg::{gaussian_factor, operator_norm, RealMatrix, RealVector};
use gaussian_tomo_core::measurement::ExactSampler;
use gaussian_tomo_core::symplectic::{random_symplectic, SYMPL_TOL};
use gaussian_tomo_core::tomography::{
    learn_displacement_single_mode, learn_displacement_tmsv, learn_symplectic_regularized,
    learn_symplectic_regularized_with, learn_symplectic_symmetric, learn_symplectic_vacuum_shared,
    regularized_shots, Accounting, UnitaryOracle,
};
use gaussian_tomo_core::GaussianUnitary;
use statrs::distribution::{ContinuousCDF, Normal};

fn instance(m: usize, z: f64, seed: u64) -> GaussianUnitary {
    let s = random_symplectic(m, z, seed).unwrap();
    let r = RealVector::from_fn(2 * m, |i, _| ((seed as f64) * 0.37 + i as f64).sin());
    GaussianUnitary::new(r, s).unwrap()
}

fn oracle(g: GaussianUnitary, n_bar_in: f64) -> UnitaryOracle {
    UnitaryOracle::new(g, n_bar_in, Accounting::Paper).unwrap()
}

fn s_error(est: &RealMatrix, o: &UnitaryOracle) -> f64 {
    operator_norm(&(est - o.reveal().symplectic().as_matrix()))
}

#[test]
fn huge_eta_single_shot_vacuum_shared() {
    let mut ok = 0;
    for t in 0..100 {
        let mut o = oracle(instance(2, 2.0, t), 1e12);
        let s_hat = learn_symplectic_vacuum_shared(&mut o, 1e6, 1, 1000 + t).unwrap();
        assert_eq!(o.query_count(), 5);
        if s_error(&s_hat, &o) <= 1e-3 {
            ok += 1;
        }
    }
    assert!(ok >= 99, "{ok}/100");
}

#[test]
fn symmetric_estimator_ignores_displacement() {
    for t in 0..20 {
        let base = instance(2, 2.0, t);
        let shifted = GaussianUnitary::new(RealVector::repeat(4, 5.0), base.symplectic().clone()).unwrap();
        let mut a = oracle(base, 16.0);
        let mut b = oracle(shifted, 16.0);
        let ea = learn_symplectic_symmetric(&mut a, 4.0, 50, t).unwrap();
        let eb = learn_symplectic_symmetric(&mut b, 4.0, 50, t).unwrap();
        let da = &ea - a.reveal().symplectic().as_matrix();
        let db = &eb - b.reveal().symplectic().as_matrix();
        assert!(operator_norm(&(da - db)) < 1e-9);
    }
}

fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

#[test]
fn column_error_correlations() {
    let trials = 400;
    let g = instance(1, 1.5, 3);
    let (mut sym_a, mut sym_b, mut vac_a, mut vac_b) = (vec![], vec![], vec![], vec![]);
    for t in 0..trials {
        let mut o = oracle(g.clone(), 1.0);
        let e = learn_symplectic_symmetric(&mut o, 1.0, 1, t).unwrap() - g.symplectic().as_matrix();
        sym_a.push(e[(0, 0)]);
        sym_b.push(e[(0, 1)]);
        let mut o = oracle(g.clone(), 1.0);
        let e = learn_symplectic_vacuum_shared(&mut o, 1.0, 1, t).unwrap() - g.symplectic().as_matrix();
        vac_a.push(e[(0, 0)]);
        vac_b.push(e[(0, 1)]);
    }
    let limit = 4.0 / (trials as f64).sqrt();
    assert!(correlation(&sym_a, &sym_b).abs() <= limit);
    assert!(correlation(&vac_a, &vac_b) >= 0.3);
}

// √(2η²N_S) Σ^{-1/2}(Ŝ − S) has i.i.d. standard normal entries for the
// symmetric design; whitening by L⁻¹ with L Lᵀ = Σ gives the same law.
#[test]
fn symmetric_errors_whiten_to_standard_normal() {
    let g = instance(2, 2.0, 7);
    let s = g.symplectic().as_matrix().clone();
    let sigma = (&s * s.transpose() + RealMatrix::identity(4, 4)) * 0.5;
    let l_inv = gaussian_factor(&sigma).unwrap().try_inverse().unwrap();
    let (eta, n_s) = (3.0, 20u64);
    let scale = (2.0 * eta * eta * n_s as f64).sqrt();
    let mut z = Vec::new();
    for t in 0..100 {
        let mut o = oracle(g.clone(), eta * eta);
        let e = learn_symplectic_symmetric(&mut o, eta, n_s, 500 + t).unwrap() - &s;
        z.extend((&l_inv * e * scale).iter().copied());
    }
    z.sort_by(f64::total_cmp);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let n = z.len() as f64;
    let ks = z
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    // 1.95/√n is the 0.1% critical value.
    assert!(ks < 1.95 / n.sqrt(), "KS statistic {ks}");
}

#[test]
fn regularized_exact_and_counted() {
    let g = instance(2, 2.0, 11);
    let n_s = regularized_shots(SymplecticVariant::VacuumShared, 2, 2.0, 100.0, 0.3, 0.1).unwrap();
    let mut o = oracle(g.clone(), 1e4);
    let est = learn_symplectic_regularized_with(&mut o, SymplecticVariant::VacuumShared, 100.0, n_s, 0.3, &mut ExactSampler)
        .unwrap();
    assert!(operator_norm(&(est.s_tilde.as_matrix() - g.symplectic().as_matrix())) < 1e-10);
    assert_eq!(o.query_count(), 5 * n_s);
    assert_eq!(est.queries_used, 5 * n_s);
}

#[test]
fn regularized_meets_tau() {
    let (tau, delta, trials) = (0.3, 0.1, 100);
    let mut ok = 0;
    for t in 0..trials {
        let mut o = oracle(instance(2, 2.0, 40 + t), 1e4);
        let est = learn_symplectic_regularized(&mut o, SymplecticVariant::VacuumShared, 100.0, tau, delta, 2.0, t).unwrap();
        assert!(est.s_tilde.defect() <= SYMPL_TOL);
        if s_error(est.s_tilde.as_matrix(), &o) <= tau {
            ok += 1;
        }
    }
    let floor = 1.0 - delta - 3.0 * (delta * (1.0 - delta) / trials as f64).sqrt();
    assert!(ok as f64 / trials as f64 >= floor);
}

#[test]
fn tmsv_large_nu_single_query() {
    let mut ok = 0;
    for t in 0..100 {
        let g = instance(2, 2.0, t);
        let s = g.symplectic().clone();
        let r = g.displacement().clone();
        let mut o = oracle(g, 4.0 * 1e6);
        let est = learn_displacement_tmsv(&mut o, &s, 1e6, 1, t).unwrap();
        assert_eq!(o.query_count(), 1);
        if (est.r_tilde - r).norm() <= 1e-2 {
            ok += 1;
        }
    }
    assert!(ok >= 99);
}

#[test]
fn single_mode_large_squeezing_single_query() {
    let mut ok = 0;
    for t in 0..100 {
        let g = instance(2, 2.0, t);
        let s = g.symplectic().clone();
        let r = g.displacement().clone();
        let mut o = oracle(g, 1e6);
        let est = learn_displacement_single_mode(&mut o, &s, 1e6, 1, t).unwrap();
        assert_eq!(o.query_count(), 2);
        if (est.r_tilde - r).norm() <= 1e-2 {
            ok += 1;
        }
    }
    assert!(ok >= 99);
}

// Imperfect S̃ with the shot counts taken from the measured mismatch.
#[test]
fn displacement_learners_with_mismatch() {
    let (m, eps, delta, trials) = (2, 0.1, 0.1, 200u64);
    let floor = 1.0 - delta - 3.0 * (delta * (1.0 - delta) / trials as f64).sqrt();
    let (mut ok_tmsv, mut ok_sm) = (0, 0);
    for t in 0..trials {
        let g = instance(m, 2.0, 300 + t);
        let r = g.displacement().clone();
        let mut est_o = oracle(g.clone(), 1e4);
        let s_tilde = learn_symplectic_regularized(&mut est_o, SymplecticVariant::Symmetric, 100.0, 0.05, 0.1, 2.0, t)
            .unwrap()
            .s_tilde;
        let d_norm = operator_norm(&(s_tilde.inverse().as_matrix() * g.symplectic().as_matrix() - RealMatrix::identity(4, 4)));
        let d_protocol = operator_norm(&(g.symplectic().as_matrix() * s_tilde.inverse().as_matrix() - RealMatrix::identity(4, 4)));
        let nu = 10.0;
        let n_r = nr_tmsv(m, nu, d_norm.max(d_protocol), eps, delta).ceil() as u64;
        let mut o = oracle(g.clone(), 1e4);
        let a = learn_displacement_tmsv(&mut o, &s_tilde, nu, n_r, t).unwrap();
        if (a.r_tilde - &r).norm() <= eps {
            ok_tmsv += 1;
        }
        let z_in = 5.0;
        let n_r = nr_single_mode(m, z_in, d_norm.max(d_protocol), eps, delta).ceil() as u64;
        let mut o = oracle(g, 1e4);
        let b = learn_displacement_single_mode(&mut o, &s_tilde, z_in, n_r, t).unwrap();
        assert_eq!(o.query_count(), 2 * n_r);
        if (b.r_tilde - &r).norm() <= eps {
            ok_sm += 1;
        }
    }
    assert!(ok_tmsv as f64 / trials as f64 >= floor, "tmsv {ok_tmsv}");
    assert!(ok_sm as f64 / trials as f64 >= floor, "single-mode {ok_sm}");
}
