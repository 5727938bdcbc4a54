use gaussian_tomo_core::bounds::{plan_queries, DisplacementVariant, Problem, SymplecticVariant};
use gaussian_tomo_core::symplectic::random_symplectic;
use gaussian_tomo_core::tomography::{learn_unitary, Accounting, UnitaryOracle};
use gaussian_tomo_core::{GaussianUnitary, RealVector, Result};

fn main() -> Result<()> {
    let problem = Problem { m: 2, z: 2.0, n_bar: 1.0, n_bar_in: 1e6, epsilon: 0.5, delta: 0.1 };
    let plan = plan_queries(problem, SymplecticVariant::VacuumShared, DisplacementVariant::Tmsv)?;

    let hidden = GaussianUnitary::new(RealVector::from_vec(vec![0.3, -0.1, 0.7, 0.2]), random_symplectic(2, 2.0, 7)?)?;
    let mut oracle = UnitaryOracle::new(hidden, problem.n_bar_in, Accounting::Paper)?;
    let outcome = learn_unitary(&mut oracle, &plan, 42).map_err(|f| f.error)?;
    println!("diamond bound {:?} after {} queries", outcome.report.combined_bound, oracle.query_count());
    Ok(())
}
