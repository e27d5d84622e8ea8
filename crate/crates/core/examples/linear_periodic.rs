//! Linear periodic solves: the scalar surrogate `u' + 2u = cos(2 pi t)`
//! with both methods, then the FitzHugh-Nagumo operator at the origin.

use std::f64::consts::PI;

use bidomain_periodic::experiment::{ExperimentConfig, Setup};
use bidomain_periodic::grid::PeriodicTrajectory;
use bidomain_periodic::periodic::{
    max_sample_difference, solve_linear_periodic, CoupledOperator, PeriodicMethod, PeriodicSolveConfig,
};
use bidomain_periodic::semigroup::SectorialOperator;

fn main() -> bidomain_periodic::Result<()> {
    let (lambda, w) = (2.0, 2.0 * PI);
    let cop = CoupledOperator::scalar_surrogate(lambda);
    let f = PeriodicTrajectory::from_fn(cop.grid(), 1.0, 1, 64, |t, _, _| vec![(w * t).cos()])?;
    let exact = |t: f64| (lambda * (w * t).cos() + w * (w * t).sin()) / (lambda * lambda + w * w);
    for method in [PeriodicMethod::FourierCollocation, PeriodicMethod::InitialValueFixedPoint] {
        let config = PeriodicSolveConfig { method, samples: 64, ..Default::default() };
        let (u, report) = solve_linear_periodic(&cop, &f, &config)?;
        let err = (0..u.len()).map(|k| (u.sample(k)[0] - exact(u.time(k))).abs()).fold(0.0, f64::max);
        println!("{method:?}: max error {err:.3e}, defect {:.1e}", report.periodicity_defect);
    }

    let setup = Setup::new(&ExperimentConfig::example())?;
    let cop = setup.coupled(1e-12)?;
    let f = PeriodicTrajectory::from_fn(&setup.grid, 1.0, 2, 32, |t, x, _| {
        vec![(2.0 * PI * t).cos() * (PI * x).cos() + 0.3 * (6.0 * PI * t).sin(), 0.0]
    })?;
    let fc = PeriodicSolveConfig { krylov_tol: 1e-12, ..Default::default() };
    let iv = PeriodicSolveConfig { method: PeriodicMethod::InitialValueFixedPoint, ..fc.clone() };
    let (u_fc, r_fc) = solve_linear_periodic(&cop, &f, &fc)?;
    let (u_iv, r_iv) = solve_linear_periodic(&cop, &f, &iv)?;
    println!("FHN origin: collocation residual {:.2e}", r_fc.residual.unwrap_or(f64::NAN));
    println!(
        "FHN origin: fixed point {} GMRES iterations, defect {:.2e}",
        r_iv.krylov_iterations.unwrap_or(0),
        r_iv.periodicity_defect
    );
    println!("method discrepancy {:.3e}", max_sample_difference(&u_fc, &u_iv));
    Ok(())
}
