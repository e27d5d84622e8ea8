//! Maximal-regularity ratio `||A u|| / ||f||` in `L^p(0,T; D_A(theta,p))`
//! for the three admissible families and one refinement.

use std::f64::consts::PI;

use bidomain_periodic::experiment::{ExperimentConfig, Setup};
use bidomain_periodic::grid::PeriodicTrajectory;
use bidomain_periodic::ionic::IonicModelSpec;
use bidomain_periodic::periodic::{maximal_regularity_ratio, solve_linear_periodic, CoupledOperator, PeriodicSolveConfig};
use bidomain_periodic::semigroup::{SectorialOperator, SeminormQuadrature};

fn ratio(cop: &CoupledOperator, config: &PeriodicSolveConfig) -> bidomain_periodic::Result<(f64, f64)> {
    let comps = cop.components();
    let f = PeriodicTrajectory::from_fn(cop.grid(), 1.0, comps, config.samples, |t, x, _| {
        let mut v = vec![0.0; comps];
        v[0] = (2.0 * PI * t).cos() * (PI * x).cos() + 0.5 * (4.0 * PI * t + 1.0).cos() * (3.0 * PI * x).cos();
        v
    })?;
    let (u, _) = solve_linear_periodic(cop, &f, config)?;
    let mr = maximal_regularity_ratio(cop, &u, &f, config.theta, config.p, &SeminormQuadrature::default())?;
    Ok((mr.ratio, mr.e_ratio))
}

fn main() -> bidomain_periodic::Result<()> {
    let config = PeriodicSolveConfig::default();
    let models = [
        IonicModelSpec::fitzhugh_nagumo(0.1, 1.0, 0.05, 1.0)?,
        IonicModelSpec::rogers_mcculloch(0.1, 1.0, 0.01, 1.0, 1.0)?,
        IonicModelSpec::allen_cahn(),
    ];
    for model in models {
        let mut cfg = ExperimentConfig::example();
        cfg.model = model;
        let coarse = Setup::new(&cfg)?;
        let fine = Setup::on_grid(&cfg, coarse.grid.refined())?;
        let (rc, ec) = ratio(&coarse.coupled(1e-12)?, &config)?;
        let (rf, _) = ratio(&fine.coupled(1e-12)?, &config)?;
        println!(
            "{}: ratio {rc:.5} (E-norm ratio {ec:.3}), refined {rf:.5}, drift {:.2e}",
            model.variant.short_name(),
            (rf - rc).abs() / rc
        );
    }
    Ok(())
}
