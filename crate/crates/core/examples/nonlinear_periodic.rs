//! Contraction iteration for FitzHugh-Nagumo about the rest state (0, 0)
//! with a small periodic current on a 33-node interval.

use std::f64::consts::PI;
use std::sync::Arc;

use bidomain_periodic::bidomain::{assemble_elliptic, BidomainOperator, ConductivityField};
use bidomain_periodic::grid::{make_grid, PeriodicTrajectory};
use bidomain_periodic::ionic::{equilibria, linearize, IonicModelSpec};
use bidomain_periodic::periodic::{
    absolute_trajectory, solve_nonlinear_periodic, CoupledOperator, PeriodicSolveConfig,
};

fn main() -> bidomain_periodic::Result<()> {
    let grid = make_grid(1, &[33], &[1.0])?;
    let op_i = Arc::new(assemble_elliptic(&grid, &ConductivityField::isotropic(&grid, 1.0))?);
    let op_e = Arc::new(assemble_elliptic(&grid, &ConductivityField::isotropic(&grid, 1.0))?);
    let a = Arc::new(BidomainOperator::new(op_i, op_e)?);

    let model = IonicModelSpec::fitzhugh_nagumo(0.1, 1.0, 0.05, 1.0)?;
    let eq = equilibria(&model)?.by_index(1).expect("origin");
    let cop = CoupledOperator::from_linearization(a, &linearize(&model, &eq))?;

    let config = PeriodicSolveConfig { samples: 32, ..Default::default() };
    let current = PeriodicTrajectory::from_fn(&grid, 1.0, 1, config.samples, |t, x, _| {
        vec![1e-3 * (2.0 * PI * t).cos() * (PI * x).cos()]
    })?;

    let (v, report) = solve_nonlinear_periodic(&model, &eq, &current, &cop, &config)?;
    println!("outer iterations   {}", report.outer_iterations);
    println!("update norms       {:?}", report.update_norms);
    println!("contraction ratios {:?}", report.contraction_ratios);
    println!("residual           {:.3e}", report.residual.unwrap_or(f64::NAN));
    println!("mr ratio           {:.4}", report.mr_ratio.unwrap_or(f64::NAN));
    println!("wall clock         {:.2} s", report.wall_clock_seconds);

    let u = absolute_trajectory(&v, &eq);
    println!("max |u| over the period {:.3e}", u.max_abs());
    Ok(())
}
