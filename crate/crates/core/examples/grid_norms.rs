//! Grids, trapezoid quadrature and the Bochner norm of a periodic field.

use std::f64::consts::PI;

use bidomain_periodic::grid::{bochner_norm, integrate, lq_norm, make_grid, state_lq_norm, PeriodicTrajectory, ScalarField};

fn main() -> bidomain_periodic::Result<()> {
    let grid = make_grid(2, &[17, 9], &[2.0, 1.0])?;
    println!("{} nodes, spacing {:?}, measure {}", grid.node_count(), grid.spacing(), grid.measure());

    let f = ScalarField::from_fn(&grid, |x, y| (PI * x / 2.0).cos() * (PI * y).cos() + 1.0);
    println!("integral        {:.12}", integrate(&f));
    println!("L2 norm         {:.12}", lq_norm(&f, 2.0)?);
    println!("max norm        {:.12}", lq_norm(&f, f64::INFINITY)?);

    let traj = PeriodicTrajectory::from_fn(&grid, 1.0, 1, 16, |t, x, _| vec![(2.0 * PI * t).cos() * x])?;
    let b = bochner_norm(&traj, 2.0, |s| state_lq_norm(&grid, s, 2.0))?;
    println!("L2(0,T; L2)     {b:.12}");
    Ok(())
}
