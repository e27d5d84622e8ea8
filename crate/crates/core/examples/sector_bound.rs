//! Samples `|lambda| ||(lambda + A)^{-1} f|| / ||f||` over the default
//! sector and compares the supremum across one grid refinement.

use std::sync::Arc;

use bidomain_periodic::bidomain::{assemble_elliptic, BidomainOperator, ConductivityField};
use bidomain_periodic::grid::{make_grid, Grid};
use bidomain_periodic::periodic::CoupledOperator;
use bidomain_periodic::semigroup::{default_sector_samples, verify_sector_bound, SectorialOperator};

fn sweep(grid: &Grid) -> bidomain_periodic::Result<f64> {
    let si = ConductivityField::from_fn(grid, |x, _| [1.0 + 2.0 * x, 0.0, 0.0])?;
    let op_i = Arc::new(assemble_elliptic(grid, &si)?);
    let op_e = Arc::new(assemble_elliptic(grid, &ConductivityField::isotropic(grid, 1.0))?);
    let op = CoupledOperator::single(Arc::new(BidomainOperator::new(op_i, op_e)?), 1.0, 0.0)?;
    let probes: Vec<Vec<f64>> = (1..=3)
        .map(|k| {
            (0..op.grid().node_count())
                .map(|n| (k as f64 * std::f64::consts::PI * op.grid().coordinates(n)[0]).cos())
                .collect()
        })
        .collect();
    let (angles, radii) = default_sector_samples();
    let report = verify_sector_bound(&op, &angles, &radii, &probes, &[2.0])?;
    println!("{} nodes: sup {:.6}, {} failed solves", grid.node_count(), report.sup, report.failures);
    Ok(report.sup)
}

fn main() -> bidomain_periodic::Result<()> {
    let grid = make_grid(1, &[33], &[1.0])?;
    let coarse = sweep(&grid)?;
    let fine = sweep(&grid.refined())?;
    println!("relative drift {:.3e}", (fine - coarse).abs() / coarse);
    Ok(())
}
