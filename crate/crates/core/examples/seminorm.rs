//! Interpolation seminorm of eigenvectors against the closed form
//! `mu^theta (Gamma((1-theta)p) / p^{(1-theta)p})^{1/p} ||x||`.

use std::sync::Arc;

use bidomain_periodic::bidomain::{assemble_elliptic, BidomainOperator, ConductivityField};
use bidomain_periodic::diffusion::DiffusionOperator;
use bidomain_periodic::experiment::seminorm_closed_form;
use bidomain_periodic::grid::make_grid;
use bidomain_periodic::periodic::CoupledOperator;
use bidomain_periodic::semigroup::{interpolation_seminorm, state_norm, SeminormQuadrature};

fn main() -> bidomain_periodic::Result<()> {
    let grid = make_grid(1, &[65], &[1.0])?;
    let si = ConductivityField::from_fn(&grid, |x, _| [1.0 + x, 0.0, 0.0])?;
    let op_i = Arc::new(assemble_elliptic(&grid, &si)?);
    let op_e = Arc::new(assemble_elliptic(&grid, &ConductivityField::isotropic(&grid, 1.0))?);
    let a = Arc::new(BidomainOperator::new(op_i, op_e)?);
    // A + 1, so that the spectrum is bounded away from zero.
    let shifted = CoupledOperator::single(a.clone(), 1.0, 1.0)?;
    let spectral = a.spectral()?;
    let quad = SeminormQuadrature::default();

    println!("   j        mu  theta   p      quadrature     closed form   rel err");
    for j in [0, 1, 2, 5, 10] {
        let x = spectral.vector(j);
        let mu = spectral.values()[j] + 1.0;
        for (theta, p) in [(0.25, 2.0), (0.5, 2.0), (0.5, 1.0)] {
            let est = interpolation_seminorm(&shifted, &x, theta, p, &quad)?;
            let exact = seminorm_closed_form(mu, theta, p) * state_norm(&grid, &x);
            println!(
                "{j:>4} {mu:>9.3} {theta:>6} {p:>3} {:>15.9} {exact:>15.9} {:>9.2e}",
                est.value,
                (est.value - exact).abs() / exact
            );
        }
    }
    Ok(())
}
