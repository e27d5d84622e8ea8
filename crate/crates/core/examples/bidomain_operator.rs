//! Assembles the bidomain operator for an anisotropic fiber field, checks
//! the monodomain reduction and recovers the two potentials.

use std::f64::consts::PI;
use std::sync::Arc;

use bidomain_periodic::bidomain::{assemble_elliptic, BidomainOperator, ConductivityField};
use bidomain_periodic::diffusion::DiffusionOperator;
use bidomain_periodic::grid::{integrate, make_grid, project_mean_zero, ScalarField};

fn main() -> bidomain_periodic::Result<()> {
    let grid = make_grid(2, &[17, 17], &[1.0, 1.0])?;
    let fiber = |scale: f64| {
        ConductivityField::from_fn(&grid, move |x, y| {
            let bump = 16.0 * x * (1.0 - x) * y * (1.0 - y);
            let (s, c) = (0.6 * bump).sin_cos();
            let (l, t) = (2.0 * scale, 0.5 * scale);
            [l * c * c + t * s * s, (l - t) * s * c, l * s * s + t * c * c]
        })
    };
    let lambda0 = 2.0;
    let op_i = Arc::new(assemble_elliptic(&grid, &fiber(lambda0)?)?);
    let op_e = Arc::new(assemble_elliptic(&grid, &fiber(1.0)?)?);
    let a = BidomainOperator::new(op_i, op_e)?;

    let f = ScalarField::from_fn(&grid, |x, y| (PI * x).cos() + x * y);
    let af = a.apply_field(&f)?;
    let ae = a.op_e().apply_field(&project_mean_zero(&f))?;
    let err = af
        .values()
        .iter()
        .zip(ae.values())
        .map(|(p, q)| (p - lambda0 / (1.0 + lambda0) * q).abs())
        .fold(0.0, f64::max);
    println!("monodomain identity, max deviation {err:.2e}");

    let spectral = a.spectral()?;
    println!("smallest eigenvalues {:?}", &spectral.values()[..4]);

    let ii = ScalarField::from_fn(&grid, |x, _| (2.0 * PI * x).cos() + 0.5);
    let ie = ScalarField::constant(&grid, -0.5);
    let source = a.modified_source(&ii, &ie)?;
    let (ui, ue) = a.recover_potentials(&f, &ii, &ie)?;
    println!("modified source mean {:.2e}", integrate(&source) / grid.measure());
    println!("mean of u_e {:.2e}, u_i(centre) {:.6}", integrate(&ue), ui.values()[grid.index(8, 8)]);
    Ok(())
}
