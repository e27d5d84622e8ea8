use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;

use super::conductivity::{check_ellipticity, ConductivityField, FaceAveraging};
use crate::diffusion::{DiffusionOperator, Spectral};
use crate::error::Result;
use crate::grid::{Grid, ScalarField};
use crate::linalg::CsrMatrix;

/// Discrete `u -> -div(sigma grad u)` with zero-flux boundary conditions.
///
/// Stored as a symmetric stiffness matrix `K` with zero row sums; the
/// operator on nodal values is `W^{-1} K` with `W` the trapezoid weights.
/// Dividing the boundary rows by their half weights reproduces the
/// mirror-ghost Neumann stencil.
#[derive(Debug)]
pub struct EllipticOperator {
    grid: Grid,
    stiffness: CsrMatrix,
    inv_weights: Vec<f64>,
    spectral: OnceLock<Arc<Spectral>>,
}

/// Assembles with arithmetic face averaging.
pub fn assemble_elliptic(grid: &Grid, sigma: &ConductivityField) -> Result<EllipticOperator> {
    assemble_elliptic_with(grid, sigma, FaceAveraging::Arithmetic)
}

pub fn assemble_elliptic_with(
    grid: &Grid,
    sigma: &ConductivityField,
    averaging: FaceAveraging,
) -> Result<EllipticOperator> {
    if sigma.grid() != grid {
        return Err(crate::error::Error::arg("conductivity lives on a different grid"));
    }
    check_ellipticity(sigma)?;
    sigma.check_boundary()?;

    let mut t: Vec<(usize, usize, f64)> = Vec::new();
    let mut edge = |a: usize, b: usize, c: f64| {
        t.push((a, a, c));
        t.push((b, b, c));
        t.push((a, b, -c));
        t.push((b, a, -c));
    };

    if grid.dimension() == 1 {
        let n = grid.extents()[0];
        let h = grid.spacing()[0];
        for i in 0..n - 1 {
            let s = averaging.combine(sigma.tensor(i)[0], sigma.tensor(i + 1)[0]);
            edge(i, i + 1, s / h);
        }
    } else {
        let (nx, ny) = (grid.extents()[0], grid.extents()[1]);
        let (hx, hy) = (grid.spacing()[0], grid.spacing()[1]);
        let eff = |k: usize, n: usize, h: f64| if k == 0 || k == n - 1 { 0.5 * h } else { h };
        for j in 0..ny {
            for i in 0..nx - 1 {
                let (a, b) = (grid.index(i, j), grid.index(i + 1, j));
                let s = averaging.combine(sigma.tensor(a)[0], sigma.tensor(b)[0]);
                edge(a, b, s * eff(j, ny, hy) / hx);
            }
        }
        for j in 0..ny - 1 {
            for i in 0..nx {
                let (a, b) = (grid.index(i, j), grid.index(i, j + 1));
                let s = averaging.combine(sigma.tensor(a)[2], sigma.tensor(b)[2]);
                edge(a, b, s * eff(i, nx, hx) / hy);
            }
        }
        // Mixed derivative, cell by cell: energy |cell| * 2 s12 gx gy with the
        // cell-averaged gradient. Absent when s12 vanishes.
        let area = hx * hy;
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let corners = [
                    grid.index(i, j),
                    grid.index(i + 1, j),
                    grid.index(i, j + 1),
                    grid.index(i + 1, j + 1),
                ];
                let s12: f64 = corners.iter().map(|&k| sigma.tensor(k)[1]).sum::<f64>() / 4.0;
                if s12 == 0.0 {
                    continue;
                }
                let gx = [-1.0 / (2.0 * hx), 1.0 / (2.0 * hx), -1.0 / (2.0 * hx), 1.0 / (2.0 * hx)];
                let gy = [-1.0 / (2.0 * hy), -1.0 / (2.0 * hy), 1.0 / (2.0 * hy), 1.0 / (2.0 * hy)];
                for r in 0..4 {
                    for c in 0..4 {
                        let v = area * s12 * (gx[r] * gy[c] + gy[r] * gx[c]);
                        t.push((corners[r], corners[c], v));
                    }
                }
            }
        }
    }

    let n = grid.node_count();
    let stiffness = CsrMatrix::from_triplets(n, t);
    Ok(EllipticOperator {
        grid: grid.clone(),
        stiffness,
        inv_weights: grid.weights().iter().map(|w| 1.0 / w).collect(),
        spectral: OnceLock::new(),
    })
}

impl EllipticOperator {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// The symmetric stiffness matrix `K`.
    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    /// The operator matrix `W^{-1} K` acting on nodal values.
    pub fn matrix(&self) -> CsrMatrix {
        let t = self
            .stiffness
            .triplets()
            .into_iter()
            .map(|(r, c, v)| (r, c, v * self.inv_weights[r]))
            .collect();
        CsrMatrix::from_triplets(self.grid.node_count(), t)
    }

    pub fn apply_field(&self, field: &ScalarField) -> Result<ScalarField> {
        self.grid.check_len(field.values().len(), "field")?;
        let mut y = vec![0.0; self.grid.node_count()];
        DiffusionOperator::apply(self, field.values(), &mut y)?;
        Ok(ScalarField::from_parts(&self.grid, y))
    }
}

impl DiffusionOperator for EllipticOperator {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.stiffness.mul_vec(x, y);
        for (yi, wi) in y.iter_mut().zip(&self.inv_weights) {
            *yi *= wi;
        }
        Ok(())
    }

    fn spectral_cell(&self) -> &OnceLock<Arc<Spectral>> {
        &self.spectral
    }

    fn symmetrized_dense(&self) -> Result<DMatrix<f64>> {
        let n = self.grid.node_count();
        let mut s = DMatrix::zeros(n, n);
        for (r, c, v) in self.stiffness.triplets() {
            s[(r, c)] = v * (self.inv_weights[r] * self.inv_weights[c]).sqrt();
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn laplacian_1d(n: usize, sigma: f64) -> EllipticOperator {
        let g = make_grid(1, &[n], &[1.0]).unwrap();
        assemble_elliptic(&g, &ConductivityField::isotropic(&g, sigma)).unwrap()
    }

    #[test]
    fn cosine_modes_converge_at_second_order() {
        for k in 1..=3 {
            let exact = (k as f64 * PI).powi(2);
            let mut errs = Vec::new();
            for n in [17usize, 33, 65] {
                let op = laplacian_1d(n, 1.0);
                let f = ScalarField::from_fn(op.grid(), |x, _| (k as f64 * PI * x).cos());
                let af = op.apply_field(&f).unwrap();
                // Rayleigh quotient in the W inner product
                let w = op.grid().weights();
                let num: f64 = (0..n).map(|i| w[i] * af.values()[i] * f.values()[i]).sum();
                let den: f64 = (0..n).map(|i| w[i] * f.values()[i].powi(2)).sum();
                errs.push((num / den - exact).abs());
            }
            let order1 = (errs[0] / errs[1]).log2();
            let order2 = (errs[1] / errs[2]).log2();
            assert!(order1 > 1.9 && order2 > 1.9, "k={k}: {errs:?}");
        }
    }

    #[test]
    fn discrete_cosines_are_exact_eigenvectors() {
        let n = 17;
        let op = laplacian_1d(n, 1.0);
        let h = 1.0 / (n - 1) as f64;
        for k in 0..n {
            let f = ScalarField::from_fn(op.grid(), |x, _| (k as f64 * PI * x).cos());
            let af = op.apply_field(&f).unwrap();
            let mu = 4.0 / (h * h) * (k as f64 * PI * h / 2.0).sin().powi(2);
            for i in 0..n {
                assert!((af.values()[i] - mu * f.values()[i]).abs() < 1e-9 * (1.0 + mu));
            }
        }
    }

    #[test]
    fn constants_in_kernel_and_linear_in_sigma() {
        let one = laplacian_1d(9, 1.0);
        let two = laplacian_1d(9, 2.0);
        let c = ScalarField::constant(one.grid(), 3.7);
        assert!(one.apply_field(&c).unwrap().values().iter().all(|v| v.abs() <= 1e-12 * 3.7));
        let a1 = one.matrix().to_dense();
        let a2 = two.matrix().to_dense();
        for r in 0..9 {
            for s in 0..9 {
                assert_eq!(a2[r][s], 2.0 * a1[r][s]);
            }
        }
    }

    #[test]
    fn mixed_stencil_only_when_needed() {
        let g = make_grid(2, &[5, 4], &[1.0, 0.6]).unwrap();
        let diag = assemble_elliptic(&g, &ConductivityField::constant(&g, [1.0, 0.0, 2.0])).unwrap();
        // 5-point: at most 5 entries per row
        assert!(diag.stiffness().nnz() <= 5 * g.node_count());
        let fiber = ConductivityField::from_fn(&g, |_, _| [2.0, 0.4, 1.0]).unwrap();
        let masked: Vec<[f64; 3]> = (0..g.node_count())
            .map(|k| {
                let t = fiber.tensor(k);
                if g.is_boundary(k) { [t[0], 0.0, t[2]] } else { t }
            })
            .collect();
        let fiber = ConductivityField::new(&g, masked).unwrap();
        let op = assemble_elliptic(&g, &fiber).unwrap();
        assert!(op.stiffness().nnz() > diag.stiffness().nnz());
        assert!(op.stiffness().asymmetry() < 1e-12);
        assert!(op.stiffness().row_sums().iter().all(|s| s.abs() < 1e-12));
    }

    #[test]
    fn rejects_bad_tensors() {
        let g = make_grid(2, &[4, 4], &[1.0, 1.0]).unwrap();
        assert!(assemble_elliptic(&g, &ConductivityField::constant(&g, [1.0, 2.0, 1.0])).is_err());
        assert!(assemble_elliptic(&g, &ConductivityField::constant(&g, [1.0, 0.1, 1.0])).is_err());
    }

    fn graded(g: &Grid) -> ConductivityField {
        let m: Vec<[f64; 3]> = (0..g.node_count())
            .map(|k| {
                let [x, y] = g.coordinates(k);
                let s12 = if g.is_boundary(k) { 0.0 } else { 0.3 * (x * y).sin() };
                [1.0 + x, s12, 0.5 + y * y]
            })
            .collect();
        ConductivityField::new(g, m).unwrap()
    }

    proptest! {
        #[test]
        fn stiffness_symmetric_psd(xs in proptest::collection::vec(-1.0f64..1.0, 42)) {
            let g = make_grid(2, &[7, 6], &[1.0, 0.8]).unwrap();
            let op = assemble_elliptic(&g, &graded(&g)).unwrap();
            let k = op.stiffness();
            prop_assert!(k.asymmetry() < 1e-12);
            let mut y = vec![0.0; 42];
            k.mul_vec(&xs, &mut y);
            let q: f64 = xs.iter().zip(&y).map(|(a, b)| a * b).sum();
            let nrm: f64 = xs.iter().map(|a| a * a).sum();
            prop_assert!(q >= -1e-10 * nrm);
            for s in k.row_sums() {
                prop_assert!(s.abs() < 1e-12);
            }
        }
    }
}
