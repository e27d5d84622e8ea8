//! Scalar diffusion operators that are self-adjoint and non-negative in the
//! quadrature inner product `<x, y>_W`, together with their shifted solves
//! and a cached eigendecomposition.

use std::fmt::Debug;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::dense::symmetric_eigen;
use crate::linalg::{cg, gmres, CgOptions, GmresOptions};

/// Largest node count for which the dense eigendecomposition is built.
pub const SPECTRAL_NODE_CAP: usize = 4096;

/// W-orthonormal eigenbasis `A phi_j = mu_j phi_j`, ascending in `mu`.
#[derive(Debug, Clone)]
pub struct Spectral {
    values: Vec<f64>,
    /// Columns are the eigenvectors.
    vectors: DMatrix<f64>,
    weights: Arc<[f64]>,
}

impl Spectral {
    /// From the symmetrized matrix `W^{1/2} A W^{-1/2}`.
    pub(crate) fn from_symmetrized(grid: &Grid, s: DMatrix<f64>) -> Self {
        let sym = (&s + s.transpose()) * 0.5;
        let (mut values, mut q) = symmetric_eigen(sym);
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for v in values.iter_mut() {
            // round-off below zero on the kernel
            if *v < 0.0 && *v > -1e-11 * scale.max(1.0) {
                *v = 0.0;
            }
        }
        let w = grid.weights();
        for r in 0..q.nrows() {
            let f = 1.0 / w[r].sqrt();
            for c in 0..q.ncols() {
                q[(r, c)] *= f;
            }
        }
        Self {
            values,
            vectors: q,
            weights: grid.weights().into(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.vectors.column(j).iter().copied().collect()
    }

    /// `c_j = <phi_j, x>_W`.
    pub fn coefficients(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let wx: Vec<f64> = x.iter().zip(self.weights.iter()).map(|(a, w)| a * w).collect();
        let mut c = vec![0.0; n];
        for (j, cj) in c.iter_mut().enumerate() {
            let col = self.vectors.column(j);
            let mut s = 0.0;
            for i in 0..n {
                s += col[i] * wx[i];
            }
            *cj = s;
        }
        c
    }

    /// `sum_j c_j phi_j`.
    pub fn synthesize(&self, c: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut x = vec![0.0; n];
        for (j, cj) in c.iter().enumerate() {
            if *cj == 0.0 {
                continue;
            }
            let col = self.vectors.column(j);
            for i in 0..n {
                x[i] += cj * col[i];
            }
        }
        x
    }
}

/// Result of a complex shifted solve.
#[derive(Debug, Clone)]
pub struct ComplexSolve {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// A W-self-adjoint, non-negative operator on nodal vectors.
pub trait DiffusionOperator: Send + Sync + Debug {
    fn grid(&self) -> &Grid;

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()>;

    /// A lower bound for the spectrum (0 when constants are in the kernel).
    fn spectral_floor(&self) -> f64 {
        0.0
    }

    /// Storage for the lazily built eigendecomposition.
    fn spectral_cell(&self) -> &OnceLock<Arc<Spectral>>;

    /// Dense `W^{1/2} A W^{-1/2}`; by default assembled column by column.
    fn symmetrized_dense(&self) -> Result<DMatrix<f64>> {
        let grid = self.grid();
        let n = grid.node_count();
        let w = grid.weights();
        let mut s = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0 / w[j].sqrt();
            self.apply(&e, &mut col)?;
            e[j] = 0.0;
            for i in 0..n {
                s[(i, j)] = w[i].sqrt() * col[i];
            }
        }
        Ok(s)
    }

    /// Eigendecomposition, built on first use and shared afterwards.
    fn spectral(&self) -> Result<Arc<Spectral>> {
        if let Some(s) = self.spectral_cell().get() {
            return Ok(s.clone());
        }
        let n = self.grid().node_count();
        if n > SPECTRAL_NODE_CAP {
            return Err(Error::arg(format!(
                "eigendecomposition limited to {SPECTRAL_NODE_CAP} nodes, grid has {n}"
            )));
        }
        let s = Arc::new(Spectral::from_symmetrized(self.grid(), self.symmetrized_dense()?));
        let _ = self.spectral_cell().set(s);
        Ok(self.spectral_cell().get().expect("just set").clone())
    }

    /// Exact `(shift + A)^{-1} f` through the eigendecomposition.
    fn spectral_solve(&self, shift: Complex64, f_re: &[f64], f_im: &[f64]) -> Result<ComplexSolve> {
        let sp = self.spectral()?;
        let cr = sp.coefficients(f_re);
        let ci = sp.coefficients(f_im);
        let mut out_r = vec![0.0; cr.len()];
        let mut out_i = vec![0.0; cr.len()];
        let scale = sp.values().iter().fold(shift.norm(), |m, v| m.max(v.abs()));
        for (j, &mu) in sp.values().iter().enumerate() {
            let d = shift + mu;
            if d.norm() <= 1e-13 * scale {
                return Err(Error::SingularShift(format!("{shift} (eigenvalue {mu})")));
            }
            let c = Complex64::new(cr[j], ci[j]) / d;
            out_r[j] = c.re;
            out_i[j] = c.im;
        }
        Ok(ComplexSolve {
            re: sp.synthesize(&out_r),
            im: sp.synthesize(&out_i),
            iterations: 0,
            residual: 0.0,
        })
    }

    /// Solves `(shift + A) u = rhs` for real `shift`.
    fn solve_shifted(&self, shift: f64, rhs: &[f64], tol: f64) -> Result<Vec<f64>> {
        krylov_shifted(self, shift, rhs, tol)
    }

    /// Solves `(shift + A) u = f` for complex `shift`.
    fn solve_shifted_complex(&self, shift: Complex64, f_re: &[f64], f_im: &[f64], tol: f64) -> Result<ComplexSolve> {
        krylov_shifted_complex(self, shift, f_re, f_im, tol)
    }
}

/// Solves `(shift + A) u = rhs` for real `shift`. CG when the shifted
/// operator is positive definite, GMRES otherwise.
pub fn krylov_shifted<O: DiffusionOperator + ?Sized>(op: &O, shift: f64, rhs: &[f64], tol: f64) -> Result<Vec<f64>> {
    let grid = op.grid();
    let n = grid.node_count();
    grid.check_len(rhs.len(), "right-hand side")?;
    let shifted = |x: &[f64], y: &mut [f64]| -> Result<()> {
        op.apply(x, y)?;
        for i in 0..x.len() {
            y[i] += shift * x[i];
        }
        Ok(())
    };
    if shift + op.spectral_floor() > 0.0 {
        Ok(cg(shifted, rhs, grid.weights(), CgOptions::new(tol, 20 * n + 50))?.x)
    } else {
        let opts = GmresOptions {
            tol,
            max_iter: 20 * n + 50,
            restart: n.min(200),
        };
        Ok(gmres(shifted, rhs, grid.weights(), opts)?.x)
    }
}

/// Solves `(shift + A) u = f` for complex `shift` through the real
/// block system `[[Re s + A, -Im s], [Im s, Re s + A]]`.
pub fn krylov_shifted_complex<O: DiffusionOperator + ?Sized>(
    op: &O,
    shift: Complex64,
    f_re: &[f64],
    f_im: &[f64],
    tol: f64,
) -> Result<ComplexSolve> {
    let grid = op.grid();
    let n = grid.node_count();
    grid.check_len(f_re.len(), "right-hand side")?;
    grid.check_len(f_im.len(), "right-hand side")?;
    if shift.im == 0.0 {
        let re = op.solve_shifted(shift.re, f_re, tol)?;
        let im = op.solve_shifted(shift.re, f_im, tol)?;
        return Ok(ComplexSolve { re, im, iterations: 0, residual: 0.0 });
    }
    let mut b = Vec::with_capacity(2 * n);
    b.extend_from_slice(f_re);
    b.extend_from_slice(f_im);
    let mut w2 = Vec::with_capacity(2 * n);
    w2.extend_from_slice(grid.weights());
    w2.extend_from_slice(grid.weights());
    let shifted = |x: &[f64], y: &mut [f64]| -> Result<()> {
        let (xr, xi) = x.split_at(n);
        let (yr, yi) = y.split_at_mut(n);
        op.apply(xr, yr)?;
        op.apply(xi, yi)?;
        for k in 0..n {
            yr[k] += shift.re * xr[k] - shift.im * xi[k];
            yi[k] += shift.im * xr[k] + shift.re * xi[k];
        }
        Ok(())
    };
    let opts = GmresOptions {
        tol,
        max_iter: 40 * n + 100,
        restart: (2 * n).min(200),
    };
    let out = gmres(shifted, &b, &w2, opts)?;
    let (re, im) = out.x.split_at(n);
    Ok(ComplexSolve {
        re: re.to_vec(),
        im: im.to_vec(),
        iterations: out.iterations,
        residual: out.residual,
    })
}

/// Diagonal operator `(A x)_k = mu_k x_k`. Each node is an independent
/// mode, which makes it the natural surrogate for scalar ODE checks and
/// eigenvalue oracles.
#[derive(Debug)]
pub struct DiagonalOperator {
    grid: Grid,
    values: Vec<f64>,
    spectral: OnceLock<Arc<Spectral>>,
}

impl DiagonalOperator {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        grid.check_len(values.len(), "diagonal")?;
        if let Some(k) = values.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::arg(format!(
                "diagonal entry {k} = {} must be finite and non-negative",
                values[k]
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
            spectral: OnceLock::new(),
        })
    }

    pub fn uniform(grid: &Grid, mu: f64) -> Result<Self> {
        Self::new(grid, vec![mu; grid.node_count()])
    }

    /// The zero operator, for problems without spatial coupling.
    pub fn zero(grid: &Grid) -> Self {
        Self::uniform(grid, 0.0).expect("zero is a valid diagonal")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl DiffusionOperator for DiagonalOperator {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        for k in 0..x.len() {
            y[k] = self.values[k] * x[k];
        }
        Ok(())
    }

    fn spectral_floor(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn spectral_cell(&self) -> &OnceLock<Arc<Spectral>> {
        &self.spectral
    }

    fn symmetrized_dense(&self) -> Result<DMatrix<f64>> {
        Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.values.clone())))
    }

    fn solve_shifted(&self, shift: f64, rhs: &[f64], _tol: f64) -> Result<Vec<f64>> {
        self.grid.check_len(rhs.len(), "right-hand side")?;
        rhs.iter()
            .zip(&self.values)
            .map(|(r, mu)| {
                let d = shift + mu;
                if d == 0.0 {
                    Err(Error::SingularShift(format!("{shift}")))
                } else {
                    Ok(r / d)
                }
            })
            .collect()
    }

    fn solve_shifted_complex(&self, shift: Complex64, f_re: &[f64], f_im: &[f64], _tol: f64) -> Result<ComplexSolve> {
        self.grid.check_len(f_re.len(), "right-hand side")?;
        let n = f_re.len();
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        for k in 0..n {
            let d = shift + self.values[k];
            if d.norm() == 0.0 {
                return Err(Error::SingularShift(format!("{shift}")));
            }
            let u = Complex64::new(f_re[k], f_im[k]) / d;
            re[k] = u.re;
            im[k] = u.im;
        }
        Ok(ComplexSolve { re, im, iterations: 0, residual: 0.0 })
    }
}
