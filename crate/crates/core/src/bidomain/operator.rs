use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::elliptic::EllipticOperator;
use crate::diffusion::{krylov_shifted, krylov_shifted_complex, ComplexSolve, DiffusionOperator, Spectral, SPECTRAL_NODE_CAP};
use crate::error::{Error, Result};
use crate::grid::{project_mean_zero_in_place, weighted_sum, Grid, ScalarField};
use crate::linalg::{cg, CgOptions, CsrMatrix};

/// Tolerance and iteration cap for the inner `(A_i + A_e)` solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerSolveConfig {
    pub tol: f64,
    /// `None` means `10 N`.
    pub max_iter: Option<usize>,
    /// Answer shifted solves from the eigendecomposition instead of
    /// nesting Krylov iterations. Ignored above the spectral node cap.
    #[serde(default = "yes")]
    pub spectral_solves: bool,
}

fn yes() -> bool {
    true
}

impl Default for InnerSolveConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: None,
            spectral_solves: true,
        }
    }
}

/// The nonlocal operator `A = A_i (A_i + A_e)^{-1} A_e P`, where `P`
/// removes the mean.
///
/// In stiffness form `A = W^{-1} K_i (K_i + K_e)^+ K_e`; the pseudo-inverse
/// is realized by Jacobi-preconditioned CG with the iterate projected to
/// mean zero after every update.
#[derive(Debug)]
pub struct BidomainOperator {
    op_i: Arc<EllipticOperator>,
    op_e: Arc<EllipticOperator>,
    sum: CsrMatrix,
    inv_diag: Vec<f64>,
    unit_weights: Vec<f64>,
    inner: InnerSolveConfig,
    spectral: OnceLock<Arc<Spectral>>,
}

/// Complex field returned by the resolvent.
#[derive(Debug, Clone)]
pub struct ResolventSolution {
    pub re: ScalarField,
    pub im: ScalarField,
}

impl BidomainOperator {
    pub fn new(op_i: Arc<EllipticOperator>, op_e: Arc<EllipticOperator>) -> Result<Self> {
        Self::with_inner(op_i, op_e, InnerSolveConfig::default())
    }

    pub fn with_inner(
        op_i: Arc<EllipticOperator>,
        op_e: Arc<EllipticOperator>,
        inner: InnerSolveConfig,
    ) -> Result<Self> {
        if op_i.grid() != op_e.grid() {
            return Err(Error::arg("intra- and extracellular operators live on different grids"));
        }
        if !(inner.tol > 0.0 && inner.tol < 1.0) {
            return Err(Error::arg(format!("inner tolerance {} outside (0, 1)", inner.tol)));
        }
        let sum = op_i.stiffness().add(op_e.stiffness());
        let inv_diag = sum.diagonal().iter().map(|d| 1.0 / d).collect();
        let n = op_i.grid().node_count();
        Ok(Self {
            op_i,
            op_e,
            sum,
            inv_diag,
            unit_weights: vec![1.0; n],
            inner,
            spectral: OnceLock::new(),
        })
    }

    pub fn op_i(&self) -> &EllipticOperator {
        &self.op_i
    }

    pub fn op_e(&self) -> &EllipticOperator {
        &self.op_e
    }

    pub fn inner_config(&self) -> InnerSolveConfig {
        self.inner
    }

    fn use_spectral(&self) -> bool {
        self.inner.spectral_solves && self.grid().node_count() <= SPECTRAL_NODE_CAP
    }

    fn max_inner(&self) -> usize {
        self.inner.max_iter.unwrap_or(10 * self.grid().node_count())
    }

    /// Solves `(K_i + K_e) h = g` for `g` with zero sum; `h` has zero mean.
    fn inner_solve(&self, g: &[f64]) -> Result<Vec<f64>> {
        let grid = self.op_i.grid();
        let (weights, measure) = (grid.weights(), grid.measure());
        let project = move |x: &mut [f64]| project_mean_zero_in_place(weights, measure, x);
        let mut opts = CgOptions::new(self.inner.tol, self.max_inner());
        opts.inv_diag = Some(&self.inv_diag);
        opts.project = Some(&project);
        let out = cg(
            |x, y| {
                self.sum.mul_vec(x, y);
                Ok(())
            },
            g,
            &self.unit_weights,
            opts,
        )
        .map_err(|e| match e {
            Error::NotConverged { iterations, residual, .. } => Error::NotConverged {
                solver: "inner (A_i + A_e) conjugate gradient",
                iterations,
                residual,
            },
            other => other,
        })?;
        Ok(out.x)
    }

    /// `A f`.
    pub fn apply_field(&self, field: &ScalarField) -> Result<ScalarField> {
        self.grid().check_len(field.values().len(), "field")?;
        let mut y = vec![0.0; field.values().len()];
        self.apply(field.values(), &mut y)?;
        Ok(ScalarField::from_parts(self.grid(), y))
    }

    /// `(lambda + A) u = f` by CG for real positive `lambda` and by block
    /// GMRES otherwise. `lambda = 0` is accepted only for mean-zero `f`.
    pub fn solve_resolvent(&self, lambda: Complex64, f: &ScalarField, tol: f64) -> Result<ResolventSolution> {
        let grid = self.grid();
        grid.check_len(f.values().len(), "right-hand side")?;
        if lambda.norm() == 0.0 {
            let mean = weighted_sum(grid.weights(), f.values()) / grid.measure();
            let scale = f.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if mean.abs() > 1e-12 * scale {
                return Err(Error::SingularShift(
                    "0 (A is singular on constants and f has nonzero mean)".into(),
                ));
            }
        }
        let zeros = vec![0.0; grid.node_count()];
        let s = self.solve_shifted_complex(lambda, f.values(), &zeros, tol)?;
        Ok(ResolventSolution {
            re: ScalarField::from_parts(grid, s.re),
            im: ScalarField::from_parts(grid, s.im),
        })
    }

    fn check_conservation(&self, ii: &ScalarField, ie: &ScalarField) -> Result<Vec<f64>> {
        let grid = self.grid();
        grid.check_len(ii.values().len(), "I_i")?;
        grid.check_len(ie.values().len(), "I_e")?;
        let w = grid.weights();
        let total: Vec<f64> = ii.values().iter().zip(ie.values()).map(|(a, b)| a + b).collect();
        let imbalance = weighted_sum(w, &total).abs();
        let l1 = |v: &[f64]| -> f64 { w.iter().zip(v).map(|(wk, x)| wk * x.abs()).sum() };
        let allowed = 1e-10 * (l1(ii.values()) + l1(ie.values()));
        if imbalance > allowed {
            return Err(Error::Conservation { imbalance, allowed });
        }
        Ok(total)
    }

    /// `I = I_i - A_i (A_i + A_e)^{-1} (I_i + I_e)`.
    pub fn modified_source(&self, ii: &ScalarField, ie: &ScalarField) -> Result<ScalarField> {
        let grid = self.grid();
        let mut total = self.check_conservation(ii, ie)?;
        project_mean_zero_in_place(grid.weights(), grid.measure(), &mut total);
        let g: Vec<f64> = total.iter().zip(grid.weights()).map(|(t, w)| t * w).collect();
        let h = self.inner_solve(&g)?;
        let mut aih = vec![0.0; h.len()];
        self.op_i.apply(&h, &mut aih)?;
        let values = ii.values().iter().zip(&aih).map(|(a, b)| a - b).collect();
        Ok(ScalarField::from_parts(grid, values))
    }

    /// `u_e = (A_i + A_e)^{-1} ((I_i + I_e) - A_i P u)` with zero mean, and
    /// `u_i = u + u_e`.
    pub fn recover_potentials(
        &self,
        u: &ScalarField,
        ii: &ScalarField,
        ie: &ScalarField,
    ) -> Result<(ScalarField, ScalarField)> {
        let grid = self.grid();
        grid.check_len(u.values().len(), "u")?;
        let mut total = self.check_conservation(ii, ie)?;
        project_mean_zero_in_place(grid.weights(), grid.measure(), &mut total);
        let mut ku = vec![0.0; u.values().len()];
        self.op_i.stiffness().mul_vec(u.values(), &mut ku);
        let rhs: Vec<f64> = total
            .iter()
            .zip(grid.weights())
            .zip(&ku)
            .map(|((t, w), k)| t * w - k)
            .collect();
        let ue = self.inner_solve(&rhs)?;
        let ui = u.values().iter().zip(&ue).map(|(a, b)| a + b).collect();
        Ok((ScalarField::from_parts(grid, ui), ScalarField::from_parts(grid, ue)))
    }
}

impl DiffusionOperator for BidomainOperator {
    fn grid(&self) -> &Grid {
        self.op_i.grid()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let grid = self.grid();
        let mut px = x.to_vec();
        project_mean_zero_in_place(grid.weights(), grid.measure(), &mut px);
        let mut g = vec![0.0; x.len()];
        self.op_e.stiffness().mul_vec(&px, &mut g);
        let h = self.inner_solve(&g)?;
        self.op_i.apply(&h, y)
    }

    fn spectral_cell(&self) -> &OnceLock<Arc<Spectral>> {
        &self.spectral
    }

    fn solve_shifted(&self, shift: f64, rhs: &[f64], tol: f64) -> Result<Vec<f64>> {
        if self.use_spectral() {
            let zeros = vec![0.0; rhs.len()];
            return Ok(self.spectral_solve(Complex64::new(shift, 0.0), rhs, &zeros)?.re);
        }
        krylov_shifted(self, shift, rhs, tol)
    }

    fn solve_shifted_complex(&self, shift: Complex64, f_re: &[f64], f_im: &[f64], tol: f64) -> Result<ComplexSolve> {
        if self.use_spectral() {
            self.grid().check_len(f_re.len(), "right-hand side")?;
            self.grid().check_len(f_im.len(), "right-hand side")?;
            return self.spectral_solve(shift, f_re, f_im);
        }
        krylov_shifted_complex(self, shift, f_re, f_im, tol)
    }

    /// Dense `W^{-1/2} K_i (K_i + K_e)^+ K_e W^{-1/2}`. The pseudo-inverse
    /// acts on sum-free columns, so adding a rank-one multiple of the
    /// all-ones matrix makes the system definite without changing the result.
    fn symmetrized_dense(&self) -> Result<DMatrix<f64>> {
        let n = self.grid().node_count();
        let dense = |m: &CsrMatrix| {
            let mut d = DMatrix::zeros(n, n);
            for (r, c, v) in m.triplets() {
                d[(r, c)] = v;
            }
            d
        };
        let ki = dense(self.op_i.stiffness());
        let ke = dense(self.op_e.stiffness());
        let scale = self.inv_diag.iter().fold(0.0f64, |m, v| m.max(1.0 / v)) / n as f64;
        let reg = dense(&self.sum).add_scalar(scale);
        let chol = reg
            .cholesky()
            .ok_or_else(|| Error::arg("K_i + K_e is not definite on mean-zero vectors"))?;
        let x = chol.solve(&ke);
        let mut s = ki * x;
        let inv_sqrt_w: Vec<f64> = self.grid().weights().iter().map(|w| 1.0 / w.sqrt()).collect();
        for r in 0..n {
            for c in 0..n {
                s[(r, c)] *= inv_sqrt_w[r] * inv_sqrt_w[c];
            }
        }
        Ok(s)
    }
}
