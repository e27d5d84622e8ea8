use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{PeriodicMethod, PeriodicSolveConfig, SolverReport};
use super::coupled::{coupled_inverse_apply, CoupledOperator};
use super::time::{derivative_index, forward, inverse, resample, spectral_derivative};
use crate::error::{Error, Result};
use crate::grid::{bochner_norm, PeriodicTrajectory};
use crate::linalg::{gmres, GmresOptions};
use crate::semigroup::{crank_nicolson_step, da_norm, state_norm, ModalExpansion, SectorialOperator, SeminormQuadrature};

fn check_forcing(cop: &CoupledOperator, f: &PeriodicTrajectory) -> Result<()> {
    if f.grid() != SectorialOperator::grid(cop) {
        return Err(Error::arg("forcing lives on a different grid than the operator"));
    }
    if f.components() != cop.components() {
        return Err(Error::arg(format!(
            "forcing has {} components, operator has {}",
            f.components(),
            cop.components()
        )));
    }
    if !f.len().is_multiple_of(2) {
        return Err(Error::arg(format!("sample count must be even, got {}", f.len())));
    }
    Ok(())
}

fn require_admissible(cop: &CoupledOperator) -> Result<()> {
    if !cop.is_admissible() {
        let (a, b, c, d) = cop.coefficients();
        return Err(Error::NotAdmissible(format!(
            "periodic solve needs alpha > 0, beta >= 0, gamma >= 0, delta > 0; got ({a}, {b}, {c}, {d})"
        )));
    }
    Ok(())
}

/// The unique `T`-periodic solution of `u' + A u = f` on the sample grid of
/// `f`.
pub fn solve_linear_periodic(
    cop: &CoupledOperator,
    f: &PeriodicTrajectory,
    config: &PeriodicSolveConfig,
) -> Result<(PeriodicTrajectory, SolverReport)> {
    config.validate()?;
    check_forcing(cop, f)?;
    require_admissible(cop)?;
    let start = Instant::now();
    let cop = cop.clone().with_tolerance(config.krylov_tol);
    let mut report = SolverReport::new(config, f.len(), f.period());
    let (u, iterations, defect) = run_method(&cop, f, config, config.method)?;
    report.krylov_iterations = iterations;
    report.periodicity_defect = defect;
    if config.cross_check {
        let (other, _, _) = run_method(&cop, f, config, config.method.other())?;
        let diff = max_sample_difference(&u, &other);
        report.method_discrepancy = Some(diff);
        report.method_disagreement = diff > config.cross_check_tol * (1.0 + max_sample_norm(&u));
    }
    report.residual = Some(linear_residual(&cop, &u, f)?);
    report.solution_max_norm = max_sample_norm(&u);
    report.converged = true;
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok((u, report))
}

fn run_method(
    cop: &CoupledOperator,
    f: &PeriodicTrajectory,
    config: &PeriodicSolveConfig,
    method: PeriodicMethod,
) -> Result<(PeriodicTrajectory, Option<usize>, f64)> {
    match method {
        PeriodicMethod::FourierCollocation => Ok((fourier_collocation(cop, f)?, None, 0.0)),
        PeriodicMethod::InitialValueFixedPoint => {
            let (u, it, defect) = initial_value_fixed_point(cop, f, config)?;
            Ok((u, Some(it), defect))
        }
    }
}

/// Largest W-L2 norm over the samples.
pub fn max_sample_norm(u: &PeriodicTrajectory) -> f64 {
    u.samples().iter().map(|s| state_norm(u.grid(), s)).fold(0.0, f64::max)
}

/// Largest W-L2 norm of the sample differences.
pub fn max_sample_difference(a: &PeriodicTrajectory, b: &PeriodicTrajectory) -> f64 {
    a.samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| {
            let d: Vec<f64> = x.iter().zip(y).map(|(p, q)| p - q).collect();
            state_norm(a.grid(), &d)
        })
        .fold(0.0, f64::max)
}

/// Frequency `k` solves `(2 pi i k / T + A) u_k = f_k`. The mean and the
/// Nyquist bin use the explicit inverse of `A`.
fn fourier_collocation(cop: &CoupledOperator, f: &PeriodicTrajectory) -> Result<PeriodicTrajectory> {
    let m = f.len();
    let spec = forward(f.samples());
    let w = 2.0 * PI / f.period();
    let solved: Vec<Vec<Complex64>> = (0..=m / 2)
        .into_par_iter()
        .map(|k| -> Result<Vec<Complex64>> {
            let re: Vec<f64> = spec[k].iter().map(|c| c.re).collect();
            let idx = derivative_index(k, m);
            if idx == 0.0 {
                let u = coupled_inverse_apply(cop, &re)?;
                return Ok(u.into_iter().map(|x| Complex64::new(x, 0.0)).collect());
            }
            let im: Vec<f64> = spec[k].iter().map(|c| c.im).collect();
            let (ur, ui) = cop.resolvent(Complex64::new(0.0, w * idx), &re, &im)?;
            Ok(ur.into_iter().zip(ui).map(|(a, b)| Complex64::new(a, b)).collect())
        })
        .collect::<Result<_>>()?;
    let mut full = vec![Vec::new(); m];
    for k in 1..m / 2 {
        full[m - k] = solved[k].iter().map(|c| c.conj()).collect();
    }
    for (k, row) in solved.into_iter().enumerate() {
        full[k] = row;
    }
    Ok(f.with_samples(inverse(&full, m)))
}

/// Crank-Nicolson time stepping, either exactly per eigenmode or through
/// Krylov resolvent solves on the nodal state.
enum Stepper<'a> {
    Modal {
        modal: ModalExpansion,
        /// Per mode `(2/dt + C)^{-1}` and `2/dt - C`.
        factors: Vec<([[f64; 2]; 2], [[f64; 2]; 2])>,
    },
    Nodal {
        cop: &'a CoupledOperator,
        dt: f64,
    },
}

fn inv2(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

fn mul2(m: &[[f64; 2]; 2], x: [f64; 2]) -> [f64; 2] {
    [m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]]
}

impl<'a> Stepper<'a> {
    fn new(cop: &'a CoupledOperator, dt: f64, use_modal: bool) -> Result<Self> {
        if use_modal {
            if let Some(modal) = cop.modal() {
                let modal = modal?;
                let s = 2.0 / dt;
                let factors = (0..modal.mode_count())
                    .map(|j| {
                        let c = modal.block(j);
                        let plus = [[s + c[0][0], c[0][1]], [c[1][0], s + c[1][1]]];
                        let minus = [[s - c[0][0], -c[0][1]], [-c[1][0], s - c[1][1]]];
                        (inv2(plus), minus)
                    })
                    .collect();
                return Ok(Stepper::Modal { modal, factors });
            }
        }
        Ok(Stepper::Nodal { cop, dt })
    }

    fn to_coords(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Stepper::Modal { modal, .. } => modal.coefficients(x).into_iter().flatten().collect(),
            Stepper::Nodal { .. } => x.to_vec(),
        }
    }

    fn from_coords(&self, c: &[f64]) -> Vec<f64> {
        match self {
            Stepper::Modal { modal, .. } => {
                let pairs: Vec<[f64; 2]> = c.chunks(2).map(|p| [p[0], p[1]]).collect();
                modal.synthesize(&pairs)
            }
            Stepper::Nodal { .. } => c.to_vec(),
        }
    }

    fn weights(&self) -> Vec<f64> {
        match self {
            Stepper::Modal { modal, .. } => vec![1.0; 2 * modal.mode_count()],
            Stepper::Nodal { cop, .. } => {
                let w = SectorialOperator::grid(*cop).weights();
                (0..cop.components()).flat_map(|_| w.iter().copied()).collect()
            }
        }
    }

    /// `(2/dt + C) x+ = (2/dt - C) x + source`.
    fn step(&self, x: &[f64], source: Option<&[f64]>) -> Result<Vec<f64>> {
        match self {
            Stepper::Modal { factors, .. } => {
                let mut out = vec![0.0; x.len()];
                for (j, (inv, minus)) in factors.iter().enumerate() {
                    let mut r = mul2(minus, [x[2 * j], x[2 * j + 1]]);
                    if let Some(s) = source {
                        r[0] += s[2 * j];
                        r[1] += s[2 * j + 1];
                    }
                    let y = mul2(inv, r);
                    out[2 * j] = y[0];
                    out[2 * j + 1] = y[1];
                }
                Ok(out)
            }
            Stepper::Nodal { cop, dt } => crank_nicolson_step(*cop, *dt, x, source),
        }
    }
}

fn propagate(
    stepper: &Stepper<'_>,
    x0: &[f64],
    sources: Option<&[Vec<f64>]>,
    substeps: usize,
    every: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut x = x0.to_vec();
    let mut stored = Vec::new();
    let mut pair = vec![0.0; x0.len()];
    for n in 0..substeps {
        if every > 0 && n % every == 0 {
            stored.push(x.clone());
        }
        let src = match sources {
            Some(s) => {
                let next = &s[(n + 1) % substeps];
                for ((p, a), b) in pair.iter_mut().zip(&s[n]).zip(next) {
                    *p = a + b;
                }
                Some(pair.as_slice())
            }
            None => None,
        };
        x = stepper.step(&x, src)?;
    }
    Ok((x, stored))
}

/// Selects the time stepper for [`initial_value_fixed_point_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StepperKind {
    /// Eigenmodes when the grid is small enough, nodal otherwise.
    #[default]
    Auto,
    Nodal,
}

fn initial_value_fixed_point(
    cop: &CoupledOperator,
    f: &PeriodicTrajectory,
    config: &PeriodicSolveConfig,
) -> Result<(PeriodicTrajectory, usize, f64)> {
    initial_value_fixed_point_with(cop, f, config, StepperKind::Auto)
}

/// Computes `U = int_0^T e^{-(T-s)A} f(s) ds` by Crank-Nicolson with the
/// trigonometric interpolant of `f` as source, solves
/// `(I - e^{-TA}) u0 = U` by GMRES and propagates `u0` over one period.
/// Returns the trajectory, the GMRES iteration count and `||u(T) - u(0)||`.
pub fn initial_value_fixed_point_with(
    cop: &CoupledOperator,
    f: &PeriodicTrajectory,
    config: &PeriodicSolveConfig,
    kind: StepperKind,
) -> Result<(PeriodicTrajectory, usize, f64)> {
    let m = f.len();
    let s = config.substeps;
    if !s.is_multiple_of(m) {
        return Err(Error::config(
            "solver.substeps",
            format!("must be a multiple of the sample count {m}, got {s}"),
        ));
    }
    let dt = f.period() / s as f64;
    let stepper = Stepper::new(cop, dt, kind == StepperKind::Auto)?;
    let fine = resample(f, s)?;
    let sources: Vec<Vec<f64>> = fine.iter().map(|x| stepper.to_coords(x)).collect();
    let dim = sources[0].len();
    let (drift, _) = propagate(&stepper, &vec![0.0; dim], Some(&sources), s, 0)?;
    let weights = stepper.weights();
    let opts = GmresOptions {
        tol: config.krylov_tol,
        max_iter: config.krylov_max_iter,
        restart: dim.min(60),
    };
    let solve = gmres(
        |x, y| {
            let (px, _) = propagate(&stepper, x, None, s, 0)?;
            for i in 0..x.len() {
                y[i] = x[i] - px[i];
            }
            Ok(())
        },
        &drift,
        &weights,
        opts,
    )?;
    let u0 = solve.x;
    let (u_t, stored) = propagate(&stepper, &u0, Some(&sources), s, s / m)?;
    let diff: Vec<f64> = u_t.iter().zip(&u0).map(|(a, b)| a - b).collect();
    let defect = diff.iter().zip(&weights).map(|(d, w)| w * d * d).sum::<f64>().sqrt();
    let samples = stored.iter().map(|c| stepper.from_coords(c)).collect();
    Ok((f.with_samples(samples), solve.iterations, defect))
}

/// `A u` sample by sample.
pub fn apply_trajectory(cop: &CoupledOperator, u: &PeriodicTrajectory) -> Result<PeriodicTrajectory> {
    let samples = u
        .samples()
        .par_iter()
        .map(|s| {
            let mut y = vec![0.0; s.len()];
            SectorialOperator::apply(cop, s, &mut y)?;
            Ok(y)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(u.with_samples(samples))
}

/// `max_k ||D_t u + A u - f||` with the spectral time derivative.
pub fn linear_residual(cop: &CoupledOperator, u: &PeriodicTrajectory, f: &PeriodicTrajectory) -> Result<f64> {
    check_forcing(cop, f)?;
    if u.len() != f.len() || u.components() != f.components() {
        return Err(Error::arg("solution and forcing have incompatible layouts"));
    }
    let du = spectral_derivative(u);
    let au = apply_trajectory(cop, u)?;
    let mut worst = 0.0f64;
    for k in 0..u.len() {
        let r: Vec<f64> = (0..f.sample(k).len())
            .map(|i| du.sample(k)[i] + au.sample(k)[i] - f.sample(k)[i])
            .collect();
        worst = worst.max(state_norm(u.grid(), &r));
    }
    Ok(worst)
}

/// `||g||_{L^p(0,T; D_A(theta,p))}`.
pub fn bochner_da_norm(
    cop: &CoupledOperator,
    g: &PeriodicTrajectory,
    theta: f64,
    p: f64,
    quad: &SeminormQuadrature,
) -> Result<f64> {
    bochner_norm(g, p, |x| da_norm(cop, x, theta, p, quad))
}

/// `||u||_{W^{1,p}(D_A)} + ||A u||_{L^p(D_A)}`.
pub fn e_norm(cop: &CoupledOperator, u: &PeriodicTrajectory, theta: f64, p: f64, quad: &SeminormQuadrature) -> Result<f64> {
    let du = spectral_derivative(u);
    let au = apply_trajectory(cop, u)?;
    Ok(bochner_da_norm(cop, u, theta, p, quad)?
        + bochner_da_norm(cop, &du, theta, p, quad)?
        + bochner_da_norm(cop, &au, theta, p, quad)?)
}

/// Maximal-regularity ratios of a linear periodic solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxRegularity {
    /// `||A u|| / ||f||` in `L^p(0,T; D_A(theta,p))`.
    pub ratio: f64,
    /// `||u||_E / ||f||`.
    pub e_ratio: f64,
}

pub fn maximal_regularity_ratio(
    cop: &CoupledOperator,
    u: &PeriodicTrajectory,
    f: &PeriodicTrajectory,
    theta: f64,
    p: f64,
    quad: &SeminormQuadrature,
) -> Result<MaxRegularity> {
    check_forcing(cop, f)?;
    let fnorm = bochner_da_norm(cop, f, theta, p, quad)?;
    if fnorm == 0.0 {
        return Err(Error::arg("maximal-regularity ratio undefined for zero forcing"));
    }
    let au = apply_trajectory(cop, u)?;
    let ratio = bochner_da_norm(cop, &au, theta, p, quad)? / fnorm;
    let e_ratio = e_norm(cop, u, theta, p, quad)? / fnorm;
    Ok(MaxRegularity { ratio, e_ratio })
}
