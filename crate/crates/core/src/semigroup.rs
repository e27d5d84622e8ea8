//! Semigroup actions `e^{-t A} x`, the interpolation seminorm
//! `[x]_{theta,p} = (int_0^inf ||t^{1-theta} A e^{-tA} x||^p dt/t)^{1/p}`
//! by log-spaced quadrature, and sampled resolvent (sector) bounds.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion::Spectral;
use crate::error::{Error, Result};
use crate::grid::{state_lq_norm, weighted_dot, Grid};
use crate::linalg::dense::{exp_neg_2x2, expm};

/// Largest state dimension accepted by [`SemigroupScheme::DenseExpm`].
pub const DENSE_EXPM_CAP: usize = 4096;

/// A linear operator on multi-component states that generates a bounded
/// analytic semigroup. States are flat: component `c` occupies
/// `c N .. (c + 1) N`.
pub trait SectorialOperator: Send + Sync {
    fn grid(&self) -> &Grid;

    fn components(&self) -> usize;

    fn state_len(&self) -> usize {
        self.components() * self.grid().node_count()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()>;

    /// Solves `(lambda + A) u = f` for complex `lambda`; returns `(Re u, Im u)`.
    fn resolvent(&self, lambda: Complex64, f_re: &[f64], f_im: &[f64]) -> Result<(Vec<f64>, Vec<f64>)>;

    /// Lower bound `m` on the real part of the spectrum; `m > 0` means 0 is
    /// in the resolvent set.
    fn lower_bound(&self) -> f64;

    /// Exact block-diagonal form when an eigenbasis is available.
    fn modal(&self) -> Option<Result<ModalExpansion>> {
        None
    }
}

/// State norm used throughout: L2 under the quadrature weights, all
/// components stacked.
pub fn state_norm(grid: &Grid, x: &[f64]) -> f64 {
    let n = grid.node_count();
    x.chunks(n).map(|c| weighted_dot(grid.weights(), c, c)).sum::<f64>().sqrt()
}

/// Block-diagonal representation of `[[s A + alpha, beta], [-gamma, delta]]`
/// (or `s A + alpha` for one component) in the eigenbasis of `A`.
#[derive(Debug, Clone)]
pub struct ModalExpansion {
    spectral: Arc<Spectral>,
    components: usize,
    scale: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
}

impl ModalExpansion {
    pub fn new(
        spectral: Arc<Spectral>,
        components: usize,
        scale: f64,
        alpha: f64,
        beta: f64,
        gamma: f64,
        delta: f64,
    ) -> Self {
        Self {
            spectral,
            components,
            scale,
            alpha,
            beta,
            gamma,
            delta,
        }
    }

    pub fn mode_count(&self) -> usize {
        self.spectral.len()
    }

    fn p(&self, j: usize) -> f64 {
        self.scale * self.spectral.values()[j] + self.alpha
    }

    /// The `2x2` block of mode `j`; the second row and column vanish for a
    /// single component.
    pub fn block(&self, j: usize) -> [[f64; 2]; 2] {
        let p = self.p(j);
        if self.components == 1 {
            [[p, 0.0], [0.0, 0.0]]
        } else {
            [[p, self.beta], [-self.gamma, self.delta]]
        }
    }

    /// Per-mode coefficients `(c_v, c_z)`.
    pub fn coefficients(&self, x: &[f64]) -> Vec<[f64; 2]> {
        let n = self.spectral.len();
        let cv = self.spectral.coefficients(&x[..n]);
        let cz = if self.components == 2 {
            self.spectral.coefficients(&x[n..2 * n])
        } else {
            vec![0.0; n]
        };
        cv.into_iter().zip(cz).map(|(a, b)| [a, b]).collect()
    }

    pub fn synthesize(&self, c: &[[f64; 2]]) -> Vec<f64> {
        let cv: Vec<f64> = c.iter().map(|x| x[0]).collect();
        let mut out = self.spectral.synthesize(&cv);
        if self.components == 2 {
            let cz: Vec<f64> = c.iter().map(|x| x[1]).collect();
            out.extend(self.spectral.synthesize(&cz));
        }
        out
    }

    /// `C_j c` for every mode.
    pub fn apply_coefficients(&self, c: &[[f64; 2]]) -> Vec<[f64; 2]> {
        c.iter()
            .enumerate()
            .map(|(j, x)| {
                let p = self.p(j);
                if self.components == 1 {
                    [p * x[0], 0.0]
                } else {
                    [p * x[0] + self.beta * x[1], -self.gamma * x[0] + self.delta * x[1]]
                }
            })
            .collect()
    }

    /// `e^{-t C_j} c` for every mode.
    pub fn exp_coefficients(&self, t: f64, c: &[[f64; 2]]) -> Vec<[f64; 2]> {
        c.iter()
            .enumerate()
            .map(|(j, x)| {
                let p = self.p(j);
                if self.components == 1 {
                    [(-t * p).exp() * x[0], 0.0]
                } else {
                    let e = exp_neg_2x2(p, self.beta, self.gamma, self.delta, t);
                    [e[0][0] * x[0] + e[0][1] * x[1], e[1][0] * x[0] + e[1][1] * x[1]]
                }
            })
            .collect()
    }

    /// `||sum_j c_j phi_j||` using W-orthonormality.
    pub fn norm(c: &[[f64; 2]]) -> f64 {
        c.iter().map(|x| x[0] * x[0] + x[1] * x[1]).sum::<f64>().sqrt()
    }
}

/// Time integrator for [`apply_semigroup`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SemigroupScheme {
    /// `None` picks `max(16, ceil(t rho))` with `rho` a power-iteration
    /// estimate of the largest eigenvalue.
    CrankNicolson { n_sub: Option<usize> },
    ImplicitEuler { n_sub: usize },
    DenseExpm,
    /// Exact action through the eigenbasis.
    Modal,
}

impl Default for SemigroupScheme {
    fn default() -> Self {
        SemigroupScheme::CrankNicolson { n_sub: None }
    }
}

/// Power-iteration estimate of the largest eigenvalue magnitude.
pub fn estimate_spectral_radius(op: &dyn SectorialOperator) -> Result<f64> {
    let len = op.state_len();
    let grid = op.grid();
    let mut x: Vec<f64> = (0..len).map(|i| 1.0 + (1.7 * i as f64).sin()).collect();
    let mut y = vec![0.0; len];
    let mut rho = 0.0;
    for _ in 0..60 {
        let nx = state_norm(grid, &x);
        if nx == 0.0 {
            break;
        }
        op.apply(&x, &mut y)?;
        let ny = state_norm(grid, &y);
        rho = ny / nx;
        if ny == 0.0 {
            break;
        }
        for i in 0..len {
            x[i] = y[i] / ny;
        }
    }
    Ok(rho * 1.05)
}

fn real_resolvent(op: &dyn SectorialOperator, lambda: f64, f: &[f64]) -> Result<Vec<f64>> {
    let zeros = vec![0.0; f.len()];
    Ok(op.resolvent(Complex64::new(lambda, 0.0), f, &zeros)?.0)
}

/// One Crank-Nicolson step `(2/dt + A) x+ = (2/dt - A) x + source`.
pub(crate) fn crank_nicolson_step(
    op: &dyn SectorialOperator,
    dt: f64,
    x: &[f64],
    source: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let mut ax = vec![0.0; x.len()];
    op.apply(x, &mut ax)?;
    let s = 2.0 / dt;
    let mut rhs: Vec<f64> = x.iter().zip(&ax).map(|(xi, ai)| s * xi - ai).collect();
    if let Some(src) = source {
        for (r, q) in rhs.iter_mut().zip(src) {
            *r += q;
        }
    }
    real_resolvent(op, s, &rhs)
}

fn dense_matrix(op: &dyn SectorialOperator) -> Result<DMatrix<f64>> {
    let len = op.state_len();
    let mut m = DMatrix::zeros(len, len);
    let mut e = vec![0.0; len];
    let mut col = vec![0.0; len];
    for j in 0..len {
        e[j] = 1.0;
        op.apply(&e, &mut col)?;
        e[j] = 0.0;
        m.set_column(j, &DVector::from_column_slice(&col));
    }
    Ok(m)
}

/// `e^{-t A} x`.
pub fn apply_semigroup(op: &dyn SectorialOperator, t: f64, x: &[f64], scheme: SemigroupScheme) -> Result<Vec<f64>> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::arg(format!("semigroup time must be finite and non-negative, got {t}")));
    }
    if x.len() != op.state_len() {
        return Err(Error::arg(format!("state has {} values, expected {}", x.len(), op.state_len())));
    }
    if t == 0.0 {
        return Ok(x.to_vec());
    }
    match scheme {
        SemigroupScheme::CrankNicolson { n_sub } => {
            let n = match n_sub {
                Some(n) => n.max(1),
                None => 16usize.max((t * estimate_spectral_radius(op)?).ceil() as usize),
            };
            let dt = t / n as f64;
            let mut y = x.to_vec();
            for _ in 0..n {
                y = crank_nicolson_step(op, dt, &y, None)?;
            }
            Ok(y)
        }
        SemigroupScheme::ImplicitEuler { n_sub } => {
            let n = n_sub.max(1);
            let dt = t / n as f64;
            let mut y = x.to_vec();
            for _ in 0..n {
                let rhs: Vec<f64> = y.iter().map(|v| v / dt).collect();
                y = real_resolvent(op, 1.0 / dt, &rhs)?;
            }
            Ok(y)
        }
        SemigroupScheme::DenseExpm => {
            let len = op.state_len();
            if len > DENSE_EXPM_CAP {
                return Err(Error::arg(format!(
                    "dense exponential limited to dimension {DENSE_EXPM_CAP}, state has {len}"
                )));
            }
            let m = dense_matrix(op)?;
            let e = expm(&(m * -t));
            Ok((e * DVector::from_column_slice(x)).iter().copied().collect())
        }
        SemigroupScheme::Modal => {
            let modal = op
                .modal()
                .ok_or_else(|| Error::arg("operator has no eigenbasis; modal scheme unavailable"))??;
            let c = modal.coefficients(x);
            Ok(modal.synthesize(&modal.exp_coefficients(t, &c)))
        }
    }
}

/// Log-spaced composite trapezoid rule in `ln t` on `[t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeminormQuadrature {
    pub t_min: f64,
    /// `None` picks `t_max` so that `e^{-p m t_max} = 1e-12`.
    pub t_max: Option<f64>,
    pub nodes_per_decade: usize,
}

impl Default for SeminormQuadrature {
    fn default() -> Self {
        Self {
            t_min: 1e-6,
            t_max: None,
            nodes_per_decade: 32,
        }
    }
}

impl SeminormQuadrature {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0) {
            return Err(Error::arg(format!("t_min must be positive, got {}", self.t_min)));
        }
        if let Some(t) = self.t_max {
            if !(t > self.t_min) {
                return Err(Error::arg(format!("t_max {t} must exceed t_min {}", self.t_min)));
            }
        }
        if self.nodes_per_decade < 8 {
            return Err(Error::arg(format!(
                "at least 8 nodes per decade required, got {}",
                self.nodes_per_decade
            )));
        }
        Ok(())
    }

    fn nodes(&self, p: f64, m: f64) -> Vec<f64> {
        let t_max = self.t_max.unwrap_or((1e12f64).ln() / (p * m)).max(self.t_min * 10.0);
        let decades = (t_max / self.t_min).log10();
        let count = (decades * self.nodes_per_decade as f64).ceil() as usize;
        (0..=count)
            .map(|j| self.t_min * 10f64.powf(j as f64 / self.nodes_per_decade as f64))
            .collect()
    }
}

/// Quadrature value with its truncation estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeminormEstimate {
    /// Seminorm including the head correction.
    pub value: f64,
    /// Estimated `int_0^{t_min}` contribution (already in `value`, before the root).
    pub head: f64,
    /// Bound on the neglected `int_{t_max}^inf` contribution.
    pub tail: f64,
    /// Bound on the error of `value` from the truncations.
    pub error_bar: f64,
}

fn check_theta_p(theta: f64, p: f64) -> Result<()> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::arg(format!("theta must lie in (0, 1), got {theta}")));
    }
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::arg(format!("p must satisfy 1 <= p < inf, got {p}")));
    }
    Ok(())
}

/// `[x]_{theta,p}`. The integrand `g(t) = ||t^{1-theta} A e^{-tA} x||^p`
/// behaves like `t^{(1-theta)p} ||Ax||^p` near 0, which gives the head
/// correction `g(t_min)/((1-theta)p)`; the tail decays like `e^{-p m t}`.
pub fn interpolation_seminorm(
    op: &dyn SectorialOperator,
    x: &[f64],
    theta: f64,
    p: f64,
    quad: &SeminormQuadrature,
) -> Result<SeminormEstimate> {
    check_theta_p(theta, p)?;
    quad.validate()?;
    let m = op.lower_bound();
    if !(m > 0.0) {
        return Err(Error::NotAdmissible(format!(
            "seminorm needs a positive spectral lower bound, got {m}"
        )));
    }
    if x.len() != op.state_len() {
        return Err(Error::arg(format!("state has {} values, expected {}", x.len(), op.state_len())));
    }
    let nodes = quad.nodes(p, m);
    let grid = op.grid();
    let g: Vec<f64> = match op.modal() {
        Some(modal) => {
            let modal = modal?;
            let c = modal.coefficients(x);
            let ac = modal.apply_coefficients(&c);
            nodes
                .par_iter()
                .map(|&t| {
                    let y = modal.exp_coefficients(t, &ac);
                    (t.powf(1.0 - theta) * ModalExpansion::norm(&y)).powf(p)
                })
                .collect()
        }
        None => {
            let mut ax = vec![0.0; x.len()];
            op.apply(x, &mut ax)?;
            let rho = estimate_spectral_radius(op)?;
            let mut out = Vec::with_capacity(nodes.len());
            let mut y = ax;
            let mut t_prev = 0.0;
            for &t in &nodes {
                let dt = t - t_prev;
                let n = 8usize.max((dt * rho).ceil() as usize);
                y = apply_semigroup(op, dt, &y, SemigroupScheme::CrankNicolson { n_sub: Some(n) })?;
                out.push((t.powf(1.0 - theta) * state_norm(grid, &y)).powf(p));
                t_prev = t;
            }
            out
        }
    };
    let h = 10f64.ln() / quad.nodes_per_decade as f64;
    let mut integral = 0.0;
    for j in 0..g.len() - 1 {
        integral += 0.5 * h * (g[j] + g[j + 1]);
    }
    let head = g[0] / ((1.0 - theta) * p);
    let t_end = *nodes.last().expect("at least two nodes");
    let tail = g[g.len() - 1] / (p * m * t_end);
    let total = integral + head;
    let value = total.powf(1.0 / p);
    let upper = (total + tail + 0.1 * head).powf(1.0 / p);
    let lower = (total - 0.1 * head).max(0.0).powf(1.0 / p);
    Ok(SeminormEstimate {
        value,
        head,
        tail,
        error_bar: (upper - value).max(value - lower),
    })
}

/// `||x|| + [x]_{theta,p}`.
pub fn da_norm(op: &dyn SectorialOperator, x: &[f64], theta: f64, p: f64, quad: &SeminormQuadrature) -> Result<f64> {
    Ok(state_norm(op.grid(), x) + interpolation_seminorm(op, x, theta, p, quad)?.value)
}

/// One sampled resolvent ratio `|lambda| ||(lambda + A)^{-1} f||_q / ||f||_q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorEntry {
    pub re_lambda: f64,
    pub im_lambda: f64,
    pub q: f64,
    pub probe: usize,
    pub ratio: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorReport {
    pub entries: Vec<SectorEntry>,
    /// Largest ratio among converged entries.
    pub sup: f64,
    pub failures: usize,
}

impl SectorReport {
    /// Largest converged ratio for one `q`.
    pub fn sup_for(&self, q: f64) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.converged && e.q == q)
            .fold(0.0f64, |m, e| m.max(e.ratio))
    }

    /// RFC 4180 CSV with columns `re_lambda, im_lambda, q, ratio, converged`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = crate::csv_out::writer();
        w.write_record(["re_lambda", "im_lambda", "q", "ratio", "converged"])
            .map_err(crate::csv_out::io)?;
        for e in &self.entries {
            w.write_record([
                crate::csv_out::num(e.re_lambda),
                crate::csv_out::num(e.im_lambda),
                crate::csv_out::num(e.q),
                crate::csv_out::num(e.ratio),
                e.converged.to_string(),
            ])
            .map_err(crate::csv_out::io)?;
        }
        crate::csv_out::finish(w)
    }
}

/// The default sample set: rays at `0, +-pi/4, +-pi/2, +-0.95 * 3pi/4` and
/// radii `10^-2 .. 10^3`.
pub fn default_sector_samples() -> (Vec<f64>, Vec<f64>) {
    use std::f64::consts::PI;
    let angles = vec![
        0.0,
        PI / 4.0,
        -PI / 4.0,
        PI / 2.0,
        -PI / 2.0,
        0.95 * 3.0 * PI / 4.0,
        -0.95 * 3.0 * PI / 4.0,
    ];
    let radii = (-2..=3).map(|e| 10f64.powi(e)).collect();
    (angles, radii)
}

/// Samples `|lambda| ||(lambda + A)^{-1} f||_q / ||f||_q` over
/// `lambda = r e^{i phi}`. Failed solves are recorded, not fatal.
pub fn verify_sector_bound(
    op: &dyn SectorialOperator,
    angles: &[f64],
    radii: &[f64],
    probes: &[Vec<f64>],
    qs: &[f64],
) -> Result<SectorReport> {
    use std::f64::consts::PI;
    if let Some(a) = angles.iter().find(|a| !(a.abs() < PI)) {
        return Err(Error::arg(format!("angle {a} outside (-pi, pi)")));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0)) {
        return Err(Error::arg(format!("radius {r} must be positive")));
    }
    let grid = op.grid();
    for (k, f) in probes.iter().enumerate() {
        if f.len() != op.state_len() {
            return Err(Error::arg(format!("probe {k} has wrong length")));
        }
        if f.iter().all(|v| *v == 0.0) {
            return Err(Error::arg(format!("probe {k} is zero")));
        }
    }
    let mut jobs = Vec::new();
    for &phi in angles {
        for &r in radii {
            for k in 0..probes.len() {
                jobs.push((Complex64::from_polar(r, phi), k));
            }
        }
    }
    let results: Vec<Vec<SectorEntry>> = jobs
        .par_iter()
        .map(|&(lambda, k)| {
            let f = &probes[k];
            let zeros = vec![0.0; f.len()];
            let solved = op.resolvent(lambda, f, &zeros);
            qs.iter()
                .map(|&q| {
                    let (ratio, converged) = match &solved {
                        Ok((re, im)) => {
                            let modulus: Vec<f64> = re.iter().zip(im).map(|(a, b)| a.hypot(*b)).collect();
                            let nu = state_lq_norm(grid, &modulus, q);
                            let nf = state_lq_norm(grid, f, q);
                            match (nu, nf) {
                                (Ok(nu), Ok(nf)) => (lambda.norm() * nu / nf, true),
                                _ => (f64::NAN, false),
                            }
                        }
                        Err(_) => (f64::NAN, false),
                    };
                    SectorEntry {
                        re_lambda: lambda.re,
                        im_lambda: lambda.im,
                        q,
                        probe: k,
                        ratio,
                        converged,
                    }
                })
                .collect()
        })
        .collect();
    let entries: Vec<SectorEntry> = results.into_iter().flatten().collect();
    let sup = entries
        .iter()
        .filter(|e| e.converged)
        .fold(0.0f64, |m, e| m.max(e.ratio));
    let failures = entries.iter().filter(|e| !e.converged).count();
    Ok(SectorReport { entries, sup, failures })
}
