use std::sync::Arc;

use num_complex::Complex64;

use crate::diffusion::{DiffusionOperator, SPECTRAL_NODE_CAP};
use crate::error::{Error, Result};
use crate::grid::{make_grid, Grid};
use crate::ionic::LinearizedSystem;
use crate::semigroup::{ModalExpansion, SectorialOperator};

/// The operator matrix `[[B, beta], [-gamma, delta]]` with `B = s A + alpha`
/// acting on `(v, z)`, or `B` alone on `v` for a single component.
#[derive(Debug, Clone)]
pub struct CoupledOperator {
    base: Arc<dyn DiffusionOperator>,
    scale: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
    components: usize,
    tol: f64,
}

/// Default relative tolerance of the Krylov solves behind the resolvent.
pub const DEFAULT_RESOLVENT_TOL: f64 = 1e-10;

impl CoupledOperator {
    /// No sign checks: use [`is_admissible`](Self::is_admissible) before
    /// relying on invertibility.
    pub fn new(
        base: Arc<dyn DiffusionOperator>,
        scale: f64,
        alpha: f64,
        beta: f64,
        gamma: f64,
        delta: f64,
    ) -> Result<Self> {
        Self::build(base, scale, [alpha, beta, gamma, delta], 2)
    }

    /// `s A + alpha` on a single component.
    pub fn single(base: Arc<dyn DiffusionOperator>, scale: f64, alpha: f64) -> Result<Self> {
        Self::build(base, scale, [alpha, 0.0, 0.0, 0.0], 1)
    }

    /// The operator of a linearized ionic model. Refuses sign patterns
    /// outside the admissible set.
    pub fn from_linearization(base: Arc<dyn DiffusionOperator>, lin: &LinearizedSystem) -> Result<Self> {
        let ok = LinearizedSystem::sign_pattern_ok(lin.alpha, lin.beta, lin.gamma, lin.delta, lin.components);
        if !ok {
            return Err(Error::NotAdmissible(format!(
                "{} linearization has alpha = {}, beta = {}, gamma = {}, delta = {}; \
                 need alpha > 0, beta >= 0, gamma >= 0, delta > 0",
                lin.variant.short_name(),
                lin.alpha,
                lin.beta,
                lin.gamma,
                lin.delta
            )));
        }
        Self::build(base, lin.diffusion_scale, [lin.alpha, lin.beta, lin.gamma, lin.delta], lin.components)
    }

    /// Scalar `2x2` surrogate: the diffusion part is the zero operator on a
    /// three-node grid, so every node carries the same ODE system.
    pub fn surrogate(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Self {
        let g = surrogate_grid();
        Self::new(Arc::new(crate::diffusion::DiagonalOperator::zero(&g)), 1.0, alpha, beta, gamma, delta)
            .expect("valid surrogate")
    }

    /// Scalar surrogate `u' + lambda u` with one component.
    pub fn scalar_surrogate(lambda: f64) -> Self {
        let g = surrogate_grid();
        Self::single(Arc::new(crate::diffusion::DiagonalOperator::zero(&g)), 1.0, lambda).expect("valid surrogate")
    }

    fn build(base: Arc<dyn DiffusionOperator>, scale: f64, c: [f64; 4], components: usize) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::arg(format!("diffusion scale must be positive, got {scale}")));
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("operator coefficients must be finite"));
        }
        Ok(Self {
            base,
            scale,
            alpha: c[0],
            beta: c[1],
            gamma: c[2],
            delta: c[3],
            components,
            tol: DEFAULT_RESOLVENT_TOL,
        })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn base(&self) -> &Arc<dyn DiffusionOperator> {
        &self.base
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `(alpha, beta, gamma, delta)`.
    pub fn coefficients(&self) -> (f64, f64, f64, f64) {
        (self.alpha, self.beta, self.gamma, self.delta)
    }

    pub fn is_admissible(&self) -> bool {
        LinearizedSystem::sign_pattern_ok(self.alpha, self.beta, self.gamma, self.delta, self.components)
    }

    fn n(&self) -> usize {
        self.base.grid().node_count()
    }

    fn check_state(&self, len: usize) -> Result<()> {
        if len != self.components * self.n() {
            return Err(Error::arg(format!(
                "state has {len} values, expected {}",
                self.components * self.n()
            )));
        }
        Ok(())
    }

    /// `(beta gamma + delta B) h = r`, or `B h = r` for one component.
    fn solve_schur(&self, r: &[f64]) -> Result<Vec<f64>> {
        let (factor, shift) = if self.components == 1 {
            (self.scale, self.alpha)
        } else {
            (self.delta * self.scale, self.beta * self.gamma + self.delta * self.alpha)
        };
        let rhs: Vec<f64> = r.iter().map(|v| v / factor).collect();
        self.base.solve_shifted(shift / factor, &rhs, self.tol)
    }
}

pub(crate) fn surrogate_grid() -> Grid {
    make_grid(1, &[3], &[1.0]).expect("valid grid")
}

/// `(s A v + alpha v + beta z, -gamma v + delta z)`.
pub fn coupled_apply(cop: &CoupledOperator, state: &[f64]) -> Result<Vec<f64>> {
    let mut y = vec![0.0; state.len()];
    SectorialOperator::apply(cop, state, &mut y)?;
    Ok(y)
}

/// `A^{-1} = [[delta, -beta], [gamma, B]] (beta gamma + delta B)^{-1}`
/// (componentwise; `B` and the Schur factor commute).
pub fn coupled_inverse_apply(cop: &CoupledOperator, state: &[f64]) -> Result<Vec<f64>> {
    cop.check_state(state.len())?;
    if !cop.is_admissible() {
        let (a, b, c, d) = cop.coefficients();
        return Err(Error::NotAdmissible(format!(
            "inverse formula needs alpha > 0, beta >= 0, gamma >= 0, delta > 0; got ({a}, {b}, {c}, {d})"
        )));
    }
    let n = cop.n();
    if cop.components == 1 {
        return cop.solve_schur(state);
    }
    let (f, g) = state.split_at(n);
    let hf = cop.solve_schur(f)?;
    let hg = cop.solve_schur(g)?;
    let mut bhg = vec![0.0; n];
    cop.base.apply(&hg, &mut bhg)?;
    let mut out = vec![0.0; 2 * n];
    for k in 0..n {
        out[k] = cop.delta * hf[k] - cop.beta * hg[k];
        out[n + k] = cop.gamma * hf[k] + cop.scale * bhg[k] + cop.alpha * hg[k];
    }
    Ok(out)
}

impl SectorialOperator for CoupledOperator {
    fn grid(&self) -> &Grid {
        self.base.grid()
    }

    fn components(&self) -> usize {
        self.components
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.check_state(x.len())?;
        let n = self.n();
        self.base.apply(&x[..n], &mut y[..n])?;
        for k in 0..n {
            y[k] = self.scale * y[k] + self.alpha * x[k];
        }
        if self.components == 2 {
            for k in 0..n {
                y[k] += self.beta * x[n + k];
                y[n + k] = -self.gamma * x[k] + self.delta * x[n + k];
            }
        }
        Ok(())
    }

    /// Eliminates `z = (g + gamma v)/(lambda + delta)` and solves the
    /// remaining scalar shifted problem for `v`.
    fn resolvent(&self, lambda: Complex64, f_re: &[f64], f_im: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_state(f_re.len())?;
        self.check_state(f_im.len())?;
        let n = self.n();
        let s = self.scale;
        if self.components == 1 {
            let shift = (lambda + self.alpha) / s;
            let rr: Vec<f64> = f_re.iter().map(|v| v / s).collect();
            let ri: Vec<f64> = f_im.iter().map(|v| v / s).collect();
            let out = self.base.solve_shifted_complex(shift, &rr, &ri, self.tol)?;
            return Ok((out.re, out.im));
        }
        let ld = lambda + self.delta;
        if ld.norm() == 0.0 {
            return Err(Error::SingularShift(format!("{lambda} (lambda + delta = 0)")));
        }
        let shift = (lambda + self.alpha + self.beta * self.gamma / ld) / s;
        let mut rr = vec![0.0; n];
        let mut ri = vec![0.0; n];
        for k in 0..n {
            let g = Complex64::new(f_re[n + k], f_im[n + k]);
            let r = (Complex64::new(f_re[k], f_im[k]) - self.beta * g / ld) / s;
            rr[k] = r.re;
            ri[k] = r.im;
        }
        let v = self.base.solve_shifted_complex(shift, &rr, &ri, self.tol)?;
        let mut re = vec![0.0; 2 * n];
        let mut im = vec![0.0; 2 * n];
        for k in 0..n {
            let vk = Complex64::new(v.re[k], v.im[k]);
            let g = Complex64::new(f_re[n + k], f_im[n + k]);
            let z = (g + self.gamma * vk) / ld;
            re[k] = vk.re;
            im[k] = vk.im;
            re[n + k] = z.re;
            im[n + k] = z.im;
        }
        Ok((re, im))
    }

    /// For admissible coefficients every eigenvalue of
    /// `[[p, beta], [-gamma, delta]]` has real part at least `min(p, delta)`,
    /// and `p >= alpha + s * floor(A)`.
    fn lower_bound(&self) -> f64 {
        let p0 = self.alpha + self.scale * self.base.spectral_floor();
        let m = if self.components == 1 { p0 } else { p0.min(self.delta) };
        if self.is_admissible() {
            m
        } else {
            m.min(0.0)
        }
    }

    fn modal(&self) -> Option<Result<ModalExpansion>> {
        if self.n() > SPECTRAL_NODE_CAP {
            return None;
        }
        Some(self.base.spectral().map(|sp| {
            ModalExpansion::new(sp, self.components, self.scale, self.alpha, self.beta, self.gamma, self.delta)
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surrogate_apply_and_inverse() {
        let cop = CoupledOperator::surrogate(2.0, 1.0, 1.0, 1.0);
        let x = vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0];
        let y = coupled_apply(&cop, &x).unwrap();
        assert_eq!(y, vec![2.0, 2.0, 2.0, -1.0, -1.0, -1.0]);
        let inv = coupled_inverse_apply(&cop, &x).unwrap();
        for k in 0..3 {
            assert!((inv[k] - 1.0 / 3.0).abs() < 1e-15);
            assert!((inv[3 + k] - 1.0 / 3.0).abs() < 1e-15);
        }
        // full matrix (1/3)[[1, -1], [1, 2]]
        let e2 = vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let inv2 = coupled_inverse_apply(&cop, &e2).unwrap();
        assert!((inv2[0] + 1.0 / 3.0).abs() < 1e-15 && (inv2[3] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(coupled_inverse_apply(&cop, &[0.0; 6]).unwrap(), vec![0.0; 6]);
    }

    #[test]
    fn non_admissible_inverse_refused() {
        let cop = CoupledOperator::surrogate(2.0, 1.0, 1.0, -1.0);
        assert!(matches!(coupled_inverse_apply(&cop, &[1.0; 6]), Err(Error::NotAdmissible(_))));
    }

    #[test]
    fn resolvent_matches_2x2_inverse() {
        let cop = CoupledOperator::surrogate(0.3, 0.7, 0.2, 1.1);
        let lambda = Complex64::new(0.4, 2.0);
        let f = [1.0, 1.0, 1.0, -0.5, -0.5, -0.5];
        let (re, im) = cop.resolvent(lambda, &f, &[0.0; 6]).unwrap();
        // direct 2x2 complex solve
        let m = [[lambda + 0.3, Complex64::new(0.7, 0.0)], [Complex64::new(-0.2, 0.0), lambda + 1.1]];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let v = (m[1][1] * 1.0 - m[0][1] * -0.5) / det;
        let z = (m[0][0] * -0.5 - m[1][0] * 1.0) / det;
        assert!((re[0] - v.re).abs() < 1e-14 && (im[0] - v.im).abs() < 1e-14);
        assert!((re[3] - z.re).abs() < 1e-14 && (im[3] - z.im).abs() < 1e-14);
    }
}
