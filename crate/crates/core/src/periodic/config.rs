use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semigroup::SeminormQuadrature;

/// Printed in every report: the discrete norms do not honour the full
/// interpolation-space constraints.
pub const DEVIATION_NOTE: &str =
    "spatial norms are L²-based (q=2); constraints q>n, 1/p+n/(2q) ≤ 3/4, θ∈(0,½) not enforced";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PeriodicMethod {
    /// FFT in time, one resolvent solve per frequency.
    #[default]
    FourierCollocation,
    /// Crank-Nicolson propagation plus a Krylov solve for the initial value.
    InitialValueFixedPoint,
}

impl PeriodicMethod {
    pub fn other(self) -> Self {
        match self {
            PeriodicMethod::FourierCollocation => PeriodicMethod::InitialValueFixedPoint,
            PeriodicMethod::InitialValueFixedPoint => PeriodicMethod::FourierCollocation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeriodicSolveConfig {
    pub method: PeriodicMethod,
    /// Time samples per period when a forcing is built from a config.
    /// Solvers take `M` from the forcing trajectory itself.
    pub samples: usize,
    pub krylov_tol: f64,
    pub krylov_max_iter: usize,
    /// Crank-Nicolson steps per period; must be a multiple of `M`.
    pub substeps: usize,
    pub max_outer: usize,
    pub tol_outer: f64,
    pub divergence_guard: f64,
    pub theta: f64,
    pub p: f64,
    pub quadrature: SeminormQuadrature,
    /// Radius compared against the final solution norm; reported only.
    pub ball_radius: Option<f64>,
    /// Also run the other linear method and report the discrepancy.
    pub cross_check: bool,
    /// Largest tolerated discrepancy between the two methods.
    pub cross_check_tol: f64,
}

impl Default for PeriodicSolveConfig {
    fn default() -> Self {
        Self {
            method: PeriodicMethod::FourierCollocation,
            samples: 32,
            krylov_tol: 1e-10,
            krylov_max_iter: 2000,
            substeps: 256,
            max_outer: 50,
            tol_outer: 1e-9,
            divergence_guard: 1.0,
            theta: 0.25,
            p: 2.0,
            quadrature: SeminormQuadrature::default(),
            ball_radius: None,
            cross_check: false,
            cross_check_tol: 1e-6,
        }
    }
}

fn tolerance(field: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v <= 1e-2) {
        return Err(Error::config(field, format!("must lie in (0, 1e-2], got {v}")));
    }
    Ok(())
}

impl PeriodicSolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 8 || !self.samples.is_power_of_two() {
            return Err(Error::config(
                "solver.samples",
                format!("must be a power of two >= 8, got {}", self.samples),
            ));
        }
        tolerance("solver.krylov_tol", self.krylov_tol)?;
        tolerance("solver.tol_outer", self.tol_outer)?;
        tolerance("solver.cross_check_tol", self.cross_check_tol)?;
        if self.krylov_max_iter == 0 {
            return Err(Error::config("solver.krylov_max_iter", "must be at least 1"));
        }
        if self.max_outer == 0 {
            return Err(Error::config("solver.max_outer", "must be at least 1"));
        }
        if self.substeps == 0 || !self.substeps.is_multiple_of(self.samples) {
            return Err(Error::config(
                "solver.substeps",
                format!("must be a positive multiple of samples = {}, got {}", self.samples, self.substeps),
            ));
        }
        if !(self.divergence_guard > 0.0) {
            return Err(Error::config("solver.divergence_guard", "must be positive"));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::config("solver.theta", format!("must lie in (0, 1), got {}", self.theta)));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::config("solver.p", format!("must be finite and >= 1, got {}", self.p)));
        }
        if let Some(r) = self.ball_radius {
            if !(r > 0.0) {
                return Err(Error::config("solver.ball_radius", "must be positive"));
            }
        }
        self.quadrature
            .validate()
            .map_err(|e| Error::config("solver.quadrature", e.to_string()))
    }
}

/// Diagnostics of a linear or nonlinear periodic solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub method: PeriodicMethod,
    pub samples: usize,
    pub period: f64,
    pub outer_iterations: usize,
    /// `||v^{m+1} - v^m||_E` per outer step.
    pub update_norms: Vec<f64>,
    /// Ratios of consecutive update norms.
    pub contraction_ratios: Vec<f64>,
    pub converged: bool,
    pub divergence: bool,
    /// GMRES iterations of the last initial-value solve; not tracked for
    /// collocation.
    pub krylov_iterations: Option<usize>,
    /// Max over samples of the strong-form residual, W-L2 in space.
    pub residual: Option<f64>,
    /// `||A u||_{L^p(D_A)} / ||f||_{L^p(D_A)}` for the last linear solve.
    pub mr_ratio: Option<f64>,
    /// `||u||_E / ||f||_{L^p(D_A)}` for the last linear solve.
    pub e_ratio: Option<f64>,
    /// `||u(T) - u(0)||`; zero by construction for collocation.
    pub periodicity_defect: f64,
    /// Largest sample norm of the returned trajectory.
    pub solution_max_norm: f64,
    pub solution_e_norm: Option<f64>,
    pub ball_radius: Option<f64>,
    pub inside_ball: Option<bool>,
    /// Max sample difference against the other linear method.
    pub method_discrepancy: Option<f64>,
    pub method_disagreement: bool,
    pub theta: f64,
    pub p: f64,
    pub wall_clock_seconds: f64,
    pub deviation_note: String,
}

impl SolverReport {
    pub(crate) fn new(config: &PeriodicSolveConfig, samples: usize, period: f64) -> Self {
        Self {
            method: config.method,
            samples,
            period,
            outer_iterations: 0,
            update_norms: Vec::new(),
            contraction_ratios: Vec::new(),
            converged: false,
            divergence: false,
            krylov_iterations: None,
            residual: None,
            mr_ratio: None,
            e_ratio: None,
            periodicity_defect: 0.0,
            solution_max_norm: 0.0,
            solution_e_norm: None,
            ball_radius: config.ball_radius,
            inside_ball: None,
            method_discrepancy: None,
            method_disagreement: false,
            theta: config.theta,
            p: config.p,
            wall_clock_seconds: 0.0,
            deviation_note: DEVIATION_NOTE.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        PeriodicSolveConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            PeriodicSolveConfig { samples: 12, ..Default::default() },
            PeriodicSolveConfig { samples: 4, ..Default::default() },
            PeriodicSolveConfig { krylov_tol: 0.5, ..Default::default() },
            PeriodicSolveConfig { tol_outer: 0.0, ..Default::default() },
            PeriodicSolveConfig { max_outer: 0, ..Default::default() },
            PeriodicSolveConfig { substeps: 100, ..Default::default() },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(Error::Config { .. })), "{c:?}");
        }
    }

    #[test]
    fn json_roundtrip_and_partial_parse() {
        let c: PeriodicSolveConfig = serde_json::from_str(r#"{"method": "initial_value_fixed_point", "samples": 64}"#).unwrap();
        assert_eq!(c.method, PeriodicMethod::InitialValueFixedPoint);
        assert_eq!(c.samples, 64);
        let back: PeriodicSolveConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
