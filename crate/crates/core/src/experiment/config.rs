use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bidomain::{FaceAveraging, InnerSolveConfig};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::ionic::IonicModelSpec;
use crate::periodic::PeriodicSolveConfig;

/// A spatially varying conductivity tensor `[s11, s12, s22]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConductivityProfile {
    Isotropic { sigma: f64 },
    /// Constant tensor; `s12` must be zero whenever it would touch the
    /// boundary, so only diagonal tensors are accepted here.
    Constant { s11: f64, s22: f64 },
    /// `sigma (1 + slope x / L_x)`, isotropic.
    Graded { sigma: f64, slope: f64 },
    /// Rotated `diag(longitudinal, transverse)`; the fiber angle is
    /// `angle` at the centre and fades to zero on the boundary. In 1D only
    /// the longitudinal value is used.
    Fiber { longitudinal: f64, transverse: f64, angle: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConductivityConfig {
    pub intra: ConductivityProfile,
    pub extra: ConductivityProfile,
    #[serde(default)]
    pub averaging: FaceAveraging,
    #[serde(default = "default_inner")]
    pub inner: InnerSolveConfig,
}

fn default_inner() -> InnerSolveConfig {
    InnerSolveConfig {
        tol: 1e-12,
        max_iter: None,
        spectral_solves: true,
    }
}

impl Default for ConductivityConfig {
    fn default() -> Self {
        Self {
            intra: ConductivityProfile::Isotropic { sigma: 1.0 },
            extra: ConductivityProfile::Isotropic { sigma: 1.0 },
            averaging: FaceAveraging::Arithmetic,
            inner: default_inner(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpatialProfile {
    /// `cos(kx pi x / L_x) cos(ky pi y / L_y)`.
    Cosine {
        kx: u32,
        #[serde(default)]
        ky: u32,
    },
    Constant,
    /// `exp(-|x - center|^2 / (2 width^2))`, optionally mean-removed.
    Gaussian {
        center: Vec<f64>,
        width: f64,
        #[serde(default)]
        remove_mean: bool,
    },
}

/// `I(t, x) = amplitude * s(x) * sum_j c_j cos(2 pi j t / T + phase + phi_j)`
/// with `c_1 = 1, phi_1 = 0` and the higher weights and phases drawn from
/// the seeded generator. `modes = 0` gives a current constant in time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingConfig {
    pub amplitude: f64,
    #[serde(default = "unit")]
    pub period: f64,
    #[serde(default = "unit_modes")]
    pub modes: usize,
    #[serde(default)]
    pub phase: f64,
    pub profile: SpatialProfile,
    /// Build `(I_i, I_e) = (s g, -mean(s) g)` and reduce it through the
    /// modified source, checking conservation of currents.
    #[serde(default)]
    pub split: bool,
}

fn unit() -> f64 {
    1.0
}

fn unit_modes() -> usize {
    1
}

impl Default for ForcingConfig {
    fn default() -> Self {
        Self {
            amplitude: 1e-3,
            period: 1.0,
            modes: 1,
            phase: 0.0,
            profile: SpatialProfile::Cosine { kx: 1, ky: 0 },
            split: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    pub admissibility: bool,
    pub inverse_roundtrip: bool,
    pub sector_bound: bool,
    pub seminorm_oracle: bool,
    pub cross_validation: bool,
    pub maximal_regularity: bool,
    /// Repeat the sector and maximal-regularity measurements on the
    /// refined grid and report the drift.
    pub refinement: bool,
    /// Random states / forcings per check.
    pub trials: usize,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            admissibility: true,
            inverse_roundtrip: true,
            sector_bound: true,
            seminorm_oracle: true,
            cross_validation: true,
            maximal_regularity: true,
            refinement: false,
            trials: 5,
        }
    }
}

/// Replaces the coefficients obtained from the model linearization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearizationOverride {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub binary: bool,
    /// Write `A_i`, `A_e` in coordinate text form.
    pub export_matrices: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            binary: true,
            export_matrices: false,
        }
    }
}

/// One experiment, parsed from a single JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridSpec,
    #[serde(default)]
    pub conductivity: ConductivityConfig,
    pub model: IonicModelSpec,
    /// Index of the rest state (1, 2 or 3).
    #[serde(default = "first")]
    pub equilibrium: u8,
    #[serde(default)]
    pub forcing: ForcingConfig,
    #[serde(default)]
    pub solver: PeriodicSolveConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub linearization_override: Option<LinearizationOverride>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

fn first() -> u8 {
    1
}

fn positive(field: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::config(field, format!("must be positive, got {v}")));
    }
    Ok(())
}

impl ConductivityProfile {
    fn validate(&self, field: &str) -> Result<()> {
        match *self {
            ConductivityProfile::Isotropic { sigma } => positive(&format!("{field}.sigma"), sigma),
            ConductivityProfile::Constant { s11, s22 } => {
                positive(&format!("{field}.s11"), s11)?;
                positive(&format!("{field}.s22"), s22)
            }
            ConductivityProfile::Graded { sigma, slope } => {
                positive(&format!("{field}.sigma"), sigma)?;
                if !(slope > -1.0 && slope.is_finite()) {
                    return Err(Error::config(format!("{field}.slope"), format!("must exceed -1, got {slope}")));
                }
                Ok(())
            }
            ConductivityProfile::Fiber { longitudinal, transverse, angle } => {
                positive(&format!("{field}.longitudinal"), longitudinal)?;
                positive(&format!("{field}.transverse"), transverse)?;
                if !angle.is_finite() {
                    return Err(Error::config(format!("{field}.angle"), "must be finite"));
                }
                Ok(())
            }
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.build().map_err(|e| Error::config("grid", e.to_string()))?;
        self.conductivity.intra.validate("conductivity.intra")?;
        self.conductivity.extra.validate("conductivity.extra")?;
        let inner = self.conductivity.inner.tol;
        if !(inner > 0.0 && inner <= 1e-2) {
            return Err(Error::config("conductivity.inner.tol", format!("must lie in (0, 1e-2], got {inner}")));
        }
        self.model.validate()?;
        if !(1..=3).contains(&self.equilibrium) {
            return Err(Error::config("equilibrium", format!("must be 1, 2 or 3, got {}", self.equilibrium)));
        }
        let f = &self.forcing;
        if !f.amplitude.is_finite() {
            return Err(Error::config("forcing.amplitude", "must be finite"));
        }
        positive("forcing.period", f.period)?;
        if 2 * f.modes >= self.solver.samples {
            return Err(Error::config(
                "forcing.modes",
                format!("{} harmonics are not resolved by {} samples", f.modes, self.solver.samples),
            ));
        }
        if let SpatialProfile::Gaussian { center, width, .. } = &f.profile {
            if center.len() != self.grid.dimension {
                return Err(Error::config(
                    "forcing.profile.center",
                    format!("needs {} coordinates, got {}", self.grid.dimension, center.len()),
                ));
            }
            positive("forcing.profile.width", *width)?;
        }
        self.solver.validate()?;
        if self.diagnostics.trials == 0 {
            return Err(Error::config("diagnostics.trials", "must be at least 1"));
        }
        if let Some(o) = self.linearization_override {
            if [o.alpha, o.beta, o.gamma, o.delta].iter().any(|v| !v.is_finite()) {
                return Err(Error::config("linearization_override", "coefficients must be finite"));
            }
        }
        Ok(())
    }

    /// A 33-node FitzHugh-Nagumo run about the origin.
    pub fn example() -> Self {
        Self {
            grid: GridSpec {
                dimension: 1,
                extents: vec![33],
                lengths: vec![1.0],
            },
            conductivity: ConductivityConfig::default(),
            model: IonicModelSpec::fitzhugh_nagumo(0.1, 1.0, 0.05, 1.0).expect("valid"),
            equilibrium: 1,
            forcing: ForcingConfig::default(),
            solver: PeriodicSolveConfig::default(),
            diagnostics: DiagnosticsConfig::default(),
            linearization_override: None,
            output: OutputConfig::default(),
            seed: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_roundtrips() {
        let c = ExperimentConfig::example();
        let back = ExperimentConfig::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn invalid_a_rejected() {
        let text = r#"{"grid": {"dimension": 1, "extents": [17], "lengths": [1.0]},
                       "model": {"variant": "fhn", "a": 1.5, "b": 1.0, "c": 0.05}}"#;
        assert!(matches!(ExperimentConfig::from_json(text), Err(Error::Config { .. })));
    }

    #[test]
    fn unknown_field_reports_position() {
        let text = "{\"grid\": {\"dimension\": 1, \"extents\": [17], \"lengths\": [1.0]},\n \"modle\": {}}";
        let err = ExperimentConfig::from_json(text).unwrap_err().to_string();
        assert!(err.contains("modle") && err.contains("line 2"), "{err}");
    }
}
