use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ConductivityConfig, ConductivityProfile, ExperimentConfig, SpatialProfile};
use crate::bidomain::{assemble_elliptic_with, BidomainOperator, ConductivityField};
use crate::error::{Error, Result};
use crate::grid::{project_mean_zero, Grid, PeriodicTrajectory, ScalarField};
use crate::ionic::{equilibria, linearize, EquilibriumPoint, IonicModelSpec, LinearizedSystem};
use crate::periodic::CoupledOperator;

pub fn conductivity_field(grid: &Grid, profile: &ConductivityProfile) -> Result<ConductivityField> {
    let lx = grid.lengths()[0];
    let ly = grid.lengths().get(1).copied().unwrap_or(1.0);
    match *profile {
        ConductivityProfile::Isotropic { sigma } => Ok(ConductivityField::isotropic(grid, sigma)),
        ConductivityProfile::Constant { s11, s22 } => Ok(ConductivityField::constant(grid, [s11, 0.0, s22])),
        ConductivityProfile::Graded { sigma, slope } => ConductivityField::from_fn(grid, |x, _| {
            let s = sigma * (1.0 + slope * x / lx);
            [s, 0.0, s]
        }),
        ConductivityProfile::Fiber { longitudinal, transverse, angle } => {
            if grid.dimension() == 1 {
                return Ok(ConductivityField::isotropic(grid, longitudinal));
            }
            ConductivityField::from_fn(grid, |x, y| {
                let (sx, sy) = (x / lx, y / ly);
                let bump = 16.0 * sx * (1.0 - sx) * sy * (1.0 - sy);
                let (s, c) = (angle * bump).sin_cos();
                let s11 = longitudinal * c * c + transverse * s * s;
                let s22 = longitudinal * s * s + transverse * c * c;
                let mut s12 = (longitudinal - transverse) * s * c;
                if bump == 0.0 {
                    s12 = 0.0;
                }
                [s11, s12, s22]
            })
        }
    }
}

/// Assembles `A_i`, `A_e` and the composite operator.
pub fn build_bidomain(grid: &Grid, cfg: &ConductivityConfig) -> Result<Arc<BidomainOperator>> {
    let si = conductivity_field(grid, &cfg.intra)?;
    let se = conductivity_field(grid, &cfg.extra)?;
    let op_i = Arc::new(assemble_elliptic_with(grid, &si, cfg.averaging)?);
    let op_e = Arc::new(assemble_elliptic_with(grid, &se, cfg.averaging)?);
    Ok(Arc::new(BidomainOperator::with_inner(op_i, op_e, cfg.inner)?))
}

/// Everything a command needs, assembled once from a config.
#[derive(Debug, Clone)]
pub struct Setup {
    pub grid: Grid,
    pub base: Arc<BidomainOperator>,
    pub model: IonicModelSpec,
    pub eq: EquilibriumPoint,
    /// Coefficients in use, after any override.
    pub linearization: LinearizedSystem,
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        Self::on_grid(cfg, cfg.grid.build()?)
    }

    /// Same experiment on another grid (used for refinement studies).
    pub fn on_grid(cfg: &ExperimentConfig, grid: Grid) -> Result<Self> {
        let base = build_bidomain(&grid, &cfg.conductivity)?;
        let model = cfg.model.validated()?;
        let set = equilibria(&model)?;
        let eq = set.by_index(cfg.equilibrium).ok_or_else(|| {
            Error::config(
                "equilibrium",
                format!(
                    "{} has no rest state with index {}{}",
                    model.variant.short_name(),
                    cfg.equilibrium,
                    set.omitted.as_deref().map(|s| format!(" ({s})")).unwrap_or_default()
                ),
            )
        })?;
        let mut linearization = linearize(&model, &eq);
        if let Some(o) = cfg.linearization_override {
            linearization.alpha = o.alpha;
            linearization.beta = o.beta;
            linearization.gamma = o.gamma;
            linearization.delta = o.delta;
            linearization.admissible =
                LinearizedSystem::sign_pattern_ok(o.alpha, o.beta, o.gamma, o.delta, linearization.components);
        }
        Ok(Self {
            grid,
            base,
            model,
            eq,
            linearization,
        })
    }

    /// The coupled operator; fails for non-admissible coefficients.
    pub fn coupled(&self, tol: f64) -> Result<CoupledOperator> {
        Ok(CoupledOperator::from_linearization(self.base.clone(), &self.linearization)?.with_tolerance(tol))
    }
}

fn spatial_profile(grid: &Grid, profile: &SpatialProfile) -> ScalarField {
    let lx = grid.lengths()[0];
    let ly = grid.lengths().get(1).copied().unwrap_or(1.0);
    match profile {
        SpatialProfile::Cosine { kx, ky } => ScalarField::from_fn(grid, |x, y| {
            (*kx as f64 * PI * x / lx).cos() * (*ky as f64 * PI * y / ly).cos()
        }),
        SpatialProfile::Constant => ScalarField::constant(grid, 1.0),
        SpatialProfile::Gaussian { center, width, remove_mean } => {
            let cy = center.get(1).copied().unwrap_or(0.0);
            let f = ScalarField::from_fn(grid, |x, y| {
                let r2 = (x - center[0]).powi(2) + if grid.dimension() == 2 { (y - cy).powi(2) } else { 0.0 };
                (-r2 / (2.0 * width * width)).exp()
            });
            if *remove_mean {
                project_mean_zero(&f)
            } else {
                f
            }
        }
    }
}

/// Temporal weights `(c_j, phi_j)`, `j = 1..modes`, from the seed.
pub fn harmonic_weights(modes: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=modes)
        .map(|j| {
            if j == 1 {
                (1.0, 0.0)
            } else {
                (rng.gen_range(0.0..0.5), rng.gen_range(0.0..2.0 * PI))
            }
        })
        .collect()
}

/// The scalar current `I(t, x)` sampled at `M` times, reduced through
/// the modified source when the config asks for a split forcing.
pub fn build_forcing(cfg: &ExperimentConfig, grid: &Grid, base: &BidomainOperator) -> Result<PeriodicTrajectory> {
    let f = &cfg.forcing;
    let m = cfg.solver.samples;
    let profile = spatial_profile(grid, &f.profile);
    let weights = harmonic_weights(f.modes, cfg.seed);
    let temporal = |t: f64| -> f64 {
        if f.modes == 0 {
            return 1.0;
        }
        weights
            .iter()
            .enumerate()
            .map(|(j, (c, phi))| c * (2.0 * PI * (j + 1) as f64 * t / f.period + f.phase + phi).cos())
            .sum()
    };
    let spatial = if f.split {
        let mean = crate::grid::integrate(&profile) / grid.measure();
        let ie = ScalarField::constant(grid, -mean);
        base.modified_source(&profile, &ie)?
    } else {
        profile
    };
    let samples = (0..m)
        .map(|k| {
            let g = f.amplitude * temporal(k as f64 * f.period / m as f64);
            spatial.values().iter().map(|s| g * s).collect()
        })
        .collect();
    PeriodicTrajectory::new(grid, f.period, 1, samples)
}

/// `(I, 0)` for two-component operators, `I` otherwise.
pub fn embed_current(current: &PeriodicTrajectory, components: usize) -> Result<PeriodicTrajectory> {
    let n = current.grid().node_count();
    let samples = current
        .samples()
        .iter()
        .map(|s| {
            let mut x = s.clone();
            x.resize(components * n, 0.0);
            x
        })
        .collect();
    PeriodicTrajectory::new(current.grid(), current.period(), components, samples)
}
