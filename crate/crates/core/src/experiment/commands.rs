use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::build::{build_forcing, embed_current, Setup};
use super::config::ExperimentConfig;
use super::io::{encode_bdps, trajectory_csv, write};
use crate::csv_out::{finish, io, num, writer};
use crate::diffusion::DiffusionOperator;
use crate::error::{Error, Result};
use crate::grid::{bochner_norm, Grid, PeriodicTrajectory};
use crate::ionic::{equilibria, is_stable, linearize, stability_condition, EquilibriumPoint, LinearizedSystem, StabilityReport};
use crate::periodic::{
    coupled_apply, coupled_inverse_apply, initial_value_fixed_point_with, max_sample_difference, max_sample_norm,
    maximal_regularity_ratio, solve_linear_periodic, solve_nonlinear_periodic, CoupledOperator, PeriodicMethod,
    PeriodicSolveConfig, SolverReport, StepperKind, DEVIATION_NOTE,
};
use crate::semigroup::{
    default_sector_samples, interpolation_seminorm, state_norm, verify_sector_bound, SectorReport, SectorialOperator,
};

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    crate_version: &'a str,
    deviation_note: &'a str,
    seed: u64,
    outputs: Vec<String>,
    config: &'a ExperimentConfig,
}

fn write_manifest(cfg: &ExperimentConfig, out: &Path, command: &str, mut outputs: Vec<String>) -> Result<()> {
    outputs.push("manifest.json".into());
    let m = Manifest {
        command,
        crate_version: env!("CARGO_PKG_VERSION"),
        deviation_note: DEVIATION_NOTE,
        seed: cfg.seed,
        outputs,
        config: cfg,
    };
    write(out, "manifest.json", serde_json::to_string_pretty(&m)? + "\n")?;
    Ok(())
}

fn export_matrices(cfg: &ExperimentConfig, setup: &Setup, out: &Path, files: &mut Vec<String>) -> Result<()> {
    if cfg.output.export_matrices {
        files.push(write(out, "a_intra.coo", setup.base.op_i().matrix().to_coordinate_text())?);
        files.push(write(out, "a_extra.coo", setup.base.op_e().matrix().to_coordinate_text())?);
    }
    Ok(())
}

/// One row of the rest-state table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumRow {
    pub index: u8,
    pub u_star: f64,
    pub w_star: Option<f64>,
    pub admissible: bool,
    pub stable: bool,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriaReport {
    pub model: String,
    pub rows: Vec<EquilibriumRow>,
    pub stability: StabilityReport,
    pub omitted: Option<String>,
}

impl EquilibriaReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = writer();
        w.write_record(["index", "u_star", "w_star", "admissible", "stable", "alpha", "beta", "gamma", "delta"])
            .map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.index.to_string(),
                num(r.u_star),
                r.w_star.map(num).unwrap_or_default(),
                r.admissible.to_string(),
                r.stable.to_string(),
                num(r.alpha),
                num(r.beta),
                num(r.gamma),
                num(r.delta),
            ])
            .map_err(io)?;
        }
        finish(w)
    }

    /// Fixed-width table for the terminal.
    pub fn to_table(&self) -> String {
        let mut s = format!("{} rest states\n", self.model);
        s.push_str("index        u*           w*  admissible  stable        alpha\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{:>5} {:>12.6} {:>12} {:>11} {:>7} {:>12.6}\n",
                r.index,
                r.u_star,
                r.w_star.map(|w| format!("{w:.6}")).unwrap_or_else(|| "-".into()),
                r.admissible,
                r.stable,
                r.alpha
            ));
        }
        s.push_str(&format!("stability condition holds: {}\n", self.stability.holds));
        for (k, v) in &self.stability.details {
            s.push_str(&format!("  {k} = {v:.6e}\n"));
        }
        if let Some(o) = &self.omitted {
            s.push_str(&format!("omitted: {o}\n"));
        }
        s
    }
}

/// Rest states, their linearizations and the stability predicate.
pub fn cmd_equilibria(cfg: &ExperimentConfig, out: &Path) -> Result<EquilibriaReport> {
    let model = cfg.model.validated()?;
    let set = equilibria(&model)?;
    let rows = set
        .points
        .iter()
        .map(|eq| {
            let lin = linearize(&model, eq);
            Ok(EquilibriumRow {
                index: eq.index,
                u_star: eq.u_star,
                w_star: eq.w_star,
                admissible: eq.admissible,
                stable: is_stable(&model, eq)?,
                alpha: lin.alpha,
                beta: lin.beta,
                gamma: lin.gamma,
                delta: lin.delta,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = EquilibriaReport {
        model: model.variant.short_name().to_string(),
        rows,
        stability: stability_condition(&model)?,
        omitted: set.omitted,
    };
    let files = vec![
        write(out, "equilibria.csv", report.to_csv()?)?,
        write(out, "equilibria.json", serde_json::to_string_pretty(&report)? + "\n")?,
    ];
    write_manifest(cfg, out, "equilibria", files)?;
    Ok(report)
}

/// What `report.json` holds after a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub converged: bool,
    pub error: Option<String>,
    pub rest_state: EquilibriumPoint,
    pub linearization: LinearizedSystem,
    pub report: Option<SolverReport>,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub shifted: PeriodicTrajectory,
    pub report: SolverReport,
    pub files: Vec<String>,
}

/// The contraction iteration about the configured rest state. On solver
/// failure the partial report is written before the error is returned.
pub fn cmd_solve(cfg: &ExperimentConfig, out: &Path) -> Result<SolveOutcome> {
    let setup = Setup::new(cfg)?;
    let mut files = Vec::new();
    export_matrices(cfg, &setup, out, &mut files)?;
    let mut record = SolveRecord {
        converged: false,
        error: None,
        rest_state: setup.eq,
        linearization: setup.linearization,
        report: None,
    };
    let result = setup.coupled(cfg.solver.krylov_tol).and_then(|cop| {
        let current = build_forcing(cfg, &setup.grid, &setup.base)?;
        solve_nonlinear_periodic(&setup.model, &setup.eq, &current, &cop, &cfg.solver)
    });
    match result {
        Ok((shifted, report)) => {
            files.push(write(out, "trajectory.csv", trajectory_csv(&shifted)?)?);
            if cfg.output.binary {
                files.push(write(out, "trajectory.bdps", encode_bdps(&shifted))?);
            }
            record.converged = true;
            record.report = Some(report.clone());
            files.push(write(out, "report.json", serde_json::to_string_pretty(&record)? + "\n")?);
            write_manifest(cfg, out, "solve", files.clone())?;
            Ok(SolveOutcome { shifted, report, files })
        }
        Err(e) => {
            record.error = Some(e.to_string());
            record.report = e.partial_report().cloned();
            files.push(write(out, "report.json", serde_json::to_string_pretty(&record)? + "\n")?);
            write_manifest(cfg, out, "solve", files)?;
            Err(e)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    /// Measured value compared against `threshold`.
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    fn measured(name: &str, value: f64, threshold: f64, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            status: if passed { CheckStatus::Pass } else { CheckStatus::Fail },
            value,
            threshold,
            detail,
        }
    }

    fn skipped(name: &str, why: &str) -> Self {
        Self {
            name: name.into(),
            status: CheckStatus::Skipped,
            value: f64::NAN,
            threshold: f64::NAN,
            detail: why.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub all_passed: bool,
    pub deviation_note: String,
}

impl VerifyReport {
    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail).collect()
    }
}

/// Smooth probes that do not depend on the grid resolution.
fn smooth_probes(grid: &Grid, count: usize, components: usize) -> Vec<Vec<f64>> {
    let lx = grid.lengths()[0];
    let ly = grid.lengths().get(1).copied().unwrap_or(1.0);
    (1..=count)
        .map(|k| {
            let n = grid.node_count();
            let mut v = vec![0.0; components * n];
            for node in 0..n {
                let [x, y] = grid.coordinates(node);
                let base = (k as f64 * PI * x / lx).cos() * ((k - 1) as f64 * PI * y / ly).cos() + 0.3 * x / lx;
                for c in 0..components {
                    v[c * n + node] = base * (1.0 - 0.5 * c as f64);
                }
            }
            v
        })
        .collect()
}

/// `(kx, ky, harmonic, amplitude, phase)` terms drawn from the generator.
type Terms = Vec<(u32, u32, u32, f64, f64)>;

fn random_terms(rng: &mut ChaCha8Rng, dimension: usize, max_harmonic: u32) -> Terms {
    (0..3)
        .map(|_| {
            let ky = if dimension == 2 { rng.gen_range(0..3) } else { 0 };
            (
                rng.gen_range(0..4),
                ky,
                rng.gen_range(1..=max_harmonic),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..2.0 * PI),
            )
        })
        .collect()
}

/// A trigonometric forcing in the first component.
fn forcing_from_terms(grid: &Grid, period: f64, m: usize, components: usize, terms: &Terms) -> Result<PeriodicTrajectory> {
    let lx = grid.lengths()[0];
    let ly = grid.lengths().get(1).copied().unwrap_or(1.0);
    PeriodicTrajectory::from_fn(grid, period, components, m, |t, x, y| {
        let v: f64 = terms
            .iter()
            .map(|&(kx, ky, h, a, phi)| {
                a * (kx as f64 * PI * x / lx).cos()
                    * (ky as f64 * PI * y / ly).cos()
                    * (2.0 * PI * h as f64 * t / period + phi).cos()
            })
            .sum();
        let mut out = vec![0.0; components];
        out[0] = v;
        out
    })
}

fn sector_sweep(base: std::sync::Arc<crate::bidomain::BidomainOperator>, trials: usize, tol: f64) -> Result<SectorReport> {
    let op = CoupledOperator::single(base, 1.0, 0.0)?.with_tolerance(tol);
    let probes = smooth_probes(SectorialOperator::grid(&op), trials, 1);
    let (angles, radii) = default_sector_samples();
    verify_sector_bound(&op, &angles, &radii, &probes, &[2.0])
}

/// `mu^theta (Gamma((1-theta)p) / p^{(1-theta)p})^{1/p}`.
pub fn seminorm_closed_form(mu: f64, theta: f64, p: f64) -> f64 {
    let s = (1.0 - theta) * p;
    mu.powf(theta) * (libm::tgamma(s) / p.powf(s)).powf(1.0 / p)
}

fn drift(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Sector bound, seminorm oracle, inverse roundtrip and method
/// cross-validation. Failed checks are recorded, not returned as errors.
pub fn cmd_verify(cfg: &ExperimentConfig, out: &Path) -> Result<VerifyReport> {
    let setup = Setup::new(cfg)?;
    let d = &cfg.diagnostics;
    let tol = cfg.solver.krylov_tol;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut checks = Vec::new();
    let mut files = Vec::new();
    export_matrices(cfg, &setup, out, &mut files)?;

    let lin = setup.linearization;
    let cop = if lin.admissible { Some(setup.coupled(tol)?) } else { None };
    if d.admissibility {
        checks.push(Check::measured(
            "admissibility",
            if lin.components == 1 { lin.alpha } else { lin.alpha.min(lin.delta).min(lin.beta).min(lin.gamma) },
            0.0,
            lin.admissible,
            format!(
                "alpha = {}, beta = {}, gamma = {}, delta = {}",
                lin.alpha, lin.beta, lin.gamma, lin.delta
            ),
        ));
    }

    if d.inverse_roundtrip {
        match &cop {
            None => checks.push(Check::skipped("inverse_roundtrip", "operator not admissible")),
            Some(cop) => {
                let len = cop.state_len();
                let mut worst = 0.0f64;
                for _ in 0..d.trials {
                    let x: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let y = coupled_apply(cop, &coupled_inverse_apply(cop, &x)?)?;
                    let err: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
                    worst = worst.max(state_norm(&setup.grid, &err) / state_norm(&setup.grid, &x));
                }
                let sur = CoupledOperator::surrogate(2.0, 1.0, 1.0, 1.0);
                let e = coupled_inverse_apply(&sur, &[1.0, 1.0, 1.0, 0.0, 0.0, 0.0])?;
                let worked = (e[0] - 1.0 / 3.0).abs().max((e[3] - 1.0 / 3.0).abs());
                checks.push(Check::measured(
                    "inverse_roundtrip",
                    worst,
                    1e-8,
                    worst <= 1e-8 && worked <= 1e-14,
                    format!("{} random states; worked 2x2 example error {worked:.2e}", d.trials),
                ));
            }
        }
    }

    if d.sector_bound {
        let rep = sector_sweep(setup.base.clone(), d.trials, tol)?;
        files.push(write(out, "sector.csv", rep.to_csv()?)?);
        let real_axis = rep
            .entries
            .iter()
            .filter(|e| e.im_lambda == 0.0 && e.re_lambda > 0.0)
            .fold(0.0f64, |m, e| m.max(e.ratio));
        let ok = rep.sup.is_finite() && rep.failures == 0 && real_axis <= 1.0 + 1e-8;
        checks.push(Check::measured(
            "sector_bound",
            rep.sup,
            f64::INFINITY,
            ok,
            format!("real-axis max ratio {real_axis:.12}, {} failed solves", rep.failures),
        ));
        if d.refinement {
            let fine = Setup::on_grid(cfg, setup.grid.refined())?;
            let rep_f = sector_sweep(fine.base.clone(), d.trials, tol)?;
            let dr = drift(rep_f.sup, rep.sup);
            checks.push(Check::measured(
                "sector_refinement_drift",
                dr,
                0.25,
                dr < 0.25,
                format!("sup {:.6} -> {:.6}", rep.sup, rep_f.sup),
            ));
        }
    }

    if d.seminorm_oracle {
        let shifted = CoupledOperator::single(setup.base.clone(), 1.0, 1.0)?.with_tolerance(tol);
        let spectral = setup.base.spectral()?;
        let modes = spectral.len().min(5);
        let mut worst = 0.0f64;
        for j in 0..modes {
            let x = spectral.vector(j);
            let mu = spectral.values()[j] + 1.0;
            for (theta, p) in [(0.25, 2.0), (0.5, 2.0), (0.5, 1.0)] {
                let est = interpolation_seminorm(&shifted, &x, theta, p, &cfg.solver.quadrature)?;
                let exact = seminorm_closed_form(mu, theta, p) * state_norm(&setup.grid, &x);
                worst = worst.max(drift(est.value, exact));
            }
        }
        checks.push(Check::measured(
            "seminorm_oracle",
            worst,
            1e-3,
            worst <= 1e-3,
            format!("{modes} eigenpairs of A + 1, (theta, p) in (1/4, 2), (1/2, 2), (1/2, 1)"),
        ));
    }

    if d.cross_validation {
        match &cop {
            None => checks.push(Check::skipped("cross_validation", "operator not admissible")),
            Some(cop) => {
                let current = build_forcing(cfg, &setup.grid, &setup.base)?;
                let f = embed_current(&current, cop.components())?;
                let fc_cfg = PeriodicSolveConfig { method: PeriodicMethod::FourierCollocation, ..cfg.solver.clone() };
                let (u_fc, _) = solve_linear_periodic(cop, &f, &fc_cfg)?;
                let (u_s, _, _) = initial_value_fixed_point_with(cop, &f, &cfg.solver, StepperKind::Auto)?;
                let fine = PeriodicSolveConfig { substeps: 2 * cfg.solver.substeps, ..cfg.solver.clone() };
                let (u_2s, _, _) = initial_value_fixed_point_with(cop, &f, &fine, StepperKind::Auto)?;
                let estimate = max_sample_difference(&u_s, &u_2s) * 4.0 / 3.0;
                let discrepancy = max_sample_difference(&u_fc, &u_s);
                let allowed = 10.0 * estimate + 1e-9 * (1.0 + max_sample_norm(&u_fc));
                checks.push(Check::measured(
                    "cross_validation",
                    discrepancy,
                    allowed,
                    discrepancy <= allowed,
                    format!(
                        "Crank-Nicolson error estimate {estimate:.3e} at {} substeps",
                        cfg.solver.substeps
                    ),
                ));
            }
        }
    }

    if d.maximal_regularity {
        match &cop {
            None => checks.push(Check::skipped("maximal_regularity", "operator not admissible")),
            Some(cop) => {
                let fine = if d.refinement {
                    Some(Setup::on_grid(cfg, setup.grid.refined())?.coupled(tol)?)
                } else {
                    None
                };
                let m = cfg.solver.samples;
                let max_h = ((m / 2 - 1) as u32).clamp(1, 3);
                let (theta, p, quad) = (cfg.solver.theta, cfg.solver.p, &cfg.solver.quadrature);
                let mut worst = 0.0f64;
                let mut worst_drift = 0.0f64;
                let mut finite = true;
                for _ in 0..d.trials {
                    let terms = random_terms(&mut rng, setup.grid.dimension(), max_h);
                    let ratio_on = |c: &CoupledOperator| -> Result<f64> {
                        let f = forcing_from_terms(SectorialOperator::grid(c), cfg.forcing.period, m, c.components(), &terms)?;
                        let (u, _) = solve_linear_periodic(c, &f, &cfg.solver)?;
                        Ok(maximal_regularity_ratio(c, &u, &f, theta, p, quad)?.ratio)
                    };
                    let r = ratio_on(cop)?;
                    finite &= r.is_finite();
                    worst = worst.max(r);
                    if let Some(fc) = &fine {
                        worst_drift = worst_drift.max(drift(ratio_on(fc)?, r));
                    }
                }
                checks.push(Check::measured(
                    "maximal_regularity",
                    worst,
                    f64::INFINITY,
                    finite,
                    format!("largest ratio over {} random forcings", d.trials),
                ));
                if fine.is_some() {
                    checks.push(Check::measured(
                        "maximal_regularity_refinement_drift",
                        worst_drift,
                        0.25,
                        worst_drift < 0.25,
                        "largest relative change under one refinement".into(),
                    ));
                }
            }
        }
    }

    let all_passed = checks.iter().all(|c| c.status != CheckStatus::Fail);
    let report = VerifyReport {
        checks,
        all_passed,
        deviation_note: DEVIATION_NOTE.into(),
    };
    files.push(write(out, "verify.json", serde_json::to_string_pretty(&report)? + "\n")?);
    write_manifest(cfg, out, "verify", files)?;
    Ok(report)
}

/// Per-sample norms of the configured forcing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub t: f64,
    pub l2: f64,
    pub seminorm: f64,
    pub seminorm_error_bar: f64,
    pub da_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormsReport {
    pub theta: f64,
    pub p: f64,
    pub rows: Vec<NormRow>,
    /// `||I||_{L^p(0,T; L^2)}`.
    pub bochner_l2: f64,
    /// `||I||_{L^p(0,T; D_A(theta,p))}`.
    pub bochner_da: f64,
    pub deviation_note: String,
}

impl NormsReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = writer();
        w.write_record(["t", "l2", "seminorm", "seminorm_error_bar", "da_norm"]).map_err(io)?;
        for r in &self.rows {
            w.write_record([num(r.t), num(r.l2), num(r.seminorm), num(r.seminorm_error_bar), num(r.da_norm)])
                .map_err(io)?;
        }
        finish(w)
    }
}

/// Interpolation-space norms of the configured forcing `(I, 0)`.
pub fn cmd_norms(cfg: &ExperimentConfig, out: &Path) -> Result<NormsReport> {
    let setup = Setup::new(cfg)?;
    let cop = setup.coupled(cfg.solver.krylov_tol)?;
    let current = build_forcing(cfg, &setup.grid, &setup.base)?;
    let f = embed_current(&current, cop.components())?;
    let (theta, p, quad) = (cfg.solver.theta, cfg.solver.p, &cfg.solver.quadrature);
    let mut rows = Vec::with_capacity(f.len());
    for k in 0..f.len() {
        let x = f.sample(k);
        let l2 = state_norm(&setup.grid, x);
        let est = interpolation_seminorm(&cop, x, theta, p, quad)?;
        rows.push(NormRow {
            t: f.time(k),
            l2,
            seminorm: est.value,
            seminorm_error_bar: est.error_bar,
            da_norm: l2 + est.value,
        });
    }
    let mut it = rows.iter();
    let bochner_l2 = bochner_norm(&f, p, |_| Ok(it.next().map_or(0.0, |r| r.l2)))?;
    let mut it = rows.iter();
    let bochner_da = bochner_norm(&f, p, |_| Ok(it.next().map_or(0.0, |r| r.da_norm)))?;
    let report = NormsReport {
        theta,
        p,
        rows,
        bochner_l2,
        bochner_da,
        deviation_note: DEVIATION_NOTE.into(),
    };
    let files = vec![
        write(out, "norms.csv", report.to_csv()?)?,
        write(out, "norms.json", serde_json::to_string_pretty(&report)? + "\n")?,
    ];
    write_manifest(cfg, out, "norms", files)?;
    Ok(report)
}

/// Shorthand used by the binary: keeps `Error` while naming the command.
pub fn describe(e: &Error) -> String {
    match e.partial_report() {
        Some(r) => format!(
            "{e}; contraction ratios {:?}; divergence = {}",
            r.contraction_ratios, r.divergence
        ),
        None => e.to_string(),
    }
}
