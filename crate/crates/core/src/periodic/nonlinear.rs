use std::time::Instant;

use super::config::{PeriodicSolveConfig, SolverReport};
use super::coupled::CoupledOperator;
use super::linear::{apply_trajectory, e_norm, max_sample_norm, maximal_regularity_ratio, solve_linear_periodic};
use super::time::spectral_derivative;
use crate::error::{Error, Result};
use crate::grid::PeriodicTrajectory;
use crate::ionic::{shifted_nonlinearity, EquilibriumPoint, IonicModelSpec};
use crate::semigroup::{state_norm, SectorialOperator};

fn check_inputs(
    model: &IonicModelSpec,
    cop: &CoupledOperator,
    current: &PeriodicTrajectory,
) -> Result<()> {
    if current.components() != 1 {
        return Err(Error::arg(format!(
            "forcing current must have one component, got {}",
            current.components()
        )));
    }
    if current.grid() != SectorialOperator::grid(cop) {
        return Err(Error::arg("forcing current lives on a different grid than the operator"));
    }
    if cop.components() != model.component_count() {
        return Err(Error::arg(format!(
            "operator has {} components, model has {}",
            cop.components(),
            model.component_count()
        )));
    }
    Ok(())
}

/// `N(v) + (I, 0)` sample by sample.
pub fn frozen_rhs(
    model: &IonicModelSpec,
    eq: &EquilibriumPoint,
    v: &PeriodicTrajectory,
    current: &PeriodicTrajectory,
) -> PeriodicTrajectory {
    let n = v.grid().node_count();
    let comps = v.components();
    let samples = v
        .samples()
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let z = if comps == 2 { &s[n..] } else { &[][..] };
            let (n1, n2) = shifted_nonlinearity(model, eq, &s[..n], z);
            let mut out: Vec<f64> = n1.iter().zip(current.sample(k)).map(|(a, i)| a + i).collect();
            if comps == 2 {
                out.extend(n2);
            }
            out
        })
        .collect();
    v.with_samples(samples)
}

/// Fixed-point iteration `v <- S(v)` where `S(v)` is the periodic solution
/// of the linear problem with the nonlinearity frozen at `v`. Returns the
/// shifted trajectory `(v, z)`; see [`absolute_trajectory`].
pub fn solve_nonlinear_periodic(
    model: &IonicModelSpec,
    eq: &EquilibriumPoint,
    current: &PeriodicTrajectory,
    cop: &CoupledOperator,
    config: &PeriodicSolveConfig,
) -> Result<(PeriodicTrajectory, SolverReport)> {
    config.validate()?;
    check_inputs(model, cop, current)?;
    let start = Instant::now();
    let (theta, p, quad) = (config.theta, config.p, &config.quadrature);
    let mut report = SolverReport::new(config, current.len(), current.period());
    let mut v = PeriodicTrajectory::zeros(current.grid(), current.period(), cop.components(), current.len())?;
    let mut v_norm = 0.0;
    let mut last_rhs = frozen_rhs(model, eq, &v, current);
    let mut last_linear = None;
    let mut previous_update: Option<f64> = None;
    for m in 1..=config.max_outer {
        let rhs = frozen_rhs(model, eq, &v, current);
        let (next, lin) = solve_linear_periodic(cop, &rhs, config)?;
        let delta = next.combine(1.0, &v, -1.0)?;
        let dn = e_norm(cop, &delta, theta, p, quad)?;
        report.outer_iterations = m;
        report.update_norms.push(dn);
        if let Some(prev) = previous_update {
            let r = if prev > 0.0 {
                dn / prev
            } else if dn == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            report.contraction_ratios.push(r);
            if !r.is_finite() || r >= config.divergence_guard {
                report.divergence = true;
                report.solution_max_norm = max_sample_norm(&next);
                report.wall_clock_seconds = start.elapsed().as_secs_f64();
                return Err(Error::Divergence { report: Box::new(report) });
            }
        }
        if !dn.is_finite() {
            report.divergence = true;
            report.wall_clock_seconds = start.elapsed().as_secs_f64();
            return Err(Error::Divergence { report: Box::new(report) });
        }
        previous_update = Some(dn);
        let converged = dn <= config.tol_outer * (1.0 + v_norm);
        v = next;
        last_rhs = rhs;
        last_linear = Some(lin);
        if converged {
            report.converged = true;
            break;
        }
        v_norm = e_norm(cop, &v, theta, p, quad)?;
    }
    let lin = last_linear.expect("at least one outer iteration");
    report.krylov_iterations = lin.krylov_iterations;
    report.periodicity_defect = lin.periodicity_defect;
    report.method_discrepancy = lin.method_discrepancy;
    report.method_disagreement = lin.method_disagreement;
    report.solution_max_norm = max_sample_norm(&v);
    report.residual = Some(residual(&v, model, eq, current, cop)?);
    if !report.converged {
        report.wall_clock_seconds = start.elapsed().as_secs_f64();
        return Err(Error::MaxOuterExceeded { report: Box::new(report) });
    }
    let solution_norm = e_norm(cop, &v, theta, p, quad)?;
    report.solution_e_norm = Some(solution_norm);
    report.inside_ball = config.ball_radius.map(|r| solution_norm <= r);
    if last_rhs.max_abs() > 0.0 {
        let mr = maximal_regularity_ratio(cop, &v, &last_rhs, theta, p, quad)?;
        report.mr_ratio = Some(mr.ratio);
        report.e_ratio = Some(mr.e_ratio);
    }
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok((v, report))
}

/// `max_k ||D_t v + A v - N(v) - (I, 0)||`.
pub fn residual(
    traj: &PeriodicTrajectory,
    model: &IonicModelSpec,
    eq: &EquilibriumPoint,
    current: &PeriodicTrajectory,
    cop: &CoupledOperator,
) -> Result<f64> {
    check_inputs(model, cop, current)?;
    if traj.len() != current.len() || traj.components() != cop.components() || traj.grid() != current.grid() {
        return Err(Error::arg("trajectory and forcing have incompatible layouts"));
    }
    let rhs = frozen_rhs(model, eq, traj, current);
    let dv = spectral_derivative(traj);
    let av = apply_trajectory(cop, traj)?;
    let mut worst = 0.0f64;
    for k in 0..traj.len() {
        let r: Vec<f64> = (0..rhs.sample(k).len())
            .map(|i| dv.sample(k)[i] + av.sample(k)[i] - rhs.sample(k)[i])
            .collect();
        worst = worst.max(state_norm(traj.grid(), &r));
    }
    Ok(worst)
}

/// `(u, w) = (u*, w*) + (v, z)`.
pub fn absolute_trajectory(shifted: &PeriodicTrajectory, eq: &EquilibriumPoint) -> PeriodicTrajectory {
    let n = shifted.grid().node_count();
    let samples = shifted
        .samples()
        .iter()
        .map(|s| {
            s.iter()
                .enumerate()
                .map(|(i, x)| x + if i < n { eq.u_star } else { eq.w_star.unwrap_or(0.0) })
                .collect()
        })
        .collect();
    shifted.with_samples(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ionic::{equilibria, linearize};

    #[test]
    fn zero_current_returns_equilibrium() {
        let model = IonicModelSpec::allen_cahn();
        let eq = equilibria(&model).unwrap().by_index(1).unwrap();
        let lin = linearize(&model, &eq);
        let cop = CoupledOperator::scalar_surrogate(lin.alpha);
        let g = SectorialOperator::grid(&cop).clone();
        let i = PeriodicTrajectory::zeros(&g, 1.0, 1, 8).unwrap();
        let (v, rep) = solve_nonlinear_periodic(&model, &eq, &i, &cop, &PeriodicSolveConfig::default()).unwrap();
        assert_eq!(rep.outer_iterations, 1);
        assert_eq!(v.max_abs(), 0.0);
        assert!(rep.residual.unwrap() < 1e-12);
    }
}
