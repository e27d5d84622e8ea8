use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;

use bidomain_periodic::bidomain::{assemble_elliptic, BidomainOperator, ConductivityField};
use bidomain_periodic::grid::{make_grid, Grid, PeriodicTrajectory};
use bidomain_periodic::ionic::{equilibria, linearize, IonicModelSpec};
use bidomain_periodic::periodic::{
    absolute_trajectory, initial_value_fixed_point_with, linear_residual, max_sample_difference, max_sample_norm,
    maximal_regularity_ratio, residual, solve_linear_periodic, solve_nonlinear_periodic, CoupledOperator,
    PeriodicMethod, PeriodicSolveConfig, StepperKind,
};
use bidomain_periodic::semigroup::{SectorialOperator, SeminormQuadrature};
use bidomain_periodic::Error;

fn base(n: usize) -> Arc<BidomainOperator> {
    let grid = make_grid(1, &[n], &[1.0]).unwrap();
    let s = ConductivityField::isotropic(&grid, 1.0);
    let oi = Arc::new(assemble_elliptic(&grid, &s).unwrap());
    let oe = Arc::new(assemble_elliptic(&grid, &s).unwrap());
    Arc::new(BidomainOperator::new(oi, oe).unwrap())
}

fn fhn() -> IonicModelSpec {
    IonicModelSpec::fitzhugh_nagumo(0.1, 1.0, 0.05, 1.0).unwrap()
}

fn fhn_origin(n: usize) -> CoupledOperator {
    let model = fhn();
    let eq = equilibria(&model).unwrap().by_index(1).unwrap();
    CoupledOperator::from_linearization(base(n), &linearize(&model, &eq)).unwrap()
}

fn forcing(grid: &Grid, m: usize, terms: &[(f64, f64, f64, f64)]) -> PeriodicTrajectory {
    PeriodicTrajectory::from_fn(grid, 1.0, 2, m, |t, x, _| {
        let v = terms
            .iter()
            .map(|&(kx, h, a, phi)| a * (kx * PI * x).cos() * (2.0 * PI * h * t + phi).cos())
            .sum();
        vec![v, 0.0]
    })
    .unwrap()
}

fn cfg(method: PeriodicMethod) -> PeriodicSolveConfig {
    PeriodicSolveConfig {
        method,
        krylov_tol: 1e-12,
        ..Default::default()
    }
}

#[test]
fn surrogate_examples() {
    let cop = CoupledOperator::scalar_surrogate(2.0);
    let g = cop.grid().clone();
    let config = PeriodicSolveConfig { samples: 64, ..Default::default() };

    let zero = PeriodicTrajectory::zeros(&g, 1.0, 1, 64).unwrap();
    let (u, _) = solve_linear_periodic(&cop, &zero, &config).unwrap();
    assert_eq!(u.max_abs(), 0.0);

    let one = PeriodicTrajectory::from_fn(&g, 1.0, 1, 64, |_, _, _| vec![1.0]).unwrap();
    let (u, _) = solve_linear_periodic(&cop, &one, &config).unwrap();
    assert!(u.samples().iter().flatten().all(|v| (v - 0.5).abs() < 1e-14));
    let mr = maximal_regularity_ratio(&cop, &u, &one, 0.25, 2.0, &SeminormQuadrature::default()).unwrap();
    assert!((mr.ratio - 1.0).abs() < 1e-10, "{mr:?}");

    let w = 2.0 * PI;
    let cos = PeriodicTrajectory::from_fn(&g, 1.0, 1, 64, |t, _, _| vec![(w * t).cos()]).unwrap();
    let (u, report) = solve_linear_periodic(&cop, &cos, &config).unwrap();
    for k in 0..64 {
        let t = u.time(k);
        let exact = (2.0 * (w * t).cos() + w * (w * t).sin()) / (4.0 + w * w);
        assert!((u.sample(k)[0] - exact).abs() < 1e-10);
    }
    assert!(report.residual.unwrap() < 1e-9);
    let mr = maximal_regularity_ratio(&cop, &u, &cos, 0.25, 2.0, &SeminormQuadrature::default()).unwrap();
    assert!((mr.ratio - 2.0 / (4.0 + w * w).sqrt()).abs() < 1e-8, "{}", mr.ratio);
    assert!((mr.ratio - 0.3033).abs() < 5e-5);
}

#[test]
fn zero_forcing_is_rejected_by_the_ratio() {
    let cop = CoupledOperator::scalar_surrogate(2.0);
    let zero = PeriodicTrajectory::zeros(cop.grid(), 1.0, 1, 8).unwrap();
    assert!(maximal_regularity_ratio(&cop, &zero, &zero, 0.25, 2.0, &SeminormQuadrature::default()).is_err());
}

#[test]
fn methods_agree_within_discretization_error() {
    let cop = fhn_origin(33);
    let f = forcing(cop.grid(), 32, &[(1.0, 1.0, 1.0, 0.0), (2.0, 3.0, 0.4, 1.0), (0.0, 2.0, -0.3, 2.0)]);
    let (u_fc, _) = solve_linear_periodic(&cop, &f, &cfg(PeriodicMethod::FourierCollocation)).unwrap();
    let ivfp = cfg(PeriodicMethod::InitialValueFixedPoint);
    let (u_iv, report) = solve_linear_periodic(&cop, &f, &ivfp).unwrap();
    let fine = PeriodicSolveConfig { substeps: 512, ..ivfp.clone() };
    let (u_fine, _, _) = initial_value_fixed_point_with(&cop, &f, &fine, StepperKind::Auto).unwrap();
    let estimate = max_sample_difference(&u_iv, &u_fine) * 4.0 / 3.0;
    assert!(max_sample_difference(&u_fc, &u_iv) <= 10.0 * estimate);
    assert!(report.periodicity_defect <= 1e-8 * max_sample_norm(&u_iv));
    assert!(report.krylov_iterations.is_some());
}

#[test]
fn nodal_and_modal_steppers_agree() {
    let cop = fhn_origin(17);
    let f = forcing(cop.grid(), 16, &[(1.0, 1.0, 1.0, 0.3)]);
    let config = PeriodicSolveConfig { samples: 16, substeps: 64, ..cfg(PeriodicMethod::InitialValueFixedPoint) };
    let (a, _, _) = initial_value_fixed_point_with(&cop, &f, &config, StepperKind::Auto).unwrap();
    let (b, _, defect) = initial_value_fixed_point_with(&cop, &f, &config, StepperKind::Nodal).unwrap();
    assert!(max_sample_difference(&a, &b) < 1e-9);
    assert!(defect < 1e-8 * max_sample_norm(&b));
}

#[test]
fn cross_check_flags_nothing_on_resolved_problems() {
    let cop = fhn_origin(17);
    let f = forcing(cop.grid(), 32, &[(1.0, 1.0, 1e-3, 0.0)]);
    let config = PeriodicSolveConfig { cross_check: true, cross_check_tol: 1e-4, ..cfg(PeriodicMethod::FourierCollocation) };
    let (_, report) = solve_linear_periodic(&cop, &f, &config).unwrap();
    assert!(report.method_discrepancy.unwrap() < 1e-7);
    assert!(!report.method_disagreement);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn linearity(a in -2.0f64..2.0, b in -2.0f64..2.0, phi in 0.0f64..6.0) {
        let cop = fhn_origin(17);
        let f1 = forcing(cop.grid(), 16, &[(1.0, 1.0, 1.0, phi)]);
        let f2 = forcing(cop.grid(), 16, &[(2.0, 3.0, 1.0, 0.0), (0.0, 0.0, 0.5, 0.0)]);
        let config = PeriodicSolveConfig { samples: 16, ..cfg(PeriodicMethod::FourierCollocation) };
        let (u1, _) = solve_linear_periodic(&cop, &f1, &config).unwrap();
        let (u2, _) = solve_linear_periodic(&cop, &f2, &config).unwrap();
        let (u, _) = solve_linear_periodic(&cop, &f1.combine(a, &f2, b).unwrap(), &config).unwrap();
        let expect = u1.combine(a, &u2, b).unwrap();
        prop_assert!(max_sample_difference(&u, &expect) < 1e-9 * (1.0 + max_sample_norm(&expect)));
    }

    #[test]
    fn residual_detects_non_solutions(scale in 0.1f64..10.0) {
        let cop = fhn_origin(17);
        let f = forcing(cop.grid(), 16, &[(1.0, 1.0, 1.0, 0.0)]);
        let config = PeriodicSolveConfig { samples: 16, ..cfg(PeriodicMethod::FourierCollocation) };
        let (u, _) = solve_linear_periodic(&cop, &f, &config).unwrap();
        prop_assert!(linear_residual(&cop, &u, &f).unwrap() < 1e-9);
        let wrong = u.combine(1.0 + scale, &u, 0.0).unwrap();
        prop_assert!(linear_residual(&cop, &wrong, &f).unwrap() > 1e-3);
    }
}

#[test]
fn refuses_non_admissible_operators() {
    let model = fhn();
    let eq = equilibria(&model).unwrap().by_index(2).unwrap();
    let lin = linearize(&model, &eq);
    assert!(!lin.admissible && lin.alpha < 0.0);
    assert!(matches!(
        CoupledOperator::from_linearization(base(17), &lin),
        Err(Error::NotAdmissible(_))
    ));
    let cop = CoupledOperator::new(base(17), 1.0, lin.alpha, lin.beta, lin.gamma, lin.delta).unwrap();
    let f = PeriodicTrajectory::zeros(cop.grid(), 1.0, 2, 8).unwrap();
    let config = PeriodicSolveConfig { samples: 8, ..Default::default() };
    assert!(matches!(solve_linear_periodic(&cop, &f, &config), Err(Error::NotAdmissible(_))));
}

fn current(grid: &Grid, amplitude: f64) -> PeriodicTrajectory {
    PeriodicTrajectory::from_fn(grid, 1.0, 1, 32, |t, x, _| vec![amplitude * (2.0 * PI * t).cos() * (PI * x).cos()])
        .unwrap()
}

#[test]
fn nonlinear_desk_example() {
    let model = fhn();
    let eq = equilibria(&model).unwrap().by_index(1).unwrap();
    let cop = fhn_origin(33);
    let i = current(cop.grid(), 1e-3);
    let (v, report) = solve_nonlinear_periodic(&model, &eq, &i, &cop, &cfg(PeriodicMethod::FourierCollocation)).unwrap();
    assert!(report.converged && !report.divergence);
    assert!(report.contraction_ratios.iter().all(|r| *r < 0.5), "{:?}", report.contraction_ratios);
    assert!(report.residual.unwrap() < 1e-8);
    assert!(residual(&v, &model, &eq, &i, &cop).unwrap() < 1e-8);
    let u = absolute_trajectory(&v, &eq);
    assert_eq!(u.max_abs(), v.max_abs());
}

#[test]
fn zero_current_returns_equilibrium() {
    let model = fhn();
    let eq = equilibria(&model).unwrap().by_index(3).unwrap();
    let cop = CoupledOperator::from_linearization(base(17), &linearize(&model, &eq)).unwrap();
    let i = current(cop.grid(), 0.0);
    let (v, report) = solve_nonlinear_periodic(&model, &eq, &i, &cop, &cfg(PeriodicMethod::FourierCollocation)).unwrap();
    assert_eq!(report.outer_iterations, 1);
    assert_eq!(v.max_abs(), 0.0);
    let u = absolute_trajectory(&v, &eq);
    assert!(u.samples().iter().all(|s| s[0] == eq.u_star && s[17] == eq.w_star.unwrap()));
}

#[test]
fn large_current_diverges_with_partial_report() {
    let model = fhn();
    let eq = equilibria(&model).unwrap().by_index(1).unwrap();
    let cop = fhn_origin(33);
    let i = current(cop.grid(), 10.0);
    match solve_nonlinear_periodic(&model, &eq, &i, &cop, &cfg(PeriodicMethod::FourierCollocation)) {
        Err(Error::Divergence { report, .. }) => {
            assert!(report.divergence && !report.converged);
            assert!(!report.contraction_ratios.is_empty());
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn halving_the_current_never_raises_the_ratio() {
    let model = fhn();
    let eq = equilibria(&model).unwrap().by_index(1).unwrap();
    let cop = fhn_origin(33);
    let mut previous = f64::INFINITY;
    for k in 0..5 {
        let i = current(cop.grid(), 0.2 / 2f64.powi(k));
        let (_, report) = solve_nonlinear_periodic(&model, &eq, &i, &cop, &cfg(PeriodicMethod::FourierCollocation)).unwrap();
        let worst = report.contraction_ratios.iter().copied().fold(0.0, f64::max);
        assert!(worst <= previous, "amplitude index {k}: {worst} > {previous}");
        previous = worst;
    }
}
