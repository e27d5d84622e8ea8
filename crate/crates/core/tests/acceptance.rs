//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bidomain_periodic::bidomain::BidomainOperator;
use bidomain_periodic::diffusion::DiffusionOperator;
use bidomain_periodic::experiment::{
    build_bidomain, build_forcing, cmd_solve, seminorm_closed_form, ConductivityConfig, ConductivityProfile,
    ExperimentConfig, Setup, SpatialProfile,
};
use bidomain_periodic::grid::{make_grid, project_mean_zero, Grid, PeriodicTrajectory, ScalarField};
use bidomain_periodic::ionic::IonicModelSpec;
use bidomain_periodic::periodic::{
    coupled_apply, coupled_inverse_apply, initial_value_fixed_point_with, max_sample_difference, max_sample_norm,
    maximal_regularity_ratio, solve_linear_periodic, solve_nonlinear_periodic, CoupledOperator, PeriodicMethod,
    PeriodicSolveConfig, StepperKind,
};
use bidomain_periodic::semigroup::{
    default_sector_samples, interpolation_seminorm, state_norm, verify_sector_bound, SectorialOperator,
    SeminormQuadrature,
};
use bidomain_periodic::{Error, Result};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn rel_diff(a: &[f64], b: &[f64], grid: &Grid) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    state_norm(grid, &d) / state_norm(grid, b).max(f64::MIN_POSITIVE)
}

fn drift(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn conductivity(intra: ConductivityProfile, extra: ConductivityProfile) -> ConductivityConfig {
    ConductivityConfig {
        intra,
        extra,
        ..Default::default()
    }
}

fn random_field(grid: &Grid, rng: &mut ChaCha8Rng) -> ScalarField {
    let values = (0..grid.node_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ScalarField::new(grid, values).expect("length matches")
}

// ---------------------------------------------------------------- 1

fn operator_identities() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cases: Vec<(Grid, Box<dyn Fn(f64) -> ConductivityProfile>)> = vec![
        (
            make_grid(1, &[33], &[1.0])?,
            Box::new(|s| ConductivityProfile::Graded { sigma: s, slope: 0.8 }),
        ),
        (
            make_grid(2, &[17, 17], &[1.0, 1.0])?,
            Box::new(|s| ConductivityProfile::Fiber {
                longitudinal: 2.0 * s,
                transverse: 0.5 * s,
                angle: 0.6,
            }),
        ),
    ];
    let mut worst = [0.0f64; 3];
    for (grid, profile) in &cases {
        for (slot, lambda0) in [1.0, 0.5, 2.0].into_iter().enumerate() {
            let base = build_bidomain(grid, &conductivity(profile(lambda0), profile(1.0)))?;
            for _ in 0..20 {
                let f = random_field(grid, &mut rng);
                let got = base.apply_field(&f)?;
                let ae = base.op_e().apply_field(&project_mean_zero(&f))?;
                let expect: Vec<f64> = ae.values().iter().map(|v| lambda0 / (1.0 + lambda0) * v).collect();
                worst[slot] = worst[slot].max(rel_diff(got.values(), &expect, grid));
            }
        }
    }
    let pass = worst.iter().all(|w| *w <= 1e-8);
    outcome(
        pass,
        format!(
            "max rel err: equal {:.2e}, lambda0=0.5 {:.2e}, lambda0=2 {:.2e} (tol 1e-8, 20 fields, 1D + 2D)",
            worst[0], worst[1], worst[2]
        ),
    )
}

// ---------------------------------------------------------------- 2

fn eigen_oracle() -> Result<Outcome> {
    let (si, se) = (1.0, 2.0);
    let mut values = Vec::new();
    for n in [17, 33, 65] {
        let grid = make_grid(1, &[n], &[1.0])?;
        let base = build_bidomain(
            &grid,
            &conductivity(
                ConductivityProfile::Isotropic { sigma: si },
                ConductivityProfile::Isotropic { sigma: se },
            ),
        )?;
        values.push(base.spectral()?.values().to_vec());
    }
    let mut min_order = f64::INFINITY;
    let mut max_err = 0.0f64;
    for k in 1..=4 {
        let kk = (k as f64 * PI).powi(2);
        let exact = (si * kk) * (se * kk) / (si * kk + se * kk);
        let (a, b, c) = (values[0][k], values[1][k], values[2][k]);
        let order = ((a - b) / (b - c)).abs().log2();
        min_order = min_order.min(order);
        max_err = max_err.max((c - exact).abs() / exact);
        if !((a - exact).abs() > (b - exact).abs() && (b - exact).abs() > (c - exact).abs()) {
            return outcome(false, format!("mode {k}: error does not decrease under refinement"));
        }
    }
    outcome(
        min_order >= 1.9,
        format!("min observed order {min_order:.4} over modes 1..4 (grids 17/33/65); rel err on 65 nodes {max_err:.2e}"),
    )
}

// ---------------------------------------------------------------- 3

fn probes(grid: &Grid, count: usize) -> Vec<Vec<f64>> {
    let lx = grid.lengths()[0];
    let ly = grid.lengths().get(1).copied().unwrap_or(1.0);
    (1..=count)
        .map(|k| {
            (0..grid.node_count())
                .map(|node| {
                    let [x, y] = grid.coordinates(node);
                    (k as f64 * PI * x / lx).cos() * ((k - 1) as f64 * PI * y / ly).cos() + 0.3 * x / lx
                })
                .collect()
        })
        .collect()
}

fn sector_sup(base: std::sync::Arc<BidomainOperator>) -> Result<(f64, f64, usize)> {
    let op = CoupledOperator::single(base, 1.0, 0.0)?.with_tolerance(1e-11);
    let (angles, radii) = default_sector_samples();
    let rep = verify_sector_bound(&op, &angles, &radii, &probes(SectorialOperator::grid(&op), 3), &[2.0])?;
    let real_axis = rep
        .entries
        .iter()
        .filter(|e| e.im_lambda == 0.0 && e.re_lambda > 0.0)
        .fold(0.0f64, |m, e| m.max(e.ratio));
    Ok((rep.sup, real_axis, rep.failures))
}

fn sector_bound() -> Result<Outcome> {
    let cases = [
        (
            make_grid(1, &[33], &[1.0])?,
            conductivity(
                ConductivityProfile::Graded { sigma: 1.0, slope: 1.0 },
                ConductivityProfile::Isotropic { sigma: 2.0 },
            ),
        ),
        (
            make_grid(2, &[17, 17], &[1.0, 1.0])?,
            conductivity(
                ConductivityProfile::Fiber {
                    longitudinal: 2.0,
                    transverse: 0.5,
                    angle: 0.7,
                },
                ConductivityProfile::Isotropic { sigma: 1.0 },
            ),
        ),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (grid, cond) in &cases {
        let (sup, real, fails) = sector_sup(build_bidomain(grid, cond)?)?;
        let (sup_f, real_f, fails_f) = sector_sup(build_bidomain(&grid.refined(), cond)?)?;
        let d = drift(sup_f, sup);
        pass &= sup.is_finite() && fails + fails_f == 0 && d < 0.25 && real.max(real_f) <= 1.0 + 1e-8;
        parts.push(format!(
            "{}D sup {sup:.4} -> {sup_f:.4} (drift {d:.2e}), real-axis max {:.12}",
            grid.dimension(),
            real.max(real_f)
        ));
    }
    outcome(pass, parts.join("; "))
}

// ---------------------------------------------------------------- 4

fn seminorm_oracle() -> Result<Outcome> {
    let grid = make_grid(1, &[33], &[1.0])?;
    let base = build_bidomain(
        &grid,
        &conductivity(
            ConductivityProfile::Graded { sigma: 1.0, slope: 0.5 },
            ConductivityProfile::Isotropic { sigma: 1.0 },
        ),
    )?;
    // A + 1 has the eigenpairs (mu_j + 1, x_j) and a positive lower bound.
    let shifted = CoupledOperator::single(base.clone(), 1.0, 1.0)?;
    let spectral = base.spectral()?;
    let quad = SeminormQuadrature::default();
    let mut worst = 0.0f64;
    for j in 0..5 {
        let x = spectral.vector(j);
        let mu = spectral.values()[j] + 1.0;
        for (theta, p) in [(0.25, 2.0), (0.5, 2.0), (0.5, 1.0)] {
            let est = interpolation_seminorm(&shifted, &x, theta, p, &quad)?;
            let exact = seminorm_closed_form(mu, theta, p) * state_norm(&grid, &x);
            worst = worst.max(drift(est.value, exact));
        }
    }
    outcome(worst <= 1e-3, format!("max rel err {worst:.3e} over 5 eigenpairs x 3 (theta, p) (tol 1e-3)"))
}

// ---------------------------------------------------------------- 5

fn scalar_max_error(u: &PeriodicTrajectory, exact: impl Fn(f64) -> f64) -> f64 {
    (0..u.len()).fold(0.0f64, |m, k| m.max((u.sample(k)[0] - exact(u.time(k))).abs()))
}

fn random_forcing(grid: &Grid, m: usize, rng: &mut ChaCha8Rng) -> Result<PeriodicTrajectory> {
    let terms: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(0..4) as f64,
                rng.gen_range(1..=3) as f64,
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..2.0 * PI),
            )
        })
        .collect();
    PeriodicTrajectory::from_fn(grid, 1.0, 2, m, |t, x, _| {
        let v = terms
            .iter()
            .map(|&(kx, h, a, phi)| a * (kx * PI * x).cos() * (2.0 * PI * h * t + phi).cos())
            .sum();
        vec![v, 0.0]
    })
}

fn linear_exactness() -> Result<Outcome> {
    let lambda = 2.0;
    let omega = 2.0 * PI;
    let cop = CoupledOperator::scalar_surrogate(lambda);
    let g = SectorialOperator::grid(&cop).clone();
    let fc = PeriodicSolveConfig {
        samples: 64,
        ..Default::default()
    };
    let ivfp = PeriodicSolveConfig {
        method: PeriodicMethod::InitialValueFixedPoint,
        samples: 64,
        substeps: 256,
        ..Default::default()
    };
    let harmonic = |t: f64| (lambda * (omega * t).cos() + omega * (omega * t).sin()) / (lambda * lambda + omega * omega);
    let f_const = PeriodicTrajectory::from_fn(&g, 1.0, 1, 64, |_, _, _| vec![1.0])?;
    let f_cos = PeriodicTrajectory::from_fn(&g, 1.0, 1, 64, |t, _, _| vec![(omega * t).cos()])?;
    let e_fc_const = scalar_max_error(&solve_linear_periodic(&cop, &f_const, &fc)?.0, |_| 0.5);
    let e_fc_cos = scalar_max_error(&solve_linear_periodic(&cop, &f_cos, &fc)?.0, harmonic);
    let e_iv_const = scalar_max_error(&solve_linear_periodic(&cop, &f_const, &ivfp)?.0, |_| 0.5);
    let e_iv_cos = scalar_max_error(&solve_linear_periodic(&cop, &f_cos, &ivfp)?.0, harmonic);

    let setup = Setup::new(&ExperimentConfig::example())?;
    let fhn = setup.coupled(1e-12)?;
    let cfg = PeriodicSolveConfig {
        samples: 32,
        substeps: 256,
        krylov_tol: 1e-12,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut worst_rel = 0.0f64;
    for _ in 0..10 {
        let f = random_forcing(&setup.grid, 32, &mut rng)?;
        let (u_fc, _) = solve_linear_periodic(&fhn, &f, &cfg)?;
        let (u_iv, _, _) = initial_value_fixed_point_with(&fhn, &f, &cfg, StepperKind::Auto)?;
        let d = max_sample_difference(&u_fc, &u_iv);
        worst = worst.max(d);
        worst_rel = worst_rel.max(d / max_sample_norm(&u_fc));
    }
    let pass = e_fc_const <= 1e-10 && e_fc_cos <= 1e-10 && e_iv_const <= 1e-6 && e_iv_cos <= 1e-6 && worst <= 1e-6;
    outcome(
        pass,
        format!(
            "collocation M=64: const {e_fc_const:.2e}, harmonic {e_fc_cos:.2e} (tol 1e-10); \
             Crank-Nicolson 256: const {e_iv_const:.2e}, harmonic {e_iv_cos:.2e} (tol 1e-6); \
             FHN method agreement {worst:.2e} (rel {worst_rel:.2e}) over 10 forcings (tol 1e-6)"
        ),
    )
}

// ---------------------------------------------------------------- 6, 8, 9

fn fhn() -> IonicModelSpec {
    IonicModelSpec::fitzhugh_nagumo(0.1, 1.0, 0.05, 1.0).expect("valid")
}

fn ap() -> IonicModelSpec {
    IonicModelSpec::aliev_panfilov(0.1, 0.5, 8.0, 1.0).expect("valid")
}

fn rm() -> IonicModelSpec {
    IonicModelSpec::rogers_mcculloch(0.1, 1.0, 0.01, 1.0, 1.0).expect("valid")
}

fn case_config(model: IonicModelSpec, equilibrium: u8, amplitude: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::example();
    cfg.model = model;
    cfg.equilibrium = equilibrium;
    cfg.forcing.amplitude = amplitude;
    cfg.forcing.profile = SpatialProfile::Cosine { kx: 1, ky: 0 };
    cfg
}

fn admissible_cases() -> Vec<(&'static str, IonicModelSpec, u8)> {
    vec![
        ("FHN@(0,0)", fhn(), 1),
        ("FHN@(u3,w3)", fhn(), 3),
        ("AP@(0,0)", ap(), 1),
        ("RM@(0,0)", rm(), 1),
        ("RM@(u3,w3)", rm(), 3),
        ("AC@-1", IonicModelSpec::allen_cahn(), 1),
        ("AC@+1", IonicModelSpec::allen_cahn(), 3),
    ]
}

fn inverse_roundtrip() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for (_, model, eq) in admissible_cases() {
        let setup = Setup::new(&case_config(model, eq, 1e-3))?;
        let cop = setup.coupled(1e-12)?;
        for _ in 0..20 {
            let x: Vec<f64> = (0..cop.state_len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y = coupled_apply(&cop, &coupled_inverse_apply(&cop, &x)?)?;
            worst = worst.max(rel_diff(&y, &x, &setup.grid));
        }
    }
    let sur = CoupledOperator::surrogate(2.0, 1.0, 1.0, 1.0);
    let c1 = coupled_inverse_apply(&sur, &[1.0, 1.0, 1.0, 0.0, 0.0, 0.0])?;
    let c2 = coupled_inverse_apply(&sur, &[0.0, 0.0, 0.0, 1.0, 1.0, 1.0])?;
    let expected = [[1.0 / 3.0, -1.0 / 3.0], [1.0 / 3.0, 2.0 / 3.0]];
    let worked = [
        (c1[0] - expected[0][0]).abs(),
        (c2[0] - expected[0][1]).abs(),
        (c1[3] - expected[1][0]).abs(),
        (c2[3] - expected[1][1]).abs(),
    ]
    .into_iter()
    .fold(0.0f64, f64::max);
    outcome(
        worst <= 1e-8 && worked <= 1e-12,
        format!("max rel roundtrip err {worst:.2e} (7 operators x 20 states, tol 1e-8); 2x2 inverse err {worked:.1e}"),
    )
}

struct RunStats {
    converged: bool,
    max_ratio: f64,
    residual: f64,
    iterations: usize,
}

fn run_case(model: IonicModelSpec, eq: u8, amplitude: f64, method: PeriodicMethod) -> Result<(RunStats, f64)> {
    let mut cfg = case_config(model, eq, amplitude);
    cfg.solver.method = method;
    cfg.solver.krylov_tol = 1e-12;
    let setup = Setup::new(&cfg)?;
    let cop = setup.coupled(cfg.solver.krylov_tol)?;
    let current = build_forcing(&cfg, &setup.grid, &setup.base)?;
    let (v, rep) = solve_nonlinear_periodic(&setup.model, &setup.eq, &current, &cop, &cfg.solver)?;
    let max_ratio = rep.contraction_ratios.iter().fold(0.0f64, |m, r| if r.is_finite() { m.max(*r) } else { f64::INFINITY });
    Ok((
        RunStats {
            converged: rep.converged,
            max_ratio,
            residual: rep.residual.unwrap_or(f64::INFINITY),
            iterations: rep.outer_iterations,
        },
        if method == PeriodicMethod::FourierCollocation { v.max_abs() } else { rep.periodicity_defect },
    ))
}

fn nonlinear_existence() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, model, eq) in admissible_cases() {
        let (fc, _) = run_case(model, eq, 1e-3, PeriodicMethod::FourierCollocation)?;
        let (_, defect) = run_case(model, eq, 1e-3, PeriodicMethod::InitialValueFixedPoint)?;
        let (zero, vmax) = run_case(model, eq, 0.0, PeriodicMethod::FourierCollocation)?;
        let amplitudes: Vec<f64> = (0..5).map(|k| 1e-3 / 2f64.powi(k)).collect();
        let ratios = amplitudes
            .iter()
            .map(|a| run_case(model, eq, *a, PeriodicMethod::FourierCollocation).map(|r| r.0.max_ratio))
            .collect::<Result<Vec<_>>>()?;
        let monotone = ratios.windows(2).all(|w| w[1] <= w[0]);
        let ok = fc.converged
            && fc.max_ratio < 1.0
            && fc.residual < 1e-7
            && defect < 1e-8
            && zero.converged
            && zero.iterations == 1
            && vmax == 0.0
            && monotone;
        pass &= ok;
        parts.push(format!(
            "{name}: {} its, max ratio {:.2e}, residual {:.1e}, defect {:.1e}, zero-forcing its {}, halving ratios [{}]{}",
            fc.iterations,
            fc.max_ratio,
            fc.residual,
            defect,
            zero.iterations,
            ratios.iter().map(|r| format!("{r:.3e}")).collect::<Vec<_>>().join(", "),
            if ok { "" } else { " <- FAIL" }
        ));
    }
    outcome(pass, parts.join("\n    "))
}

fn admissibility_dichotomy() -> Result<Outcome> {
    let cases = [
        ("FHN@(u2,w2)", fhn(), 2),
        ("AP@(u2,w2)", ap(), 2),
        ("AP@(u3,w3)", ap(), 3),
        ("RM@(u2,w2)", rm(), 2),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, model, eq) in cases {
        let setup = Setup::new(&case_config(model, eq, 1e-3))?;
        let lin = setup.linearization;
        let refused = matches!(setup.coupled(1e-10), Err(Error::NotAdmissible(_)));
        let unchecked = CoupledOperator::new(setup.base.clone(), 1.0, lin.alpha, lin.beta, lin.gamma, lin.delta)?;
        let f = PeriodicTrajectory::zeros(&setup.grid, 1.0, 2, 8)?;
        let solve_refused = matches!(
            solve_linear_periodic(&unchecked, &f, &PeriodicSolveConfig { samples: 8, ..Default::default() }),
            Err(Error::NotAdmissible(_))
        );
        let ok = !lin.admissible && refused && solve_refused;
        pass &= ok;
        parts.push(format!(
            "{name}: alpha {:.3}, beta {:.3}, flagged {}, refused {}",
            lin.alpha,
            lin.beta,
            !lin.admissible,
            refused && solve_refused
        ));
    }
    let fhn2 = Setup::new(&case_config(fhn(), 2, 1e-3))?.linearization;
    let ap2 = Setup::new(&case_config(ap(), 2, 1e-3))?.linearization;
    pass &= fhn2.alpha < 0.0 && ap2.beta < 0.0;
    outcome(pass, parts.join("; "))
}

// ---------------------------------------------------------------- 7

fn maximal_regularity() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = PeriodicSolveConfig {
        samples: 32,
        ..Default::default()
    };
    let quad = SeminormQuadrature::default();
    let cases = [("FHN", fhn(), 1), ("RM", rm(), 1), ("AC", IonicModelSpec::allen_cahn(), 1)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, model, eq) in cases {
        let ec = case_config(model, eq, 1e-3);
        let coarse = Setup::new(&ec)?;
        let fine = Setup::on_grid(&ec, coarse.grid.refined())?;
        let (c_op, f_op) = (coarse.coupled(1e-12)?, fine.coupled(1e-12)?);
        let mut worst_drift = 0.0f64;
        let mut largest = 0.0f64;
        let mut finite = true;
        for _ in 0..10 {
            let seed = rng.gen::<u64>();
            let ratio = |op: &CoupledOperator| -> Result<f64> {
                let grid = SectorialOperator::grid(op);
                let f = random_forcing(grid, 32, &mut ChaCha8Rng::seed_from_u64(seed))?;
                let f = if op.components() == 1 {
                    PeriodicTrajectory::new(grid, 1.0, 1, f.samples().iter().map(|s| s[..grid.node_count()].to_vec()).collect())?
                } else {
                    f
                };
                let (u, _) = solve_linear_periodic(op, &f, &cfg)?;
                Ok(maximal_regularity_ratio(op, &u, &f, cfg.theta, cfg.p, &quad)?.ratio)
            };
            let (rc, rf) = (ratio(&c_op)?, ratio(&f_op)?);
            finite &= rc.is_finite() && rf.is_finite();
            largest = largest.max(rc);
            worst_drift = worst_drift.max(drift(rf, rc));
        }
        pass &= finite && worst_drift < 0.25;
        parts.push(format!("{name}: max ratio {largest:.4}, max drift {worst_drift:.2e}"));
    }
    outcome(pass, parts.join("; ") + " (10 forcings each, 33 -> 65 nodes, drift tol 0.25)")
}

// ---------------------------------------------------------------- 10

fn determinism() -> Result<Outcome> {
    let mut cfg = case_config(fhn(), 1, 1e-3);
    cfg.forcing.modes = 3;
    cfg.seed = 42;
    let mut files = Vec::new();
    for threads in [1, 4] {
        let dir = tempfile::tempdir()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        pool.install(|| cmd_solve(&cfg, dir.path()))?;
        files.push((
            std::fs::read(dir.path().join("trajectory.csv"))?,
            std::fs::read(dir.path().join("trajectory.bdps"))?,
        ));
    }
    let same = files[0] == files[1];
    outcome(
        same,
        format!("trajectory.csv {} bytes, identical across 1- and 4-thread runs: {same}", files[0].0.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 10] = [
        ("operator identities", operator_identities),
        ("eigen oracle", eigen_oracle),
        ("sector bound", sector_bound),
        ("seminorm closed form", seminorm_oracle),
        ("linear periodic exactness", linear_exactness),
        ("coupled inverse roundtrip", inverse_roundtrip),
        ("maximal regularity", maximal_regularity),
        ("nonlinear existence", nonlinear_existence),
        ("admissibility dichotomy", admissibility_dichotomy),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name} [{:.1} s]\n    {detail}",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
