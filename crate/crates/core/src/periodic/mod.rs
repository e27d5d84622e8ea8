//! Periodic solutions of `u' + A u = f` for the coupled operator matrix and
//! the contraction iteration for the semilinear shifted systems.

mod config;
mod coupled;
mod linear;
mod nonlinear;
mod time;

pub use config::{PeriodicMethod, PeriodicSolveConfig, SolverReport, DEVIATION_NOTE};
pub use coupled::{coupled_apply, coupled_inverse_apply, CoupledOperator, DEFAULT_RESOLVENT_TOL};
pub use linear::{
    apply_trajectory, bochner_da_norm, e_norm, initial_value_fixed_point_with, linear_residual, max_sample_difference,
    max_sample_norm, maximal_regularity_ratio, solve_linear_periodic, MaxRegularity, StepperKind,
};
pub use nonlinear::{absolute_trajectory, frozen_rhs, residual, solve_nonlinear_periodic};
pub use time::{resample, spectral_derivative};
