//! JSON-configured experiments: rest-state tables, periodic solves,
//! verification sweeps and norm reports, each writing CSV and JSON
//! artifacts plus a manifest into an output directory.

mod build;
mod commands;
mod config;
pub mod io;

pub use build::{build_bidomain, build_forcing, conductivity_field, embed_current, harmonic_weights, Setup};
pub use commands::{
    cmd_equilibria, cmd_norms, cmd_solve, cmd_verify, describe, seminorm_closed_form, Check, CheckStatus,
    EquilibriaReport, EquilibriumRow, NormRow, NormsReport, SolveOutcome, SolveRecord, VerifyReport,
};
pub use config::{
    ConductivityConfig, ConductivityProfile, DiagnosticsConfig, ExperimentConfig, ForcingConfig, LinearizationOverride,
    OutputConfig, SpatialProfile,
};
