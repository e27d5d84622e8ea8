//! Time-periodic solutions of the bidomain equations with periodic current
//! forcing.
//!
//! The pieces, bottom to top:
//!
//! * [`grid`]: vertex-centred grids, fields, periodic trajectories and
//!   discrete norms.
//! * [`bidomain`]: anisotropic Neumann operators `A_i`, `A_e` and the
//!   composite `A = A_i (A_i + A_e)^{-1} A_e P`.
//! * [`ionic`]: FitzHugh-Nagumo, Aliev-Panfilov, Rogers-McCulloch and
//!   Allen-Cahn kinetics, rest states and linearizations.
//! * [`semigroup`]: semigroup actions, the interpolation seminorm and
//!   sampled resolvent bounds.
//! * [`periodic`]: the coupled operator matrix, linear periodic solves and
//!   the contraction iteration.
//! * [`experiment`]: JSON-configured runs behind the `bidomain` binary.

pub mod bidomain;
mod csv_out;
pub mod diffusion;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod ionic;
pub mod linalg;
pub mod periodic;
pub mod semigroup;

pub use csv_out::num as format_number;
pub use error::{Error, Result};
