//! Anisotropic elliptic operators with zero-flux boundary conditions and
//! the composite bidomain operator built from an intra- and an
//! extracellular pair.

mod conductivity;
mod elliptic;
mod operator;

pub use conductivity::{check_ellipticity, ConductivityField, FaceAveraging};
pub use elliptic::{assemble_elliptic, assemble_elliptic_with, EllipticOperator};
pub use operator::{BidomainOperator, InnerSolveConfig, ResolventSolution};
