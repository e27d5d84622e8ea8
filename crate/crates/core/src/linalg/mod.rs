//! Sparse storage, Krylov solvers and small dense kernels.

pub mod dense;
pub mod krylov;
pub mod sparse;

pub use krylov::{cg, gmres, CgOptions, GmresOptions, KrylovOutcome};
pub use sparse::CsrMatrix;
