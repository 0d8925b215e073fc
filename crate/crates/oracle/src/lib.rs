//! Slow dense reference implementations for validating the structured fast
//! paths of `bttb-precond-core`. Nothing here is meant for production solves.

pub mod dense;
pub mod error;
pub mod linalg;
pub mod perturbation;
pub mod selftest;

pub use dense::{brute_force_closest_circulant, DenseMatrix, MAX_DIM};
pub use error::{OracleError, Result};
pub use linalg::{dense_pinv, dense_solve, dense_svd, krylov_min_residual, Svd};
pub use perturbation::{perturbation_check, PerturbationInstance, PerturbationOutcome, SweepReport};
pub use selftest::{run_selftest, CheckResult, SelftestOptions};
