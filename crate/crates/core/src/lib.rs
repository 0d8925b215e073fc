//! Regularizing solvers for error-contaminated linear systems whose matrix is
//! a symmetric Toeplitz matrix or a Kronecker product of two of them.
//!
//! The building blocks are:
//!
//! * [`structured`]: first-column representations and FFT matrix-vector
//!   products for Toeplitz, circulant, skew-circulant and BTTB operators;
//! * [`spectral`]: truncated optimal-circulant (BCCB) preconditioners whose
//!   truncation index is chosen from a bound on the data error;
//! * [`krylov`]: range-restricted GMRES stopped by the discrepancy principle
//!   and the preconditioned solve pipeline;
//! * [`problems`] and [`image`]: blur and gravity test problems, seeded noise
//!   and PGM image I/O.

pub mod error;
mod fft;
pub mod image;
pub mod krylov;
pub mod problems;
pub mod spectral;
pub mod structured;

pub use error::{Error, Result};
pub use image::GrayImage;
pub use krylov::{
    rrgmres, solve_preconditioned, solve_preconditioned_zero_start, solve_unpreconditioned,
    ArnoldiDecomposition, ProblemInstance, RrgmresOptions, RrgmresOutcome, Solution,
    SolveOptions, SolveReport, Termination,
};
pub use problems::{
    add_noise, blur_operator_for, blur_phantom, blur_problem, gravity_problem, portrait_phantom,
    BlurSpec, GravityProblem, GravitySpec, NoisyData,
};
pub use spectral::{
    build_preconditioner_1d, build_preconditioner_bttb, select_q_1d, select_q_kron_equal,
    select_q_pair, shrink, shrink_pair, BccbPreconditioner, CirculantSpectrum, Fill, NoiseRatio,
    Preconditioner1d, SelectionRule, TruncatedSpectrum,
};
pub use structured::{BttbOperator, Circulant, SkewCirculant, SymToeplitz};
