//! Range-restricted GMRES with discrepancy-principle stopping, and the
//! preconditioned solve pipeline built on it.

mod rrgmres;
mod solve;

pub use rrgmres::{rrgmres, ArnoldiDecomposition, RrgmresOptions, RrgmresOutcome, Termination};
pub use solve::{
    solve_preconditioned, solve_preconditioned_zero_start, solve_unpreconditioned,
    ProblemInstance, Solution, SolveOptions, SolveReport,
};
