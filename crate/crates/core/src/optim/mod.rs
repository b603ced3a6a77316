//! Small dense solvers: linear programming and constrained least squares.

pub mod lp;
pub mod lsq;

pub use lp::{solve_lp, LpProblem, LpSolution, LpStatus};
pub use lsq::{
    baselines_on, least_squares_baselines, mse, mse_on, nnls, nnls_normal, simplex_fit, simplex_normal, AlignmentFit,
    Baselines, NormalEquations, SUPPORT_THRESHOLD,
};
