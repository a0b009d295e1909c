//! Nonlinear solution: Newton-Raphson with device limiting, plus a
//! pseudo-transient fallback.

pub mod limiting;
mod newton;
mod ptran;

pub use limiting::{pnj_vcrit, pnjlim, sinhlim};
pub(crate) use newton::residual_and_jacobian;
pub use newton::{
    dc_operating_point, newton_solve, NewtonOptions, SolveReport, SolverError, StepEquations,
};
pub use ptran::{pseudo_transient, solve_with_fallback, PseudoTransientOptions};
