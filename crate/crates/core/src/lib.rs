//! Jacobi-predictor-corrector solver for Caputo fractional initial value problems.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod adams;
pub mod bench;
pub mod error;
pub mod expr;
pub mod jpc;
pub mod mittag_leffler;
pub mod problem;
pub mod quadrature;
pub mod special;
pub mod split;
pub mod stencil;
pub mod xprec;

pub use adams::{adams_solve, start_values, StarterConfig};
pub use error::{Error, Result};
pub use expr::{parse, EvalError, Expr, ParseError};
pub use problem::{ProblemSpec, SolveStats, SolveStatus, Trajectory};
pub use quadrature::{gauss_lobatto_rule, JacobiWeight, QuadratureRule};
pub use stencil::{select_stencil, Phase, Stencil, StencilKind, StencilParams, UniformGrid};
pub use jpc::{correct, predict, solve, SolverConfig};
pub use split::{head_integral, solve_split, SplitConfig};
pub use mittag_leffler::{mittag_leffler, ml_solution, MLQuery};
pub use bench::{run_convergence, run_timing, BuiltinProblem, ConvergenceReport, Method, TimingReport};
