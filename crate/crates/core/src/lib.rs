//! Finite-difference solvers for the time-fractional heat equation with an
//! obstacle on a 1D interval: three time-stepping schemes (L1 semi-implicit,
//! Grünwald–Letnikov semi-implicit, L1 with a Picard active-set loop), the
//! stationary reference, and the decay analysis around them.

pub mod analysis;
pub mod config;
pub mod error;
pub mod experiment;
pub mod expr;
pub mod kernels;
pub mod linalg;
pub mod problem;
pub mod schemes;

pub use error::{Error, Result};
pub use problem::{make_grid, sample_problem, Grid1D, ProblemSpec, RunReport, SchemeKind, SolveState, TimeGrid};
pub use schemes::{run, run_with, RunOptions};
