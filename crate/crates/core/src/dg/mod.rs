//! Piecewise-constant discontinuous Galerkin time stepping.

mod checkpoint;
mod solver;

pub use solver::{solve, DGSolution, InitialData, ProblemData, SourceData, SLAB_RESIDUAL_TOL};
