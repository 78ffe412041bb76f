//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use subdiff_core::dg::{solve, DGSolution, InitialData, ProblemData, SourceData};
use subdiff_core::fem::{FemSpace, SpaceFunction, SpaceTimeFunction, TimeFactor};
use subdiff_core::frac_ops::TimeGrid;

/// `u₀ = 0`, `f = x^-0.49 t^-0.49` on `2^h_level` cells and `2^tau_level` slabs.
pub fn singular_source_run(h_level: u32, tau_level: u32) -> DGSolution {
    let space = Arc::new(FemSpace::interval(1 << h_level).expect("valid mesh"));
    let grid = TimeGrid::dyadic(1.0, tau_level).expect("valid grid");
    let source = SpaceTimeFunction::separable(
        TimeFactor::power(-0.49).expect("integrable power"),
        SpaceFunction::power_of_x(-0.49),
    );
    let data = ProblemData::new(0.4, 1.0, InitialData::Zero, SourceData::Field(source))
        .expect("valid data");
    solve(&data, &space, &grid).expect("solver converges")
}
