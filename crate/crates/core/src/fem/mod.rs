//! Continuous piecewise-linear finite elements on the unit interval and square.

mod function;
mod mesh;
mod space;

pub use function::{SpaceFunction, SpaceTimeFunction, TimeFactor};
pub use mesh::{build_interval_mesh, build_square_mesh, Mesh, MeshKind, Point};
pub use space::{dirac_approx, l2_project, load_slab, DiracApprox, FemSpace, SpatialVector};
