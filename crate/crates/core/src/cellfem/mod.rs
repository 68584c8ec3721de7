//! Unit-cell geometry, meshing, P1 finite elements and the cell solvers.

mod assembly;
mod eigen;
mod field;
mod geometry;
pub mod io;
pub mod linalg;
mod mesh;
mod problem;

pub use assembly::{Forms, RegionForms};
pub use eigen::{poincare_constant, OuterBoundary, PoincareResult};
pub use field::{EdgeData, Field, Parity, Support};
pub use geometry::Geometry;
pub use mesh::{generate_mesh, Axis, BoundaryEdge, DofMap, Mesh, PeriodicPair, Region};
pub use problem::{CellProblem, Domain, SolveReport, SolverOptions};
pub use io::MeshMetadata;
