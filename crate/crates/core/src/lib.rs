//! Sixth-order finite volume solver for 1D steady hyperbolic balance laws
//! with a-posteriori MOOD degree control and adaptive reconstruction
//! stencils.

// `!(a < b)` guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmarks;
pub mod detectors;
pub mod error;
pub mod field;
pub mod mesh;
pub mod metrics;
pub mod physics;
pub mod problem;
pub mod reconstruction;
pub mod residual;
pub mod solvers;
pub mod stencil;

pub use error::{Error, Result};
pub use field::FieldVector;
pub use mesh::Mesh;
pub use problem::{BoundaryCondition, Boundaries, SourceTerm, SteadyProblem};
pub use stencil::{Cascade, CpdMap, Stencil, StencilMap};
pub use solvers::{Method, Mode, SolveReport, SolverConfig, Termination};
