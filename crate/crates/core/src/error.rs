//! Error type shared by every stage of the solver stack.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degree {0} is not part of the configured cascade")]
    UnsupportedDegree(usize),

    #[error("mesh with {n_cells} cells is too small for a stencil of {size} neighbours")]
    MeshTooSmall { n_cells: usize, size: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("inadmissible state at x = {x}: {reason}")]
    Inadmissible { x: f64, reason: String },

    #[error("non-finite state after {0}")]
    NonFinite(String),

    #[error("{solver} did not converge within {iterations} iterations (residual {residual:.3e})")]
    MaxIterations {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("{solver} diverged: residual grew to {residual:.3e}")]
    Diverged { solver: &'static str, residual: f64 },

    #[error("line search stagnated at residual {residual:.3e}")]
    Stagnation { residual: f64 },

    #[error("inner solve failed under CPD map {cpd:?}: {source}")]
    InnerSolve {
        cpd: Vec<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

pub type Result<T> = std::result::Result<T, Error>;
