//! Steady solvers: direct (L), Newton (NL), pseudo-time marching (TM1,
//! TM2), the MOOD degree-control loop and the adaptive-stencil outer loop.

mod direct;
mod marching;
mod mood;

use crate::detectors::DetectorConfig;
use crate::field::FieldVector;
use crate::stencil::{CpdMap, StencilMap};

pub use direct::{solve_linear, solve_newton};
pub use marching::{rk1_step, stable_time_step, tm1_solve, tm2_solve};
pub use mood::{first_order_solution, mood_as_solve, mood_solve, solve_steady, solve_with, unlimited_solve, Mode};

/// Which map TM1 starts each pseudo-time step from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MapReset {
    /// The initial full-degree map.
    #[default]
    Initial,
    /// The map accepted at the previous step.
    Previous,
}

/// The four steady strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Direct solve of the affine residual (advection only).
    Linear,
    /// Damped Newton with a probed Jacobian.
    Newton,
    /// Pseudo-time marching with per-step detection.
    Tm1,
    /// Pseudo-time marching to convergence between detections.
    Tm2,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Linear => "l",
            Method::Newton => "nl",
            Method::Tm1 => "tm1",
            Method::Tm2 => "tm2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Convergence threshold on `‖G‖∞`.
    pub tolerance: f64,
    pub newton_max_iterations: usize,
    /// Relative forward-difference step of the probed Jacobian.
    pub jacobian_step: f64,
    /// Smallest line-search step before Newton reports stagnation.
    pub min_step: f64,
    pub cfl: f64,
    pub max_time_steps: usize,
    /// A marching phase is declared divergent once `‖G‖∞` exceeds this
    /// multiple of the lowest value it reached.
    pub divergence_ratio: f64,
    /// A divergent marching phase restarts from its lowest-residual iterate
    /// with the CFL number halved, at most this many times.
    pub cfl_halvings: usize,
    /// TM1 treats this many steps without a new residual minimum as
    /// divergence.
    pub stall_steps: usize,
    /// `None` means `|cascade| · I + 10`.
    pub mood_max_iterations: Option<usize>,
    pub as_max_iterations: usize,
    pub tm1_reset: MapReset,
    /// First-order marching hands over to Newton below this residual.
    pub p0_switch_tolerance: f64,
    /// Component whose total `h Σ φ_i` the Newton solves hold at the value
    /// of the initial guess, through a source correction at its largest
    /// jump. Selects one member of a family of steady shocks.
    pub conserved_component: Option<usize>,
    pub detectors: DetectorConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            newton_max_iterations: 100,
            jacobian_step: 1e-7,
            min_step: 1e-12,
            cfl: 0.5,
            max_time_steps: 1_000_000,
            divergence_ratio: 1e3,
            cfl_halvings: 4,
            stall_steps: 20_000,
            mood_max_iterations: None,
            as_max_iterations: 10,
            tm1_reset: MapReset::Initial,
            p0_switch_tolerance: 1e-4,
            conserved_component: None,
            detectors: DetectorConfig::default(),
        }
    }
}

impl SolverConfig {
    pub fn mood_cap(&self, n_cells: usize) -> usize {
        self.mood_max_iterations
            .unwrap_or(self.detectors.cascade.len() * n_cells + 10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// `‖G‖∞ ≤ ε` with a CPD map that the detectors leave unchanged.
    Converged,
    /// `‖G‖∞ ≤ ε` under the full-degree map, without detection.
    Unlimited,
    /// The adaptive-stencil loop hit its cap; the lowest-residual iterate
    /// is returned.
    AsCapReached,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::Unlimited => "unlimited",
            Termination::AsCapReached => "as-cap-reached",
        }
    }
}

/// Iteration count and `‖G‖∞` history of one inner solve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InnerStats {
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    /// Source correction `μ` that held the conserved total; the solution
    /// satisfies `G = h μ` on the two cells of the largest jump of that
    /// component.
    pub source_shift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub phi: FieldVector,
    pub cpd: CpdMap,
    pub stencils: StencilMap,
    pub method: Method,
    /// Candidate solutions computed by the MOOD loop, summed over AS rounds.
    pub mood_iterations: usize,
    /// Number of adaptive-stencil rounds after the initial MOOD solve.
    pub as_iterations: usize,
    /// Iterations of each inner solve, in order.
    pub inner_iterations: Vec<usize>,
    pub residual_history: Vec<f64>,
    /// `‖G(Φ, M, S)‖∞` of the returned solution under its own maps, less the
    /// source correction when a total is held.
    pub residual_norm: f64,
    /// Source correction of the last inner solve, see [`InnerStats`].
    pub source_shift: f64,
    pub termination: Termination,
}

impl SolveReport {
    pub(crate) fn absorb(&mut self, stats: InnerStats) {
        self.inner_iterations.push(stats.iterations);
        self.source_shift = stats.source_shift;
        self.residual_history.extend(stats.residual_history);
    }
}
