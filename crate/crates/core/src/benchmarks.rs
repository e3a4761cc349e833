//! Benchmark problems with exact steady solutions: smooth and kinked
//! advection, Bürgers with a steady shock, and a transonic Euler shock.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::field::FieldVector;
use crate::mesh::{cell_mean, Mesh};
use crate::physics::{Advection, Burgers, Euler, DEFAULT_GAMMA};
use crate::problem::{BoundaryCondition, Boundaries, SourceTerm, SteadyProblem};
use crate::solvers::SolverConfig;

type StateFn = Arc<dyn Fn(f64, &mut [f64]) + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseId {
    AdvRegular,
    AdvIrregular,
    Burgers,
    Euler,
}

impl CaseId {
    pub const ALL: [CaseId; 4] = [CaseId::AdvRegular, CaseId::AdvIrregular, CaseId::Burgers, CaseId::Euler];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseId::AdvRegular => "adv-regular",
            CaseId::AdvIrregular => "adv-irregular",
            CaseId::Burgers => "burgers",
            CaseId::Euler => "euler",
        }
    }

    pub fn is_advection(self) -> bool {
        matches!(self, CaseId::AdvRegular | CaseId::AdvIrregular)
    }

    pub fn build(self) -> BenchmarkCase {
        match self {
            CaseId::AdvRegular => advection_regular(),
            CaseId::AdvIrregular => advection_irregular(),
            CaseId::Burgers => burgers_case(),
            CaseId::Euler => euler_case(),
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown case `{s}`"))
    }
}

/// A problem together with its exact solution and the initial profile used
/// to start the degree-zero solve.
#[derive(Clone)]
pub struct BenchmarkCase {
    pub id: CaseId,
    pub problem: Arc<dyn SteadyProblem>,
    exact: StateFn,
    pub breakpoints: Vec<f64>,
    initial: StateFn,
    pub initial_breakpoints: Vec<f64>,
    /// Discontinuity of the exact solution, if any.
    pub shock: Option<f64>,
    /// Coordinate intervals `[a, b)` with region-restricted errors reported.
    pub regions: Vec<(f64, f64)>,
    /// Component whose initial total fixes the shock position.
    pub conserved_component: Option<usize>,
}

impl fmt::Debug for BenchmarkCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BenchmarkCase")
            .field("id", &self.id)
            .field("breakpoints", &self.breakpoints)
            .field("shock", &self.shock)
            .finish_non_exhaustive()
    }
}

impl BenchmarkCase {
    pub fn n_components(&self) -> usize {
        self.problem.n_components()
    }

    pub fn domain(&self) -> (f64, f64) {
        self.problem.domain()
    }

    /// Default solver settings with the case's conserved component.
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            conserved_component: self.conserved_component,
            ..SolverConfig::default()
        }
    }

    pub fn mesh(&self, n_cells: usize) -> crate::Result<Mesh> {
        let (a, b) = self.domain();
        Mesh::new(a, b, n_cells)
    }

    /// Exact solution at `x`, conserved components.
    pub fn exact(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.n_components()];
        (self.exact)(x, &mut out);
        out
    }

    pub fn initial(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.n_components()];
        (self.initial)(x, &mut out);
        out
    }

    pub fn exact_means(&self, mesh: &Mesh) -> FieldVector {
        means_of(&self.exact, self.n_components(), mesh, &self.breakpoints)
    }

    pub fn initial_means(&self, mesh: &Mesh) -> FieldVector {
        means_of(&self.initial, self.n_components(), mesh, &self.initial_breakpoints)
    }
}

fn means_of(f: &StateFn, nc: usize, mesh: &Mesh, breakpoints: &[f64]) -> FieldVector {
    let components = (0..nc)
        .map(|c| {
            mesh.cells()
                .map(|i| {
                    let g = |x: f64| {
                        let mut v = [0.0; 3];
                        f(x, &mut v[..nc]);
                        v[c]
                    };
                    cell_mean(g, mesh, i, breakpoints)
                })
                .collect()
        })
        .collect();
    FieldVector::from_components(components)
}

/// `u(x) = 2 sin(2πx) + 3` on `[0, 1]`, exact solution `1/u`.
pub fn advection_regular() -> BenchmarkCase {
    let u = |x: f64| 2.0 * (2.0 * PI * x).sin() + 3.0;
    advection_case(CaseId::AdvRegular, Arc::new(u), vec![])
}

/// Piecewise linear velocity with a slope jump `1 → 50` at `x = 1/2`.
pub fn advection_irregular() -> BenchmarkCase {
    advection_case(CaseId::AdvIrregular, Arc::new(irregular_velocity), vec![0.5])
}

pub fn irregular_velocity(x: f64) -> f64 {
    if x <= 0.5 {
        x + 2.0
    } else {
        50.0 * (x - 0.5) + 2.5
    }
}

/// Both advection cases as `(regular, irregular)`.
pub fn advection_cases() -> (BenchmarkCase, BenchmarkCase) {
    (advection_regular(), advection_irregular())
}

fn advection_case(id: CaseId, u: Arc<dyn Fn(f64) -> f64 + Send + Sync>, breakpoints: Vec<f64>) -> BenchmarkCase {
    let inflow = 1.0 / u(0.0);
    let exact_u = u.clone();
    let problem = Advection {
        velocity: u,
        domain: (0.0, 1.0),
        boundaries: Boundaries {
            left: BoundaryCondition::Dirichlet(vec![inflow]),
            right: BoundaryCondition::Transparent,
        },
        source: SourceTerm::Zero,
    };
    BenchmarkCase {
        id,
        problem: Arc::new(problem),
        exact: Arc::new(move |x, out| out[0] = 1.0 / exact_u(x)),
        breakpoints,
        initial: Arc::new(move |_, out| out[0] = inflow),
        initial_breakpoints: vec![],
        shock: None,
        regions: vec![],
        conserved_component: None,
    }
}

/// Initial amplitude whose mass `2β` puts the steady shock at `3π/4`.
pub const BURGERS_BETA: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Shock position `π - asin(sqrt(1 - β²))` selected by the initial mass.
pub fn burgers_shock(beta: f64) -> f64 {
    PI - (1.0 - beta * beta).sqrt().asin()
}

/// `d(φ²/2)/dx = sin x cos x` on `[0, π]`, zero inflow on both sides.
pub fn burgers_case() -> BenchmarkCase {
    let beta = BURGERS_BETA;
    let shock = burgers_shock(beta);
    let problem = Burgers {
        domain: (0.0, PI),
        boundaries: Boundaries {
            left: BoundaryCondition::Dirichlet(vec![0.0]),
            right: BoundaryCondition::Dirichlet(vec![0.0]),
        },
        source: SourceTerm::Antiderivative(Arc::new(|x: f64, out: &mut [f64]| out[0] = 0.5 * x.sin().powi(2))),
    };
    BenchmarkCase {
        id: CaseId::Burgers,
        problem: Arc::new(problem),
        exact: Arc::new(move |x, out| out[0] = if x < shock { x.sin() } else { -x.sin() }),
        breakpoints: vec![shock],
        initial: Arc::new(move |x, out| out[0] = beta * x.sin()),
        initial_breakpoints: vec![],
        shock: Some(shock),
        regions: vec![],
        conserved_component: Some(0),
    }
}

/// Steady Euler data: `ρu = D`, `ρu² + p = F(x)`, `u(E + p) = H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerData {
    pub gamma: f64,
    pub mass_flux: f64,
    pub momentum_slope: f64,
    pub momentum_offset: f64,
    pub energy_flux: f64,
    pub shock: f64,
    /// `∫ ρ⁰` over the domain, which fixes the step of the initial density.
    pub mass: f64,
}

impl Default for EulerData {
    fn default() -> Self {
        Self {
            gamma: DEFAULT_GAMMA,
            mass_flux: 1.0,
            momentum_slope: 0.027,
            momentum_offset: 0.6137,
            energy_flux: 0.375,
            shock: 0.6,
            mass: 2.8975,
        }
    }
}

impl EulerData {
    pub fn momentum_flux(&self, x: f64) -> f64 {
        self.momentum_slope * x + self.momentum_offset
    }

    /// `(ρ_sup, ρ_sub)` at `x`: eliminating `p` and `E` leaves
    /// `(γ/(γ-1) - 1/2) D u² - γ/(γ-1) F u + H = 0`, and `ρ = D / u`.
    pub fn branches(&self, x: f64) -> (f64, f64) {
        let k = self.gamma / (self.gamma - 1.0);
        let a = (k - 0.5) * self.mass_flux;
        let b = -k * self.momentum_flux(x);
        let disc = b * b - 4.0 * a * self.energy_flux;
        assert!(disc >= 0.0, "no steady state at x = {x}");
        let root = disc.sqrt();
        let u_fast = (-b + root) / (2.0 * a);
        let u_slow = 2.0 * self.energy_flux / (-b + root);
        (self.mass_flux / u_fast, self.mass_flux / u_slow)
    }

    /// Conserved state with density `rho` on the steady manifold at `x`.
    pub fn conserved(&self, x: f64, rho: f64) -> [f64; 3] {
        let u = self.mass_flux / rho;
        let p = self.momentum_flux(x) - rho * u * u;
        [rho, rho * u, p / (self.gamma - 1.0) + 0.5 * rho * u * u]
    }

    pub fn exact_density(&self, x: f64) -> f64 {
        let (sup, sub) = self.branches(x);
        if x < self.shock {
            sup
        } else {
            sub
        }
    }

    pub fn left_state(&self) -> [f64; 3] {
        self.conserved(0.0, self.branches(0.0).0)
    }

    pub fn right_state(&self) -> [f64; 3] {
        self.conserved(1.0, self.branches(1.0).1)
    }

    /// Position of the initial density step carrying `self.mass`.
    pub fn initial_step(&self) -> f64 {
        let rho_l = self.branches(0.0).0;
        let rho_r = self.branches(1.0).1;
        (rho_r - self.mass) / (rho_r - rho_l)
    }
}

pub fn euler_case() -> BenchmarkCase {
    euler_case_with(EulerData::default())
}

pub fn euler_case_with(data: EulerData) -> BenchmarkCase {
    let slope = data.momentum_slope;
    let problem = Euler {
        gamma: data.gamma,
        domain: (0.0, 1.0),
        boundaries: Boundaries {
            left: BoundaryCondition::Dirichlet(data.left_state().to_vec()),
            right: BoundaryCondition::Dirichlet(data.right_state().to_vec()),
        },
        source: SourceTerm::Antiderivative(Arc::new(move |x: f64, out: &mut [f64]| {
            out[0] = 0.0;
            out[1] = slope * x;
            out[2] = 0.0;
        })),
    };
    let x0 = data.initial_step();
    let (rho_l, rho_r) = (data.branches(0.0).0, data.branches(1.0).1);
    BenchmarkCase {
        id: CaseId::Euler,
        problem: Arc::new(problem),
        exact: Arc::new(move |x, out| out.copy_from_slice(&data.conserved(x, data.exact_density(x)))),
        breakpoints: vec![data.shock],
        initial: Arc::new(move |x, out| {
            let rho = if x <= x0 { rho_l } else { rho_r };
            out.copy_from_slice(&data.conserved(x, rho));
        }),
        initial_breakpoints: vec![x0],
        shock: Some(data.shock),
        regions: vec![(0.050, 0.525), (0.650, 0.975)],
        conserved_component: Some(0),
    }
}
