use log::{debug, trace};

use super::{InnerStats, MapReset, SolveReport, SolverConfig, Termination, Method};
use crate::detectors::detect_and_decrement;
use crate::error::{Error, Result};
use crate::field::FieldVector;
use crate::mesh::Mesh;
use crate::problem::SteadyProblem;
use crate::residual::{ResidualOperator, TraceTable};
use crate::stencil::{CpdMap, StencilMap};

/// Residual norms of marching phases are kept every this many steps.
const HISTORY_STRIDE: usize = 100;

/// `Δt = cfl · h / max_i ρ(φ_i)`, with `Δt = cfl · h` when every spectral
/// radius vanishes.
pub fn stable_time_step(problem: &dyn SteadyProblem, mesh: &Mesh, phi: &FieldVector, cfl: f64) -> f64 {
    let nc = phi.n_components();
    let radius = mesh
        .cells()
        .map(|i| problem.spectral_radius(&phi.state(i)[..nc], mesh.center(i)))
        .fold(0.0, f64::max);
    if radius > 0.0 {
        cfl * mesh.h() / radius
    } else {
        cfl * mesh.h()
    }
}

/// One explicit Euler step of `dΦ/dt = -G(Φ) / h`.
pub fn rk1_step(
    phi: &FieldVector,
    cpd: &CpdMap,
    cs: &StencilMap,
    mesh: &Mesh,
    problem: &dyn SteadyProblem,
    cfl: f64,
) -> Result<FieldVector> {
    let op = ResidualOperator::new(problem, mesh, cpd, cs)?;
    let mut out = phi.clone();
    step_with(&op, phi, cfl, &mut out)?;
    Ok(out)
}

/// Writes the stepped state into `out` and returns `‖G(phi)‖∞`.
fn step_with(op: &ResidualOperator, phi: &FieldVector, cfl: f64, out: &mut FieldVector) -> Result<f64> {
    let mesh = op.mesh();
    let dt = stable_time_step(op.problem(), mesh, phi, cfl);
    let g = op.eval(phi)?;
    let ratio = dt / mesh.h();
    for ((o, p), r) in out.as_mut_slice().iter_mut().zip(phi.as_slice()).zip(g.as_slice()) {
        *o = p - ratio * r;
    }
    if !out.is_finite() {
        return Err(Error::NonFinite("pseudo-time step".into()));
    }
    Ok(g.max_abs())
}

/// Small cache of residual operators keyed by CPD map.
struct OperatorCache<'a> {
    table: TraceTable<'a>,
    entries: Vec<(CpdMap, ResidualOperator<'a>)>,
}

impl<'a> OperatorCache<'a> {
    const CAPACITY: usize = 8;

    fn new(problem: &'a dyn SteadyProblem, mesh: &Mesh, cs: &StencilMap) -> Self {
        Self {
            table: TraceTable::new(problem, mesh, cs),
            entries: Vec::new(),
        }
    }

    fn get(&mut self, cpd: &CpdMap) -> Result<&ResidualOperator<'a>> {
        let pos = match self.entries.iter().position(|(m, _)| m == cpd) {
            Some(pos) => pos,
            None => {
                if self.entries.len() == Self::CAPACITY {
                    self.entries.remove(0);
                }
                let op = self.table.operator(cpd)?;
                self.entries.push((cpd.clone(), op));
                self.entries.len() - 1
            }
        };
        Ok(&self.entries[pos].1)
    }
}

/// Result of one frozen-map marching phase.
pub(crate) struct March {
    pub(crate) phi: FieldVector,
    pub(crate) stats: InnerStats,
    /// False when every CFL halving diverged; `phi` is then the last iterate.
    pub(crate) converged: bool,
}

/// Lowest-residual iterate of a marching attempt.
struct Best {
    phi: FieldVector,
    norm: f64,
    since: usize,
}

impl Best {
    fn new(phi: &FieldVector) -> Self {
        Self {
            phi: phi.clone(),
            norm: f64::INFINITY,
            since: 0,
        }
    }

    fn offer(&mut self, phi: &FieldVector, norm: f64) {
        if norm < self.norm {
            self.norm = norm;
            self.since = 0;
            self.phi.as_mut_slice().copy_from_slice(phi.as_slice());
        } else {
            self.since += 1;
        }
    }

    fn diverged(&self, norm: f64, cfg: &SolverConfig) -> bool {
        norm > cfg.divergence_ratio * self.norm
    }

    fn stalled(&self, cfg: &SolverConfig) -> bool {
        self.since >= cfg.stall_steps
    }

    /// Restores the best iterate into `phi` and restarts the stall count.
    fn restart(&mut self, phi: &mut FieldVector) {
        phi.as_mut_slice().copy_from_slice(self.phi.as_slice());
        self.since = 0;
    }
}

/// Marches with a frozen map until `‖G‖∞ ≤ tolerance`. A divergent attempt
/// restarts from its best iterate at half the CFL number.
pub(crate) fn march(op: &ResidualOperator, phi0: &FieldVector, cfg: &SolverConfig, tolerance: f64) -> Result<March> {
    let mut phi = phi0.clone();
    let mut next = phi0.clone();
    let mut history = Vec::new();
    let mut best = Best::new(phi0);
    let mut cfl = cfg.cfl;
    let mut halvings = 0;
    for step in 0..cfg.max_time_steps {
        let norm = step_with(op, &phi, cfl, &mut next)?;
        best.offer(&phi, norm);
        let converged = norm <= tolerance;
        let diverged = best.diverged(norm, cfg);
        if step % HISTORY_STRIDE == 0 || converged || diverged {
            history.push(norm);
        }
        if diverged && halvings < cfg.cfl_halvings {
            halvings += 1;
            cfl *= 0.5;
            debug!("marching diverged at step {step}; restarting from ‖G‖∞ = {:.3e} with cfl {cfl}", best.norm);
            best.restart(&mut phi);
            continue;
        }
        if converged || diverged {
            debug!(
                "marching {} at ‖G‖∞ = {norm:.3e} after {step} steps",
                if converged { "converged" } else { "diverged" }
            );
            return Ok(March {
                phi,
                stats: InnerStats {
                    iterations: step,
                    residual_history: history,
                    source_shift: 0.0,
                },
                converged,
            });
        }
        std::mem::swap(&mut phi, &mut next);
    }
    let residual = op.eval(&phi)?.max_abs();
    Err(Error::MaxIterations {
        solver: "pseudo-time marching",
        iterations: cfg.max_time_steps,
        residual,
    })
}

/// [`march`] that treats divergence as an error.
pub(crate) fn march_to_steady(op: &ResidualOperator, phi0: &FieldVector, cfg: &SolverConfig, tolerance: f64) -> Result<(FieldVector, InnerStats)> {
    let m = march(op, phi0, cfg, tolerance)?;
    if !m.converged {
        return Err(Error::Diverged {
            solver: "pseudo-time marching",
            residual: *m.stats.residual_history.last().unwrap_or(&f64::NAN),
        });
    }
    Ok((m.phi, m.stats))
}

/// TM1: every pseudo-time step resets the map, steps, and re-steps from the
/// same state under decremented maps until the detectors accept the
/// candidate.
pub fn tm1_solve(
    problem: &dyn SteadyProblem,
    mesh: &Mesh,
    cfg: &SolverConfig,
    cs: &StencilMap,
    phi0: &FieldVector,
    cpd0: &CpdMap,
) -> Result<SolveReport> {
    let mut cache = OperatorCache::new(problem, mesh, cs);
    let mut phi = phi0.clone();
    let mut candidate = phi0.clone();
    let mut accepted = cpd0.clone();
    let mut history = Vec::new();
    let mut mood_iterations = 0;
    let mut best = Best::new(phi0);
    let mut cfl = cfg.cfl;
    let mut halvings = 0;
    for step in 0..cfg.max_time_steps {
        let mut cpd = match cfg.tm1_reset {
            MapReset::Initial => cpd0.clone(),
            MapReset::Previous => accepted.clone(),
        };
        let mut rounds = 0;
        loop {
            step_with(cache.get(&cpd)?, &phi, cfl, &mut candidate)?;
            rounds += 1;
            let next = detect_and_decrement(&candidate, &cpd, &cfg.detectors, problem, mesh);
            if next == cpd {
                break;
            }
            if rounds > cfg.mood_cap(mesh.n_cells()) {
                return Err(Error::MaxIterations {
                    solver: "tm1 detection",
                    iterations: rounds,
                    residual: f64::NAN,
                });
            }
            cpd = next;
        }
        mood_iterations += rounds;
        std::mem::swap(&mut phi, &mut candidate);
        accepted = cpd;
        let norm = cache.get(&accepted)?.eval(&phi)?.max_abs();
        if step % HISTORY_STRIDE == 0 {
            history.push(norm);
            trace!("tm1 step {step}: ‖G‖∞ = {norm:.3e}");
        }
        if best.diverged(norm, cfg) || best.stalled(cfg) {
            if halvings == cfg.cfl_halvings {
                return Err(Error::Diverged { solver: "tm1", residual: norm });
            }
            halvings += 1;
            cfl *= 0.5;
            debug!("tm1 diverged at step {step}; restarting from ‖G‖∞ = {:.3e} with cfl {cfl}", best.norm);
            best.restart(&mut phi);
            continue;
        }
        best.offer(&phi, norm);
        if norm <= cfg.tolerance {
            if step % HISTORY_STRIDE != 0 {
                history.push(norm);
            }
            debug!("tm1 converged after {} steps", step + 1);
            return Ok(SolveReport {
                phi,
                cpd: accepted,
                stencils: cs.clone(),
                method: Method::Tm1,
                mood_iterations,
                as_iterations: 0,
                inner_iterations: vec![step + 1],
                residual_history: history,
                residual_norm: norm,
                source_shift: 0.0,
                termination: Termination::Converged,
            });
        }
    }
    let residual = cache.get(&accepted)?.eval(&phi)?.max_abs();
    Err(Error::MaxIterations {
        solver: "tm1",
        iterations: cfg.max_time_steps,
        residual,
    })
}

/// TM2: march to steady state under a frozen map, detect once, and resume
/// marching under the decremented map until the map is a fixed point.
pub fn tm2_solve(
    problem: &dyn SteadyProblem,
    mesh: &Mesh,
    cfg: &SolverConfig,
    cs: &StencilMap,
    phi0: &FieldVector,
    cpd0: &CpdMap,
) -> Result<SolveReport> {
    let mut phi = phi0.clone();
    let mut cpd = cpd0.clone();
    let mut report = SolveReport {
        phi: phi0.clone(),
        cpd: cpd0.clone(),
        stencils: cs.clone(),
        method: Method::Tm2,
        mood_iterations: 0,
        as_iterations: 0,
        inner_iterations: Vec::new(),
        residual_history: Vec::new(),
        residual_norm: f64::NAN,
        source_shift: 0.0,
        termination: Termination::Converged,
    };
    for _ in 0..cfg.mood_cap(mesh.n_cells()) {
        let op = ResidualOperator::new(problem, mesh, &cpd, cs)?;
        let m = march(&op, &phi, cfg, cfg.tolerance).map_err(|e| Error::InnerSolve {
            cpd: cpd.as_slice().to_vec(),
            source: Box::new(e),
        })?;
        let residual = *m.stats.residual_history.last().unwrap_or(&f64::NAN);
        report.absorb(m.stats);
        report.mood_iterations += 1;
        phi = m.phi;
        // a divergent phase hands its last iterate to the detectors
        let next = detect_and_decrement(&phi, &cpd, &cfg.detectors, problem, mesh);
        if !m.converged && next == cpd {
            return Err(Error::InnerSolve {
                cpd: cpd.as_slice().to_vec(),
                source: Box::new(Error::Diverged { solver: "tm2", residual }),
            });
        }
        if next == cpd {
            report.residual_norm = op.eval(&phi)?.max_abs();
            report.phi = phi;
            report.cpd = cpd;
            return Ok(report);
        }
        debug_assert!(next.le(&cpd));
        cpd = next;
    }
    Err(Error::MaxIterations {
        solver: "tm2 detection",
        iterations: cfg.mood_cap(mesh.n_cells()),
        residual: f64::NAN,
    })

}
