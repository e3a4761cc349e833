use log::{debug, info, warn};

use super::direct::{newton_attempt, newton_with, NewtonOutcome, Total};
use super::marching::march_to_steady;
use super::{solve_linear, solve_newton, tm1_solve, tm2_solve, InnerStats, Method, SolveReport, SolverConfig, Termination};
use crate::detectors::detect_and_decrement;
use crate::error::{Error, Result};
use crate::field::FieldVector;
use crate::mesh::Mesh;
use crate::problem::SteadyProblem;
use crate::residual::ResidualOperator;
use crate::stencil::{stencil_size, CpdMap, StencilMap};

/// The degree-zero solution used to seed the high-order solves. Affine
/// problems are solved directly; otherwise first-order pseudo-time marching
/// from `phi_init` hands over to Newton.
pub fn first_order_solution(
    problem: &dyn SteadyProblem,
    mesh: &Mesh,
    cfg: &SolverConfig,
    phi_init: &FieldVector,
) -> Result<(FieldVector, InnerStats)> {
    let n = mesh.n_cells();
    let cpd = CpdMap::uniform(n, 0);
    let cs = StencilMap::centered(n, 0)?;
    if problem.is_affine() {
        return solve_linear(problem, mesh, &cpd, &cs, phi_init, cfg);
    }
    let op = ResidualOperator::new(problem, mesh, &cpd, &cs)?;
    let switch = cfg.p0_switch_tolerance.max(cfg.tolerance);
    let (marched, mut stats) = march_to_steady(&op, phi_init, cfg, switch)?;
    let total = cfg.conserved_component.map(|c| Total::of(phi_init, c, mesh));
    let polish = newton_with(&op, &marched, cfg, total)?;
    stats.iterations += polish.stats.iterations;
    stats.residual_history.extend(polish.stats.residual_history);
    stats.source_shift = polish.stats.source_shift;
    match polish.failure {
        None => Ok((polish.phi, stats)),
        // the degree-zero state only seeds the high-order solve
        Some(Error::Stagnation { residual } | Error::MaxIterations { residual, .. }) if residual <= switch => {
            warn!("degree-zero polish stopped at ‖G‖∞ = {residual:.3e}");
            Ok((polish.phi, stats))
        }
        Some(e) => Err(e),
    }
}

/// The MOOD loop around a direct or Newton inner solver: solve under the
/// current map, decrement the degree of every invalid cell, and stop at the
/// first map left unchanged by the detectors.
pub fn mood_solve(
    problem: &dyn SteadyProblem,
    mesh: &Mesh,
    cfg: &SolverConfig,
    inner: Method,
    cs: &StencilMap,
    phi0: &FieldVector,
    cpd0: &CpdMap,
) -> Result<SolveReport> {
    if !matches!(inner, Method::Linear | Method::Newton) {
        return Err(Error::InvalidRequest(format!("{} is a marching method; use solve_with", inner.name())));
    }
    let mut report = SolveReport {
        phi: phi0.clone(),
        cpd: cpd0.clone(),
        stencils: cs.clone(),
        method: inner,
        mood_iterations: 0,
        as_iterations: 0,
        inner_iterations: Vec::new(),
        residual_history: Vec::new(),
        residual_norm: f64::NAN,
        source_shift: 0.0,
        termination: Termination::Converged,
    };
    let mut phi = phi0.clone();
    let mut cpd = cpd0.clone();
    let cap = cfg.mood_cap(mesh.n_cells());
    for k in 0..cap {
        let attempt = match inner {
            Method::Linear => solve_linear(problem, mesh, &cpd, cs, &phi, cfg).map(|(phi, stats)| NewtonOutcome { phi, stats, failure: None }),
            _ => newton_attempt(problem, mesh, &cpd, cs, &phi, cfg),
        };
        let NewtonOutcome { phi: candidate, stats, failure } = match attempt {
            Ok(outcome) => outcome,
            Err(Error::Inadmissible { x, reason }) => {
                // the traces themselves fail admissibility, before any candidate exists
                let next = decrement_at_interface(&cpd, cfg, mesh, x);
                if next == cpd {
                    return Err(Error::InnerSolve {
                        cpd: cpd.as_slice().to_vec(),
                        source: Box::new(Error::Inadmissible { x, reason }),
                    });
                }
                debug!("inadmissible trace at x = {x:.4}: {reason}");
                report.mood_iterations += 1;
                cpd = next;
                continue;
            }
            Err(e) => {
                return Err(Error::InnerSolve {
                    cpd: cpd.as_slice().to_vec(),
                    source: Box::new(e),
                })
            }
        };
        report.residual_norm = *stats.residual_history.last().unwrap_or(&f64::NAN);
        report.absorb(stats);
        report.mood_iterations += 1;
        let next = detect_and_decrement(&candidate, &cpd, &cfg.detectors, problem, mesh);
        if let Some(e) = failure {
            // an unconverged candidate still feeds the detectors
            if next == cpd || !matches!(e, Error::Stagnation { .. } | Error::MaxIterations { .. }) {
                return Err(Error::InnerSolve {
                    cpd: cpd.as_slice().to_vec(),
                    source: Box::new(e),
                });
            }
            debug!("inner solve stopped at ‖G‖∞ = {:.3e}; detecting on its best iterate", report.residual_norm);
        }
        phi = candidate;
        if next == cpd {
            debug!("MOOD fixed point after {} candidates, total degree {}", k + 1, cpd.total_degree());
            report.phi = phi;
            report.cpd = cpd;
            return Ok(report);
        }
        assert!(next.le(&cpd), "detect_and_decrement raised a degree");
        cpd = next;
    }
    Err(Error::MaxIterations {
        solver: "mood",
        iterations: cap,
        residual: report.residual_norm,
    })
}

/// Lowers the degrees of the two cells adjacent to the interface at `x`.
fn decrement_at_interface(cpd: &CpdMap, cfg: &SolverConfig, mesh: &Mesh, x: f64) -> CpdMap {
    let n = mesh.n_cells();
    let k = ((x - mesh.interface(0)) / mesh.h()).round().clamp(0.0, n as f64) as usize;
    let mut next = cpd.clone();
    for i in [k, k + 1].into_iter().filter(|i| (1..=n).contains(i)) {
        next.set(i, cfg.detectors.cascade.next_lower(cpd.degree(i)));
    }
    next
}

/// One MOOD-controlled solve with any of the four methods.
pub fn solve_with(
    problem: &dyn SteadyProblem,
    mesh: &Mesh,
    cfg: &SolverConfig,
    method: Method,
    cs: &StencilMap,
    phi0: &FieldVector,
    cpd0: &CpdMap,
) -> Result<SolveReport> {
    match method {
        Method::Linear | Method::Newton => mood_solve(problem, mesh, cfg, method, cs, phi0, cpd0),
        Method::Tm1 => tm1_solve(problem, mesh, cfg, cs, phi0, cpd0),
        Method::Tm2 => tm2_solve(problem, mesh, cfg, cs, phi0, cpd0),
    }
}

/// Solve under the uniform degree-`d_max` map with centered stencils and no
/// detection.
pub fn unlimited_solve(problem: &dyn SteadyProblem, mesh: &Mesh, cfg: &SolverConfig, method: Method, phi0: &FieldVector) -> Result<SolveReport> {
    let d_max = cfg.detectors.cascade.max_degree();
    let n = mesh.n_cells();
    let cpd = CpdMap::uniform(n, d_max);
    let cs = StencilMap::centered(n, d_max)?;
    let (phi, stats) = match method {
        Method::Linear => solve_linear(problem, mesh, &cpd, &cs, phi0, cfg)?,
        Method::Newton => solve_newton(problem, mesh, &cpd, &cs, phi0, cfg)?,
        Method::Tm1 | Method::Tm2 => {
            let op = ResidualOperator::new(problem, mesh, &cpd, &cs)?;
            march_to_steady(&op, phi0, cfg, cfg.tolerance)?
        }
    };
    let mut report = SolveReport {
        phi,
        cpd,
        stencils: cs,
        method,
        mood_iterations: 0,
        as_iterations: 0,
        inner_iterations: Vec::new(),
        residual_history: Vec::new(),
        residual_norm: *stats.residual_history.last().unwrap_or(&f64::NAN),
        source_shift: 0.0,
        termination: Termination::Unlimited,
    };
    report.absorb(stats);
    Ok(report)
}

/// MOOD with adaptive stencils. A MOOD solve on centered stencils seeds the
/// loop; every round rebuilds the stencils from the latest CPD map and
/// reruns MOOD from the full degree, until two successive maps agree. A
/// round that returns an earlier map closes a cycle, and the next stencils
/// follow the componentwise minimum of the maps since that earlier round.
pub fn mood_as_solve(problem: &dyn SteadyProblem, mesh: &Mesh, cfg: &SolverConfig, method: Method, phi0: &FieldVector) -> Result<SolveReport> {
    let d_max = cfg.detectors.cascade.max_degree();
    let n = mesh.n_cells();
    let full = CpdMap::uniform(n, d_max);
    let size = stencil_size(d_max);
    let mut report = solve_with(problem, mesh, cfg, method, &StencilMap::centered(n, d_max)?, phi0, &full)?;
    let mut seen = vec![report.cpd.clone()];
    let mut guide = report.cpd.clone();
    let mut best: Option<SolveReport> = None;
    for round in 1..=cfg.as_max_iterations {
        let cs = StencilMap::adaptive(&guide, size);
        let mut next = solve_with(problem, mesh, cfg, method, &cs, &report.phi, &full)?;
        next.mood_iterations += report.mood_iterations;
        next.as_iterations = round;
        let mut inner = std::mem::take(&mut report.inner_iterations);
        inner.extend(next.inner_iterations);
        next.inner_iterations = inner;
        let mut history = std::mem::take(&mut report.residual_history);
        history.extend(next.residual_history);
        next.residual_history = history;
        debug!(
            "adaptive-stencil round {round}: degrees {}, ‖G‖∞ = {:.3e}",
            next.cpd.as_slice().iter().map(|d| d.to_string()).collect::<String>(),
            next.residual_norm
        );
        if next.cpd == report.cpd {
            info!("adaptive stencils settled after {round} rounds");
            return Ok(next);
        }
        guide = match seen.iter().position(|m| *m == next.cpd) {
            Some(start) => {
                debug!("adaptive-stencil maps cycle with period {}", seen.len() - start);
                seen[start..].iter().fold(next.cpd.clone(), |acc, m| acc.min(m))
            }
            None => next.cpd.clone(),
        };
        seen.push(next.cpd.clone());
        report = next;
        if best.as_ref().is_none_or(|b| report.residual_norm < b.residual_norm) {
            best = Some(report.clone());
        }
    }
    let mut best = best.unwrap_or(report);
    info!("adaptive-stencil loop capped at {} rounds", cfg.as_max_iterations);
    best.termination = Termination::AsCapReached;
    Ok(best)
}

/// Degree control applied around the inner method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Unlimited,
    Mood,
    MoodAs,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Unlimited => "unlimited",
            Mode::Mood => "mood",
            Mode::MoodAs => "mood-as",
        }
    }
}

/// The full hierarchy: degree-zero solution from `phi_init`, then the
/// high-order solve selected by `mode` started from it.
pub fn solve_steady(
    problem: &dyn SteadyProblem,
    mesh: &Mesh,
    cfg: &SolverConfig,
    method: Method,
    mode: Mode,
    phi_init: &FieldVector,
) -> Result<SolveReport> {
    if method == Method::Linear && !problem.is_affine() {
        return Err(Error::InvalidRequest("the linear solver needs an affine problem".into()));
    }
    let (p0, stats) = first_order_solution(problem, mesh, cfg, phi_init)?;
    debug!("degree-zero solution after {} iterations", stats.iterations);
    let d_max = cfg.detectors.cascade.max_degree();
    let n = mesh.n_cells();
    let mut report = match mode {
        Mode::Unlimited => unlimited_solve(problem, mesh, cfg, method, &p0)?,
        Mode::Mood => solve_with(problem, mesh, cfg, method, &StencilMap::centered(n, d_max)?, &p0, &CpdMap::uniform(n, d_max))?,
        Mode::MoodAs => mood_as_solve(problem, mesh, cfg, method, &p0)?,
    };
    report.inner_iterations.insert(0, stats.iterations);
    let mut history = stats.residual_history;
    history.append(&mut report.residual_history);
    report.residual_history = history;
    Ok(report)
}
