use log::{debug, trace};
use nalgebra::{DMatrix, DVector};

use super::{InnerStats, SolverConfig};
use crate::error::{Error, Result};
use crate::field::FieldVector;
use crate::mesh::Mesh;
use crate::problem::SteadyProblem;
use crate::residual::ResidualOperator;
use crate::stencil::{CpdMap, StencilMap};

/// Solves `G(Φ, M, S) = 0` for an affine residual by probing the matrix
/// `A e_j = G(e_j) - G(0)` and factorizing it with partial pivoting.
/// `phi0` only fixes the shape of the unknown.
pub fn solve_linear(
    problem: &dyn SteadyProblem,
    mesh: &Mesh,
    cpd: &CpdMap,
    cs: &StencilMap,
    phi0: &FieldVector,
    cfg: &SolverConfig,
) -> Result<(FieldVector, InnerStats)> {
    if !problem.is_affine() {
        return Err(Error::InvalidRequest("linear solver needs an affine residual".into()));
    }
    let op = ResidualOperator::new(problem, mesh, cpd, cs)?;
    let nc = phi0.n_components();
    let n = phi0.len();
    let mut probe = FieldVector::zeros(nc, mesh.n_cells());
    let g0 = op.eval(&probe)?;
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut g = FieldVector::zeros(nc, mesh.n_cells());
    for j in 0..n {
        probe.as_mut_slice()[j] = 1.0;
        op.eval_into(&probe, &mut g)?;
        probe.as_mut_slice()[j] = 0.0;
        for (r, (gj, g0j)) in g.as_slice().iter().zip(g0.as_slice()).enumerate() {
            a[(r, j)] = gj - g0j;
        }
    }
    let rhs = DVector::from_iterator(n, g0.as_slice().iter().map(|v| -v));
    let lu = a.clone().lu();
    let sol = lu.solve(&rhs).ok_or_else(|| Error::Singular(format!("affine residual matrix of size {n}")))?;
    let mut phi = FieldVector::from_flat(nc, sol.as_slice().to_vec());
    let mut history = vec![op.eval(&phi)?.max_abs()];
    // one step of iterative refinement absorbs the rounding of the factorization
    if history[0] > cfg.tolerance {
        let r = op.eval(&phi)?;
        let dr = DVector::from_iterator(n, r.as_slice().iter().map(|v| -v));
        if let Some(corr) = lu.solve(&dr) {
            for (p, c) in phi.as_mut_slice().iter_mut().zip(corr.iter()) {
                *p += c;
            }
            history.push(op.eval(&phi)?.max_abs());
        }
    }
    let last = *history.last().unwrap();
    debug!("linear solve: n = {n}, ‖G‖∞ = {last:.3e}");
    if !last.is_finite() || last > cfg.tolerance {
        let cond = condition_estimate(&a);
        return Err(Error::Singular(format!(
            "linear solve left ‖G‖∞ = {last:.3e} (condition ≈ {cond:.3e})"
        )));
    }
    Ok((
        phi,
        InnerStats {
            iterations: 1,
            residual_history: history,
            source_shift: 0.0,
        },
    ))
}

fn condition_estimate(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

/// Forward-difference Jacobian of `op` at `phi`, column by column.
fn probed_jacobian(op: &ResidualOperator, phi: &FieldVector, g0: &FieldVector, rel_step: f64) -> Result<DMatrix<f64>> {
    let n = phi.len();
    let mut jac = DMatrix::<f64>::zeros(n, n);
    let mut probe = phi.clone();
    let mut g = g0.clone();
    for j in 0..n {
        let base = phi.as_slice()[j];
        let step = rel_step * base.abs().max(1.0);
        probe.as_mut_slice()[j] = base + step;
        op.eval_into(&probe, &mut g)?;
        probe.as_mut_slice()[j] = base;
        for (r, (gj, g0j)) in g.as_slice().iter().zip(g0.as_slice()).enumerate() {
            jac[(r, j)] = (gj - g0j) / step;
        }
    }
    Ok(jac)
}

/// Damped Newton on `G(·, M, S)` from `phi0`, halving the step until the
/// residual decreases. Steps that fail to decrease fall back to
/// Levenberg–Marquardt, which also handles singular Jacobians. With
/// [`SolverConfig::conserved_component`] set, the total of that component
/// is held at its value in `phi0` by a source correction on the two cells
/// of its largest jump.
pub fn solve_newton(
    problem: &dyn SteadyProblem,
    mesh: &Mesh,
    cpd: &CpdMap,
    cs: &StencilMap,
    phi0: &FieldVector,
    cfg: &SolverConfig,
) -> Result<(FieldVector, InnerStats)> {
    newton_attempt(problem, mesh, cpd, cs, phi0, cfg)?.into_result()
}

/// [`solve_newton`] that keeps the best iterate of a failed solve.
pub(crate) fn newton_attempt(
    problem: &dyn SteadyProblem,
    mesh: &Mesh,
    cpd: &CpdMap,
    cs: &StencilMap,
    phi0: &FieldVector,
    cfg: &SolverConfig,
) -> Result<NewtonOutcome> {
    let op = ResidualOperator::new(problem, mesh, cpd, cs)?;
    let total = cfg.conserved_component.map(|c| Total::of(phi0, c, mesh));
    newton_with(&op, phi0, cfg, total)
}

/// Prescribed `h Σ_i φ_{c,i}`, corrected on the two cells around the
/// largest jump of component `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Total {
    pub(crate) component: usize,
    pub(crate) value: f64,
    /// Zero-based cells `k` and `k + 1` of the largest jump.
    pub(crate) cells: [usize; 2],
}

impl Total {
    pub(crate) fn of(phi: &FieldVector, component: usize, mesh: &Mesh) -> Self {
        let values = phi.component(component);
        let k = values
            .windows(2)
            .enumerate()
            .max_by(|a, b| (a.1[1] - a.1[0]).abs().total_cmp(&(b.1[1] - b.1[0]).abs()))
            .map_or(0, |(k, _)| k);
        Self {
            component,
            value: sum_of(phi, component, mesh),
            cells: [k, (k + 1).min(values.len() - 1)],
        }
    }

    /// Flat indices of the corrected equations.
    fn rows(&self, cells: usize) -> impl Iterator<Item = usize> + '_ {
        let mut rows = self.cells.map(|i| self.component * cells + i).to_vec();
        rows.dedup();
        rows.into_iter()
    }
}

fn sum_of(phi: &FieldVector, component: usize, mesh: &Mesh) -> f64 {
    mesh.h() * phi.component(component).iter().sum::<f64>()
}

/// Smallest Newton step fraction tried before the regularized fallback.
const MIN_NEWTON_FRACTION: f64 = 1.0 / 1024.0;

/// Regularization growth before a Levenberg–Marquardt step is abandoned.
const MAX_DAMPING_RETRIES: usize = 60;

/// The residual `G`, or with a prescribed total the square system
/// `G(Φ) - h μ (e_k + e_{k+1}) = 0`, `h Σ φ_c = T` in the unknowns `(Φ, μ)`.
struct System<'a, 'b> {
    op: &'b ResidualOperator<'a>,
    total: Option<Total>,
}

/// One iterate and its residual.
#[derive(Clone)]
struct Point {
    phi: FieldVector,
    /// Source correction `μ`; zero without a prescribed total.
    shift: f64,
    g: FieldVector,
    full: DVector<f64>,
}

impl Point {
    fn merit(&self) -> f64 {
        self.full.amax()
    }

    fn unknowns(&self) -> usize {
        self.full.len()
    }
}

impl System<'_, '_> {
    fn eval(&self, phi: FieldVector, shift: f64) -> Result<Point> {
        let g = self.op.eval(&phi)?;
        let mut full = DVector::from_column_slice(g.as_slice());
        if let Some(t) = self.total {
            let mesh = self.op.mesh();
            let cells = mesh.n_cells();
            for r in t.rows(cells) {
                full[r] -= mesh.h() * shift;
            }
            let dev = sum_of(&phi, t.component, mesh) - t.value;
            full = full.push(dev);
        }
        Ok(Point { phi, shift, g, full })
    }

    fn jacobian(&self, at: &Point, rel_step: f64) -> Result<DMatrix<f64>> {
        let jac = probed_jacobian(self.op, &at.phi, &at.g, rel_step)?;
        let Some(t) = self.total else {
            return Ok(jac);
        };
        let n = at.phi.len();
        let mesh = self.op.mesh();
        let cells = mesh.n_cells();
        let mut aug = jac.insert_row(n, 0.0).insert_column(n, 0.0);
        for i in 0..cells {
            aug[(n, t.component * cells + i)] = mesh.h();
        }
        for r in t.rows(cells) {
            aug[(r, n)] = -mesh.h();
        }
        Ok(aug)
    }

    /// Residual at `at + alpha · delta`, or `None` for an inadmissible trial.
    fn trial(&self, at: &Point, delta: &DVector<f64>, alpha: f64) -> Option<Point> {
        let mut phi = at.phi.clone();
        for (p, d) in phi.as_mut_slice().iter_mut().zip(delta.iter()) {
            *p += alpha * d;
        }
        let shift = match self.total {
            Some(_) => at.shift + alpha * delta[at.phi.len()],
            None => 0.0,
        };
        self.eval(phi, shift).ok()
    }
}

fn newton_direction(jac: &DMatrix<f64>, full: &DVector<f64>) -> Option<DVector<f64>> {
    let delta = jac.clone().lu().solve(&(-full))?;
    delta.iter().all(|v| v.is_finite()).then_some(delta)
}

/// Levenberg–Marquardt damping state, `(JᵀJ + μI) δ = -Jᵀr`.
struct Damping {
    mu: f64,
    growth: f64,
}

impl Damping {
    fn new() -> Self {
        Self { mu: f64::NAN, growth: 2.0 }
    }

    /// One damped step from `at`; `None` when no decrease of `‖r‖₂` is
    /// found.
    fn step(&mut self, sys: &System, at: &Point, jac: &DMatrix<f64>) -> Option<Point> {
        let normal = jac.tr_mul(jac);
        let grad = jac.tr_mul(&at.full);
        if !self.mu.is_finite() {
            self.mu = 1e-3 * normal.diagonal().max();
        }
        let base = at.full.norm_squared();
        for _ in 0..MAX_DAMPING_RETRIES {
            let mut a = normal.clone();
            for k in 0..at.unknowns() {
                a[(k, k)] += self.mu;
            }
            if let Some(delta) = a.cholesky().map(|c| c.solve(&(-&grad))) {
                // gain ratio of the actual to the predicted decrease
                let predicted = delta.dot(&(self.mu * &delta - &grad));
                if let Some(pt) = sys.trial(at, &delta, 1.0) {
                    let rho = (base - pt.full.norm_squared()) / predicted;
                    if rho > 0.0 && predicted > 0.0 {
                        self.mu *= f64::max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0).powi(3));
                        self.growth = 2.0;
                        return Some(pt);
                    }
                }
            }
            self.mu *= self.growth;
            self.growth *= 2.0;
        }
        None
    }
}

/// Final iterate of a Newton solve; `failure` is set when it missed the
/// tolerance.
pub(crate) struct NewtonOutcome {
    pub(crate) phi: FieldVector,
    pub(crate) stats: InnerStats,
    pub(crate) failure: Option<Error>,
}

impl NewtonOutcome {
    pub(crate) fn into_result(self) -> Result<(FieldVector, InnerStats)> {
        match self.failure {
            None => Ok((self.phi, self.stats)),
            Some(e) => Err(e),
        }
    }
}

pub(crate) fn newton_with(op: &ResidualOperator, phi0: &FieldVector, cfg: &SolverConfig, total: Option<Total>) -> Result<NewtonOutcome> {
    let sys = System { op, total };
    let mut at = sys.eval(phi0.clone(), 0.0)?;
    let mut norm = at.merit();
    let mut history = vec![norm];
    let mut damping = Damping::new();
    let mut failure = None;
    let mut iterations = 0;
    while norm > cfg.tolerance {
        if iterations == cfg.newton_max_iterations {
            failure = Some(Error::MaxIterations {
                solver: "newton",
                iterations,
                residual: norm,
            });
            break;
        }
        iterations += 1;
        let jac = sys.jacobian(&at, cfg.jacobian_step)?;
        let mut accepted = None;
        if let Some(delta) = newton_direction(&jac, &at.full) {
            let mut alpha = 1.0;
            while alpha >= MIN_NEWTON_FRACTION.max(cfg.min_step) {
                // an inadmissible trial state counts as a failed decrease
                if let Some(pt) = sys.trial(&at, &delta, alpha) {
                    if pt.merit() < norm {
                        accepted = Some((pt, format!("step {alpha:.3e}")));
                        break;
                    }
                }
                alpha *= 0.5;
            }
        }
        if accepted.is_none() {
            accepted = damping.step(&sys, &at, &jac).map(|pt| (pt, format!("damping {:.3e}", damping.mu)));
        }
        let Some((pt, how)) = accepted else {
            failure = Some(Error::Stagnation { residual: norm });
            break;
        };
        at = pt;
        norm = at.merit();
        trace!("newton iteration {iterations}: {how}, residual {norm:.3e}, source shift {:.3e}", at.shift);
        history.push(norm);
    }
    if failure.is_none() {
        debug!("newton converged in {iterations} iterations, residual {norm:.3e}, source shift {:.3e}", at.shift);
    }
    Ok(NewtonOutcome {
        phi: at.phi,
        stats: InnerStats {
            iterations,
            residual_history: history,
            source_shift: at.shift,
        },
        failure,
    })
}
