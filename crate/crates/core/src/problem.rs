//! The physics bundle a steady solve needs: fluxes, source means, boundary
//! data and admissibility.

use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::mesh::{gauss_integral, Mesh, GAUSS3};

/// Boundary treatment at one end of the domain.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryCondition {
    /// Prescribed exterior state.
    Dirichlet(Vec<f64>),
    /// Exterior trace copied from the interior one (outflow).
    Transparent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Boundaries {
    pub left: BoundaryCondition,
    pub right: BoundaryCondition,
}

type PointFn = dyn Fn(f64, &mut [f64]) + Send + Sync;

/// How the cell mean of the source term is obtained.
#[derive(Clone)]
pub enum SourceTerm {
    Zero,
    /// `G` with `G' = S`; the mean over `K_i` is `(G(x_{i+1/2}) - G(x_{i-1/2})) / h`.
    Antiderivative(Arc<PointFn>),
    /// Pointwise source, averaged with three-point Gauss–Legendre.
    Integrand(Arc<PointFn>),
}

impl fmt::Debug for SourceTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceTerm::Zero => f.write_str("Zero"),
            SourceTerm::Antiderivative(_) => f.write_str("Antiderivative(..)"),
            SourceTerm::Integrand(_) => f.write_str("Integrand(..)"),
        }
    }
}

impl SourceTerm {
    pub fn cell_mean(&self, mesh: &Mesh, i: usize, out: &mut [f64]) {
        match self {
            SourceTerm::Zero => out.fill(0.0),
            SourceTerm::Antiderivative(g) => {
                let (a, b) = mesh.cell_bounds(i);
                let mut ga = [0.0; 3];
                g(a, &mut ga[..out.len()]);
                g(b, out);
                for (o, lo) in out.iter_mut().zip(ga) {
                    *o = (*o - lo) / mesh.h();
                }
            }
            SourceTerm::Integrand(s) => {
                let (a, b) = mesh.cell_bounds(i);
                let n = out.len();
                for c in 0..n {
                    let component = |x: f64| {
                        let mut v = [0.0; 3];
                        s(x, &mut v[..n]);
                        v[c]
                    };
                    out[c] = gauss_integral(&GAUSS3, &component, a, b) / mesh.h();
                }
            }
        }
    }
}

/// A 1D steady balance law `dF(φ)/dx = S(x)` together with its two-point
/// numerical flux.
pub trait SteadyProblem: Send + Sync {
    fn n_components(&self) -> usize;

    fn domain(&self) -> (f64, f64);

    fn physical_flux(&self, state: &[f64], x: f64, out: &mut [f64]);

    /// Two-point flux at `x` from the interface traces. `means` holds the
    /// cell means on either side (or the boundary state), which some fluxes
    /// use for their dissipation coefficient.
    fn numerical_flux(&self, left: &[f64], right: &[f64], means: (&[f64], &[f64]), x: f64, out: &mut [f64]) -> Result<()>;

    fn source(&self) -> &SourceTerm;

    fn boundaries(&self) -> &Boundaries;

    /// Physical admissibility of a state; the PAD detector only runs when
    /// [`SteadyProblem::checks_admissibility`] is true.
    fn admissible(&self, _state: &[f64]) -> bool {
        true
    }

    fn checks_admissibility(&self) -> bool {
        false
    }

    /// Largest characteristic speed magnitude of `state` at `x`.
    fn spectral_radius(&self, state: &[f64], x: f64) -> f64;

    /// True when the residual is affine in the unknowns for fixed maps.
    fn is_affine(&self) -> bool {
        false
    }
}

/// Mean of the source over cell `i`.
pub fn source_mean(problem: &dyn SteadyProblem, mesh: &Mesh, i: usize) -> Vec<f64> {
    let mut out = vec![0.0; problem.n_components()];
    problem.source().cell_mean(mesh, i, &mut out);
    out
}
