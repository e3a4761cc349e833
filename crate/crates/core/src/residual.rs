//! Assembly of the steady residual
//!
//! ```text
//! G_i = F(φ_{i+1/2,-}, φ_{i+1/2,+}; x_{i+1/2}) - F(φ_{i-1/2,-}, φ_{i-1/2,+}; x_{i-1/2}) - h S_i
//! ```
//!
//! For fixed CPD and stencil maps every interface trace is a fixed linear
//! combination of cell means, so [`ResidualOperator`] precomputes those
//! weights once and evaluating the residual reduces to dot products and
//! flux calls.

use crate::error::{Error, Result};
use crate::field::{FieldVector, MAX_COMPONENTS};
use crate::mesh::Mesh;
use crate::problem::{BoundaryCondition, SteadyProblem};
use crate::reconstruction::point_weights;
use crate::stencil::{interface_substencil, CpdMap, StencilMap};

pub use crate::problem::source_mean;

/// Trace of one cell's reconstruction at one of its interfaces, as weights
/// over cell indices (0-based storage order).
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Trace {
    cells: Vec<usize>,
    weights: Vec<f64>,
}

impl Trace {
    fn build(cs: &StencilMap, cell: usize, degree: usize, t: f64) -> Result<Self> {
        let sub = interface_substencil(cs.get(cell), degree);
        let offsets: Vec<f64> = sub.members().iter().map(|&j| j as f64 - cell as f64).collect();
        let w = point_weights(degree, &offsets, t)?;
        let mut cells = vec![cell - 1];
        let mut weights = vec![1.0 - w.iter().sum::<f64>()];
        cells.extend(sub.members().iter().map(|&j| j - 1));
        weights.extend(w);
        Ok(Self { cells, weights })
    }

    fn apply(&self, values: &[f64]) -> f64 {
        self.cells.iter().zip(&self.weights).map(|(&j, w)| w * values[j]).sum()
    }
}

/// Left and right traces of interface `k` (at `x_{k+1/2}`); `None` marks the
/// exterior side of a boundary interface.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct InterfaceTraces {
    pub(crate) left: Option<Trace>,
    pub(crate) right: Option<Trace>,
}

impl InterfaceTraces {
    fn build(cs: &StencilMap, k: usize, degree: usize) -> Result<Self> {
        let n = cs.len();
        Ok(Self {
            left: (k >= 1).then(|| Trace::build(cs, k, degree, 0.5)).transpose()?,
            right: (k < n).then(|| Trace::build(cs, k + 1, degree, -0.5)).transpose()?,
        })
    }
}

/// Reconstruction degree used at interface `k`; boundary interfaces take the
/// degree of their only cell.
fn trace_degree(cpd: &CpdMap, k: usize) -> usize {
    let n = cpd.len();
    match k {
        0 => cpd.degree(1),
        k if k == n => cpd.degree(n),
        k => cpd.interface_degree(k),
    }
}

/// `h S_i` for every cell.
fn scaled_source(problem: &dyn SteadyProblem, mesh: &Mesh) -> FieldVector {
    let nc = problem.n_components();
    let mut source = FieldVector::zeros(nc, mesh.n_cells());
    let mut buf = [0.0; MAX_COMPONENTS];
    for i in mesh.cells() {
        problem.source().cell_mean(mesh, i, &mut buf[..nc]);
        for (c, s) in buf.iter().enumerate().take(nc) {
            source.set(c, i, mesh.h() * s);
        }
    }
    source
}

/// Interface traces of a fixed stencil map, built on demand for each degree,
/// so operators for many CPD maps share one set of reconstructions.
pub(crate) struct TraceTable<'a> {
    problem: &'a dyn SteadyProblem,
    mesh: Mesh,
    cs: StencilMap,
    /// `traces[k][d]`.
    traces: Vec<Vec<Option<InterfaceTraces>>>,
    source: FieldVector,
}

impl<'a> TraceTable<'a> {
    pub(crate) fn new(problem: &'a dyn SteadyProblem, mesh: &Mesh, cs: &StencilMap) -> Self {
        assert_eq!(cs.len(), mesh.n_cells(), "stencil map size");
        Self {
            problem,
            mesh: *mesh,
            cs: cs.clone(),
            traces: vec![Vec::new(); mesh.n_cells() + 1],
            source: scaled_source(problem, mesh),
        }
    }

    pub(crate) fn operator(&mut self, cpd: &CpdMap) -> Result<ResidualOperator<'a>> {
        assert_eq!(cpd.len(), self.mesh.n_cells(), "CPD map size");
        let mut interfaces = Vec::with_capacity(self.traces.len());
        for (k, slots) in self.traces.iter_mut().enumerate() {
            let d = trace_degree(cpd, k);
            if slots.len() <= d {
                slots.resize(d + 1, None);
            }
            if slots[d].is_none() {
                slots[d] = Some(InterfaceTraces::build(&self.cs, k, d)?);
            }
            interfaces.push(slots[d].clone().expect("trace filled above"));
        }
        Ok(ResidualOperator {
            problem: self.problem,
            mesh: self.mesh,
            interfaces,
            source: self.source.clone(),
        })
    }
}

/// The residual map `Φ ↦ G(Φ, M, S)` for frozen CPD and stencil maps.
pub struct ResidualOperator<'a> {
    problem: &'a dyn SteadyProblem,
    mesh: Mesh,
    interfaces: Vec<InterfaceTraces>,
    /// `h S_i`, component-major like [`FieldVector`].
    source: FieldVector,
}

impl<'a> ResidualOperator<'a> {
    pub fn new(problem: &'a dyn SteadyProblem, mesh: &Mesh, cpd: &CpdMap, cs: &StencilMap) -> Result<Self> {
        let n = mesh.n_cells();
        assert_eq!(cpd.len(), n, "CPD map size");
        assert_eq!(cs.len(), n, "stencil map size");
        let interfaces = (0..=n)
            .map(|k| InterfaceTraces::build(cs, k, trace_degree(cpd, k)))
            .collect::<Result<_>>()?;
        Ok(Self {
            problem,
            mesh: *mesh,
            interfaces,
            source: scaled_source(problem, mesh),
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn problem(&self) -> &'a dyn SteadyProblem {
        self.problem
    }

    /// `(left, right)` traces and the neighbouring means (or boundary
    /// states) of interface `k`.
    fn interface_data(&self, phi: &FieldVector, k: usize) -> InterfaceData {
        let nc = phi.n_components();
        let n = self.mesh.n_cells();
        let mut data = InterfaceData::default();
        let traces = &self.interfaces[k];
        for c in 0..nc {
            let values = phi.component(c);
            if let Some(t) = &traces.left {
                data.left[c] = t.apply(values);
                data.left_mean[c] = values[k - 1];
            }
            if let Some(t) = &traces.right {
                data.right[c] = t.apply(values);
                data.right_mean[c] = values[k];
            }
        }
        let bc = self.problem.boundaries();
        if k == 0 {
            match &bc.left {
                BoundaryCondition::Dirichlet(state) => {
                    data.left[..nc].copy_from_slice(state);
                    data.left_mean[..nc].copy_from_slice(state);
                }
                BoundaryCondition::Transparent => {
                    data.left = data.right;
                    data.left_mean = data.right_mean;
                }
            }
        }
        if k == n {
            match &bc.right {
                BoundaryCondition::Dirichlet(state) => {
                    data.right[..nc].copy_from_slice(state);
                    data.right_mean[..nc].copy_from_slice(state);
                }
                BoundaryCondition::Transparent => {
                    data.right = data.left;
                    data.right_mean = data.left_mean;
                }
            }
        }
        data
    }

    /// `(φ_{k+1/2,-}, φ_{k+1/2,+})` for `k = 0..=I`.
    pub fn interface_states(&self, phi: &FieldVector) -> Vec<(Vec<f64>, Vec<f64>)> {
        let nc = phi.n_components();
        (0..=self.mesh.n_cells())
            .map(|k| {
                let d = self.interface_data(phi, k);
                (d.left[..nc].to_vec(), d.right[..nc].to_vec())
            })
            .collect()
    }

    /// Numerical flux at every interface, interface-major: `flux[k * nc + c]`.
    pub fn interface_fluxes(&self, phi: &FieldVector) -> Result<Vec<f64>> {
        let nc = phi.n_components();
        let mut flux = vec![0.0; (self.mesh.n_cells() + 1) * nc];
        for k in 0..=self.mesh.n_cells() {
            let d = self.interface_data(phi, k);
            self.problem.numerical_flux(
                &d.left[..nc],
                &d.right[..nc],
                (&d.left_mean[..nc], &d.right_mean[..nc]),
                self.mesh.interface(k),
                &mut flux[k * nc..(k + 1) * nc],
            )?;
        }
        Ok(flux)
    }

    pub fn eval_into(&self, phi: &FieldVector, out: &mut FieldVector) -> Result<()> {
        let nc = phi.n_components();
        debug_assert_eq!(nc, self.problem.n_components());
        let flux = self.interface_fluxes(phi)?;
        for i in self.mesh.cells() {
            for c in 0..nc {
                let g = flux[i * nc + c] - flux[(i - 1) * nc + c] - self.source.get(c, i);
                out.set(c, i, g);
            }
        }
        if !out.is_finite() {
            return Err(Error::NonFinite("residual evaluation".into()));
        }
        Ok(())
    }

    pub fn eval(&self, phi: &FieldVector) -> Result<FieldVector> {
        let mut out = FieldVector::zeros(phi.n_components(), phi.n_cells());
        self.eval_into(phi, &mut out)?;
        Ok(out)
    }

    /// `h Σ_i S_i` per component.
    pub fn total_source(&self) -> Vec<f64> {
        (0..self.source.n_components())
            .map(|c| self.source.component(c).iter().sum())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct InterfaceData {
    left: [f64; MAX_COMPONENTS],
    right: [f64; MAX_COMPONENTS],
    left_mean: [f64; MAX_COMPONENTS],
    right_mean: [f64; MAX_COMPONENTS],
}

/// Interface trace pairs for the given maps.
pub fn interface_states(
    phi: &FieldVector,
    cpd: &CpdMap,
    cs: &StencilMap,
    mesh: &Mesh,
    problem: &dyn SteadyProblem,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    Ok(ResidualOperator::new(problem, mesh, cpd, cs)?.interface_states(phi))
}

/// `G(Φ, M, S)` in one call; prefer [`ResidualOperator`] when evaluating
/// repeatedly under the same maps.
pub fn residual(phi: &FieldVector, cpd: &CpdMap, cs: &StencilMap, mesh: &Mesh, problem: &dyn SteadyProblem) -> Result<FieldVector> {
    ResidualOperator::new(problem, mesh, cpd, cs)?.eval(phi)
}
