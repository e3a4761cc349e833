//! Property checks shared by the proptest suite and the acceptance report.
//! Each check returns the measured defect, or a description of the
//! violation, for inputs the caller draws.
#![allow(dead_code)]

use mood1d::benchmarks::{advection_regular, burgers_case, euler_case};
use mood1d::detectors::{detect_and_decrement, DetectorConfig};
use mood1d::mesh::cell_mean;
use mood1d::physics::{cons_to_prim, prim_to_cons, DEFAULT_GAMMA};
use mood1d::reconstruction::fit_polynomial;
use mood1d::residual::ResidualOperator;
use mood1d::stencil::{adaptive_stencil, centered_stencil, stencil_size};
use mood1d::{CpdMap, FieldVector, Mesh, Stencil, StencilMap, SteadyProblem};

pub const CONSERVATION_TOL: f64 = 1e-12;
pub const EXACTNESS_TOL: f64 = 1e-10;
pub const ROUNDTRIP_TOL: f64 = 1e-14;
pub const TELESCOPING_TOL: f64 = 1e-12;

/// `|mean of p_i over K_i - φ_i|` for the degree-`d` fit on `stencil`.
pub fn conservation_defect(phi: &[f64], d: usize, i: usize, stencil: &Stencil) -> f64 {
    let mesh = Mesh::new(0.0, 1.0, phi.len()).unwrap();
    let p = fit_polynomial(phi, &mesh, i, d, stencil.members()).unwrap();
    (cell_mean(|x| p.eval(x), &mesh, i, &[]) - phi[i - 1]).abs()
}

/// `q(x) = Σ_k a_k (x - 1/2)^k`.
pub fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, a| acc * (x - 0.5) + a)
}

/// Largest `|p_i - q|` over cell `i` when the data are the means of the
/// polynomial `q` of degree `coeffs.len() - 1`.
pub fn exactness_defect(coeffs: &[f64], n_cells: usize, i: usize, stencil: &Stencil) -> f64 {
    let d = coeffs.len() - 1;
    let mesh = Mesh::new(0.0, 1.0, n_cells).unwrap();
    let phi: Vec<f64> = mesh.cells().map(|j| cell_mean(|x| poly(coeffs, x), &mesh, j, &[])).collect();
    let p = fit_polynomial(&phi, &mesh, i, d, stencil.members()).unwrap();
    let (a, b) = mesh.cell_bounds(i);
    (0..=8)
        .map(|k| a + (b - a) * k as f64 / 8.0)
        .map(|x| (p.eval(x) - poly(coeffs, x)).abs())
        .fold(0.0, f64::max)
}

/// Centered stencil for degree `d`, or the adaptive one driven by `cpd`.
pub fn stencil_for(i: usize, d: usize, n_cells: usize, cpd: Option<&CpdMap>) -> Stencil {
    match cpd {
        Some(cpd) => adaptive_stencil(i, n_cells, stencil_size(d), cpd),
        None => centered_stencil(i, d, n_cells).unwrap(),
    }
}

fn flux_pair(problem: &dyn SteadyProblem, state: &[f64], x: f64) -> (Vec<f64>, Vec<f64>) {
    let nc = state.len();
    let mut physical = vec![0.0; nc];
    let mut numerical = vec![0.0; nc];
    problem.physical_flux(state, x, &mut physical);
    problem.numerical_flux(state, state, (state, state), x, &mut numerical).unwrap();
    (physical, numerical)
}

/// `F_num(φ, φ) == F(φ)` bitwise for upwind advection, Rusanov Bürgers
/// and HLL Euler. `euler` holds primitive `(ρ, u, p)`.
pub fn flux_consistency(phi: f64, x: f64, euler: [f64; 3]) -> Result<(), String> {
    let cases = [
        ("upwind", advection_regular().problem, vec![phi]),
        ("rusanov", burgers_case().problem, vec![phi]),
        ("hll", euler_case().problem, prim_to_cons(&euler, DEFAULT_GAMMA).to_vec()),
    ];
    for (name, problem, state) in cases {
        let (physical, numerical) = flux_pair(&*problem, &state, x);
        if physical != numerical {
            return Err(format!("{name}: F({state:?}) = {physical:?} but F_num = {numerical:?}"));
        }
    }
    Ok(())
}

/// Largest `|v' - v| / max(|v|, 1)` over the primitive components.
pub fn roundtrip_defect(prim: [f64; 3]) -> f64 {
    let back = cons_to_prim(&prim_to_cons(&prim, DEFAULT_GAMMA), DEFAULT_GAMMA).unwrap();
    prim.iter()
        .zip(back)
        .map(|(v, w)| (v - w).abs() / v.abs().max(1.0))
        .fold(0.0, f64::max)
}

/// Size, contiguity and determinism of the adaptive stencil of every cell.
pub fn adaptive_stencil_violation(cpd: &CpdMap, size: usize) -> Option<String> {
    let n = cpd.len();
    for i in 1..=n {
        let s = adaptive_stencil(i, n, size, cpd);
        if s.len() != size {
            return Some(format!("cell {i}: {} members, expected {size}", s.len()));
        }
        if !s.is_contiguous() || s.members().contains(&i) {
            return Some(format!("cell {i}: members {:?} not a contiguous run around the cell", s.members()));
        }
        if s.members().iter().any(|&j| j < 1 || j > n) {
            return Some(format!("cell {i}: members {:?} leave the mesh", s.members()));
        }
        if adaptive_stencil(i, n, size, cpd) != s {
            return Some(format!("cell {i}: stencil not deterministic"));
        }
    }
    None
}

/// Applies `detect_and_decrement` to a fixed candidate until the map stops
/// changing. Returns the number of applications, or the first violation of
/// componentwise monotonicity or of the `|cascade| · I` bound.
pub fn decrement_fixed_point(candidate: &FieldVector, start: &CpdMap) -> Result<usize, String> {
    let problem = advection_regular().problem;
    let n = candidate.n_cells();
    let mesh = Mesh::new(0.0, 1.0, n).unwrap();
    let cfg = DetectorConfig::default();
    let bound = cfg.cascade.len() * n;
    let mut cpd = start.clone();
    for applications in 1..=bound + 1 {
        let next = detect_and_decrement(candidate, &cpd, &cfg, &*problem, &mesh);
        if !next.le(&cpd) {
            return Err(format!("map increased: {:?} -> {:?}", cpd.as_slice(), next.as_slice()));
        }
        if next == cpd {
            return Ok(applications);
        }
        cpd = next;
    }
    Err(format!("no fixed point within {bound} applications"))
}

/// `|Σ_i G_i - (F_I - F_0 - h Σ S_i)|` relative to the largest term, under
/// centered degree-5 stencils.
pub fn telescoping_defect(problem: &dyn SteadyProblem, phi: &FieldVector, cpd: &CpdMap) -> f64 {
    let (a, b) = problem.domain();
    let n = phi.n_cells();
    let mesh = Mesh::new(a, b, n).unwrap();
    let op = ResidualOperator::new(problem, &mesh, cpd, &StencilMap::centered(n, 5).unwrap()).unwrap();
    let g = op.eval(phi).unwrap();
    let flux = op.interface_fluxes(phi).unwrap();
    let source = op.total_source();
    let nc = phi.n_components();
    (0..nc)
        .map(|c| {
            let sum: f64 = g.component(c).iter().sum();
            let expected = flux[n * nc + c] - flux[c] - source[c];
            let scale = flux.iter().skip(c).step_by(nc).map(|f| f.abs()).fold(source[c].abs(), f64::max).max(1.0);
            (sum - expected).abs() / scale
        })
        .fold(0.0, f64::max)
}

pub type FieldOnMesh = Box<dyn Fn(&Mesh) -> FieldVector>;

/// Benchmark problems for the telescoping check, with a smooth field each.
pub fn telescoping_problems() -> Vec<(std::sync::Arc<dyn SteadyProblem>, FieldOnMesh)> {
    let adv = advection_regular();
    let burgers = burgers_case();
    let euler = euler_case();
    let (ea, eb) = (euler.clone(), burgers.clone());
    vec![
        (adv.problem.clone(), Box::new(move |m: &Mesh| adv.exact_means(m))),
        (burgers.problem.clone(), Box::new(move |m: &Mesh| eb.initial_means(m))),
        (euler.problem.clone(), Box::new(move |m: &Mesh| ea.exact_means(m))),
    ]
}
