//! A-posteriori validity chain and cascade decrementing.
//!
//! A candidate cell goes through
//!
//! 1. **PAD**: physical admissibility of the cell mean (Euler only); failure
//!    rejects the cell.
//! 2. **ED**: no local extremum, `(φ_i - φ_{i-1})(φ_{i+1} - φ_i) > 0`, accepts.
//!    Boundary cells are accepted here.
//! 3. **PD**: all local curvatures below `ε_PD` in magnitude accepts.
//! 4. **LOD**: curvatures of both signs around the cell rejects.
//! 5. **SD**: accepts when the smallest and largest curvature magnitudes are
//!    comparable with respect to `ε_SD`, rejects otherwise.
//!
//! Curvatures are undivided second differences
//! `χ_j = φ_{j+1} - 2φ_j + φ_{j-1}` on the interior cells among
//! `{i-1, i, i+1}`. For systems only the first component is inspected by
//! ED/PD/LOD/SD.

use crate::field::FieldVector;
use crate::mesh::Mesh;
use crate::problem::SteadyProblem;
use crate::stencil::{Cascade, CpdMap};

/// Acceptance rule used by the smoothness detector on the curvature ratio
/// `min|χ| / max|χ|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SmoothnessRule {
    /// `ratio ≥ ε_SD`.
    #[default]
    Ratio,
    /// `ratio ≥ 1 - ε_SD`.
    OneMinus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    /// Plateau tolerance; `None` means the mesh size `h`.
    pub eps_pd: Option<f64>,
    pub eps_sd: f64,
    pub smoothness: SmoothnessRule,
    pub cascade: Cascade,
    /// Run PAD on cell means when the problem defines admissibility.
    pub pad_enabled: bool,
    /// Component inspected by ED/PD/LOD/SD.
    pub component: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            eps_pd: None,
            eps_sd: 0.25,
            smoothness: SmoothnessRule::Ratio,
            cascade: Cascade::default(),
            pad_enabled: true,
            component: 0,
        }
    }
}

impl DetectorConfig {
    pub fn plateau_tolerance(&self, mesh: &Mesh) -> f64 {
        self.eps_pd.unwrap_or(mesh.h())
    }
}

/// Which link of the chain settled the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    Pad,
    Ed,
    Pd,
    Lod,
    Sd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub valid: bool,
    pub by: Detector,
}

impl Verdict {
    fn valid(by: Detector) -> Self {
        Self { valid: true, by }
    }

    fn invalid(by: Detector) -> Self {
        Self { valid: false, by }
    }
}

/// `(min χ_j, max χ_j)` over the interior cells `j ∈ {i-1, i, i+1}`;
/// `phi` is indexed `phi[j - 1]`.
pub fn curvature_pair(phi: &[f64], i: usize) -> (f64, f64) {
    let n = phi.len();
    let lo = i.saturating_sub(1).max(2);
    let hi = (i + 1).min(n.saturating_sub(1));
    let mut pair: Option<(f64, f64)> = None;
    for j in lo..=hi {
        let chi = phi[j] - 2.0 * phi[j - 1] + phi[j - 2];
        pair = Some(match pair {
            None => (chi, chi),
            Some((a, b)) => (a.min(chi), b.max(chi)),
        });
    }
    pair.unwrap_or((0.0, 0.0))
}

/// Runs the detector chain on cell `i` of `candidate`.
pub fn classify_cell(candidate: &FieldVector, i: usize, cfg: &DetectorConfig, problem: &dyn SteadyProblem, mesh: &Mesh) -> Verdict {
    if cfg.pad_enabled && problem.checks_admissibility() {
        let state = candidate.state(i);
        let state = &state[..candidate.n_components()];
        if !state.iter().all(|v| v.is_finite()) || !problem.admissible(state) {
            return Verdict::invalid(Detector::Pad);
        }
    }
    let phi = candidate.component(cfg.component);
    if !phi[i - 1].is_finite() {
        return Verdict::invalid(Detector::Pad);
    }
    let n = phi.len();
    if i == 1 || i == n {
        return Verdict::valid(Detector::Ed);
    }
    let delta_minus = phi[i - 1] - phi[i - 2];
    let delta_plus = phi[i] - phi[i - 1];
    if delta_minus * delta_plus > 0.0 {
        return Verdict::valid(Detector::Ed);
    }
    let (chi_min, chi_max) = curvature_pair(phi, i);
    let (small, large) = {
        let (a, b) = (chi_min.abs(), chi_max.abs());
        (a.min(b), a.max(b))
    };
    if large <= cfg.plateau_tolerance(mesh) {
        return Verdict::valid(Detector::Pd);
    }
    if chi_min * chi_max < 0.0 {
        return Verdict::invalid(Detector::Lod);
    }
    let ratio = small / large;
    let threshold = match cfg.smoothness {
        SmoothnessRule::Ratio => cfg.eps_sd,
        SmoothnessRule::OneMinus => 1.0 - cfg.eps_sd,
    };
    if ratio >= threshold {
        Verdict::valid(Detector::Sd)
    } else {
        Verdict::invalid(Detector::Sd)
    }
}

pub fn cell_is_valid(candidate: &FieldVector, i: usize, cfg: &DetectorConfig, problem: &dyn SteadyProblem, mesh: &Mesh) -> bool {
    classify_cell(candidate, i, cfg, problem, mesh).valid
}

/// Every invalid cell with a positive degree moves one step down the
/// cascade; all other cells keep their degree.
pub fn detect_and_decrement(candidate: &FieldVector, cpd: &CpdMap, cfg: &DetectorConfig, problem: &dyn SteadyProblem, mesh: &Mesh) -> CpdMap {
    let mut next = cpd.clone();
    for i in mesh.cells() {
        let d = cpd.degree(i);
        if d > 0 && !cell_is_valid(candidate, i, cfg, problem, mesh) {
            next.set(i, cfg.cascade.next_lower(d));
        }
    }
    next
}
