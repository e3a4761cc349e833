//! Physical and numerical fluxes for the three model problems, and the
//! algebra of Euler states.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::problem::{Boundaries, SourceTerm, SteadyProblem};

pub const DEFAULT_GAMMA: f64 = 1.4;

/// Upwind flux `u(x) φ₋` for a positive velocity field.
pub fn upwind_flux<U: Fn(f64) -> f64 + ?Sized>(left: f64, _right: f64, x: f64, velocity: &U) -> Result<f64> {
    let u = velocity(x);
    if !(u > 0.0) {
        return Err(Error::InvalidRequest(format!("upwind flux needs u > 0, got u({x}) = {u}")));
    }
    Ok(u * left)
}

/// Rusanov flux for `F(φ) = φ²/2`.
pub fn rusanov_flux(left: f64, right: f64, lambda: f64) -> f64 {
    debug_assert!(lambda >= 0.0);
    0.5 * (0.5 * left * left + 0.5 * right * right) - lambda * (right - left)
}

/// Conserved Euler state `(ρ, ρu, E)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerState {
    pub density: f64,
    pub momentum: f64,
    pub energy: f64,
    pub gamma: f64,
}

impl EulerState {
    pub fn from_conserved(u: &[f64], gamma: f64) -> Self {
        Self {
            density: u[0],
            momentum: u[1],
            energy: u[2],
            gamma,
        }
    }

    pub fn from_primitive(density: f64, velocity: f64, pressure: f64, gamma: f64) -> Self {
        Self {
            density,
            momentum: density * velocity,
            energy: 0.5 * density * velocity * velocity + pressure / (gamma - 1.0),
            gamma,
        }
    }

    pub fn conserved(&self) -> [f64; 3] {
        [self.density, self.momentum, self.energy]
    }

    pub fn velocity(&self) -> f64 {
        self.momentum / self.density
    }

    pub fn pressure(&self) -> f64 {
        (self.gamma - 1.0) * (self.energy - 0.5 * self.momentum * self.momentum / self.density)
    }

    pub fn sound_speed(&self) -> f64 {
        (self.gamma * self.pressure() / self.density).sqrt()
    }

    pub fn is_admissible(&self) -> bool {
        self.density > 0.0 && self.pressure() > 0.0
    }

    /// `F(U) = (ρu, ρu² + p, u(E + p))`.
    pub fn flux(&self) -> [f64; 3] {
        let u = self.velocity();
        let p = self.pressure();
        [self.momentum, self.momentum * u + p, u * (self.energy + p)]
    }
}

/// `(ρ, ρu, E) → (ρ, u, p)`.
pub fn cons_to_prim(u: &[f64], gamma: f64) -> Result<[f64; 3]> {
    if !(u[0] > 0.0) {
        return Err(Error::Inadmissible {
            x: f64::NAN,
            reason: format!("non-positive density {}", u[0]),
        });
    }
    let s = EulerState::from_conserved(u, gamma);
    Ok([s.density, s.velocity(), s.pressure()])
}

/// `(ρ, u, p) → (ρ, ρu, E)`.
pub fn prim_to_cons(v: &[f64], gamma: f64) -> [f64; 3] {
    EulerState::from_primitive(v[0], v[1], v[2], gamma).conserved()
}

/// HLL flux with the simple wave-speed estimates
/// `s₋ = min(u₋ - a₋, u₊ - a₊)` and `s₊ = max(u₋ + a₋, u₊ + a₊)`.
pub fn hll_flux(left: &EulerState, right: &EulerState) -> [f64; 3] {
    let (ul, ur) = (left.velocity(), right.velocity());
    let (al, ar) = (left.sound_speed(), right.sound_speed());
    let s_minus = (ul - al).min(ur - ar);
    let s_plus = (ul + al).max(ur + ar);
    let fl = left.flux();
    if s_minus >= 0.0 || left == right {
        return fl;
    }
    let fr = right.flux();
    if s_plus <= 0.0 {
        return fr;
    }
    assert!(s_plus > s_minus, "degenerate HLL wave speeds");
    let (ql, qr) = (left.conserved(), right.conserved());
    let inv = 1.0 / (s_plus - s_minus);
    std::array::from_fn(|c| (s_plus * fl[c] - s_minus * fr[c] + s_plus * s_minus * (qr[c] - ql[c])) * inv)
}

pub type VelocityField = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `d(u(x) φ)/dx = S` with upwind flux; requires `u > 0`.
#[derive(Clone)]
pub struct Advection {
    pub velocity: VelocityField,
    pub domain: (f64, f64),
    pub boundaries: Boundaries,
    pub source: SourceTerm,
}

impl fmt::Debug for Advection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Advection")
            .field("domain", &self.domain)
            .field("boundaries", &self.boundaries)
            .finish_non_exhaustive()
    }
}

impl SteadyProblem for Advection {
    fn n_components(&self) -> usize {
        1
    }

    fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn physical_flux(&self, state: &[f64], x: f64, out: &mut [f64]) {
        out[0] = (self.velocity)(x) * state[0];
    }

    fn numerical_flux(&self, left: &[f64], right: &[f64], _means: (&[f64], &[f64]), x: f64, out: &mut [f64]) -> Result<()> {
        out[0] = upwind_flux(left[0], right[0], x, &*self.velocity)?;
        Ok(())
    }

    fn source(&self) -> &SourceTerm {
        &self.source
    }

    fn boundaries(&self) -> &Boundaries {
        &self.boundaries
    }

    fn spectral_radius(&self, _state: &[f64], x: f64) -> f64 {
        (self.velocity)(x).abs()
    }

    fn is_affine(&self) -> bool {
        true
    }
}

/// `d(φ²/2)/dx = S` with the Rusanov flux, `λ = max(|φ_i|, |φ_{i+1}|)`.
#[derive(Debug, Clone)]
pub struct Burgers {
    pub domain: (f64, f64),
    pub boundaries: Boundaries,
    pub source: SourceTerm,
}

impl SteadyProblem for Burgers {
    fn n_components(&self) -> usize {
        1
    }

    fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn physical_flux(&self, state: &[f64], _x: f64, out: &mut [f64]) {
        out[0] = 0.5 * state[0] * state[0];
    }

    fn numerical_flux(&self, left: &[f64], right: &[f64], means: (&[f64], &[f64]), _x: f64, out: &mut [f64]) -> Result<()> {
        let lambda = means.0[0].abs().max(means.1[0].abs());
        out[0] = rusanov_flux(left[0], right[0], lambda);
        Ok(())
    }

    fn source(&self) -> &SourceTerm {
        &self.source
    }

    fn boundaries(&self) -> &Boundaries {
        &self.boundaries
    }

    fn spectral_radius(&self, state: &[f64], _x: f64) -> f64 {
        state[0].abs()
    }
}

/// Steady Euler equations with HLL flux. Admissibility is positivity of
/// density and pressure.
#[derive(Debug, Clone)]
pub struct Euler {
    pub gamma: f64,
    pub domain: (f64, f64),
    pub boundaries: Boundaries,
    pub source: SourceTerm,
}

impl SteadyProblem for Euler {
    fn n_components(&self) -> usize {
        3
    }

    fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn physical_flux(&self, state: &[f64], _x: f64, out: &mut [f64]) {
        out.copy_from_slice(&EulerState::from_conserved(state, self.gamma).flux());
    }

    fn numerical_flux(&self, left: &[f64], right: &[f64], _means: (&[f64], &[f64]), x: f64, out: &mut [f64]) -> Result<()> {
        let l = EulerState::from_conserved(left, self.gamma);
        let r = EulerState::from_conserved(right, self.gamma);
        for (side, s) in [("left", &l), ("right", &r)] {
            if !s.is_admissible() {
                return Err(Error::Inadmissible {
                    x,
                    reason: format!("{side} trace has ρ = {:.6e}, p = {:.6e}", s.density, s.pressure()),
                });
            }
        }
        out.copy_from_slice(&hll_flux(&l, &r));
        Ok(())
    }

    fn source(&self) -> &SourceTerm {
        &self.source
    }

    fn boundaries(&self) -> &Boundaries {
        &self.boundaries
    }

    fn admissible(&self, state: &[f64]) -> bool {
        EulerState::from_conserved(state, self.gamma).is_admissible()
    }

    fn checks_admissibility(&self) -> bool {
        true
    }

    fn spectral_radius(&self, state: &[f64], _x: f64) -> f64 {
        let s = EulerState::from_conserved(state, self.gamma);
        s.velocity().abs() + s.sound_speed()
    }
}
