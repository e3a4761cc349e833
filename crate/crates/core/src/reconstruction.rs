//! Conservative least-squares polynomial reconstruction.
//!
//! A reconstruction of degree `d` on cell `i` has the form
//!
//! ```text
//! p(x) = φ_i + Σ_{k=1..d} R_k ((x - x_i)^k - X_k),   X_k = (1/h) ∫_{K_i} (x - x_i)^k dx
//! ```
//!
//! so its mean over `K_i` is `φ_i` for every choice of coefficients. The
//! coefficients minimise the squared mismatch between the means of `p` over
//! the stencil cells and the data there.
//!
//! Internally everything is expressed in the normalised variable
//! `t = (x - x_i) / h`: on a uniform mesh the least-squares matrix then only
//! depends on the stencil offsets `j - i`, and monomial means over cells are
//! available in closed form.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Relative pivot threshold below which the triangular factor is declared
/// singular.
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ReconPoly {
    pub cell: usize,
    pub center: f64,
    pub degree: usize,
    pub mean: f64,
    /// `R_{i,1..d}` in physical units.
    pub coeffs: Vec<f64>,
    /// `X_{i,1..d}` in physical units.
    pub moments: Vec<f64>,
}

impl ReconPoly {
    pub fn eval(&self, x: f64) -> f64 {
        let s = x - self.center;
        let mut pow = 1.0;
        let mut value = self.mean;
        for (r, m) in self.coeffs.iter().zip(&self.moments) {
            pow *= s;
            value += r * (pow - m);
        }
        value
    }
}

pub fn eval_poly(p: &ReconPoly, x: f64) -> f64 {
    p.eval(x)
}

/// `(1/h) ∫_{K_i} (x - x_i)^k dx` in normalised units: zero for odd `k`,
/// `(1/2)^k / (k + 1)` for even `k`.
fn unit_moment(k: usize) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        0.5f64.powi(k as i32) / (k + 1) as f64
    }
}

/// Mean of `t^k` over the unit cell centred at integer offset `m`.
fn offset_monomial_mean(m: f64, k: usize) -> f64 {
    let e = (k + 1) as i32;
    ((m + 0.5).powi(e) - (m - 0.5).powi(e)) / (k + 1) as f64
}

/// `X_{i,k}` for `k = 1..=d`.
pub fn cell_moments(mesh: &Mesh, _i: usize, d: usize) -> Vec<f64> {
    let h = mesh.h();
    (1..=d).map(|k| unit_moment(k) * h.powi(k as i32)).collect()
}

/// Normalised design matrix: row `j` holds the means over stencil cell `j` of
/// the basis functions `t^k - X_k`.
fn design_matrix(d: usize, offsets: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(offsets.len(), d, |row, col| {
        let k = col + 1;
        offset_monomial_mean(offsets[row], k) - unit_moment(k)
    })
}

/// Thin QR of the design matrix, with a rank check.
struct Factored {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
}

fn factor(d: usize, offsets: &[f64]) -> Result<Factored> {
    if offsets.len() < d {
        return Err(Error::Singular(format!(
            "degree {d} needs at least {d} stencil cells, got {}",
            offsets.len()
        )));
    }
    let qr = design_matrix(d, offsets).qr();
    let r = qr.r();
    let scale = (0..d).map(|k| r[(k, k)].abs()).fold(0.0, f64::max);
    for k in 0..d {
        if !(r[(k, k)].abs() > RANK_TOL * scale) {
            return Err(Error::Singular(format!(
                "rank-deficient design matrix for degree {d} on offsets {offsets:?}"
            )));
        }
    }
    Ok(Factored { q: qr.q(), r })
}

fn offsets_of(i: usize, stencil: &[usize]) -> Vec<f64> {
    stencil.iter().map(|&j| j as f64 - i as f64).collect()
}

/// Least-squares reconstruction of degree `d` for cell `i` (1-based) from the
/// cell means `phi` (indexed `phi[j - 1]`) on `stencil`.
pub fn fit_polynomial(phi: &[f64], mesh: &Mesh, i: usize, d: usize, stencil: &[usize]) -> Result<ReconPoly> {
    let mean = phi[i - 1];
    let center = mesh.center(i);
    if d == 0 {
        return Ok(ReconPoly {
            cell: i,
            center,
            degree: 0,
            mean,
            coeffs: Vec::new(),
            moments: Vec::new(),
        });
    }
    debug_assert!(!stencil.contains(&i), "stencil of cell {i} contains the cell itself");
    let Factored { q, r } = factor(d, &offsets_of(i, stencil))?;
    let rhs = DVector::from_iterator(stencil.len(), stencil.iter().map(|&j| phi[j - 1] - mean));
    let qtb = q.transpose() * rhs;
    let scaled = r
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
    let h = mesh.h();
    Ok(ReconPoly {
        cell: i,
        center,
        degree: d,
        mean,
        coeffs: (0..d).map(|k| scaled[k] / h.powi(k as i32 + 1)).collect(),
        moments: cell_moments(mesh, i, d),
    })
}

/// Linear weights `w` such that the degree-`d` reconstruction evaluated at
/// normalised position `t` equals `phi_i + Σ_j w_j (phi_j - phi_i)` over the
/// stencil offsets. Independent of the data and of `h`.
pub(crate) fn point_weights(d: usize, offsets: &[f64], t: f64) -> Result<Vec<f64>> {
    if d == 0 {
        return Ok(vec![0.0; offsets.len()]);
    }
    let Factored { q, r } = factor(d, offsets)?;
    let b = DVector::from_fn(d, |k, _| t.powi(k as i32 + 1) - unit_moment(k + 1));
    let y = r
        .transpose()
        .solve_lower_triangular(&b)
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
    Ok((q * y).iter().copied().collect())
}
