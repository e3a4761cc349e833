//! Discrete error norms against exact cell means and observed orders.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::FieldVector;
use crate::mesh::Mesh;

/// Per-component `E₁ = h Σ|φ_i - φ_i^ex|` and `E∞ = max|φ_i - φ_i^ex|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorNorms {
    pub e1: Vec<f64>,
    pub einf: Vec<f64>,
}

pub fn error_norms(phi: &FieldVector, exact: &FieldVector, mesh: &Mesh) -> ErrorNorms {
    let nc = phi.n_components();
    assert_eq!(nc, exact.n_components());
    let mut e1 = vec![0.0; nc];
    let mut einf = vec![0.0; nc];
    for c in 0..nc {
        for (a, b) in phi.component(c).iter().zip(exact.component(c)) {
            let e = (a - b).abs();
            e1[c] += e * mesh.h();
            einf[c] = f64::max(einf[c], e);
        }
    }
    ErrorNorms { e1, einf }
}

/// `E₁` restricted to the cells whose center lies in `[a, b)`.
pub fn region_e1(phi: &FieldVector, exact: &FieldVector, mesh: &Mesh, region: (f64, f64)) -> Vec<f64> {
    (0..phi.n_components())
        .map(|c| {
            mesh.cells()
                .filter(|&i| (region.0..region.1).contains(&mesh.center(i)))
                .map(|i| (phi.get(c, i) - exact.get(c, i)).abs() * mesh.h())
                .sum()
        })
        .collect()
}

/// Observed convergence rate between two meshes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    Rate(f64),
    /// One of the errors vanished.
    Exact,
}

impl Order {
    pub fn rate(self) -> Option<f64> {
        match self {
            Order::Rate(r) => Some(r),
            Order::Exact => None,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Rate(r) => write!(f, "{r:.2}"),
            Order::Exact => f.write_str("exact"),
        }
    }
}

/// `|log(E₁/E₂)| / |log(I₁/I₂)|` for `(error, cells)` pairs.
pub fn convergence_order(coarse: (f64, usize), fine: (f64, usize)) -> Result<Order> {
    let ((e1, n1), (e2, n2)) = (coarse, fine);
    if n1 == n2 || n1 == 0 || n2 == 0 {
        return Err(Error::InvalidRequest(format!("orders need two distinct meshes, got {n1} and {n2}")));
    }
    if !(e1.is_finite() && e2.is_finite()) || e1 < 0.0 || e2 < 0.0 {
        return Err(Error::InvalidRequest(format!("errors must be finite and non-negative, got {e1} and {e2}")));
    }
    if e1 == 0.0 || e2 == 0.0 {
        return Ok(Order::Exact);
    }
    Ok(Order::Rate((e1 / e2).ln().abs() / (n1 as f64 / n2 as f64).ln().abs()))
}
