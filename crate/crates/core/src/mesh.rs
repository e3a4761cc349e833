//! Uniform 1D mesh and cell-mean quadrature.
//!
//! Cells are numbered `1..=I` and interfaces `0..=I`, where interface `k`
//! sits at `x_{k+1/2} = x_left + k h`. Cell `i` therefore occupies
//! `[interface(i - 1), interface(i)]`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    x_left: f64,
    x_right: f64,
    n_cells: usize,
    h: f64,
}

impl Mesh {
    pub fn new(x_left: f64, x_right: f64, n_cells: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::InvalidMesh("at least one cell is required".into()));
        }
        if !(x_left < x_right) || !x_left.is_finite() || !x_right.is_finite() {
            return Err(Error::InvalidMesh(format!(
                "domain [{x_left}, {x_right}] is empty or not finite"
            )));
        }
        Ok(Self {
            x_left,
            x_right,
            n_cells,
            h: (x_right - x_left) / n_cells as f64,
        })
    }

    pub fn x_left(&self) -> f64 {
        self.x_left
    }

    pub fn x_right(&self) -> f64 {
        self.x_right
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Center `x_i` of cell `i` (1-based).
    pub fn center(&self, i: usize) -> f64 {
        debug_assert!((1..=self.n_cells).contains(&i));
        self.x_left + (i as f64 - 0.5) * self.h
    }

    /// Coordinate of interface `k`, i.e. `x_{k+1/2}`, for `k = 0..=I`.
    pub fn interface(&self, k: usize) -> f64 {
        debug_assert!(k <= self.n_cells);
        if k == self.n_cells {
            // exact right end, free of accumulated rounding
            self.x_right
        } else {
            self.x_left + k as f64 * self.h
        }
    }

    /// `(x_{i-1/2}, x_{i+1/2})` for cell `i`.
    pub fn cell_bounds(&self, i: usize) -> (f64, f64) {
        (self.interface(i - 1), self.interface(i))
    }

    pub fn cells(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.n_cells
    }

    /// Index of the cell containing `x`; a point on an interface belongs to
    /// the cell on its right (except at `x_right`).
    pub fn locate(&self, x: f64) -> Option<usize> {
        if x < self.x_left || x > self.x_right {
            return None;
        }
        let k = ((x - self.x_left) / self.h).floor() as usize + 1;
        Some(k.min(self.n_cells))
    }
}

/// Five-point Gauss–Legendre rule on [-1, 1] (exact for degree 9).
pub(crate) const GAUSS5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

/// Three-point Gauss–Legendre rule on [-1, 1].
pub(crate) const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 0.555_555_555_555_555_6),
    (0.0, 0.888_888_888_888_888_8),
    (0.774_596_669_241_483_4, 0.555_555_555_555_555_6),
];

pub(crate) fn gauss_integral<F: Fn(f64) -> f64>(rule: &[(f64, f64)], f: &F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    half * rule.iter().map(|&(t, w)| w * f(mid + half * t)).sum::<f64>()
}

/// Mean of `f` over cell `i`, splitting the cell at every breakpoint that
/// falls strictly inside it and applying five-point Gauss–Legendre on each
/// piece. Breakpoints must be sorted.
pub fn cell_mean<F: Fn(f64) -> f64>(f: F, mesh: &Mesh, i: usize, breakpoints: &[f64]) -> f64 {
    let (a, b) = mesh.cell_bounds(i);
    let mut total = 0.0;
    let mut lo = a;
    for &bp in breakpoints.iter().filter(|&&bp| bp > a && bp < b) {
        total += gauss_integral(&GAUSS5, &f, lo, bp);
        lo = bp;
    }
    total += gauss_integral(&GAUSS5, &f, lo, b);
    total / mesh.h()
}

/// Cell means of `f` for every cell, in storage order.
pub fn cell_means<F: Fn(f64) -> f64>(f: F, mesh: &Mesh, breakpoints: &[f64]) -> Vec<f64> {
    mesh.cells().map(|i| cell_mean(&f, mesh, i, breakpoints)).collect()
}
