//! Cell-mean storage for scalar and system unknowns.

/// Upper bound on the number of conserved components (Euler has three).
pub const MAX_COMPONENTS: usize = 3;

/// `n_components × I` matrix of cell means, stored component-major so that
/// each component is a contiguous slice indexed `i - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldVector {
    n_components: usize,
    n_cells: usize,
    data: Vec<f64>,
}

impl FieldVector {
    pub fn zeros(n_components: usize, n_cells: usize) -> Self {
        assert!((1..=MAX_COMPONENTS).contains(&n_components));
        Self {
            n_components,
            n_cells,
            data: vec![0.0; n_components * n_cells],
        }
    }

    pub fn from_components(components: Vec<Vec<f64>>) -> Self {
        let n_components = components.len();
        assert!((1..=MAX_COMPONENTS).contains(&n_components));
        let n_cells = components[0].len();
        assert!(components.iter().all(|c| c.len() == n_cells), "ragged components");
        Self {
            n_components,
            n_cells,
            data: components.into_iter().flatten().collect(),
        }
    }

    pub fn from_flat(n_components: usize, data: Vec<f64>) -> Self {
        assert!(n_components > 0 && data.len().is_multiple_of(n_components));
        Self {
            n_components,
            n_cells: data.len() / n_components,
            data,
        }
    }

    /// Builds a field from per-cell states, `state(i)` for `i = 1..=n_cells`.
    pub fn from_states<F: FnMut(usize) -> Vec<f64>>(n_components: usize, n_cells: usize, mut state: F) -> Self {
        let mut field = Self::zeros(n_components, n_cells);
        for i in 1..=n_cells {
            let s = state(i);
            debug_assert_eq!(s.len(), n_components);
            for (c, v) in s.into_iter().enumerate() {
                field.set(c, i, v);
            }
        }
        field
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, c: usize, i: usize) -> f64 {
        self.data[c * self.n_cells + i - 1]
    }

    pub fn set(&mut self, c: usize, i: usize, v: f64) {
        self.data[c * self.n_cells + i - 1] = v;
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.data[c * self.n_cells..(c + 1) * self.n_cells]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * self.n_cells..(c + 1) * self.n_cells]
    }

    /// Copies the state of cell `i` into the first `n_components` entries.
    pub fn state(&self, i: usize) -> [f64; MAX_COMPONENTS] {
        let mut s = [0.0; MAX_COMPONENTS];
        for (c, v) in s.iter_mut().enumerate().take(self.n_components) {
            *v = self.get(c, i);
        }
        s
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Flat index of `(c, i)` in [`Self::as_slice`].
    pub fn flat_index(&self, c: usize, i: usize) -> usize {
        c * self.n_cells + i - 1
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `max |self - other|` over all entries.
    pub fn max_abs_diff(&self, other: &FieldVector) -> f64 {
        assert_eq!(self.data.len(), other.data.len());
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}
