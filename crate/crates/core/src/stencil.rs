//! Reconstruction stencils, cell polynomial degree (CPD) maps and the degree
//! cascade.
//!
//! Centered stencils take `⌈d/2⌉` cells on each side and shift inward near a
//! boundary. Adaptive stencils grow greedily from the reference cell towards
//! the neighbour with the larger CPD value, so they drift away from cells
//! where the degree had to be lowered.

use std::fmt;

use crate::error::{Error, Result};

/// Number of neighbours required by a degree-`d` reconstruction: `2⌈d/2⌉`.
pub fn stencil_size(d: usize) -> usize {
    2 * d.div_ceil(2)
}

/// Strictly decreasing sequence of degrees ending at 0, e.g. `5 → 2 → 1 → 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cascade(Vec<usize>);

impl Cascade {
    pub fn new(degrees: Vec<usize>) -> Result<Self> {
        if degrees.last() != Some(&0) {
            return Err(Error::InvalidRequest("cascade must end at degree 0".into()));
        }
        if degrees.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidRequest(format!(
                "cascade {degrees:?} is not strictly decreasing"
            )));
        }
        Ok(Self(degrees))
    }

    /// Cascade starting at `d_max` that keeps the usual `2 → 1 → 0` tail.
    pub fn from_max(d_max: usize) -> Result<Self> {
        let mut degrees = vec![d_max];
        degrees.extend([2, 1, 0].into_iter().filter(|&d| d < d_max));
        Self::new(degrees)
    }

    pub fn max_degree(&self) -> usize {
        self.0[0]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, d: usize) -> bool {
        self.0.contains(&d)
    }

    /// Next entry below `d`; 0 stays 0.
    pub fn next_lower(&self, d: usize) -> usize {
        self.0.iter().copied().find(|&c| c < d).unwrap_or(0)
    }

    /// [`stencil_size`] restricted to the degrees of this cascade.
    pub fn stencil_size(&self, d: usize) -> Result<usize> {
        if self.contains(d) {
            Ok(stencil_size(d))
        } else {
            Err(Error::UnsupportedDegree(d))
        }
    }
}

impl Default for Cascade {
    fn default() -> Self {
        Self(vec![5, 2, 1, 0])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Stencil {
    cell: usize,
    members: Vec<usize>,
}

impl Stencil {
    /// Builds a stencil from arbitrary members; they are sorted and must not
    /// contain `cell`.
    pub fn new(cell: usize, mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        assert!(!members.contains(&cell), "stencil of cell {cell} contains the cell itself");
        Self { cell, members }
    }

    pub fn empty(cell: usize) -> Self {
        Self { cell, members: Vec::new() }
    }

    pub fn cell(&self) -> usize {
        self.cell
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn left_count(&self) -> usize {
        self.members.iter().filter(|&&j| j < self.cell).count()
    }

    pub fn right_count(&self) -> usize {
        self.members.len() - self.left_count()
    }

    /// `members ∪ {cell}` forms a contiguous index range.
    pub fn is_contiguous(&self) -> bool {
        let lo = self.cell - self.left_count();
        let hi = self.cell + self.right_count();
        (lo..=hi).filter(|&j| j != self.cell).eq(self.members.iter().copied())
    }
}

/// Centered stencil of the size required by degree `d`, shifted inward to
/// stay inside `1..=n_cells`.
pub fn centered_stencil(i: usize, d: usize, n_cells: usize) -> Result<Stencil> {
    let size = stencil_size(d);
    if size + 1 > n_cells {
        return Err(Error::MeshTooSmall { n_cells, size });
    }
    let half = size / 2;
    let mut lo = i as isize - half as isize;
    let mut hi = i as isize + half as isize;
    if lo < 1 {
        hi += 1 - lo;
        lo = 1;
    }
    if hi > n_cells as isize {
        lo -= hi - n_cells as isize;
        hi = n_cells as isize;
    }
    let members = (lo as usize..=hi as usize).filter(|&j| j != i).collect();
    Ok(Stencil { cell: i, members })
}

/// Greedy stencil growth driven by the CPD map: at every step the adjacent
/// candidate with the strictly larger degree wins; on a tie the left one is
/// taken while no more left than right cells have been taken. Hitting a
/// boundary fills the remainder from the other side.
pub fn adaptive_stencil(i: usize, n_cells: usize, size: usize, cpd: &CpdMap) -> Stencil {
    assert!(size < n_cells, "stencil of {size} neighbours needs more than {n_cells} cells");
    let mut members = Vec::with_capacity(size);
    let (mut left, mut right) = (i - 1, i + 1);
    let (mut taken_left, mut taken_right) = (0usize, 0usize);
    while members.len() < size {
        if left == 0 {
            members.extend(right..right + size - members.len());
            break;
        }
        if right == n_cells + 1 {
            let need = size - members.len();
            members.extend(left + 1 - need..=left);
            break;
        }
        let (dl, dr) = (cpd.degree(left), cpd.degree(right));
        if dl > dr || (dl == dr && taken_left <= taken_right) {
            members.push(left);
            left -= 1;
            taken_left += 1;
        } else {
            members.push(right);
            right += 1;
            taken_right += 1;
        }
    }
    Stencil::new(i, members)
}

/// The `stencil_size(d_eff)` members of `s` closest to its reference cell;
/// equal distances favour the side holding more members.
pub fn interface_substencil(s: &Stencil, d_eff: usize) -> Stencil {
    let n = stencil_size(d_eff);
    assert!(n <= s.len(), "sub-stencil of {n} cells requested from {} members", s.len());
    if n == s.len() {
        return s.clone();
    }
    let i = s.cell;
    let prefer_left = s.left_count() > s.right_count();
    let mut ranked = s.members.clone();
    ranked.sort_by_key(|&j| {
        let on_left = j < i;
        let favoured = on_left == prefer_left;
        (j.abs_diff(i), !favoured)
    });
    ranked.truncate(n);
    Stencil::new(i, ranked)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StencilMap(Vec<Stencil>);

impl StencilMap {
    pub fn new(stencils: Vec<Stencil>) -> Self {
        for (k, s) in stencils.iter().enumerate() {
            assert_eq!(s.cell, k + 1, "stencil map entry {} belongs to cell {}", k + 1, s.cell);
        }
        Self(stencils)
    }

    /// Centered stencils for degree `d` on every cell.
    pub fn centered(n_cells: usize, d: usize) -> Result<Self> {
        (1..=n_cells).map(|i| centered_stencil(i, d, n_cells)).collect::<Result<_>>().map(Self)
    }

    /// Adaptive stencils of `size` members for every cell.
    pub fn adaptive(cpd: &CpdMap, size: usize) -> Self {
        let n = cpd.len();
        Self((1..=n).map(|i| adaptive_stencil(i, n, size, cpd)).collect())
    }

    pub fn get(&self, i: usize) -> &Stencil {
        &self.0[i - 1]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Stencil> {
        self.0.iter()
    }
}

/// Per-cell polynomial degrees `d_1..d_I`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CpdMap(Vec<usize>);

impl CpdMap {
    pub fn new(degrees: Vec<usize>) -> Self {
        Self(degrees)
    }

    pub fn uniform(n_cells: usize, d: usize) -> Self {
        Self(vec![d; n_cells])
    }

    pub fn degree(&self, i: usize) -> usize {
        self.0[i - 1]
    }

    pub fn set(&mut self, i: usize, d: usize) {
        self.0[i - 1] = d;
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// `d_{i+1/2} = min(d_i, d_{i+1})` for interior interfaces.
    pub fn interface_degree(&self, i: usize) -> usize {
        self.degree(i).min(self.degree(i + 1))
    }

    /// Componentwise `self ≤ other`.
    pub fn le(&self, other: &CpdMap) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn total_degree(&self) -> usize {
        self.0.iter().sum()
    }

    /// Componentwise minimum.
    pub fn min(&self, other: &CpdMap) -> CpdMap {
        CpdMap(self.0.iter().zip(&other.0).map(|(a, b)| *a.min(b)).collect())
    }
}

/// Textual `(l, d, r)` encoding of one cell: its degree plus how many
/// stencil members lie on each side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellCode {
    pub cell: usize,
    pub left: usize,
    pub degree: usize,
    pub right: usize,
}

impl fmt::Display for CellCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.left, self.degree, self.right)
    }
}

/// `(l, d, r)` codes for every cell. The stencil counts are those of the
/// sub-stencil actually used at degree `d_i`.
pub fn encode_cells(cpd: &CpdMap, cs: &StencilMap) -> Vec<CellCode> {
    cs.iter()
        .map(|s| {
            let d = cpd.degree(s.cell());
            let sub = interface_substencil(s, d);
            CellCode {
                cell: s.cell(),
                left: sub.left_count(),
                degree: d,
                right: sub.right_count(),
            }
        })
        .collect()
}
