//! Uniform tensor-product grids over a d-rectangle.
//!
//! Multi-indices are zero-based: node `alpha` along axis `i` sits at
//! `a_i + alpha_i * h_i`, so index `0` and `J_i - 1` lie on the boundary.
//! Flat indices are row-major with axis 0 varying fastest.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// Smallest per-axis node count; the two-step stencil needs at least one
/// deep-interior node per axis and at most one eliminated ghost per side.
pub const MIN_NODES: usize = 5;

/// A point in at most [`MAX_DIM`] dimensions; only the first `dim` entries are
/// meaningful.
pub type Point = [f64; MAX_DIM];

/// The open box `(a_1, b_1) x ... x (a_d, b_d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DomainBox {
    pub fn new(lower: &[f64], upper: &[f64]) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidDomain(format!(
                "bounds must have equal, positive length (got {} and {})",
                lower.len(),
                upper.len()
            )));
        }
        if lower.len() > MAX_DIM {
            return Err(Error::InvalidDomain(format!(
                "dimension {} exceeds the supported maximum {MAX_DIM}",
                lower.len()
            )));
        }
        for (axis, (a, b)) in lower.iter().zip(upper).enumerate() {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::InvalidDomain(format!(
                    "axis {axis}: need finite a < b, got a = {a}, b = {b}"
                )));
            }
        }
        Ok(Self {
            lower: lower.to_vec(),
            upper: upper.to_vec(),
        })
    }

    /// `(a, b)^d`.
    pub fn cube(a: f64, b: f64, dim: usize) -> Result<Self> {
        Self::new(&vec![a; dim], &vec![b; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }
}

/// Zero-based multi-index into a [`Grid`].
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    dim: usize,
    comps: [usize; MAX_DIM],
}

impl MultiIndex {
    pub fn new(comps: &[usize]) -> Self {
        assert!(
            !comps.is_empty() && comps.len() <= MAX_DIM,
            "multi-index dimension must be in 1..={MAX_DIM}"
        );
        let mut c = [0; MAX_DIM];
        c[..comps.len()].copy_from_slice(comps);
        Self {
            dim: comps.len(),
            comps: c,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.comps[..self.dim]
    }

    pub fn get(&self, axis: usize) -> usize {
        self.as_slice()[axis]
    }

    fn with(&self, axis: usize, value: usize) -> Self {
        let mut out = *self;
        out.comps[axis] = value;
        out
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_slice())
    }
}

/// Side of an axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Lower,
    Upper,
}

impl Side {
    /// `-1` for the lower side, `+1` for the upper side.
    pub fn sign(self) -> isize {
        match self {
            Side::Lower => -1,
            Side::Upper => 1,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Lower => Side::Upper,
            Side::Upper => Side::Lower,
        }
    }
}

/// Membership of a boundary node in the set of nodes that carry an auxiliary
/// boundary condition: the node lies on the `side` face of `axis` and its
/// neighbour one step inward along `axis` is an interior node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GhostSite {
    pub axis: usize,
    pub side: Side,
}

impl GhostSite {
    /// Direction (as a signed unit step along `axis`) pointing into the domain.
    pub fn inward(&self) -> isize {
        -self.side.sign()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeClass {
    /// On the boundary. `ghost` is `Some` when the node carries an auxiliary
    /// condition (corners never do).
    Boundary { ghost: Option<GhostSite> },
    /// Interior, with a boundary node one step away along at least one axis.
    Ring,
    /// Interior and at least two steps from the boundary along every axis.
    DeepInterior,
}

impl NodeClass {
    pub fn is_boundary(&self) -> bool {
        matches!(self, NodeClass::Boundary { .. })
    }

    pub fn is_interior(&self) -> bool {
        !self.is_boundary()
    }
}

/// Result of moving a multi-index along one axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shifted {
    Node(MultiIndex),
    /// The target lies `beyond` steps past the `side` face of `axis`.
    Outside {
        axis: usize,
        side: Side,
        beyond: usize,
    },
}

/// Uniform tensor-product grid on the closure of a [`DomainBox`].
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    domain: DomainBox,
    counts: Vec<usize>,
    spacing: Vec<f64>,
    strides: Vec<usize>,
    len: usize,
}

impl Grid {
    pub fn new(domain: DomainBox, counts: &[usize]) -> Result<Self> {
        if counts.len() != domain.dim() {
            return Err(Error::InvalidGrid(format!(
                "{} node counts given for a {}-dimensional domain",
                counts.len(),
                domain.dim()
            )));
        }
        if let Some((axis, &n)) = counts.iter().enumerate().find(|(_, &n)| n < MIN_NODES) {
            return Err(Error::InvalidGrid(format!(
                "axis {axis} has {n} nodes; at least {MIN_NODES} are required"
            )));
        }
        let spacing = counts
            .iter()
            .zip(domain.lower().iter().zip(domain.upper()))
            .map(|(&n, (a, b))| (b - a) / (n - 1) as f64)
            .collect();
        let mut strides = Vec::with_capacity(counts.len());
        let mut len = 1usize;
        for &n in counts {
            strides.push(len);
            len = len
                .checked_mul(n)
                .ok_or_else(|| Error::InvalidGrid("node count overflows usize".into()))?;
        }
        Ok(Self {
            domain,
            counts: counts.to_vec(),
            spacing,
            strides,
            len,
        })
    }

    /// Square grid with the same node count on every axis.
    pub fn uniform(domain: DomainBox, nodes_per_axis: usize) -> Result<Self> {
        let counts = vec![nodes_per_axis; domain.dim()];
        Self::new(domain, &counts)
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Per-axis spacings `h_i`.
    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    /// `h = max_i h_i`.
    pub fn h(&self) -> f64 {
        self.spacing.iter().copied().fold(0.0, f64::max)
    }

    /// Total node count `J`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn check(&self, idx: &MultiIndex) -> Result<()> {
        if idx.dim() != self.dim()
            || idx.as_slice().iter().zip(&self.counts).any(|(&a, &n)| a >= n)
        {
            return Err(Error::IndexOutOfRange(format!(
                "{idx:?} on grid with counts {:?}",
                self.counts
            )));
        }
        Ok(())
    }

    pub fn flat(&self, idx: &MultiIndex) -> usize {
        idx.as_slice()
            .iter()
            .zip(&self.strides)
            .map(|(a, s)| a * s)
            .sum()
    }

    pub fn multi(&self, mut flat: usize) -> MultiIndex {
        debug_assert!(flat < self.len);
        let mut comps = [0; MAX_DIM];
        for (axis, &n) in self.counts.iter().enumerate() {
            comps[axis] = flat % n;
            flat /= n;
        }
        MultiIndex {
            dim: self.dim(),
            comps,
        }
    }

    /// All multi-indices in flat order.
    pub fn indices(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        (0..self.len).map(move |k| self.multi(k))
    }

    /// Node coordinate by the affine formula (no accumulated sums).
    pub fn coords(&self, idx: &MultiIndex) -> Point {
        let mut x = [0.0; MAX_DIM];
        for axis in 0..self.dim() {
            let a = idx.get(axis);
            x[axis] = if a + 1 == self.counts[axis] {
                self.domain.upper()[axis]
            } else {
                self.domain.lower()[axis] + a as f64 * self.spacing[axis]
            };
        }
        x
    }

    fn on_face(&self, idx: &MultiIndex, axis: usize) -> Option<Side> {
        let a = idx.get(axis);
        if a == 0 {
            Some(Side::Lower)
        } else if a + 1 == self.counts[axis] {
            Some(Side::Upper)
        } else {
            None
        }
    }

    pub fn is_boundary(&self, idx: &MultiIndex) -> bool {
        (0..self.dim()).any(|axis| self.on_face(idx, axis).is_some())
    }

    /// The boundary face one step away from an interior node along `axis`,
    /// if any.
    pub fn adjacent_face(&self, idx: &MultiIndex, axis: usize) -> Option<Side> {
        let a = idx.get(axis);
        if a == 1 {
            Some(Side::Lower)
        } else if a + 2 == self.counts[axis] {
            Some(Side::Upper)
        } else {
            None
        }
    }

    pub fn classify(&self, idx: &MultiIndex) -> Result<NodeClass> {
        self.check(idx)?;
        Ok(self.classify_unchecked(idx))
    }

    pub(crate) fn classify_unchecked(&self, idx: &MultiIndex) -> NodeClass {
        let faces: Vec<(usize, Side)> = (0..self.dim())
            .filter_map(|axis| self.on_face(idx, axis).map(|s| (axis, s)))
            .collect();
        match faces.as_slice() {
            [] => {
                if (0..self.dim()).any(|axis| self.adjacent_face(idx, axis).is_some()) {
                    NodeClass::Ring
                } else {
                    NodeClass::DeepInterior
                }
            }
            // On exactly one face: the inward neighbour is interior iff every
            // other coordinate is strictly inside.
            [(axis, side)] => NodeClass::Boundary {
                ghost: Some(GhostSite {
                    axis: *axis,
                    side: *side,
                }),
            },
            _ => NodeClass::Boundary { ghost: None },
        }
    }

    /// `idx + steps * e_axis`, or how far past the boundary it lands.
    pub fn shift(&self, idx: &MultiIndex, axis: usize, steps: isize) -> Shifted {
        let target = idx.get(axis) as isize + steps;
        let n = self.counts[axis] as isize;
        if target < 0 {
            Shifted::Outside {
                axis,
                side: Side::Lower,
                beyond: (-target) as usize,
            }
        } else if target >= n {
            Shifted::Outside {
                axis,
                side: Side::Upper,
                beyond: (target - n + 1) as usize,
            }
        } else {
            Shifted::Node(idx.with(axis, target as usize))
        }
    }

    /// Coordinate of the ghost point one step outside a boundary node that
    /// carries an auxiliary condition.
    pub fn ghost_coords(&self, idx: &MultiIndex, site: GhostSite) -> Point {
        let mut x = self.coords(idx);
        x[site.axis] += site.side.sign() as f64 * self.spacing[site.axis];
        x
    }
}

/// One real value per grid node, in flat order. Ghost values are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self {
            values: vec![value; grid.len()],
        }
    }

    pub fn from_fn(grid: &Grid, mut f: impl FnMut(&Point) -> f64) -> Self {
        Self {
            values: grid.indices().map(|idx| f(&grid.coords(&idx))).collect(),
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "grid function has {} values, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, grid: &Grid, idx: &MultiIndex) -> f64 {
        self.values[grid.flat(idx)]
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for GridFunction {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.values[k]
    }
}

impl std::ops::IndexMut<usize> for GridFunction {
    fn index_mut(&mut self, k: usize) -> &mut f64 {
        &mut self.values[k]
    }
}
