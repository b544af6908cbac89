//! Difference operators on a [`Grid`].
//!
//! Operators that stay on the grid (`diff_sided`, `gradient_central`,
//! `laplacian_h`) read node values directly. Operators built on the two-step
//! stencil are assembled as [`StencilRow`]s: boundary nodes are replaced by
//! their Dirichlet data and ghost points are eliminated with the auxiliary
//! boundary condition, so every row is an affine function of interior values.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, MultiIndex, NodeClass, Shifted, Side};

/// Auxiliary condition imposed at boundary nodes to close the two-step
/// stencil.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryOperatorKind {
    /// `delta^2 U = 0` at the boundary node: linear extension through the
    /// boundary, ghost `= 2 g - U_in`.
    LinearExtension,
    /// `delta^2 U` at the boundary node equals `delta^2 U` at its inward
    /// neighbour: quadratic extension, ghost `= 3 g - 3 U_in + U_in2`.
    QuadraticExtension,
}

/// Affine function of interior node values: `constant + sum(coef * V[node])`.
///
/// Node indices are flat grid indices; boundary nodes never appear in
/// `terms`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StencilRow {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl StencilRow {
    pub fn apply(&self, v: &GridFunction) -> f64 {
        self.terms
            .iter()
            .fold(self.constant, |acc, &(k, c)| acc + c * v[k])
    }

    /// Coefficient multiplying `V[node]` (zero when absent).
    pub fn coefficient(&self, node: usize) -> f64 {
        self.terms
            .iter()
            .filter(|(k, _)| *k == node)
            .map(|(_, c)| c)
            .sum()
    }

    /// `self + scale * other`.
    pub fn axpy(&mut self, scale: f64, other: &StencilRow) {
        self.constant += scale * other.constant;
        self.terms
            .extend(other.terms.iter().map(|&(k, c)| (k, scale * c)));
        self.compact();
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.constant *= s;
        for t in &mut self.terms {
            t.1 *= s;
        }
        self
    }

    /// Merge duplicate nodes and drop exact zeros; terms end up sorted.
    pub(crate) fn compact(&mut self) {
        self.terms.sort_by_key(|t| t.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(self.terms.len());
        for &(k, c) in &self.terms {
            match out.last_mut() {
                Some(last) if last.0 == k => last.1 += c,
                _ => out.push((k, c)),
            }
        }
        out.retain(|t| t.1 != 0.0);
        self.terms = out;
    }
}

struct RowBuilder<'a> {
    grid: &'a Grid,
    g: &'a GridFunction,
    bc: BoundaryOperatorKind,
    row: StencilRow,
}

impl<'a> RowBuilder<'a> {
    fn new(grid: &'a Grid, g: &'a GridFunction, bc: BoundaryOperatorKind) -> Self {
        Self {
            grid,
            g,
            bc,
            row: StencilRow::default(),
        }
    }

    /// Add `coef * V(idx + offset e_axis)`, resolving boundary data and ghosts.
    fn add(&mut self, idx: &MultiIndex, axis: usize, offset: isize, coef: f64) -> Result<()> {
        match self.grid.shift(idx, axis, offset) {
            Shifted::Node(n) => {
                let k = self.grid.flat(&n);
                if self.grid.is_boundary(&n) {
                    self.row.constant += coef * self.g[k];
                } else {
                    self.row.terms.push((k, coef));
                }
                Ok(())
            }
            Shifted::Outside {
                side, beyond: 1, ..
            } => {
                // The boundary node one step inward from the ghost.
                let back = offset - side.sign();
                let b = match self.grid.shift(idx, axis, back) {
                    Shifted::Node(b) => b,
                    Shifted::Outside { .. } => unreachable!("ghost is one step outside"),
                };
                match self.grid.classify_unchecked(&b) {
                    NodeClass::Boundary { ghost: Some(site) } if site.axis == axis => {}
                    _ => return Err(Error::GhostReference(format!("{b:?} along axis {axis}"))),
                }
                let gb = self.g[self.grid.flat(&b)];
                let inward = -side.sign();
                match self.bc {
                    BoundaryOperatorKind::LinearExtension => {
                        self.row.constant += coef * 2.0 * gb;
                        self.add(&b, axis, inward, -coef)
                    }
                    BoundaryOperatorKind::QuadraticExtension => {
                        self.row.constant += coef * 3.0 * gb;
                        self.add(&b, axis, inward, -3.0 * coef)?;
                        self.add(&b, axis, 2 * inward, coef)
                    }
                }
            }
            Shifted::Outside { .. } => Err(Error::GhostReference(format!(
                "{idx:?} offset {offset} along axis {axis}"
            ))),
        }
    }

    fn finish(mut self) -> StencilRow {
        self.row.compact();
        self.row
    }
}

fn require_interior(grid: &Grid, idx: &MultiIndex) -> Result<NodeClass> {
    let class = grid.classify(idx)?;
    if class.is_boundary() {
        return Err(Error::BoundaryNode(format!("{idx:?}")));
    }
    Ok(class)
}

fn neighbour(grid: &Grid, v: &GridFunction, idx: &MultiIndex, axis: usize, steps: isize) -> Result<f64> {
    match grid.shift(idx, axis, steps) {
        Shifted::Node(n) => Ok(v.at(grid, &n)),
        Shifted::Outside { .. } => Err(Error::GhostReference(format!(
            "{idx:?} offset {steps} along axis {axis}"
        ))),
    }
}

/// Forward (`Side::Upper`) or backward (`Side::Lower`) difference along `axis`.
pub fn diff_sided(grid: &Grid, v: &GridFunction, idx: &MultiIndex, axis: usize, side: Side) -> Result<f64> {
    grid.check(idx)?;
    let h = grid.spacing()[axis];
    let here = v.at(grid, idx);
    let there = neighbour(grid, v, idx, axis, side.sign())?;
    Ok(match side {
        Side::Upper => (there - here) / h,
        Side::Lower => (here - there) / h,
    })
}

/// Central gradient `(V[a+e_i] - V[a-e_i]) / (2 h_i)`.
pub fn gradient_central(grid: &Grid, v: &GridFunction, idx: &MultiIndex) -> Result<Vec<f64>> {
    grid.check(idx)?;
    (0..grid.dim())
        .map(|axis| {
            let up = neighbour(grid, v, idx, axis, 1)?;
            let down = neighbour(grid, v, idx, axis, -1)?;
            Ok((up - down) / (2.0 * grid.spacing()[axis]))
        })
        .collect()
}

/// Central discrete Laplacian.
pub fn laplacian_h(grid: &Grid, v: &GridFunction, idx: &MultiIndex) -> Result<f64> {
    grid.check(idx)?;
    let centre = v.at(grid, idx);
    let mut sum = 0.0;
    for axis in 0..grid.dim() {
        let h = grid.spacing()[axis];
        let up = neighbour(grid, v, idx, axis, 1)?;
        let down = neighbour(grid, v, idx, axis, -1)?;
        sum += (up - 2.0 * centre + down) / (h * h);
    }
    Ok(sum)
}

/// Row of the central gradient component along `axis`, boundary values taken
/// from `g`.
pub fn gradient_row(grid: &Grid, g: &GridFunction, idx: &MultiIndex, axis: usize) -> Result<StencilRow> {
    require_interior(grid, idx)?;
    let c = 1.0 / (2.0 * grid.spacing()[axis]);
    let mut b = RowBuilder::new(grid, g, BoundaryOperatorKind::LinearExtension);
    b.add(idx, axis, 1, c)?;
    b.add(idx, axis, -1, -c)?;
    Ok(b.finish())
}

/// Row of the central discrete Laplacian, boundary values taken from `g`.
pub fn laplacian_row(grid: &Grid, g: &GridFunction, idx: &MultiIndex) -> Result<StencilRow> {
    require_interior(grid, idx)?;
    let mut b = RowBuilder::new(grid, g, BoundaryOperatorKind::LinearExtension);
    for axis in 0..grid.dim() {
        let w = 1.0 / grid.spacing()[axis].powi(2);
        b.add(idx, axis, 1, w)?;
        b.add(idx, axis, 0, -2.0 * w)?;
        b.add(idx, axis, -1, w)?;
    }
    Ok(b.finish())
}

/// Row of `-Delta_2h` (step `2 h_i` per axis) after ghost elimination.
pub fn staggered_laplacian_row(
    grid: &Grid,
    g: &GridFunction,
    idx: &MultiIndex,
    bc: BoundaryOperatorKind,
) -> Result<StencilRow> {
    require_interior(grid, idx)?;
    let mut b = RowBuilder::new(grid, g, bc);
    for axis in 0..grid.dim() {
        let w = 1.0 / (4.0 * grid.spacing()[axis].powi(2));
        b.add(idx, axis, 2, -w)?;
        b.add(idx, axis, 0, 2.0 * w)?;
        b.add(idx, axis, -2, -w)?;
    }
    Ok(b.finish())
}

/// Row of the numerical moment `(Delta_2h - Delta_h) V` after ghost
/// elimination. At deep-interior nodes this is the five-point fourth
/// difference scaled by `h_i^2 / 4`.
pub fn moment_row(grid: &Grid, g: &GridFunction, idx: &MultiIndex, bc: BoundaryOperatorKind) -> Result<StencilRow> {
    require_interior(grid, idx)?;
    let mut b = RowBuilder::new(grid, g, bc);
    for axis in 0..grid.dim() {
        let h2 = grid.spacing()[axis].powi(2);
        let wide = 1.0 / (4.0 * h2);
        let narrow = 1.0 / h2;
        b.add(idx, axis, 2, wide)?;
        b.add(idx, axis, -2, wide)?;
        b.add(idx, axis, 1, -narrow)?;
        b.add(idx, axis, -1, -narrow)?;
        b.add(idx, axis, 0, 2.0 * narrow - 2.0 * wide)?;
    }
    Ok(b.finish())
}

pub fn moment(
    grid: &Grid,
    v: &GridFunction,
    g: &GridFunction,
    idx: &MultiIndex,
    bc: BoundaryOperatorKind,
) -> Result<f64> {
    Ok(moment_row(grid, g, idx, bc)?.apply(v))
}

/// Row of the linear extrapolation `2 V[a +- e_i] - V[a +- 2 e_i]` toward
/// `side` along `axis`.
pub fn extrapolation_row(
    grid: &Grid,
    g: &GridFunction,
    idx: &MultiIndex,
    axis: usize,
    side: Side,
    bc: BoundaryOperatorKind,
) -> Result<StencilRow> {
    require_interior(grid, idx)?;
    let s = side.sign();
    let mut b = RowBuilder::new(grid, g, bc);
    b.add(idx, axis, s, 2.0)?;
    b.add(idx, axis, 2 * s, -1.0)?;
    Ok(b.finish())
}

pub fn extrapolation(
    grid: &Grid,
    v: &GridFunction,
    g: &GridFunction,
    idx: &MultiIndex,
    axis: usize,
    side: Side,
    bc: BoundaryOperatorKind,
) -> Result<f64> {
    Ok(extrapolation_row(grid, g, idx, axis, side, bc)?.apply(v))
}

/// Which side of the band, if any, a clamped value was pulled back from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clamp {
    None,
    Lower,
    Upper,
}

impl Clamp {
    pub fn active(self) -> bool {
        self != Clamp::None
    }
}

/// Lower and upper cutoff functions with `lower <= upper` at every node.
#[derive(Clone, Debug, PartialEq)]
pub struct CutoffBounds {
    lower: GridFunction,
    upper: GridFunction,
}

impl CutoffBounds {
    pub fn new(lower: GridFunction, upper: GridFunction) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::InvalidConfig("cutoff bounds differ in length".into()));
        }
        if let Some(k) = (0..lower.len()).find(|&k| !(lower[k] <= upper[k])) {
            return Err(Error::InvalidConfig(format!(
                "cutoff bounds cross at node {k}: {} > {}",
                lower[k], upper[k]
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> &GridFunction {
        &self.lower
    }

    pub fn upper(&self) -> &GridFunction {
        &self.upper
    }

    pub fn contains(&self, v: &GridFunction, slack: f64) -> bool {
        (0..v.len()).all(|k| v[k] >= self.lower[k] - slack && v[k] <= self.upper[k] + slack)
    }

    /// Clamp `value` into `[lower[node], upper[node]]`; the closed band keeps
    /// values that sit exactly on an edge.
    pub fn clamp(&self, value: f64, node: usize) -> (f64, Clamp) {
        clamp_value(value, self.lower[node], self.upper[node])
    }
}

pub fn clamp_value(value: f64, lower: f64, upper: f64) -> (f64, Clamp) {
    if value > upper {
        (upper, Clamp::Upper)
    } else if value < lower {
        (lower, Clamp::Lower)
    } else {
        (value, Clamp::None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DomainBox;
    use BoundaryOperatorKind::*;

    fn line(a: f64, b: f64, n: usize) -> Grid {
        Grid::new(DomainBox::new(&[a], &[b]).unwrap(), &[n]).unwrap()
    }

    fn idx1(a: usize) -> MultiIndex {
        MultiIndex::new(&[a])
    }

    #[test]
    fn sided_differences() {
        let g = line(-1.0, 1.0, 5);
        let v = GridFunction::from_fn(&g, |x| x[0]);
        for a in 1..4 {
            assert!((diff_sided(&g, &v, &idx1(a), 0, Side::Upper).unwrap() - 1.0).abs() < 1e-14);
            assert!((diff_sided(&g, &v, &idx1(a), 0, Side::Lower).unwrap() - 1.0).abs() < 1e-14);
        }
        let v = GridFunction::from_fn(&g, |x| x[0] * x[0]);
        assert!((diff_sided(&g, &v, &idx1(2), 0, Side::Upper).unwrap() - 0.5).abs() < 1e-15);
        assert!((diff_sided(&g, &v, &idx1(2), 0, Side::Lower).unwrap() + 0.5).abs() < 1e-15);
        let v = GridFunction::constant(&g, 3.0);
        assert_eq!(diff_sided(&g, &v, &idx1(2), 0, Side::Upper).unwrap(), 0.0);
        assert!(matches!(
            diff_sided(&g, &v, &idx1(0), 0, Side::Lower),
            Err(Error::GhostReference(_))
        ));
    }

    #[test]
    fn central_gradient() {
        // x^3 + cos(4x) at x = 0 with h = 0.1: (u(h) - u(-h)) / 2h = h^2
        let g = line(-0.5, 0.5, 11);
        let v = GridFunction::from_fn(&g, |x| x[0].powi(3) + (4.0 * x[0]).cos());
        let d = gradient_central(&g, &v, &idx1(5)).unwrap()[0];
        let h = 0.1f64;
        let brute = ((h.powi(3) + (4.0 * h).cos()) - (-h.powi(3) + (4.0 * h).cos())) / (2.0 * h);
        assert!((d - brute).abs() < 1e-14);
        assert!(d.abs() <= 1.1 * h * h);

        let v = GridFunction::from_fn(&g, |x| 3.0 * x[0] - 2.0);
        assert!((gradient_central(&g, &v, &idx1(3)).unwrap()[0] - 3.0).abs() < 1e-14);

        let sq = Grid::uniform(DomainBox::cube(-1.0, 1.0, 2).unwrap(), 21).unwrap();
        let v = GridFunction::from_fn(&sq, |x| (x[0] * x[1]).exp());
        let c = MultiIndex::new(&[10, 10]);
        let grad = gradient_central(&sq, &v, &c).unwrap();
        // neighbours along each axis have x*y = 0, so both components vanish
        assert!(grad[0].abs() < 1e-15 && grad[1].abs() < 1e-15);
        let c = MultiIndex::new(&[13, 10]);
        let grad = gradient_central(&sq, &v, &c).unwrap();
        let (x, h) = (0.3f64, 0.1f64);
        let exact_y = x; // d/dy e^{xy} at y = 0
        let brute_y = ((x * h).exp() - (-x * h).exp()) / (2.0 * h);
        assert!((grad[1] - brute_y).abs() < 1e-14);
        assert!((grad[1] - exact_y).abs() < 0.01 * h * h * 10.0);
        assert!(grad[0].abs() < 1e-15);
    }

    #[test]
    fn discrete_laplacian() {
        let g = line(-1.0, 1.0, 9);
        let v = GridFunction::from_fn(&g, |x| x[0] * x[0]);
        for a in 1..8 {
            assert!((laplacian_h(&g, &v, &idx1(a)).unwrap() - 2.0).abs() < 1e-12);
        }
        let sq = Grid::uniform(DomainBox::cube(-1.0, 1.0, 2).unwrap(), 7).unwrap();
        let v = GridFunction::from_fn(&sq, |x| x[0] * x[0] + x[1] * x[1]);
        let w = GridFunction::from_fn(&sq, |x| 2.0 * x[0] - x[1]);
        for idx in sq.indices().filter(|i| !sq.is_boundary(i)) {
            assert!((laplacian_h(&sq, &v, &idx).unwrap() - 4.0).abs() < 1e-12);
            assert!(laplacian_h(&sq, &w, &idx).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn moment_examples() {
        let g = line(-1.0, 1.0, 9);
        let c = GridFunction::constant(&g, 2.5);
        for bc in [LinearExtension, QuadraticExtension] {
            for a in 1..8 {
                assert!(moment(&g, &c, &c, &idx1(a), bc).unwrap().abs() < 1e-12);
            }
        }
        // fourth difference of x^4 is 24 h^4, so the moment is 6 h^2
        let v = GridFunction::from_fn(&g, |x| x[0].powi(4));
        let h = g.h();
        for a in 2..7 {
            let m = moment(&g, &v, &v, &idx1(a), LinearExtension).unwrap();
            assert!((m - 6.0 * h * h).abs() < 1e-12, "{a}: {m}");
        }
        let q = GridFunction::from_fn(&g, |x| x[0] * x[0] - 0.3 * x[0] + 1.0);
        assert!(moment(&g, &q, &q, &idx1(1), QuadraticExtension).unwrap().abs() < 1e-11);
        assert!(moment(&g, &q, &q, &idx1(7), QuadraticExtension).unwrap().abs() < 1e-11);
        assert!(matches!(
            moment(&g, &q, &q, &idx1(0), QuadraticExtension),
            Err(Error::BoundaryNode(_))
        ));
    }

    #[test]
    fn ring_moment_rows_match_closed_forms() {
        let g = line(0.0, 1.0, 7);
        let h2 = g.h() * g.h();
        let mut data = GridFunction::zeros(&g);
        data[0] = 0.7;
        data[6] = -0.4;
        let lin = moment_row(&g, &data, &idx1(1), LinearExtension).unwrap();
        assert_eq!(lin.terms.len(), 3);
        assert!((lin.coefficient(1) - 5.0 / (4.0 * h2)).abs() < 1e-9);
        assert!((lin.coefficient(2) + 4.0 / (4.0 * h2)).abs() < 1e-9);
        assert!((lin.coefficient(3) - 1.0 / (4.0 * h2)).abs() < 1e-9);
        assert!((lin.constant + 2.0 * 0.7 / (4.0 * h2)).abs() < 1e-9);

        let quad = moment_row(&g, &data, &idx1(1), QuadraticExtension).unwrap();
        assert!((quad.coefficient(1) - 3.0 / (4.0 * h2)).abs() < 1e-9);
        assert!((quad.coefficient(2) + 3.0 / (4.0 * h2)).abs() < 1e-9);
        assert!((quad.coefficient(3) - 1.0 / (4.0 * h2)).abs() < 1e-9);
        assert!((quad.constant + 0.7 / (4.0 * h2)).abs() < 1e-9);

        // mirrored on the right
        let quad = moment_row(&g, &data, &idx1(5), QuadraticExtension).unwrap();
        assert!((quad.coefficient(5) - 3.0 / (4.0 * h2)).abs() < 1e-9);
        assert!((quad.coefficient(4) + 3.0 / (4.0 * h2)).abs() < 1e-9);
        assert!((quad.coefficient(3) - 1.0 / (4.0 * h2)).abs() < 1e-9);
        assert!((quad.constant - 0.4 / (4.0 * h2)).abs() < 1e-9);
    }

    #[test]
    fn staggered_rows() {
        let g = line(0.0, 1.0, 9);
        let w = 1.0 / (4.0 * g.h() * g.h());
        let mut data = GridFunction::zeros(&g);
        data[0] = 1.5;
        let deep = staggered_laplacian_row(&g, &data, &idx1(4), LinearExtension).unwrap();
        assert_eq!(deep.terms, vec![(2, -w), (4, 2.0 * w), (6, -w)]);
        assert_eq!(deep.constant, 0.0);

        let lin = staggered_laplacian_row(&g, &data, &idx1(1), LinearExtension).unwrap();
        assert_eq!(lin.terms.len(), 2);
        assert!((lin.coefficient(1) - 3.0 * w).abs() < 1e-9);
        assert!((lin.coefficient(3) + w).abs() < 1e-9);
        assert!((lin.constant + 2.0 * 1.5 * w).abs() < 1e-9);

        let quad = staggered_laplacian_row(&g, &data, &idx1(1), QuadraticExtension).unwrap();
        assert_eq!(quad.terms.len(), 3);
        assert!((quad.coefficient(1) - 5.0 * w).abs() < 1e-9);
        assert!((quad.coefficient(2) + w).abs() < 1e-9);
        assert!((quad.coefficient(3) + w).abs() < 1e-9);
        assert!((quad.constant + 3.0 * 1.5 * w).abs() < 1e-9);
    }

    #[test]
    fn extrapolation_examples() {
        let g = line(-1.0, 1.0, 9);
        let v = GridFunction::from_fn(&g, |x| 0.5 * x[0] + 0.25);
        for bc in [LinearExtension, QuadraticExtension] {
            for a in 1..8 {
                for side in [Side::Lower, Side::Upper] {
                    let l = extrapolation(&g, &v, &v, &idx1(a), 0, side, bc).unwrap();
                    assert!((l - v[a]).abs() < 1e-13);
                }
            }
        }
        let mut v = GridFunction::constant(&g, 1.0);
        v[5] = 3.0;
        v[6] = 1.0;
        assert!((extrapolation(&g, &v, &v, &idx1(4), 0, Side::Upper, LinearExtension).unwrap() - 5.0).abs() < 1e-14);

        // ring node, linear extension: the extrapolation reproduces the centre
        let mut v = GridFunction::from_fn(&g, |x| (3.0 * x[0]).sin());
        let data = {
            let mut d = GridFunction::zeros(&g);
            d[0] = 0.9;
            d[8] = -0.2;
            d
        };
        v[0] = 100.0; // boundary entries of V are never read
        let l = extrapolation(&g, &v, &data, &idx1(1), 0, Side::Lower, LinearExtension).unwrap();
        assert!((l - v[1]).abs() < 1e-14);
        let l = extrapolation(&g, &v, &data, &idx1(1), 0, Side::Lower, QuadraticExtension).unwrap();
        assert!((l - (3.0 * v[1] - v[2] - 0.9)).abs() < 1e-13);
        let l = extrapolation(&g, &v, &data, &idx1(7), 0, Side::Upper, QuadraticExtension).unwrap();
        assert!((l - (3.0 * v[7] - v[6] + 0.2)).abs() < 1e-13);
        // neighbour on the boundary, second node inside
        let l = extrapolation(&g, &v, &data, &idx1(2), 0, Side::Lower, LinearExtension).unwrap();
        assert!((l - (2.0 * v[1] - 0.9)).abs() < 1e-13);
    }

    #[test]
    fn clamp_examples() {
        assert_eq!(clamp_value(0.5, 0.0, 1.0), (0.5, Clamp::None));
        assert_eq!(clamp_value(2.0, 0.0, 1.0), (1.0, Clamp::Upper));
        assert_eq!(clamp_value(-3.0, 0.0, 1.0), (0.0, Clamp::Lower));
        assert_eq!(clamp_value(0.0, 0.0, 1.0), (0.0, Clamp::None));
        assert_eq!(clamp_value(1.0, 0.0, 1.0), (1.0, Clamp::None));

        let g = line(0.0, 1.0, 5);
        let lo = GridFunction::constant(&g, 0.0);
        let hi = GridFunction::constant(&g, 1.0);
        assert!(CutoffBounds::new(hi.clone(), lo.clone()).is_err());
        let b = CutoffBounds::new(lo, hi).unwrap();
        assert_eq!(b.clamp(2.0, 3), (1.0, Clamp::Upper));
    }
}
