//! Residual assembly for the Lax-Friedrichs, high-order and cutoff-modified
//! schemes.
//!
//! Every interior node gets its stencil rows built once from the grid
//! classification; evaluating a residual is then a handful of dot products
//! plus one Hamiltonian call. Boundary values are Dirichlet data and never
//! unknowns.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, MultiIndex, Point, Side};
use crate::operators::{
    extrapolation_row, gradient_row, laplacian_row, moment_row, BoundaryOperatorKind, Clamp, CutoffBounds,
    StencilRow,
};
use crate::problems::Problem;

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeConfig {
    /// Coefficient of the `h^2`-scaled viscosity.
    pub beta: f64,
    /// Moment and Lax-Friedrichs viscosity strength.
    pub gamma: f64,
    /// Exponent of `h` multiplying `gamma`.
    pub p: f64,
    pub bc: BoundaryOperatorKind,
    /// Band half-width multiplier: the band is `U_LF +- c h`.
    pub cutoff_c: f64,
}

impl SchemeConfig {
    /// `beta = 0`, `p = 1`, `c = 10`, and `gamma` 10 in 1D or 5 otherwise.
    pub fn for_dim(dim: usize) -> Self {
        Self {
            beta: 0.0,
            gamma: if dim == 1 { 10.0 } else { 5.0 },
            p: 1.0,
            bc: BoundaryOperatorKind::LinearExtension,
            cutoff_c: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0) {
            return Err(Error::InvalidConfig(format!("beta must be >= 0, got {}", self.beta)));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidConfig(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidConfig(format!("p must lie in [0, 1], got {}", self.p)));
        }
        if !(self.cutoff_c > 0.0) {
            return Err(Error::InvalidConfig(format!("c must be > 0, got {}", self.cutoff_c)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    LaxFriedrichs,
    HighOrder,
    Modified,
}

impl SchemeKind {
    pub fn label(self) -> &'static str {
        match self {
            SchemeKind::LaxFriedrichs => "lf",
            SchemeKind::HighOrder => "ho",
            SchemeKind::Modified => "mod",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lf" => Ok(SchemeKind::LaxFriedrichs),
            "ho" => Ok(SchemeKind::HighOrder),
            "mod" => Ok(SchemeKind::Modified),
            other => Err(Error::InvalidConfig(format!("unknown scheme `{other}`"))),
        }
    }
}

/// One clamp that fired while evaluating the modified residual.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClampEvent {
    pub node: usize,
    pub axis: usize,
    pub side: Side,
    pub clamp: Clamp,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CutoffReport {
    pub events: Vec<ClampEvent>,
}

impl CutoffReport {
    /// True when at least one extrapolation was clamped.
    pub fn active(&self) -> bool {
        !self.events.is_empty()
    }
}

#[derive(Clone, Debug)]
struct NodeRows {
    node: usize,
    x: Point,
    grad: Vec<StencilRow>,
    /// Every term of the residual that is linear in `V`.
    linear: StencilRow,
    /// `(L+, L-)` per axis; only built for the modified scheme.
    extrap: Vec<[StencilRow; 2]>,
}

/// A scheme instantiated on a grid: the residual map over interior unknowns.
#[derive(Clone)]
pub struct Discretization {
    problem: Problem,
    grid: Grid,
    config: SchemeConfig,
    kind: SchemeKind,
    bounds: Option<CutoffBounds>,
    boundary: GridFunction,
    rows: Vec<NodeRows>,
    unknown_of: Vec<Option<usize>>,
    /// `gamma h^p / (4 h_i^2)` per axis, the weight of each clamped term.
    extrap_weight: Vec<f64>,
}

impl fmt::Debug for Discretization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Discretization")
            .field("problem", &self.problem.name())
            .field("counts", &self.grid.counts())
            .field("kind", &self.kind)
            .field("config", &self.config)
            .finish()
    }
}

/// Dirichlet data on boundary nodes, zero elsewhere.
pub fn boundary_data(problem: &Problem, grid: &Grid) -> GridFunction {
    let mut g = GridFunction::zeros(grid);
    for (k, idx) in grid.indices().enumerate() {
        if grid.is_boundary(&idx) {
            let x = grid.coords(&idx);
            g[k] = problem.dirichlet(&x[..grid.dim()]);
        }
    }
    g
}

impl Discretization {
    pub fn new(
        problem: &Problem,
        grid: &Grid,
        config: &SchemeConfig,
        kind: SchemeKind,
        bounds: Option<CutoffBounds>,
    ) -> Result<Self> {
        config.validate()?;
        if problem.dim() != grid.dim() {
            return Err(Error::InvalidConfig(format!(
                "problem is {}-dimensional but the grid is {}-dimensional",
                problem.dim(),
                grid.dim()
            )));
        }
        if kind == SchemeKind::Modified {
            match &bounds {
                None => return Err(Error::InvalidConfig("the modified scheme needs cutoff bounds".into())),
                Some(b) if b.lower().len() != grid.len() => {
                    return Err(Error::InvalidConfig("cutoff bounds do not match the grid".into()))
                }
                _ => {}
            }
        }
        let d = grid.dim();
        let h = grid.h();
        let hp = h.powf(config.p);
        let inv_h2: Vec<f64> = grid.spacing().iter().map(|s| 1.0 / (s * s)).collect();
        let boundary = boundary_data(problem, grid);

        let mut rows = Vec::new();
        let mut unknown_of = vec![None; grid.len()];
        for (k, idx) in grid.indices().enumerate() {
            if grid.is_boundary(&idx) {
                continue;
            }
            unknown_of[k] = Some(rows.len());
            rows.push(build_rows(grid, &boundary, config, kind, &idx, hp, &inv_h2)?);
        }
        let extrap_weight = (0..d).map(|i| config.gamma * hp * inv_h2[i] / 4.0).collect();
        Ok(Self {
            problem: problem.clone(),
            grid: grid.clone(),
            config: config.clone(),
            kind,
            bounds,
            boundary,
            rows,
            unknown_of,
            extrap_weight,
        })
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn bounds(&self) -> Option<&CutoffBounds> {
        self.bounds.as_ref()
    }

    /// Dirichlet data on boundary nodes, zero on interior nodes.
    pub fn boundary(&self) -> &GridFunction {
        &self.boundary
    }

    /// Number of unknowns (interior nodes).
    pub fn unknowns(&self) -> usize {
        self.rows.len()
    }

    /// Flat grid index of unknown `k`.
    pub fn node_of(&self, k: usize) -> usize {
        self.rows[k].node
    }

    pub fn unknown_of(&self, node: usize) -> Option<usize> {
        self.unknown_of[node]
    }

    /// Overwrite boundary nodes of `v` with the Dirichlet data.
    pub fn impose_boundary(&self, v: &mut GridFunction) {
        for k in 0..v.len() {
            if self.unknown_of[k].is_none() {
                v[k] = self.boundary[k];
            }
        }
    }

    /// `v` restricted to the unknowns.
    pub fn gather(&self, v: &GridFunction) -> Vec<f64> {
        self.rows.iter().map(|r| v[r.node]).collect()
    }

    /// Write unknown values back into `v`.
    pub fn scatter(&self, values: &[f64], v: &mut GridFunction) {
        for (r, &x) in self.rows.iter().zip(values) {
            v[r.node] = x;
        }
    }

    fn eval(&self, v: &GridFunction, k: usize, events: Option<&mut Vec<ClampEvent>>) -> f64 {
        let r = &self.rows[k];
        let d = self.grid.dim();
        let mut q = [0.0; 3];
        for (i, row) in r.grad.iter().enumerate() {
            q[i] = row.apply(v);
        }
        let mut value = self.problem.hamiltonian(&q[..d], v[r.node], &r.x[..d]) + r.linear.apply(v);
        if let Some(bounds) = &self.bounds {
            if self.kind == SchemeKind::Modified {
                let mut events = events;
                for (axis, pair) in r.extrap.iter().enumerate() {
                    for (row, side) in pair.iter().zip([Side::Upper, Side::Lower]) {
                        let (l, clamp) = bounds.clamp(row.apply(v), r.node);
                        value -= self.extrap_weight[axis] * l;
                        if clamp.active() {
                            if let Some(ev) = events.as_deref_mut() {
                                ev.push(ClampEvent {
                                    node: r.node,
                                    axis,
                                    side,
                                    clamp,
                                });
                            }
                        }
                    }
                }
            }
        }
        value
    }

    /// Residual at unknown `k`.
    pub fn residual_at(&self, v: &GridFunction, k: usize) -> f64 {
        self.eval(v, k, None)
    }

    /// Residual at an interior multi-index.
    pub fn residual_at_index(&self, v: &GridFunction, idx: &MultiIndex) -> Result<f64> {
        self.grid.check(idx)?;
        let node = self.grid.flat(idx);
        let k = self.unknown_of[node].ok_or_else(|| Error::BoundaryNode(format!("{idx:?}")))?;
        Ok(self.residual_at(v, k))
    }

    /// Residual at every unknown, in unknown order.
    pub fn residual(&self, v: &GridFunction) -> Vec<f64> {
        (0..self.rows.len()).map(|k| self.eval(v, k, None)).collect()
    }

    pub fn residual_into(&self, v: &GridFunction, out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.eval(v, k, None);
        }
    }

    /// Residual at unknown `k` together with the clamps it triggered.
    pub fn residual_with_clamps(&self, v: &GridFunction, k: usize) -> (f64, Vec<ClampEvent>) {
        let mut events = Vec::new();
        let value = self.eval(v, k, Some(&mut events));
        (value, events)
    }

    /// Every clamp that fires when the modified residual is evaluated at `v`.
    /// Empty for the other schemes.
    pub fn cutoff_report(&self, v: &GridFunction) -> CutoffReport {
        let mut events = Vec::new();
        for k in 0..self.rows.len() {
            self.eval(v, k, Some(&mut events));
        }
        CutoffReport { events }
    }

    /// Nonzero stencil columns (unknown indices) of row `k`, sorted.
    pub fn pattern(&self, k: usize) -> Vec<usize> {
        let r = &self.rows[k];
        let mut cols: Vec<usize> = std::iter::once(r.node)
            .chain(r.grad.iter().flat_map(|row| row.terms.iter().map(|t| t.0)))
            .chain(r.linear.terms.iter().map(|t| t.0))
            .chain(r.extrap.iter().flatten().flat_map(|row| row.terms.iter().map(|t| t.0)))
            .filter_map(|n| self.unknown_of[n])
            .collect();
        cols.sort_unstable();
        cols.dedup();
        cols
    }

    /// Jacobian entries `(row, col, value)` from the problem's generalized
    /// derivative, or `None` when the problem does not supply one. Clamped
    /// extrapolations contribute nothing.
    pub fn jacobian_triplets(&self, v: &GridFunction) -> Option<Vec<(usize, usize, f64)>> {
        if !self.problem.has_derivative() {
            return None;
        }
        let d = self.grid.dim();
        let mut out = Vec::new();
        let mut acc = StencilRow::default();
        let mut q = [0.0; 3];
        let mut dq = [0.0; 3];
        for (k, r) in self.rows.iter().enumerate() {
            for (i, row) in r.grad.iter().enumerate() {
                q[i] = row.apply(v);
            }
            let du = self.problem.derivative(&q[..d], v[r.node], &r.x[..d], &mut dq[..d])?;
            acc.terms.clear();
            acc.constant = 0.0;
            acc.terms.push((r.node, du));
            acc.terms.extend(r.linear.terms.iter().copied());
            for (i, row) in r.grad.iter().enumerate() {
                acc.terms.extend(row.terms.iter().map(|&(n, c)| (n, dq[i] * c)));
            }
            if let (SchemeKind::Modified, Some(bounds)) = (self.kind, &self.bounds) {
                for (axis, pair) in r.extrap.iter().enumerate() {
                    for row in pair {
                        if !bounds.clamp(row.apply(v), r.node).1.active() {
                            let w = -self.extrap_weight[axis];
                            acc.terms.extend(row.terms.iter().map(|&(n, c)| (n, w * c)));
                        }
                    }
                }
            }
            acc.compact();
            for &(n, c) in &acc.terms {
                if let Some(col) = self.unknown_of[n] {
                    out.push((k, col, c));
                }
            }
        }
        Some(out)
    }
}

fn build_rows(
    grid: &Grid,
    boundary: &GridFunction,
    config: &SchemeConfig,
    kind: SchemeKind,
    idx: &MultiIndex,
    hp: f64,
    inv_h2: &[f64],
) -> Result<NodeRows> {
    let d = grid.dim();
    let h = grid.h();
    let node = grid.flat(idx);
    let grad = (0..d)
        .map(|axis| gradient_row(grid, boundary, idx, axis))
        .collect::<Result<Vec<_>>>()?;
    let lap = laplacian_row(grid, boundary, idx)?;
    let mut linear = lap.clone().scaled(-config.beta * h * h);
    let mut extrap = Vec::new();
    match kind {
        SchemeKind::LaxFriedrichs => linear.axpy(-0.5 * config.gamma * hp, &lap),
        SchemeKind::HighOrder => linear.axpy(config.gamma * hp, &moment_row(grid, boundary, idx, config.bc)?),
        SchemeKind::Modified => {
            linear.axpy(-0.5 * config.gamma * hp, &lap);
            let diag = StencilRow {
                terms: vec![(node, 1.0)],
                constant: 0.0,
            };
            linear.axpy(0.5 * config.gamma * hp * inv_h2.iter().sum::<f64>(), &diag);
            for axis in 0..d {
                extrap.push([
                    extrapolation_row(grid, boundary, idx, axis, Side::Upper, config.bc)?,
                    extrapolation_row(grid, boundary, idx, axis, Side::Lower, config.bc)?,
                ]);
            }
        }
    }
    Ok(NodeRows {
        node,
        x: grid.coords(idx),
        grad,
        linear,
        extrap,
    })
}

/// Pointwise Lax-Friedrichs residual `H(grad V, V, x) - beta h^2 Lap V - (gamma/2) h^p Lap V`.
pub fn residual_lf(problem: &Problem, grid: &Grid, cfg: &SchemeConfig, v: &GridFunction, idx: &MultiIndex) -> Result<f64> {
    pointwise(problem, grid, cfg, SchemeKind::LaxFriedrichs, None, v, idx)
}

/// Pointwise high-order residual `H(grad V, V, x) - beta h^2 Lap V + gamma h^p (Delta_2h - Delta_h) V`.
pub fn residual_ho(problem: &Problem, grid: &Grid, cfg: &SchemeConfig, v: &GridFunction, idx: &MultiIndex) -> Result<f64> {
    pointwise(problem, grid, cfg, SchemeKind::HighOrder, None, v, idx)
}

/// Pointwise modified residual and the clamps it triggered.
pub fn residual_modified(
    problem: &Problem,
    grid: &Grid,
    cfg: &SchemeConfig,
    bounds: &CutoffBounds,
    v: &GridFunction,
    idx: &MultiIndex,
) -> Result<(f64, Vec<ClampEvent>)> {
    let disc = single_node(problem, grid, cfg, SchemeKind::Modified, Some(bounds.clone()), idx)?;
    Ok(disc.residual_with_clamps(v, 0))
}

fn pointwise(
    problem: &Problem,
    grid: &Grid,
    cfg: &SchemeConfig,
    kind: SchemeKind,
    bounds: Option<CutoffBounds>,
    v: &GridFunction,
    idx: &MultiIndex,
) -> Result<f64> {
    Ok(single_node(problem, grid, cfg, kind, bounds, idx)?.residual_at(v, 0))
}

/// A discretization holding only the rows of one node; keeps the pointwise
/// entry points from assembling the whole grid.
fn single_node(
    problem: &Problem,
    grid: &Grid,
    cfg: &SchemeConfig,
    kind: SchemeKind,
    bounds: Option<CutoffBounds>,
    idx: &MultiIndex,
) -> Result<Discretization> {
    cfg.validate()?;
    grid.check(idx)?;
    if grid.is_boundary(idx) {
        return Err(Error::BoundaryNode(format!("{idx:?}")));
    }
    if kind == SchemeKind::Modified && bounds.is_none() {
        return Err(Error::InvalidConfig("the modified scheme needs cutoff bounds".into()));
    }
    let boundary = boundary_data(problem, grid);
    let hp = grid.h().powf(cfg.p);
    let inv_h2: Vec<f64> = grid.spacing().iter().map(|s| 1.0 / (s * s)).collect();
    let rows = vec![build_rows(grid, &boundary, cfg, kind, idx, hp, &inv_h2)?];
    let mut unknown_of = vec![None; grid.len()];
    unknown_of[grid.flat(idx)] = Some(0);
    Ok(Discretization {
        problem: problem.clone(),
        grid: grid.clone(),
        config: cfg.clone(),
        kind,
        bounds,
        boundary,
        rows,
        unknown_of,
        extrap_weight: inv_h2.iter().map(|w| cfg.gamma * hp * w / 4.0).collect(),
    })
}

/// The band `U_LF +- c h` at every node.
pub fn build_band(u_lf: &GridFunction, c: f64, h: f64) -> Result<CutoffBounds> {
    if !(c > 0.0 && h > 0.0) {
        return Err(Error::InvalidConfig(format!("band needs c > 0 and h > 0, got c={c}, h={h}")));
    }
    let width = c * h;
    let mut lower = u_lf.clone();
    let mut upper = u_lf.clone();
    for k in 0..u_lf.len() {
        lower[k] -= width;
        upper[k] += width;
    }
    CutoffBounds::new(lower, upper)
}

/// Sample `|dH/dq_i|` by difference quotients on a small lattice of
/// `(q, u, x)` values and return the largest estimate.
pub fn estimate_lip_q(problem: &Problem, q_radius: f64, u_range: (f64, f64)) -> f64 {
    let d = problem.dim();
    let (lo, hi) = (problem.domain().lower(), problem.domain().upper());
    let pts = 5usize;
    let lattice = |a: f64, b: f64, j: usize| a + (b - a) * j as f64 / (pts - 1) as f64;
    let combos = pts.pow(d as u32);
    let delta = 1e-4 * q_radius.max(1.0);
    let mut worst: f64 = 0.0;
    let mut x = vec![0.0; d];
    let mut q = vec![0.0; d];
    for xc in 0..combos {
        let mut c = xc;
        for i in 0..d {
            x[i] = lattice(lo[i], hi[i], c % pts);
            c /= pts;
        }
        for qc in 0..combos {
            let mut c = qc;
            for qi in q.iter_mut() {
                *qi = lattice(-q_radius, q_radius, c % pts);
                c /= pts;
            }
            for j in 0..3 {
                let u = lattice(u_range.0, u_range.1, 2 * j);
                let base = problem.hamiltonian(&q, u, &x);
                for i in 0..d {
                    let keep = q[i];
                    q[i] = keep + delta;
                    let moved = problem.hamiltonian(&q, u, &x);
                    q[i] = keep;
                    worst = worst.max(((moved - base) / delta).abs());
                }
            }
        }
    }
    worst
}

/// Warn when `gamma` is below the sampled or declared bound on `|dH/dq_i|`,
/// in which case the Lax-Friedrichs scheme need not be monotone. Returns the
/// offending bound.
pub fn check_gamma(problem: &Problem, cfg: &SchemeConfig, q_radius: f64, u_range: (f64, f64)) -> Option<f64> {
    let declared = problem.lip_q().iter().copied().fold(0.0, f64::max);
    let sampled = estimate_lip_q(problem, q_radius, u_range);
    let bound = declared.max(sampled);
    if cfg.gamma < bound {
        log::warn!(
            "gamma = {} is below the estimated sup |dH/dq| = {bound:.3} for {}; the Lax-Friedrichs scheme may not be monotone",
            cfg.gamma,
            problem.name()
        );
        Some(bound)
    } else {
        None
    }
}
