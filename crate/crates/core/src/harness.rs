//! Mesh-refinement studies: solve each level, measure the max-norm error
//! against the exact solution, and tabulate observed orders.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, Point};
use crate::problems::Problem;
use crate::schemes::{build_band, CutoffReport, Discretization, SchemeConfig, SchemeKind};
use crate::solver::{solve, SolveOutcome, SolverConfig};

pub const CSV_HEADER: &str = "level,J,h,error,order,cutoff,iterations,seconds";

#[derive(Clone, Debug)]
pub struct StudyPlan {
    pub problem: String,
    pub kind: SchemeKind,
    /// Nodes per axis at each level; grids are square in 2D.
    pub levels: Vec<usize>,
    pub scheme: SchemeConfig,
    pub solver: SolverConfig,
    /// Run levels on separate threads.
    pub parallel: bool,
    /// Record wall time per level. Off gives byte-identical reruns.
    pub timing: bool,
}

impl StudyPlan {
    /// Defaults for `problem`: per-dimension scheme settings and the default
    /// solver.
    pub fn new(problem: &str, kind: SchemeKind, levels: &[usize]) -> Result<Self> {
        let p = Problem::registry(problem)?;
        Ok(Self {
            problem: problem.to_string(),
            kind,
            levels: levels.to_vec(),
            scheme: SchemeConfig::for_dim(p.dim()),
            solver: SolverConfig::default(),
            parallel: false,
            timing: true,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.len() < 2 {
            return Err(Error::InvalidConfig("a study needs at least two levels".into()));
        }
        if self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("level node counts must increase strictly".into()));
        }
        self.scheme.validate()?;
        self.solver.validate()
    }
}

/// Observed order between consecutive levels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Order {
    Value(f64),
    /// The finer error is zero, so no rate can be formed.
    Exact,
}

#[derive(Clone, Debug)]
pub struct LevelReport {
    pub level: usize,
    pub nodes: usize,
    pub h: f64,
    /// Max-norm error over interior nodes, when the problem has an exact solution.
    pub error: Option<f64>,
    /// Coordinates of the node where the error peaks.
    pub argmax: Option<Vec<f64>>,
    pub order: Option<Order>,
    /// Whether any cutoff clamp fired (modified scheme only).
    pub cutoff: Option<bool>,
    pub iterations: usize,
    pub residual: f64,
    pub seconds: Option<f64>,
    /// `max |U - U_LF|` over all nodes (modified scheme only).
    pub band_distance: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct StudyReport {
    pub problem: String,
    pub kind: SchemeKind,
    pub levels: Vec<LevelReport>,
    /// Set when a level failed to converge; `levels` then holds the levels
    /// finished before it.
    pub failure: Option<String>,
}

impl StudyReport {
    pub fn complete(&self) -> bool {
        self.failure.is_none()
    }
}

/// Everything computed on one mesh.
#[derive(Clone, Debug)]
pub struct LevelSolution {
    pub grid: Grid,
    pub lf: SolveOutcome,
    /// The requested scheme's solve; a copy of `lf` for the LF scheme.
    pub target: SolveOutcome,
    pub cutoff: Option<CutoffReport>,
}

/// Solve `kind` on an `nodes`-per-axis grid: LF from the zero function first,
/// then the requested scheme from the LF solution, with the band `U_LF +- c h`
/// for the modified scheme.
pub fn solve_level(
    problem: &Problem,
    nodes: usize,
    kind: SchemeKind,
    scheme: &SchemeConfig,
    solver: &SolverConfig,
) -> Result<LevelSolution> {
    let grid = Grid::uniform(problem.domain().clone(), nodes)?;
    let lf_disc = Discretization::new(problem, &grid, scheme, SchemeKind::LaxFriedrichs, None)?;
    let lf = solve(&lf_disc, solver, &GridFunction::zeros(&grid))?;
    if kind == SchemeKind::LaxFriedrichs || !lf.converged {
        return Ok(LevelSolution {
            grid,
            target: lf.clone(),
            lf,
            cutoff: None,
        });
    }
    let bounds = match kind {
        SchemeKind::Modified => Some(build_band(&lf.solution, scheme.cutoff_c, grid.h())?),
        _ => None,
    };
    let disc = Discretization::new(problem, &grid, scheme, kind, bounds)?;
    let target = solve(&disc, solver, &lf.solution)?;
    let cutoff = (kind == SchemeKind::Modified).then(|| disc.cutoff_report(&target.solution));
    Ok(LevelSolution {
        grid,
        lf,
        target,
        cutoff,
    })
}

/// Max-norm error over interior nodes and the coordinates where it peaks.
pub fn interior_error(problem: &Problem, grid: &Grid, v: &GridFunction) -> Option<(f64, Point)> {
    let mut worst: Option<(f64, Point)> = None;
    for (k, idx) in grid.indices().enumerate() {
        if grid.is_boundary(&idx) {
            continue;
        }
        let x = grid.coords(&idx);
        let e = (v[k] - problem.exact_value(&x[..grid.dim()])?).abs();
        if worst.is_none_or(|(w, _)| e > w) {
            worst = Some((e, x));
        }
    }
    worst
}

/// `ln(e_{k-1} / e_k) / ln(h_{k-1} / h_k)` for each consecutive pair.
pub fn observed_order(errors: &[f64], hs: &[f64]) -> Result<Vec<Order>> {
    if errors.len() != hs.len() {
        return Err(Error::InvalidConfig("errors and mesh sizes differ in length".into()));
    }
    if errors.iter().any(|e| !(*e >= 0.0)) || hs.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::InvalidConfig("errors must be >= 0 and mesh sizes > 0".into()));
    }
    Ok(errors
        .windows(2)
        .zip(hs.windows(2))
        .map(|(e, h)| {
            if e[1] == 0.0 || e[0] == 0.0 {
                Order::Exact
            } else {
                Order::Value((e[0] / e[1]).ln() / (h[0] / h[1]).ln())
            }
        })
        .collect())
}

fn run_level(problem: &Problem, plan: &StudyPlan, level: usize) -> Result<(LevelReport, Option<String>)> {
    let nodes = plan.levels[level];
    let start = Instant::now();
    let sol = solve_level(problem, nodes, plan.kind, &plan.scheme, &plan.solver)?;
    let seconds = plan.timing.then(|| start.elapsed().as_secs_f64());
    let d = sol.grid.dim();
    let err = interior_error(problem, &sol.grid, &sol.target.solution);
    let failure = if !sol.lf.converged {
        Some(format!(
            "Lax-Friedrichs solve did not converge at J={nodes} (residual {:.3e}): {}",
            sol.lf.residual,
            sol.lf.diagnostic.clone().unwrap_or_default()
        ))
    } else if !sol.target.converged {
        Some(format!(
            "{} solve did not converge at J={nodes} (residual {:.3e}): {}",
            plan.kind,
            sol.target.residual,
            sol.target.diagnostic.clone().unwrap_or_default()
        ))
    } else {
        None
    };
    let report = LevelReport {
        level: level + 1,
        nodes,
        h: sol.grid.h(),
        error: err.map(|e| e.0),
        argmax: err.map(|e| e.1[..d].to_vec()),
        order: None,
        cutoff: sol.cutoff.as_ref().map(|c| c.active()),
        iterations: sol.target.iterations,
        residual: sol.target.residual,
        seconds,
        band_distance: (plan.kind == SchemeKind::Modified)
            .then(|| sol.target.solution.max_abs_diff(&sol.lf.solution)),
    };
    Ok((report, failure))
}

/// Run every level of `plan`. A level that fails to converge ends the study;
/// the report then carries the finished levels and the failure message.
pub fn run_study(plan: &StudyPlan) -> Result<StudyReport> {
    plan.validate()?;
    let problem = Problem::registry(&plan.problem)?;
    let n = plan.levels.len();
    let results: Vec<Result<(LevelReport, Option<String>)>> = if plan.parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..n)
                .map(|level| {
                    let problem = &problem;
                    s.spawn(move || run_level(problem, plan, level))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::Solver("level thread panicked".into()))))
                .collect()
        })
    } else {
        let mut out = Vec::with_capacity(n);
        for level in 0..n {
            let r = run_level(&problem, plan, level);
            let stop = !matches!(&r, Ok((_, None)));
            out.push(r);
            if stop {
                break;
            }
        }
        out
    };
    let mut levels = Vec::new();
    let mut failure = None;
    for r in results {
        let (report, fail) = r?;
        if let Some(msg) = fail {
            failure = Some(msg);
            break;
        }
        levels.push(report);
    }
    for k in 1..levels.len() {
        if let (Some(e0), Some(e1)) = (levels[k - 1].error, levels[k].error) {
            levels[k].order = Some(observed_order(&[e0, e1], &[levels[k - 1].h, levels[k].h])?[0]);
        }
    }
    Ok(StudyReport {
        problem: plan.problem.clone(),
        kind: plan.kind,
        levels,
        failure,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Text,
}

fn order_cell(order: Option<Order>) -> String {
    match order {
        Some(Order::Value(o)) => format!("{o:.4}"),
        Some(Order::Exact) => "exact".into(),
        None => String::new(),
    }
}

fn cutoff_cell(cutoff: Option<bool>) -> &'static str {
    match cutoff {
        Some(true) => "yes",
        Some(false) => "no",
        None => "",
    }
}

pub fn to_csv(report: &StudyReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for l in &report.levels {
        let _ = writeln!(
            out,
            "{},{},{:.6e},{},{},{},{},{}",
            l.level,
            l.nodes,
            l.h,
            l.error.map(|e| format!("{e:.6e}")).unwrap_or_default(),
            order_cell(l.order),
            cutoff_cell(l.cutoff),
            l.iterations,
            l.seconds.map(|s| format!("{s:.3}")).unwrap_or_default(),
        );
    }
    out
}

pub fn to_text(report: &StudyReport) -> String {
    let with_cutoff = report.kind == SchemeKind::Modified;
    let mut out = format!("{} / {}\n", report.problem, report.kind);
    let _ = write!(out, "{:>6} {:>10} {:>10} {:>7}", "J", "h", "Error", "Order");
    if with_cutoff {
        let _ = write!(out, " {:>6}", "Cutoff");
    }
    out.push('\n');
    for l in &report.levels {
        let err = l.error.map(|e| format!("{e:.2e}")).unwrap_or_else(|| "-".into());
        let order = match l.order {
            Some(Order::Value(o)) => format!("{o:.2}"),
            Some(Order::Exact) => "exact".into(),
            None => String::new(),
        };
        let _ = write!(out, "{:>6} {:>10.2e} {:>10} {:>7}", l.nodes, l.h, err, order);
        if with_cutoff {
            let _ = write!(out, " {:>6}", cutoff_cell(l.cutoff));
        }
        out.push('\n');
    }
    if let Some(f) = &report.failure {
        let _ = writeln!(out, "stopped: {f}");
    }
    out
}

/// Write the report to `path` in `format`.
pub fn emit(report: &StudyReport, format: Format, path: &Path) -> Result<()> {
    let body = match format {
        Format::Csv => to_csv(report),
        Format::Text => to_text(report),
    };
    fs::write(path, body)?;
    Ok(())
}
