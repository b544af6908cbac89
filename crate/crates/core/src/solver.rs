//! Root finding for the scheme residuals: damped Newton on the sparse system,
//! with explicit pseudo-time sweeps as a fallback and as a reference solver.

use std::fmt;

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::problems::Problem;
use crate::schemes::{Discretization, SchemeConfig};

/// How the pseudo-time step is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TauPolicy {
    /// [`tau_max`] for the discretization at hand.
    Max,
    Fixed(f64),
}

/// Which algorithm [`solve`] runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Newton, falling back to a burst of sweeps whenever it stalls.
    Hybrid,
    /// Sweeps only.
    PseudoTime,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Converged once the max-norm residual is at or below this.
    pub tol: f64,
    pub max_newton: usize,
    /// Finite-difference Jacobian step is `fd_scale * (1 + |V|)`.
    pub fd_scale: f64,
    pub backtrack: f64,
    pub max_halvings: usize,
    pub tau: TauPolicy,
    pub max_sweeps: usize,
    /// Newton iterations without a new best residual before sweeping.
    pub stall_window: usize,
    /// Sweeps per fallback burst.
    pub fallback_sweeps: usize,
    pub strategy: Strategy,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_newton: 50,
            fd_scale: 1e-7,
            backtrack: 0.5,
            max_halvings: 30,
            tau: TauPolicy::Max,
            max_sweeps: 200_000,
            stall_window: 5,
            fallback_sweeps: 100,
            strategy: Strategy::Hybrid,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tolerance must be > 0, got {}", self.tol)));
        }
        if let TauPolicy::Fixed(t) = self.tau {
            if !(t > 0.0) {
                return Err(Error::InvalidConfig(format!("tau must be > 0, got {t}")));
            }
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "backtracking factor must lie in (0, 1), got {}",
                self.backtrack
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    Newton,
    PseudoTime,
    Hybrid,
}

impl fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveMethod::Newton => "newton",
            SolveMethod::PseudoTime => "pseudo-time",
            SolveMethod::Hybrid => "hybrid",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub solution: GridFunction,
    pub converged: bool,
    /// Max-norm residual at `solution`.
    pub residual: f64,
    /// Newton iterations, including rejected steps.
    pub iterations: usize,
    pub sweeps: usize,
    pub method: SolveMethod,
    /// Why the solve stopped short, when it did.
    pub diagnostic: Option<String>,
}

/// Result of one damped Newton step.
#[derive(Clone, Debug)]
pub struct NewtonStep {
    pub solution: GridFunction,
    pub residual: f64,
    /// False when no step length reduced the residual; `solution` is then the
    /// input.
    pub accepted: bool,
}

/// Largest pseudo-time step for which the explicit update stays nondecreasing
/// in the centre value.
pub fn tau_max(problem: &Problem, cfg: &SchemeConfig, grid: &Grid) -> f64 {
    let h = grid.h();
    let hp = h.powf(cfg.p);
    let sum_inv_h2: f64 = grid.spacing().iter().map(|s| 1.0 / (s * s)).sum();
    let sum_lq: f64 = problem.lip_q().iter().zip(grid.spacing()).map(|(l, s)| l / s).sum();
    let bound = problem.lip_u() + 2.0 * cfg.beta * h * h * sum_inv_h2 + 1.5 * cfg.gamma * hp * sum_inv_h2 + sum_lq;
    0.9 / bound
}

fn max_norm(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |m: f64, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

fn two_norm(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// One explicit update `V - tau * residual(V)` of every interior node, computed
/// from the frozen input; boundary nodes are reset to the Dirichlet data.
pub fn pseudo_sweep(disc: &Discretization, tau: f64, v: &GridFunction) -> GridFunction {
    let mut out = v.clone();
    disc.impose_boundary(&mut out);
    let frozen = out.clone();
    for k in 0..disc.unknowns() {
        let node = disc.node_of(k);
        out[node] = frozen[node] - tau * disc.residual_at(&frozen, k);
    }
    out
}

/// Jacobian triplets by simultaneous perturbation of columns that share no
/// row: unknowns whose indices agree modulo 5 on every axis get one residual
/// evaluation per colour.
pub fn colored_fd_jacobian(disc: &Discretization, v: &GridFunction, fd_scale: f64) -> Vec<(usize, usize, f64)> {
    let n = disc.unknowns();
    let grid = disc.grid();
    let d = grid.dim();
    let mut rows_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    for r in 0..n {
        for c in disc.pattern(r) {
            rows_of[c].push(r);
        }
    }
    let colour = |k: usize| {
        let idx = grid.multi(disc.node_of(k));
        (0..d).rev().fold(0, |acc, i| acc * 5 + idx.get(i) % 5)
    };
    let colours = 5usize.pow(d as u32);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); colours];
    for k in 0..n {
        members[colour(k)].push(k);
    }
    let base = disc.residual(v);
    let mut moved = vec![0.0; n];
    let mut out = Vec::new();
    for cols in members.iter().filter(|m| !m.is_empty()) {
        let mut w = v.clone();
        let mut steps = Vec::with_capacity(cols.len());
        for &c in cols {
            let node = disc.node_of(c);
            let eps = fd_scale * (1.0 + v[node].abs());
            w[node] += eps;
            // the representable step, not the requested one
            steps.push(w[node] - v[node]);
        }
        disc.residual_into(&w, &mut moved);
        for (&c, &eps) in cols.iter().zip(&steps) {
            for &r in &rows_of[c] {
                out.push((r, c, (moved[r] - base[r]) / eps));
            }
        }
    }
    out
}

fn linear_solve(n: usize, triplets: &[(usize, usize, f64)], rhs: &[f64]) -> Result<Vec<f64>> {
    let entries: Vec<Triplet<usize, usize, f64>> = triplets.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &entries)
        .map_err(|e| Error::Solver(format!("Jacobian assembly: {e:?}")))?;
    let lu = mat.sp_lu().map_err(|e| Error::Solver(format!("LU factorization: {e:?}")))?;
    let b = Col::from_fn(n, |i| rhs[i]);
    let x = lu.solve(&b);
    let x: Vec<f64> = (0..n).map(|i| x[i]).collect();
    if x.iter().any(|xi| !xi.is_finite()) {
        return Err(Error::Solver("singular Jacobian".into()));
    }
    Ok(x)
}

/// One Newton step with backtracking on the Euclidean residual norm. The
/// Jacobian is analytic when the problem supplies derivatives and a coloured
/// finite-difference one otherwise. Errors signal a singular system.
pub fn newton_step(disc: &Discretization, v: &GridFunction, cfg: &SolverConfig) -> Result<NewtonStep> {
    let mut v = v.clone();
    disc.impose_boundary(&mut v);
    let r = disc.residual(&v);
    let r_inf = max_norm(&r);
    if r_inf <= cfg.tol {
        return Ok(NewtonStep {
            solution: v,
            residual: r_inf,
            accepted: true,
        });
    }
    let n = disc.unknowns();
    let triplets = disc
        .jacobian_triplets(&v)
        .unwrap_or_else(|| colored_fd_jacobian(disc, &v, cfg.fd_scale));
    let delta = linear_solve(n, &triplets, &r)?;
    let r2 = two_norm(&r);
    let x0 = disc.gather(&v);
    let mut trial = v.clone();
    let mut x = vec![0.0; n];
    let mut r_trial = vec![0.0; n];
    let mut t = 1.0;
    for _ in 0..=cfg.max_halvings {
        for i in 0..n {
            x[i] = x0[i] - t * delta[i];
        }
        disc.scatter(&x, &mut trial);
        disc.residual_into(&trial, &mut r_trial);
        let trial_r2 = two_norm(&r_trial);
        if trial_r2 <= (1.0 - 1e-4 * t) * r2 || max_norm(&r_trial) <= cfg.tol {
            return Ok(NewtonStep {
                residual: max_norm(&r_trial),
                solution: trial,
                accepted: true,
            });
        }
        t *= cfg.backtrack;
    }
    Ok(NewtonStep {
        solution: v,
        residual: r_inf,
        accepted: false,
    })
}

/// Drive the residual of `disc` to zero starting from `guess` (boundary nodes
/// are overwritten with the Dirichlet data).
pub fn solve(disc: &Discretization, cfg: &SolverConfig, guess: &GridFunction) -> Result<SolveOutcome> {
    cfg.validate()?;
    if guess.len() != disc.grid().len() {
        return Err(Error::InvalidConfig("initial guess does not match the grid".into()));
    }
    let tau = match cfg.tau {
        TauPolicy::Max => tau_max(disc.problem(), disc.config(), disc.grid()),
        TauPolicy::Fixed(t) => t,
    };
    let mut v = guess.clone();
    disc.impose_boundary(&mut v);
    let mut r_inf = max_norm(&disc.residual(&v));
    let mut iterations = 0;
    let mut sweeps = 0;
    let mut diagnostic = None;

    let sweep_burst = |v: &mut GridFunction, count: usize| {
        for _ in 0..count {
            *v = pseudo_sweep(disc, tau, v);
        }
        max_norm(&disc.residual(v))
    };

    if cfg.strategy == Strategy::PseudoTime {
        // check the residual every few sweeps to keep the cost near one sweep
        while r_inf > cfg.tol && sweeps < cfg.max_sweeps && !r_inf.is_nan() {
            let burst = 50.min(cfg.max_sweeps - sweeps);
            r_inf = sweep_burst(&mut v, burst);
            sweeps += burst;
        }
    } else {
        let mut best = r_inf;
        let mut since_best = 0;
        while r_inf > cfg.tol && !r_inf.is_nan() {
            if iterations >= cfg.max_newton {
                diagnostic = Some(format!("Newton iteration cap {} reached", cfg.max_newton));
                break;
            }
            iterations += 1;
            let stalled = match newton_step(disc, &v, cfg) {
                Ok(step) if step.accepted => {
                    v = step.solution;
                    r_inf = step.residual;
                    if r_inf < best {
                        best = r_inf;
                        since_best = 0;
                    } else {
                        since_best += 1;
                    }
                    since_best >= cfg.stall_window
                }
                Ok(_) => {
                    log::debug!("line search failed at residual {r_inf:.3e}");
                    true
                }
                Err(e) => {
                    log::debug!("Newton step failed: {e}");
                    true
                }
            };
            if stalled && r_inf > cfg.tol {
                if sweeps + cfg.fallback_sweeps > cfg.max_sweeps {
                    diagnostic = Some("sweep budget exhausted".into());
                    break;
                }
                r_inf = sweep_burst(&mut v, cfg.fallback_sweeps);
                sweeps += cfg.fallback_sweeps;
                best = r_inf;
                since_best = 0;
            }
        }
    }
    if r_inf.is_nan() {
        diagnostic = Some("residual is NaN".into());
    } else if r_inf > cfg.tol && diagnostic.is_none() {
        diagnostic = Some(format!("sweep cap {} reached", cfg.max_sweeps));
    }
    let method = match (iterations > 0, sweeps > 0) {
        (true, true) => SolveMethod::Hybrid,
        (false, true) => SolveMethod::PseudoTime,
        _ => SolveMethod::Newton,
    };
    Ok(SolveOutcome {
        converged: r_inf <= cfg.tol,
        solution: v,
        residual: r_inf,
        iterations,
        sweeps,
        method,
        diagnostic,
    })
}
