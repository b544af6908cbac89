//! Stationary Hamilton-Jacobi problems `H(grad u, u, x) = 0` in a box with
//! Dirichlet data, plus the registry of manufactured benchmark problems.
//!
//! Any zeroth-order term (`theta * u`) is part of the Hamiltonian; the
//! schemes add nothing on top of it.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::DomainBox;

/// `H(q, u, x)`.
pub type HamiltonianFn = Arc<dyn Fn(&[f64], f64, &[f64]) -> f64 + Send + Sync>;
/// Writes `dH/dq` into the slice and returns `dH/du`. Kinks use the
/// generalized derivative with `sign(0) = 0`.
pub type HamiltonianDerivFn = Arc<dyn Fn(&[f64], f64, &[f64], &mut [f64]) -> f64 + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// Names accepted by [`Problem::registry`].
pub const REGISTRY: [&str; 6] = ["1d-ex1", "1d-ex2", "2d-ex1", "2d-ex2", "2d-ex3", "2d-ex4"];

#[derive(Clone)]
pub struct ExactSolution {
    pub value: ScalarFn,
    pub gradient: VectorFn,
    /// Distance from `x` to the set where the solution is not differentiable.
    pub kink_distance: Option<ScalarFn>,
}

#[derive(Clone)]
pub struct Problem {
    name: String,
    domain: DomainBox,
    hamiltonian: HamiltonianFn,
    derivative: Option<HamiltonianDerivFn>,
    dirichlet: ScalarFn,
    exact: Option<ExactSolution>,
    lip_q: Vec<f64>,
    lip_u: f64,
    theta_min: f64,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("lip_q", &self.lip_q)
            .field("lip_u", &self.lip_u)
            .field("theta_min", &self.theta_min)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl Problem {
    /// A user-defined problem. Lipschitz data default to `lip_q = 1` per axis,
    /// `lip_u = 1`, `theta_min = 1`; override them with [`Problem::with_bounds`].
    pub fn new(
        name: impl Into<String>,
        domain: DomainBox,
        hamiltonian: impl Fn(&[f64], f64, &[f64]) -> f64 + Send + Sync + 'static,
        dirichlet: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let d = domain.dim();
        Self {
            name: name.into(),
            domain,
            hamiltonian: Arc::new(hamiltonian),
            derivative: None,
            dirichlet: Arc::new(dirichlet),
            exact: None,
            lip_q: vec![1.0; d],
            lip_u: 1.0,
            theta_min: 1.0,
        }
    }

    pub fn with_derivative(
        mut self,
        derivative: impl Fn(&[f64], f64, &[f64], &mut [f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    pub fn with_exact(
        mut self,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        self.exact = Some(ExactSolution {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            kink_distance: None,
        });
        self
    }

    pub fn with_kinks(mut self, distance: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        if let Some(exact) = self.exact.as_mut() {
            exact.kink_distance = Some(Arc::new(distance));
        }
        self
    }

    /// `lip_q[i] >= sup |dH/dq_i|`, `lip_u >= sup dH/du`, `theta_min <= inf dH/du`
    /// over the working band.
    pub fn with_bounds(mut self, lip_q: &[f64], lip_u: f64, theta_min: f64) -> Result<Self> {
        if lip_q.len() != self.domain.dim() {
            return Err(Error::InvalidConfig(format!(
                "lip_q has {} entries for a {}-dimensional problem",
                lip_q.len(),
                self.domain.dim()
            )));
        }
        if !(theta_min > 0.0 && lip_u >= theta_min) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < theta_min <= lip_u, got {theta_min} and {lip_u}"
            )));
        }
        self.lip_q = lip_q.to_vec();
        self.lip_u = lip_u;
        self.theta_min = theta_min;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn hamiltonian(&self, q: &[f64], u: f64, x: &[f64]) -> f64 {
        (self.hamiltonian)(q, u, x)
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    /// Generalized derivative of `H`, if the problem supplies one.
    pub fn derivative(&self, q: &[f64], u: f64, x: &[f64], dq: &mut [f64]) -> Option<f64> {
        self.derivative.as_ref().map(|d| d(q, u, x, dq))
    }

    pub fn dirichlet(&self, x: &[f64]) -> f64 {
        (self.dirichlet)(x)
    }

    pub fn exact(&self) -> Option<&ExactSolution> {
        self.exact.as_ref()
    }

    pub fn exact_value(&self, x: &[f64]) -> Option<f64> {
        self.exact.as_ref().map(|e| (e.value)(x))
    }

    pub fn lip_q(&self) -> &[f64] {
        &self.lip_q
    }

    pub fn lip_u(&self) -> f64 {
        self.lip_u
    }

    pub fn theta_min(&self) -> f64 {
        self.theta_min
    }

    /// Look up a benchmark problem by name (see [`REGISTRY`]).
    pub fn registry(name: &str) -> Result<Self> {
        let line = || DomainBox::new(&[-1.0], &[1.0]).expect("valid box");
        let square = || DomainBox::cube(-1.0, 1.0, 2).expect("valid box");
        let p = match name {
            "1d-ex1" => {
                // (3x^2 - x + 4) u' + (x^2 + 1) u = f,  u = x^3 + cos 4x
                let u = |x: f64| x.powi(3) + (4.0 * x).cos();
                let du = |x: f64| 3.0 * x * x - 4.0 * (4.0 * x).sin();
                let b = |x: f64| 3.0 * x * x - x + 4.0;
                let c = |x: f64| x * x + 1.0;
                let f = move |x: f64| b(x) * du(x) + c(x) * u(x);
                Problem::new(
                    name,
                    line(),
                    move |q, v, x| b(x[0]) * q[0] + c(x[0]) * v - f(x[0]),
                    move |x| u(x[0]),
                )
                .with_derivative(move |_, _, x, dq| {
                    dq[0] = b(x[0]);
                    c(x[0])
                })
                .with_exact(move |x| u(x[0]), move |x, g| g[0] = du(x[0]))
                .with_bounds(&[8.0], 2.0, 1.0)?
            }
            "1d-ex2" => {
                // |u'| + u = 2 - |x|,  u = 1 - |x|
                let u = |x: f64| 1.0 - x.abs();
                Problem::new(
                    name,
                    line(),
                    |q, v, x| q[0].abs() + v - 2.0 + x[0].abs(),
                    move |x| u(x[0]),
                )
                .with_derivative(|q, _, _, dq| {
                    dq[0] = sign(q[0]);
                    1.0
                })
                .with_exact(move |x| u(x[0]), |x, g| g[0] = -sign(x[0]))
                .with_kinks(|x| x[0].abs())
                .with_bounds(&[1.0], 1.0, 1.0)?
            }
            "2d-ex1" => {
                // u_x + u_y + u = f,  u = e^{xy}
                let f = |x: &[f64]| (x[0] + x[1] + 1.0) * (x[0] * x[1]).exp();
                Problem::new(
                    name,
                    square(),
                    move |q, v, x| q[0] + q[1] + v - f(x),
                    |x| (x[0] * x[1]).exp(),
                )
                .with_derivative(|_, _, _, dq| {
                    dq[0] = 1.0;
                    dq[1] = 1.0;
                    1.0
                })
                .with_exact(|x| (x[0] * x[1]).exp(), exp_xy_gradient)
                .with_bounds(&[1.0, 1.0], 1.0, 1.0)?
            }
            "2d-ex2" => {
                // |grad u| + u = f,  u = e^{xy}
                let f = |x: &[f64]| ((x[0] * x[0] + x[1] * x[1]).sqrt() + 1.0) * (x[0] * x[1]).exp();
                Problem::new(
                    name,
                    square(),
                    move |q, v, x| q[0].hypot(q[1]) + v - f(x),
                    |x| (x[0] * x[1]).exp(),
                )
                .with_derivative(|q, _, _, dq| {
                    let norm = q[0].hypot(q[1]);
                    let denom = norm + f64::EPSILON;
                    dq[0] = q[0] / denom;
                    dq[1] = q[1] / denom;
                    1.0
                })
                .with_exact(|x| (x[0] * x[1]).exp(), exp_xy_gradient)
                .with_bounds(&[1.0, 1.0], 1.0, 1.0)?
            }
            "2d-ex3" => {
                // |u_x| + |u_y| + |u| + 2u = f,  u = cos(pi x) cos(pi y) - 1/2
                let u = |x: &[f64]| (PI * x[0]).cos() * (PI * x[1]).cos() - 0.5;
                let grad = |x: &[f64], g: &mut [f64]| {
                    g[0] = -PI * (PI * x[0]).sin() * (PI * x[1]).cos();
                    g[1] = -PI * (PI * x[0]).cos() * (PI * x[1]).sin();
                };
                let f = move |x: &[f64]| {
                    let mut g = [0.0; 2];
                    grad(x, &mut g);
                    let v = u(x);
                    g[0].abs() + g[1].abs() + v.abs() + 2.0 * v
                };
                Problem::new(
                    name,
                    square(),
                    move |q, v, x| q[0].abs() + q[1].abs() + v.abs() + 2.0 * v - f(x),
                    u,
                )
                .with_derivative(|q, v, _, dq| {
                    dq[0] = sign(q[0]);
                    dq[1] = sign(q[1]);
                    sign(v) + 2.0
                })
                .with_exact(u, grad)
                .with_bounds(&[1.0, 1.0], 3.0, 1.0)?
            }
            "2d-ex4" => {
                // |u_x| + 2 u_x + u = f,  u = |x - 0.2|
                let u = |x: &[f64]| (x[0] - 0.2).abs();
                let f = move |x: &[f64]| {
                    let s = sign(x[0] - 0.2);
                    s.abs() + 2.0 * s + u(x)
                };
                Problem::new(
                    name,
                    square(),
                    move |q, v, x| q[0].abs() + 2.0 * q[0] + v - f(x),
                    u,
                )
                .with_derivative(|q, _, _, dq| {
                    dq[0] = sign(q[0]) + 2.0;
                    dq[1] = 0.0;
                    1.0
                })
                .with_exact(u, |x, g| {
                    g[0] = sign(x[0] - 0.2);
                    g[1] = 0.0;
                })
                .with_kinks(|x| (x[0] - 0.2).abs())
                .with_bounds(&[3.0, 0.0], 1.0, 1.0)?
            }
            other => return Err(Error::UnknownProblem(other.to_string())),
        };
        Ok(p)
    }
}

fn exp_xy_gradient(x: &[f64], g: &mut [f64]) {
    let e = (x[0] * x[1]).exp();
    g[0] = x[1] * e;
    g[1] = x[0] * e;
}

/// Largest `|H(grad u, u, x)|` of the exact solution over `samples` random
/// interior points, skipping points within `1e-6` of a kink.
pub fn verify_manufactured(problem: &Problem, samples: usize, seed: u64) -> Result<f64> {
    let exact = problem
        .exact()
        .ok_or_else(|| Error::InvalidConfig(format!("{} has no exact solution", problem.name())))?;
    let d = problem.dim();
    let (lo, hi) = (problem.domain().lower(), problem.domain().upper());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; d];
    let mut grad = vec![0.0; d];
    let mut worst: f64 = 0.0;
    let mut taken = 0;
    while taken < samples {
        for i in 0..d {
            x[i] = rng.gen_range(lo[i]..hi[i]);
        }
        if let Some(dist) = &exact.kink_distance {
            if dist(&x) < 1e-6 {
                continue;
            }
        }
        (exact.gradient)(&x, &mut grad);
        let u = (exact.value)(&x);
        worst = worst.max(problem.hamiltonian(&grad, u, &x).abs());
        taken += 1;
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forcing_matches_hand_derivation() {
        let p = Problem::registry("1d-ex1").unwrap();
        for &x in &[-0.9f64, -0.2, 0.0, 0.35, 0.8] {
            let f = (3.0 * x * x - x + 4.0) * (3.0 * x * x - 4.0 * (4.0 * x).sin())
                + (x * x + 1.0) * (x.powi(3) + (4.0 * x).cos());
            // H(0, 0, x) = -f(x)
            assert!((p.hamiltonian(&[0.0], 0.0, &[x]) + f).abs() < 1e-13);
        }
    }

    #[test]
    fn exact_values() {
        let p = Problem::registry("2d-ex3").unwrap();
        assert!((p.exact_value(&[0.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        let p = Problem::registry("1d-ex2").unwrap();
        // off the kink the exact solution satisfies the equation
        for &x in &[-0.7, -1e-3, 1e-3, 0.6] {
            let u = 1.0 - f64::abs(x);
            let du = -sign(x);
            assert!(p.hamiltonian(&[du], u, &[x]).abs() < 1e-15);
        }
    }

    #[test]
    fn manufactured_defects_vanish() {
        for name in REGISTRY {
            let p = Problem::registry(name).unwrap();
            let defect = verify_manufactured(&p, 1000, 7).unwrap();
            assert!(defect <= 1e-12, "{name}: {defect}");
        }
    }

    /// The exact gradients agree with central differences of the exact values,
    /// which makes the defect check above independent of the gradient closure.
    #[test]
    fn exact_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for name in REGISTRY {
            let p = Problem::registry(name).unwrap();
            let e = p.exact().unwrap();
            let d = p.dim();
            for _ in 0..100 {
                let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.95..0.95)).collect();
                if e.kink_distance.as_ref().is_some_and(|k| k(&x) < 1e-3) {
                    continue;
                }
                let mut g = vec![0.0; d];
                (e.gradient)(&x, &mut g);
                for i in 0..d {
                    let eps = 1e-5;
                    let (mut xp, mut xm) = (x.clone(), x.clone());
                    xp[i] += eps;
                    xm[i] -= eps;
                    let fd = ((e.value)(&xp) - (e.value)(&xm)) / (2.0 * eps);
                    assert!((fd - g[i]).abs() < 1e-7, "{name} axis {i}");
                }
            }
        }
    }

    #[test]
    fn boundary_data_matches_exact() {
        for name in REGISTRY {
            let p = Problem::registry(name).unwrap();
            let d = p.dim();
            for t in 0..=20 {
                let s = -1.0 + 0.1 * t as f64;
                let mut faces = vec![];
                for axis in 0..d {
                    for side in [-1.0, 1.0] {
                        let mut x = vec![s; d];
                        x[axis] = side;
                        faces.push(x);
                    }
                }
                for x in faces {
                    let diff = p.dirichlet(&x) - p.exact_value(&x).unwrap();
                    assert!(diff.abs() <= 1e-14, "{name} at {x:?}");
                }
            }
        }
    }

    #[test]
    fn monotone_in_u_with_margin() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for name in REGISTRY {
            let p = Problem::registry(name).unwrap();
            let d = p.dim();
            for _ in 0..1000 {
                let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let q: Vec<f64> = (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect();
                let u = rng.gen_range(-3.0..3.0);
                let du = 1e-6;
                let slope = (p.hamiltonian(&q, u + du, &x) - p.hamiltonian(&q, u, &x)) / du;
                assert!(slope >= p.theta_min() - 1e-8, "{name}: {slope}");
                assert!(slope <= p.lip_u() + 1e-6, "{name}: {slope}");
            }
        }
    }

    #[test]
    fn lip_q_bounds_difference_quotients() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for name in REGISTRY {
            let p = Problem::registry(name).unwrap();
            let d = p.dim();
            for _ in 0..1000 {
                let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let q: Vec<f64> = (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect();
                let u = rng.gen_range(-3.0..3.0);
                for i in 0..d {
                    let delta = rng.gen_range(1e-4..1e-1);
                    let mut qp = q.clone();
                    qp[i] += delta;
                    let slope = (p.hamiltonian(&qp, u, &x) - p.hamiltonian(&q, u, &x)).abs() / delta;
                    assert!(slope <= p.lip_q()[i] + 1e-9, "{name} axis {i}: {slope}");
                }
            }
        }
    }

    #[test]
    fn derivatives_match_difference_quotients_off_kinks() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for name in REGISTRY {
            let p = Problem::registry(name).unwrap();
            let d = p.dim();
            for _ in 0..200 {
                let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let q: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let u: f64 = rng.gen_range(-2.0..2.0);
                if q.iter().any(|v| v.abs() < 1e-3) || u.abs() < 1e-3 {
                    continue;
                }
                let mut dq = vec![0.0; d];
                let du = p.derivative(&q, u, &x, &mut dq).unwrap();
                let eps = 1e-7;
                let fd_u = (p.hamiltonian(&q, u + eps, &x) - p.hamiltonian(&q, u - eps, &x)) / (2.0 * eps);
                assert!((fd_u - du).abs() < 1e-6, "{name}");
                for i in 0..d {
                    let (mut qp, mut qm) = (q.clone(), q.clone());
                    qp[i] += eps;
                    qm[i] -= eps;
                    let fd = (p.hamiltonian(&qp, u, &x) - p.hamiltonian(&qm, u, &x)) / (2.0 * eps);
                    assert!((fd - dq[i]).abs() < 1e-6, "{name} axis {i}");
                }
            }
        }
    }

    #[test]
    fn kink_derivative_uses_zero_sign() {
        let p = Problem::registry("1d-ex2").unwrap();
        let mut dq = [9.0];
        p.derivative(&[0.0], 0.3, &[0.1], &mut dq).unwrap();
        assert_eq!(dq[0], 0.0);
        let p = Problem::registry("2d-ex2").unwrap();
        let mut dq = [9.0; 2];
        p.derivative(&[0.0, 0.0], 0.3, &[0.1, 0.2], &mut dq).unwrap();
        assert_eq!(dq, [0.0, 0.0]);
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(Problem::registry("3d-ex9"), Err(Error::UnknownProblem(_))));
    }
}
