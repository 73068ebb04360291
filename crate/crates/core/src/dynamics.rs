//! The first-order phase-space form `Ẏ = F(t, Y)` of the primal-dual system,
//! with `Y = (x, λ, v)` and `v = ẋ`:
//!
//! ```text
//! ẋ = v
//! λ̇ = tβ (A(x + θtv) − b)
//! v̇ = −γv − β (∇f(x) + Aᵀλ + σAᵀ(Ax − b) + εx)
//! ```

use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::ProblemInstance;
use crate::schedule::CoefficientSchedule;

/// A right-hand side `dy = F(t, y)` on flat state vectors.
///
/// This is also the extension point for other second-order systems: anything
/// implementing it can be handed to the integrator.
pub trait VectorField: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]);
}

impl<F> VectorField for (usize, F)
where
    F: Fn(f64, &[f64], &mut [f64]) + Sync,
{
    fn dim(&self) -> usize {
        self.0
    }

    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        (self.1)(t, y, dy)
    }
}

/// `(x, λ, v)`, packed in that order.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemState {
    pub x: Vec<f64>,
    pub lam: Vec<f64>,
    pub v: Vec<f64>,
}

impl SystemState {
    pub fn new(x: Vec<f64>, lam: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if x.len() != v.len() {
            return Err(Error::dim(format!(
                "x has length {} but v has length {}",
                x.len(),
                v.len()
            )));
        }
        if x.iter().chain(&lam).chain(&v).any(|z| !z.is_finite()) {
            return Err(Error::arg("state has non-finite entries"));
        }
        Ok(SystemState { x, lam, v })
    }

    pub fn pack(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.x.len() + self.lam.len());
        out.extend_from_slice(&self.x);
        out.extend_from_slice(&self.lam);
        out.extend_from_slice(&self.v);
        out
    }

    pub fn unpack(flat: &[f64], n: usize, m: usize) -> Result<Self> {
        if flat.len() != 2 * n + m {
            return Err(Error::dim(format!(
                "flat state has length {}, expected {} for n = {n}, m = {m}",
                flat.len(),
                2 * n + m
            )));
        }
        Ok(SystemState {
            x: flat[..n].to_vec(),
            lam: flat[n..n + m].to_vec(),
            v: flat[n + m..].to_vec(),
        })
    }
}

/// Problem, schedule and cached operator data for evaluating the field.
#[derive(Clone, Debug)]
pub struct DynamicsConfig {
    problem: ProblemInstance,
    schedule: CoefficientSchedule,
    tikhonov_enabled: bool,
    a_rows: Vec<f64>,
    a_norm: f64,
    ata_norm: f64,
    lipschitz: f64,
}

impl DynamicsConfig {
    pub fn new(
        problem: ProblemInstance,
        schedule: CoefficientSchedule,
        tikhonov_enabled: bool,
    ) -> Result<Self> {
        let (a_norm, ata_norm) = linalg::operator_norms(problem.a())?;
        let lipschitz = problem.objective().lipschitz()?;
        Ok(DynamicsConfig {
            a_rows: linalg::to_row_major(problem.a()),
            problem,
            schedule,
            tikhonov_enabled,
            a_norm,
            ata_norm,
            lipschitz,
        })
    }

    pub fn problem(&self) -> &ProblemInstance {
        &self.problem
    }

    pub fn schedule(&self) -> &CoefficientSchedule {
        &self.schedule
    }

    pub fn tikhonov_enabled(&self) -> bool {
        self.tikhonov_enabled
    }

    /// `‖A‖`
    pub fn a_norm(&self) -> f64 {
        self.a_norm
    }

    /// `‖AᵀA‖`
    pub fn ata_norm(&self) -> f64 {
        self.ata_norm
    }

    /// Lipschitz constant `L` of `∇f`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// `C = L + σ‖AᵀA‖ + ‖A‖`.
    pub fn bound_constant(&self) -> f64 {
        self.lipschitz + self.problem.sigma() * self.ata_norm + self.a_norm
    }

    pub fn state_dim(&self) -> usize {
        2 * self.problem.dim_primal() + self.problem.dim_dual()
    }

    /// Evaluate the field on flat vectors without checks.
    pub fn eval_into(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.problem.dim_primal();
        let m = self.problem.dim_dual();
        let c = self.schedule.values(t);
        let theta_t = self.schedule.theta() * t;
        let sigma = self.problem.sigma();
        let b = self.problem.b().as_slice();

        let (x, rest) = y.split_at(n);
        let (lam, v) = rest.split_at(m);
        let (dx, rest) = dy.split_at_mut(n);
        let (dlam, dv) = rest.split_at_mut(m);

        dx.copy_from_slice(v);
        self.problem.objective().gradient_into(x, dv);
        for i in 0..m {
            let row = &self.a_rows[i * n..(i + 1) * n];
            let mut ax = 0.0;
            let mut av = 0.0;
            for j in 0..n {
                ax += row[j] * x[j];
                av += row[j] * v[j];
            }
            let r = ax - b[i];
            dlam[i] = t * c.beta * (r + theta_t * av);
            let w = lam[i] + sigma * r;
            for j in 0..n {
                dv[j] += row[j] * w;
            }
        }
        let eps = if self.tikhonov_enabled { c.eps } else { 0.0 };
        for j in 0..n {
            dv[j] = -c.gamma * v[j] - c.beta * (dv[j] + eps * x[j]);
        }
    }

    /// `M(t) = 1 + Cβ + γ + ‖A‖θt²β + ‖A‖tβ + βε`, a Lipschitz bound for the field.
    pub fn local_lipschitz_bound(&self, t: f64) -> Result<f64> {
        let c = self.schedule.eval(t)?;
        let eps = if self.tikhonov_enabled { c.eps } else { 0.0 };
        let th = self.schedule.theta();
        Ok(1.0
            + self.bound_constant() * c.beta
            + c.gamma
            + self.a_norm * th * t * t * c.beta
            + self.a_norm * t * c.beta
            + c.beta * eps)
    }
}

impl VectorField for DynamicsConfig {
    fn dim(&self) -> usize {
        self.state_dim()
    }

    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        self.eval_into(t, y, dy)
    }
}

/// Checked evaluation of the field on a [`SystemState`].
pub fn rhs(cfg: &DynamicsConfig, t: f64, y: &SystemState) -> Result<SystemState> {
    let n = cfg.problem.dim_primal();
    let m = cfg.problem.dim_dual();
    if y.x.len() != n || y.lam.len() != m || y.v.len() != n {
        return Err(Error::dim(format!(
            "state dimensions ({}, {}, {}) do not match problem (n = {n}, m = {m})",
            y.x.len(),
            y.lam.len(),
            y.v.len()
        )));
    }
    cfg.schedule.eval(t)?;
    let flat = y.pack();
    if flat.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite { t });
    }
    let mut dy = vec![0.0; flat.len()];
    cfg.eval_into(t, &flat, &mut dy);
    if dy.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite { t });
    }
    SystemState::unpack(&dy, n, m)
}
