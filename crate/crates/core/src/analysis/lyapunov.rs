//! The energy functions `G`, `G̃` and `Ĝ` and the audit of
//! `t²G̃(t) ≤ t0²G̃(t0) + (‖x*‖²/(2θ)) ∫_{t0}^t sβ(s)ε(s) ds`.

use crate::analysis::metrics::lagrangian_gap;
use crate::dynamics::SystemState;
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::linalg::{dist, dot, norm};
use crate::par::{self, Execution};
use crate::problem::{augmented_lagrangian, ProblemInstance, SaddlePoint};
use crate::schedule::{audit_conditions, default_audit_grid, CoefficientSchedule};

/// Slack for certifying the decay inequality, relative to `1 + t0²G̃(t0)`.
pub const DECAY_SLACK: f64 = 1e-4;

fn check_state(p: &ProblemInstance, y: &SystemState) -> Result<()> {
    let (n, m) = (p.dim_primal(), p.dim_dual());
    if y.x.len() != n || y.v.len() != n || y.lam.len() != m {
        return Err(Error::dim(format!(
            "state dimensions ({}, {}, {}) do not match problem (n = {n}, m = {m})",
            y.x.len(),
            y.lam.len(),
            y.v.len()
        )));
    }
    Ok(())
}

/// `θt²β(gap + ε/2‖x‖²) + c/2‖x − x*‖² + ½‖η(x − x*) + √θ t ẋ‖² + ½‖λ − λ*‖²`
/// with `c = tγ − (1 + θ)/θ` and `η = 1/√θ`.
pub fn lyapunov_g(
    t: f64,
    y: &SystemState,
    p: &ProblemInstance,
    s: &CoefficientSchedule,
    sp: &SaddlePoint,
) -> Result<f64> {
    check_state(p, y)?;
    let k = s.eval(t)?;
    let th = s.theta();
    let gap = lagrangian_gap(p, &y.x, sp)?;
    let c = t * k.gamma - (1.0 + th) / th;
    let eta = 1.0 / th.sqrt();
    let b = th.sqrt() * t;
    let dx2 = dist(&y.x, &sp.primal).powi(2);
    let mixed: f64 =
        y.x.iter()
            .zip(&sp.primal)
            .zip(&y.v)
            .map(|((xi, si), vi)| (eta * (xi - si) + b * vi).powi(2))
            .sum();
    let dl2 = dist(&y.lam, &sp.dual).powi(2);
    Ok(th * t * t * k.beta * (gap + 0.5 * k.eps * dot(&y.x, &y.x))
        + 0.5 * c * dx2
        + 0.5 * mixed
        + 0.5 * dl2)
}

/// `β(gap + ε/2‖x‖²) + ½‖(x − x*)/(θt) + ẋ‖² + ‖λ − λ*‖²/(2θt²) + d/2‖x − x*‖²`
/// with `d = (θtγ − θ − 1)/(θ²t²)`.
pub fn lyapunov_gtilde(
    t: f64,
    y: &SystemState,
    p: &ProblemInstance,
    s: &CoefficientSchedule,
    sp: &SaddlePoint,
) -> Result<f64> {
    check_state(p, y)?;
    let k = s.eval(t)?;
    let gap = lagrangian_gap(p, &y.x, sp)?;
    Ok(gtilde_terms(
        t,
        y,
        s.theta(),
        k.gamma,
        k.beta,
        k.eps,
        gap,
        &sp.primal,
        &sp.dual,
        0.0,
    ))
}

#[allow(clippy::too_many_arguments)]
fn gtilde_terms(
    t: f64,
    y: &SystemState,
    th: f64,
    gamma: f64,
    beta: f64,
    eps: f64,
    gap: f64,
    xref: &[f64],
    lref: &[f64],
    eps_ref_norm2: f64,
) -> f64 {
    let ct = 1.0 / (th * t);
    let d = (th * t * gamma - th - 1.0) / (th * th * t * t);
    let drift2: f64 =
        y.x.iter()
            .zip(xref)
            .zip(&y.v)
            .map(|((xi, si), vi)| (ct * (xi - si) + vi).powi(2))
            .sum();
    let dx2 = dist(&y.x, xref).powi(2);
    let dl2 = dist(&y.lam, lref).powi(2);
    beta * (gap + 0.5 * eps * (dot(&y.x, &y.x) - eps_ref_norm2))
        + 0.5 * drift2
        + dl2 / (2.0 * th * t * t)
        + 0.5 * d * dx2
}

/// `Ĝ`: as `G̃` but centred at the minimal-norm pair `(x̂*, λ̂*)`, with the
/// regularisation term `ε/2(‖x‖² − ‖x̂*‖²)`.
pub fn lyapunov_ghat(
    t: f64,
    y: &SystemState,
    p: &ProblemInstance,
    s: &CoefficientSchedule,
    min_norm: (&[f64], &[f64]),
) -> Result<f64> {
    check_state(p, y)?;
    let (xhat, lhat) = min_norm;
    let k = s.eval(t)?;
    let gap = augmented_lagrangian(p, &y.x, lhat)? - augmented_lagrangian(p, xhat, lhat)?;
    Ok(gtilde_terms(
        t,
        y,
        s.theta(),
        k.gamma,
        k.beta,
        k.eps,
        gap,
        xhat,
        lhat,
        dot(xhat, xhat),
    ))
}

/// Result of checking the decay inequality along a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayAudit {
    /// `max_t (t²G̃(t) − RHS(t)) / (1 + t0²G̃(t0))`.
    pub worst: f64,
    pub worst_t: f64,
    /// Whether the schedule satisfies the hypotheses that guarantee the inequality.
    pub conditions_pass: bool,
    /// `conditions_pass && worst <= DECAY_SLACK`.
    pub certified: bool,
    pub samples: usize,
}

/// Evaluate both sides of the decay inequality at every trajectory sample.
///
/// If the schedule fails the admissibility audit the numbers are still
/// computed but the result is never certified.
pub fn audit_decay_inequality(
    traj: &Trajectory,
    p: &ProblemInstance,
    s: &CoefficientSchedule,
    sp: &SaddlePoint,
    exec: Execution,
) -> Result<DecayAudit> {
    if traj.is_empty() {
        return Err(Error::arg("empty trajectory"));
    }
    let (n, m) = (p.dim_primal(), p.dim_dual());
    let conditions_pass = audit_conditions(s, &default_audit_grid(s.t0()))?.passes();
    let th = s.theta();
    let xs2 = norm(&sp.primal).powi(2);
    let t_first = traj.time(0);
    let i_first = s.weighted_tikhonov_integral(t_first)?;

    let t2g = |i: usize| -> Result<f64> {
        let t = traj.time(i);
        let y = SystemState::unpack(traj.state(i), n, m)?;
        Ok(t * t * lyapunov_gtilde(t, &y, p, s, sp)?)
    };
    let base = t2g(0)?;
    let norm_by = 1.0 + base.abs();

    let excess = par::map_indexed(exec, traj.len(), |i| -> Result<f64> {
        let t = traj.time(i);
        let lhs = t2g(i)?;
        let integral = s.weighted_tikhonov_integral(t)? - i_first;
        let rhs = base + xs2 / (2.0 * th) * integral;
        Ok((lhs - rhs) / norm_by)
    });
    let mut worst = f64::NEG_INFINITY;
    let mut worst_t = t_first;
    for (i, e) in excess.into_iter().enumerate() {
        let e = e?;
        if e > worst {
            worst = e;
            worst_t = traj.time(i);
        }
    }
    Ok(DecayAudit {
        worst,
        worst_t,
        conditions_pass,
        certified: conditions_pass && worst <= DECAY_SLACK,
        samples: traj.len(),
    })
}
