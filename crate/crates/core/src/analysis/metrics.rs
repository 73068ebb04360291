//! Per-sample error metrics along a trajectory.

use crate::analysis::lyapunov::{lyapunov_g, lyapunov_gtilde};
use crate::dynamics::SystemState;
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::linalg::{self, dist, dot, norm};
use crate::par::{self, Execution};
use crate::problem::{augmented_lagrangian, Objective, ProblemInstance, SaddlePoint};
use crate::schedule::CoefficientSchedule;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricSample {
    pub t: f64,
    /// `L_σ(x, λ*) − L_σ(x*, λ*)`
    pub lag_gap: f64,
    /// `|f(x) − f(x*)|`
    pub f_gap_abs: f64,
    /// `‖Ax − b‖`
    pub feas: f64,
    /// `‖∇f(x) − ∇f(x*)‖`
    pub grad_err: f64,
    /// `‖x − x̂*‖`
    pub dist_min_norm: f64,
    /// `t‖ẋ‖`
    pub scaled_speed: f64,
    /// `‖(x − x*)/(θt) + ẋ‖`
    pub drift: f64,
    pub g: f64,
    pub gtilde: f64,
}

impl MetricSample {
    pub const CSV_HEADER: &'static str =
        "t,lag_gap,f_gap_abs,feas,grad_err,dist_min_norm,scaled_speed,drift,G,Gtilde";

    pub fn csv_row(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.t,
            self.lag_gap,
            self.f_gap_abs,
            self.feas,
            self.grad_err,
            self.dist_min_norm,
            self.scaled_speed,
            self.drift,
            self.g,
            self.gtilde
        )
    }
}

/// `L_σ(x, λ*) − L_σ(x*, λ*)`.
///
/// For quadratics this is expanded around `x*` so that no large, nearly
/// equal values are subtracted:
/// `½dᵀMd + (Mx* + q + Aᵀλ*)ᵀd + σ/2(‖Ax − b‖² − ‖Ax* − b‖²)` with `d = x − x*`.
pub fn lagrangian_gap(p: &ProblemInstance, x: &[f64], sp: &SaddlePoint) -> Result<f64> {
    match p.objective() {
        Objective::Quadratic(q) => {
            if x.len() != p.dim_primal()
                || sp.primal.len() != x.len()
                || sp.dual.len() != p.dim_dual()
            {
                return Err(Error::dim("lagrangian_gap: dimension mismatch"));
            }
            let n = x.len();
            let d = linalg::sub(x, &sp.primal);
            let mut md = vec![0.0; n];
            linalg::matvec(q.hessian(), &d, &mut md);
            let mut g = vec![0.0; n];
            q.gradient_into(&sp.primal, &mut g);
            let mut atl = vec![0.0; n];
            linalg::matvec_t(p.a(), &sp.dual, &mut atl);
            for (gi, ai) in g.iter_mut().zip(&atl) {
                *gi += ai;
            }
            let r = p.constraint_residual(x);
            let rs = p.constraint_residual(&sp.primal);
            Ok(0.5 * dot(&d, &md) + dot(&g, &d) + 0.5 * p.sigma() * (dot(&r, &r) - dot(&rs, &rs)))
        }
        Objective::Smooth(_) => {
            Ok(augmented_lagrangian(p, x, &sp.dual)?
                - augmented_lagrangian(p, &sp.primal, &sp.dual)?)
        }
    }
}

fn f_gap(p: &ProblemInstance, x: &[f64], xs: &[f64]) -> f64 {
    match p.objective() {
        Objective::Quadratic(q) => {
            let d = linalg::sub(x, xs);
            let mut md = vec![0.0; d.len()];
            linalg::matvec(q.hessian(), &d, &mut md);
            let mut g = vec![0.0; d.len()];
            q.gradient_into(xs, &mut g);
            0.5 * dot(&d, &md) + dot(&g, &d)
        }
        Objective::Smooth(s) => s.value(x) - s.value(xs),
    }
}

/// All metrics at every trajectory sample.
///
/// `s` must be the schedule the trajectory was integrated with (with `ε ≡ 0`
/// for ablated runs).
pub fn compute_metrics(
    traj: &Trajectory,
    p: &ProblemInstance,
    s: &CoefficientSchedule,
    sp: &SaddlePoint,
    x_min_norm: &[f64],
    exec: Execution,
) -> Result<Vec<MetricSample>> {
    let (n, m) = (p.dim_primal(), p.dim_dual());
    if traj.dim() != 2 * n + m {
        return Err(Error::dim(format!(
            "trajectory dimension {} does not match problem (n = {n}, m = {m})",
            traj.dim()
        )));
    }
    if x_min_norm.len() != n {
        return Err(Error::dim("minimal-norm solution has the wrong length"));
    }
    let grad_star = p.objective().gradient(&sp.primal);
    let th = s.theta();
    let rows = par::map_indexed(exec, traj.len(), |i| -> Result<MetricSample> {
        let t = traj.time(i);
        let y = SystemState::unpack(traj.state(i), n, m)?;
        let grad = p.objective().gradient(&y.x);
        let ct = 1.0 / (th * t);
        let drift =
            y.x.iter()
                .zip(&sp.primal)
                .zip(&y.v)
                .map(|((xi, si), vi)| (ct * (xi - si) + vi).powi(2))
                .sum::<f64>()
                .sqrt();
        Ok(MetricSample {
            t,
            lag_gap: lagrangian_gap(p, &y.x, sp)?,
            f_gap_abs: f_gap(p, &y.x, &sp.primal).abs(),
            feas: norm(&p.constraint_residual(&y.x)),
            grad_err: dist(&grad, &grad_star),
            dist_min_norm: dist(&y.x, x_min_norm),
            scaled_speed: t * norm(&y.v),
            drift,
            g: lyapunov_g(t, &y, p, s, sp)?,
            gtilde: lyapunov_gtilde(t, &y, p, s, sp)?,
        })
    });
    rows.into_iter().collect()
}

/// `metrics.csv` contents: header plus one row per sample.
pub fn metrics_csv(rows: &[MetricSample]) -> String {
    let mut out = String::with_capacity(rows.len() * 200 + 80);
    out.push_str(MetricSample::CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}
