//! The Tikhonov path `x_ε = argmin_x L_σ(x, λ̂*) + ε/2 ‖x‖²`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::par::{self, Execution};
use crate::problem::{grad_x_lagrangian, Objective, ProblemInstance};

const TOL: f64 = 1e-10;
const MAX_GD_ITER: usize = 1_000_000;

/// `x_ε` solving `∇_x L_σ(x, λ̂*) + εx = 0`.
pub fn tikhonov_point(p: &ProblemInstance, lam_hat: &[f64], eps: f64) -> Result<Vec<f64>> {
    tikhonov_point_from(p, lam_hat, eps, &vec![0.0; p.dim_primal()])
}

/// As [`tikhonov_point`]; `start` seeds the iterative solver used for
/// non-quadratic objectives.
pub fn tikhonov_point_from(
    p: &ProblemInstance,
    lam_hat: &[f64],
    eps: f64,
    start: &[f64],
) -> Result<Vec<f64>> {
    if !(eps > 0.0) {
        return Err(Error::arg(format!(
            "Tikhonov parameter must be > 0, got {eps}"
        )));
    }
    if lam_hat.len() != p.dim_dual() || start.len() != p.dim_primal() {
        return Err(Error::dim("tikhonov_point: dimension mismatch"));
    }
    let n = p.dim_primal();
    let a = p.a();
    let sigma = p.sigma();
    match p.objective() {
        Objective::Quadratic(q) => {
            // (M + σAᵀA + εI) x = −q − Aᵀλ̂ + σAᵀb
            let h: DMatrix<f64> =
                q.hessian() + a.transpose() * a * sigma + DMatrix::identity(n, n) * eps;
            let lam = DVector::from_column_slice(lam_hat);
            let rhs: DVector<f64> =
                -q.linear() - a.transpose() * &lam + a.transpose() * p.b() * sigma;
            let chol = h
                .clone()
                .cholesky()
                .ok_or_else(|| Error::Solver("Tikhonov system is not positive definite".into()))?;
            let mut x = chol.solve(&rhs);
            let r = &rhs - &h * &x;
            x += chol.solve(&r);
            let resid = (&rhs - &h * &x).norm();
            let scale = 1f64.max(rhs.norm() + h.norm() * x.norm());
            if resid > TOL * scale {
                return Err(Error::Solver(format!(
                    "Tikhonov solve residual {resid:e} exceeds tolerance"
                )));
            }
            Ok(x.iter().copied().collect())
        }
        Objective::Smooth(_) => {
            let (_, ata) = crate::linalg::operator_norms(a)?;
            let lip = p.objective().lipschitz()? + sigma * ata + eps;
            let step = 1.0 / lip;
            let mut x = start.to_vec();
            for _ in 0..MAX_GD_ITER {
                let mut g = grad_x_lagrangian(p, &x, lam_hat)?;
                for (gi, xi) in g.iter_mut().zip(&x) {
                    *gi += eps * xi;
                }
                if norm(&g) <= TOL {
                    return Ok(x);
                }
                for (xi, gi) in x.iter_mut().zip(&g) {
                    *xi -= step * gi;
                }
            }
            log::warn!("Tikhonov gradient descent hit {MAX_GD_ITER} iterations at eps = {eps:e}");
            Ok(x)
        }
    }
}

/// `x_ε` for each `ε` in `eps`.
pub fn tikhonov_path(
    p: &ProblemInstance,
    lam_hat: &[f64],
    eps: &[f64],
    exec: Execution,
) -> Result<Vec<Vec<f64>>> {
    par::map_indexed(exec, eps.len(), |i| tikhonov_point(p, lam_hat, eps[i]))
        .into_iter()
        .collect()
}
