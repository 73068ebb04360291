//! Equality-constrained convex problems `min f(x) s.t. Ax = b`, the augmented
//! Lagrangian `L_σ(x, λ) = f(x) + ⟨λ, Ax − b⟩ + σ/2 ‖Ax − b‖²` and reference
//! solutions.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm};

/// Tolerance for saddle-point residuals, scaled by the size of the terms involved.
pub const TOL_KKT: f64 = 1e-8;

/// Feasibility tolerance for `Ax = b`, relative to `max(1, ‖b‖)`.
pub const TOL_FEASIBLE: f64 = 1e-8;

/// A user-supplied smooth convex objective.
///
/// Implementations must declare an upper bound on the Lipschitz constant of
/// the gradient; it feeds step-size and bound computations.
pub trait SmoothObjective: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient_into(&self, x: &[f64], grad: &mut [f64]);
    fn lipschitz_estimate(&self) -> f64;
}

/// `f(x) = ½ xᵀMx + qᵀx` with `M` symmetric positive semi-definite.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticObjective {
    hessian: DMatrix<f64>,
    linear: DVector<f64>,
}

impl QuadraticObjective {
    pub fn new(hessian: DMatrix<f64>, linear: DVector<f64>) -> Result<Self> {
        let n = hessian.nrows();
        if hessian.ncols() != n {
            return Err(Error::dim(format!(
                "hessian must be square, got {}x{}",
                n,
                hessian.ncols()
            )));
        }
        if linear.len() != n {
            return Err(Error::dim(format!(
                "linear term has length {} but hessian is {n}x{n}",
                linear.len()
            )));
        }
        if hessian.iter().chain(linear.iter()).any(|v| !v.is_finite()) {
            return Err(Error::arg("quadratic objective has non-finite entries"));
        }
        if n > 0 {
            let scale = hessian.amax().max(f64::MIN_POSITIVE);
            let asym = (&hessian - hessian.transpose()).amax();
            if asym > 1e-12 * scale {
                return Err(Error::arg(format!(
                    "hessian is not symmetric (max |M - Mᵀ| = {asym:e})"
                )));
            }
            let eig = SymmetricEigen::new(hessian.clone()).eigenvalues;
            let spectral = eig.amax();
            let min = eig.min();
            if min < -1e-8 * spectral {
                return Err(Error::arg(format!(
                    "hessian is not positive semi-definite (smallest eigenvalue {min:e})"
                )));
            }
        }
        Ok(QuadraticObjective { hessian, linear })
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.hessian
    }

    pub fn linear(&self) -> &DVector<f64> {
        &self.linear
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let mut mx = vec![0.0; x.len()];
        linalg::matvec(&self.hessian, x, &mut mx);
        0.5 * dot(x, &mx) + dot(self.linear.as_slice(), x)
    }

    pub fn gradient_into(&self, x: &[f64], grad: &mut [f64]) {
        linalg::matvec(&self.hessian, x, grad);
        for (g, q) in grad.iter_mut().zip(self.linear.iter()) {
            *g += q;
        }
    }
}

/// The objective `f` of a problem instance.
#[derive(Clone, Debug)]
pub enum Objective {
    Quadratic(QuadraticObjective),
    Smooth(Arc<dyn SmoothObjective>),
}

impl Objective {
    pub fn dim(&self) -> usize {
        match self {
            Objective::Quadratic(q) => q.dim(),
            Objective::Smooth(s) => s.dim(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Objective::Quadratic(q) => q.value(x),
            Objective::Smooth(s) => s.value(x),
        }
    }

    pub fn gradient_into(&self, x: &[f64], grad: &mut [f64]) {
        match self {
            Objective::Quadratic(q) => q.gradient_into(x, grad),
            Objective::Smooth(s) => s.gradient_into(x, grad),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.gradient_into(x, &mut g);
        g
    }

    pub fn as_quadratic(&self) -> Option<&QuadraticObjective> {
        match self {
            Objective::Quadratic(q) => Some(q),
            Objective::Smooth(_) => None,
        }
    }

    /// Lipschitz constant of `∇f`: exact for quadratics, declared otherwise.
    pub fn lipschitz(&self) -> Result<f64> {
        match self {
            Objective::Quadratic(q) => lipschitz_constant(q),
            Objective::Smooth(s) => Ok(s.lipschitz_estimate()),
        }
    }
}

/// `min f(x) s.t. Ax = b` together with the penalty `σ`.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    objective: Objective,
    a: DMatrix<f64>,
    b: DVector<f64>,
    sigma: f64,
}

impl ProblemInstance {
    pub fn new(objective: Objective, a: DMatrix<f64>, b: DVector<f64>, sigma: f64) -> Result<Self> {
        let n = objective.dim();
        if a.ncols() != n {
            return Err(Error::dim(format!(
                "constraint matrix has {} columns but the objective has dimension {n}",
                a.ncols()
            )));
        }
        if b.len() != a.nrows() {
            return Err(Error::dim(format!(
                "constraint matrix has {} rows but rhs has length {}",
                a.nrows(),
                b.len()
            )));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::arg(format!(
                "penalty sigma must be >= 0, got {sigma}"
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::arg("constraints have non-finite entries"));
        }
        let (x, _) = linalg::lstsq_min_norm(&a, &b)?;
        let residual = (&a * &x - &b).norm();
        if residual > TOL_FEASIBLE * b.norm().max(1.0) {
            return Err(Error::arg(format!(
                "constraints Ax = b are infeasible (least-squares residual {residual:e})"
            )));
        }
        Ok(ProblemInstance {
            objective,
            a,
            b,
            sigma,
        })
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn dim_primal(&self) -> usize {
        self.a.ncols()
    }

    pub fn dim_dual(&self) -> usize {
        self.a.nrows()
    }

    /// `Ax − b`.
    pub fn constraint_residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.dim_dual()];
        linalg::matvec(&self.a, x, &mut r);
        for (ri, bi) in r.iter_mut().zip(self.b.iter()) {
            *ri -= bi;
        }
        r
    }

    fn check_dims(&self, x: &[f64], lam: &[f64]) -> Result<()> {
        if x.len() != self.dim_primal() {
            return Err(Error::dim(format!(
                "x has length {} but the problem has n = {}",
                x.len(),
                self.dim_primal()
            )));
        }
        if lam.len() != self.dim_dual() {
            return Err(Error::dim(format!(
                "lambda has length {} but the problem has m = {}",
                lam.len(),
                self.dim_dual()
            )));
        }
        Ok(())
    }

    /// Parse the `key = value` problem-file format (see the README).
    pub fn from_text(text: &str) -> Result<Self> {
        let entries = parse_entries(text)?;
        let get = |key: &str| -> Result<&Vec<f64>> {
            entries
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v)
                .ok_or_else(|| Error::Config(format!("problem file is missing key `{key}`")))
        };
        let scalar_usize = |key: &str| -> Result<usize> {
            let v = get(key)?;
            match v.as_slice() {
                [x] if *x >= 0.0 && x.fract() == 0.0 => Ok(*x as usize),
                _ => Err(Error::Config(format!(
                    "`{key}` must be a single non-negative integer"
                ))),
            }
        };
        let n = scalar_usize("n")?;
        let m = scalar_usize("m")?;
        let sigma = match get("sigma")?.as_slice() {
            [s] => *s,
            _ => return Err(Error::Config("`sigma` must be a single number".into())),
        };
        let sized = |key: &str, len: usize| -> Result<&Vec<f64>> {
            let v = get(key)?;
            if v.len() != len {
                return Err(Error::Config(format!(
                    "`{key}` has {} entries, expected {len}",
                    v.len()
                )));
            }
            Ok(v)
        };
        let mm = DMatrix::from_row_slice(n, n, sized("M", n * n)?);
        let q = DVector::from_column_slice(sized("q", n)?);
        let a = DMatrix::from_row_slice(m, n, sized("A", m * n)?);
        let b = DVector::from_column_slice(sized("b", m)?);
        let objective = Objective::Quadratic(QuadraticObjective::new(mm, q)?);
        ProblemInstance::new(objective, a, b, sigma)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text)
    }

    /// Serialize a quadratic instance in the problem-file format.
    pub fn to_text(&self) -> Result<String> {
        let quad = self
            .objective
            .as_quadratic()
            .ok_or_else(|| Error::arg("only quadratic problems can be written to a file"))?;
        let join = |vals: &mut dyn Iterator<Item = f64>| {
            vals.map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" ")
        };
        let (m, n) = (self.dim_dual(), self.dim_primal());
        let mut out = String::new();
        out.push_str(&format!("n = {n}\nm = {m}\nsigma = {:e}\n", self.sigma));
        out.push_str(&format!(
            "M = {}\n",
            join(&mut linalg::to_row_major(quad.hessian()).into_iter())
        ));
        out.push_str(&format!(
            "q = {}\n",
            join(&mut quad.linear().iter().copied())
        ));
        out.push_str(&format!(
            "A = {}\n",
            join(&mut linalg::to_row_major(&self.a).into_iter())
        ));
        out.push_str(&format!("b = {}\n", join(&mut self.b.iter().copied())));
        Ok(out)
    }
}

fn parse_entries(text: &str) -> Result<Vec<(String, Vec<f64>)>> {
    let mut entries: Vec<(String, Vec<f64>)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = match line.split_once('=') {
            Some((k, v)) => {
                let k = k.trim().to_string();
                if !matches!(k.as_str(), "n" | "m" | "sigma" | "M" | "q" | "A" | "b") {
                    return Err(Error::Config(format!(
                        "unknown problem-file key `{k}` on line {}",
                        lineno + 1
                    )));
                }
                if entries.iter().any(|(e, _)| *e == k) {
                    return Err(Error::Config(format!("duplicate key `{k}`")));
                }
                entries.push((k.clone(), Vec::new()));
                (k, v)
            }
            // Continuation line for long vectors.
            None => match entries.last() {
                Some((k, _)) => (k.clone(), line),
                None => {
                    return Err(Error::Config(format!(
                        "line {} has no `key =` prefix",
                        lineno + 1
                    )))
                }
            },
        };
        let slot = &mut entries.last_mut().expect("entry pushed above").1;
        for tok in rest.split(|c: char| c == ',' || c.is_whitespace()) {
            if tok.is_empty() {
                continue;
            }
            let v: f64 = tok.parse().map_err(|_| {
                Error::Config(format!("cannot parse `{tok}` as a number for key `{key}`"))
            })?;
            slot.push(v);
        }
    }
    Ok(entries)
}

/// A primal-dual pair `(x*, λ*)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SaddlePoint {
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
}

/// `f(x) + ⟨λ, Ax − b⟩ + σ/2 ‖Ax − b‖²`.
pub fn augmented_lagrangian(p: &ProblemInstance, x: &[f64], lam: &[f64]) -> Result<f64> {
    p.check_dims(x, lam)?;
    let r = p.constraint_residual(x);
    Ok(p.objective.value(x) + dot(lam, &r) + 0.5 * p.sigma * dot(&r, &r))
}

/// `∇f(x) + Aᵀλ + σAᵀ(Ax − b)`.
pub fn grad_x_lagrangian(p: &ProblemInstance, x: &[f64], lam: &[f64]) -> Result<Vec<f64>> {
    p.check_dims(x, lam)?;
    let r = p.constraint_residual(x);
    let w: Vec<f64> = lam.iter().zip(&r).map(|(l, ri)| l + p.sigma * ri).collect();
    let mut g = p.objective.gradient(x);
    let mut atw = vec![0.0; x.len()];
    linalg::matvec_t(&p.a, &w, &mut atw);
    for (gi, ai) in g.iter_mut().zip(&atw) {
        *gi += ai;
    }
    Ok(g)
}

/// Stationarity and feasibility residuals `(‖Mx + q + Aᵀλ‖, ‖Ax − b‖)`.
pub fn kkt_residuals(
    q: &QuadraticObjective,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    sp: &SaddlePoint,
) -> (f64, f64) {
    let x = DVector::from_column_slice(&sp.primal);
    let lam = DVector::from_column_slice(&sp.dual);
    let stat = (q.hessian() * &x + q.linear() + a.transpose() * &lam).norm();
    let feas = (a * &x - b).norm();
    (stat, feas)
}

/// Solve `Mx + q + Aᵀλ = 0`, `Ax = b`.
///
/// A nonsingular KKT matrix is solved by LU with one refinement step; a
/// singular one falls back to the minimum-norm least-squares solution.
pub fn kkt_saddle_point(
    q: &QuadraticObjective,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
) -> Result<SaddlePoint> {
    let n = q.dim();
    let m = a.nrows();
    if a.ncols() != n || b.len() != m {
        return Err(Error::dim(format!(
            "KKT: objective has n = {n}, A is {}x{}, b has length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let dim = n + m;
    let mut k = DMatrix::zeros(dim, dim);
    k.view_mut((0, 0), (n, n)).copy_from(q.hessian());
    k.view_mut((0, n), (n, m)).copy_from(&a.transpose());
    k.view_mut((n, 0), (m, n)).copy_from(a);
    let mut rhs = DVector::zeros(dim);
    rhs.rows_mut(0, n).copy_from(&(-q.linear()));
    rhs.rows_mut(n, m).copy_from(b);

    let sv = linalg::singular_values(&k);
    let tol = linalg::rank_tolerance(&sv, dim, dim);
    let rank = sv.iter().filter(|&&s| s > tol).count();

    let z = if rank == dim {
        let lu = k.clone().lu();
        let mut z = lu
            .solve(&rhs)
            .ok_or_else(|| Error::Solver("KKT matrix is singular".into()))?;
        let r = &rhs - &k * &z;
        if let Some(dz) = lu.solve(&r) {
            z += dz;
        }
        z
    } else {
        log::warn!(
            "KKT matrix is rank deficient (rank {rank} of {dim}); using minimum-norm least squares"
        );
        linalg::lstsq_min_norm(&k, &rhs)?.0
    };

    let sp = SaddlePoint {
        primal: z.rows(0, n).iter().copied().collect(),
        dual: z.rows(n, m).iter().copied().collect(),
    };
    let (stat, feas) = kkt_residuals(q, a, b, &sp);
    let xn = norm(&sp.primal);
    let ln = norm(&sp.dual);
    let stat_scale = 1f64.max(q.hessian().norm() * xn + q.linear().norm() + a.norm() * ln);
    let feas_scale = 1f64.max(a.norm() * xn + b.norm());
    if stat > TOL_KKT * stat_scale || feas > TOL_KKT * feas_scale {
        return Err(Error::Solver(format!(
            "KKT system is inconsistent: rank defect {} (rank {rank} of {dim}), \
             stationarity residual {stat:e}, feasibility residual {feas:e}",
            dim - rank
        )));
    }
    Ok(sp)
}

/// The minimal-norm primal solution `x̂*` with a dual partner `λ̂*`.
#[derive(Clone, Debug, PartialEq)]
pub struct MinNormSolution {
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    /// `‖Aᵀλ̂* + ∇f(x̂*)‖`, the least-squares residual of the dual solve.
    pub dual_residual: f64,
    /// False when obtained by Tikhonov continuation (non-quadratic objectives).
    pub exact: bool,
}

/// Project the origin onto the primal solution set `S`.
///
/// For quadratics `S = x* + null([A; M])`, so `x̂* = x* − ZZᵀx*` with `Z` an
/// orthonormal null-space basis. `λ̂*` is the least-squares solution of
/// `Aᵀλ = −(Mx̂* + q)`.
pub fn minimal_norm_solution(p: &ProblemInstance, hint: &SaddlePoint) -> Result<MinNormSolution> {
    p.check_dims(&hint.primal, &hint.dual)?;
    let n = p.dim_primal();
    let m = p.dim_dual();
    match p.objective() {
        Objective::Quadratic(q) => {
            let mut stacked = DMatrix::zeros(m + n, n);
            stacked.view_mut((0, 0), (m, n)).copy_from(&p.a);
            stacked.view_mut((m, 0), (n, n)).copy_from(q.hessian());
            let z = linalg::null_space(&stacked);
            let xs = DVector::from_column_slice(&hint.primal);
            let xhat = &xs - &z * (z.transpose() * &xs);
            let g = q.hessian() * &xhat + q.linear();
            let (lam, _) = linalg::lstsq_min_norm(&p.a.transpose(), &(-&g))?;
            let dual_residual = (p.a.transpose() * &lam + &g).norm();
            Ok(MinNormSolution {
                primal: xhat.iter().copied().collect(),
                dual: lam.iter().copied().collect(),
                dual_residual,
                exact: true,
            })
        }
        Objective::Smooth(_) => {
            log::warn!("non-quadratic objective: minimal-norm solution approximated by Tikhonov continuation");
            let mut x = hint.primal.clone();
            for k in 1..=8 {
                let eps = 10f64.powi(-k);
                x = crate::analysis::tikhonov::tikhonov_point_from(p, &hint.dual, eps, &x)?;
            }
            let g = grad_x_lagrangian(p, &x, &hint.dual)?;
            Ok(MinNormSolution {
                primal: x,
                dual: hint.dual.clone(),
                dual_residual: norm(&g),
                exact: false,
            })
        }
    }
}

/// Largest eigenvalue of the hessian, by power iteration.
pub fn lipschitz_constant(q: &QuadraticObjective) -> Result<f64> {
    linalg::sym_largest_eigenvalue(q.hessian())
}
