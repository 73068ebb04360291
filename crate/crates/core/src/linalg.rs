//! Small dense linear-algebra helpers on slices and `nalgebra` matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::rng::PortableRng;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `out = A x` for a column-major `A`.
pub fn matvec(a: &DMatrix<f64>, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(a.ncols(), x.len());
    debug_assert_eq!(a.nrows(), out.len());
    out.iter_mut().for_each(|o| *o = 0.0);
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        for (o, aij) in out.iter_mut().zip(a.column(j).iter()) {
            *o += aij * xj;
        }
    }
}

/// `out = Aᵀ y` for a column-major `A`.
pub fn matvec_t(a: &DMatrix<f64>, y: &[f64], out: &mut [f64]) {
    debug_assert_eq!(a.nrows(), y.len());
    debug_assert_eq!(a.ncols(), out.len());
    for (j, o) in out.iter_mut().enumerate() {
        *o = dot(a.column(j).as_slice(), y);
    }
}

pub fn to_row_major(a: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len());
    for i in 0..a.nrows() {
        out.extend(a.row(i).iter());
    }
    out
}

/// Stopping rule for [`largest_eigenvalue`].
#[derive(Clone, Copy, Debug)]
pub struct PowerIteration {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for PowerIteration {
    fn default() -> Self {
        PowerIteration {
            rel_tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

/// Largest eigenvalue of a symmetric positive semi-definite operator given
/// only through its action `apply(v, out)`.
///
/// Converged when successive Rayleigh quotients agree to `rel_tol`.
pub fn largest_eigenvalue<F>(mut apply: F, dim: usize, opts: PowerIteration) -> Result<f64>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if dim == 0 {
        return Ok(0.0);
    }
    // Fixed seed: deterministic, and almost surely not orthogonal to the top eigenvector.
    let mut rng = PortableRng::new(0x005e_ed0f_9077);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.standard_normal()).collect();
    let n0 = norm(&v);
    v.iter_mut().for_each(|x| *x /= n0);

    let mut w = vec![0.0; dim];
    let mut rayleigh = f64::NAN;
    for it in 0..opts.max_iter {
        apply(&v, &mut w);
        let next = dot(&v, &w);
        let wn = norm(&w);
        if wn == 0.0 {
            return Ok(0.0);
        }
        if !wn.is_finite() {
            return Err(Error::NoConvergence {
                iterations: it,
                rayleigh: next,
            });
        }
        if (next - rayleigh).abs() <= opts.rel_tol * next.abs() {
            return Ok(next);
        }
        rayleigh = next;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wn;
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        rayleigh,
    })
}

/// Largest eigenvalue of a symmetric PSD matrix.
pub fn sym_largest_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(Error::dim(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    largest_eigenvalue(
        |v, out| matvec(m, v, out),
        m.nrows(),
        PowerIteration::default(),
    )
}

/// Operator norms `(‖A‖, ‖AᵀA‖)` by power iteration on the Gram operator.
pub fn operator_norms(a: &DMatrix<f64>) -> Result<(f64, f64)> {
    let mut tmp = vec![0.0; a.nrows()];
    let gram = largest_eigenvalue(
        |v, out| {
            matvec(a, v, &mut tmp);
            matvec_t(a, &tmp, out);
        },
        a.ncols(),
        PowerIteration::default(),
    )?;
    Ok((gram.max(0.0).sqrt(), gram))
}

/// Relative cut-off below which singular values are treated as zero.
pub fn rank_tolerance(svd_values: &DVector<f64>, rows: usize, cols: usize) -> f64 {
    let smax = svd_values.iter().cloned().fold(0.0, f64::max);
    rows.max(cols) as f64 * f64::EPSILON * smax.max(f64::MIN_POSITIVE)
}

/// Eigen-decomposition of the symmetric embedding `[[0, A], [Aᵀ, 0]]`.
///
/// Its eigenvalues are `±σᵢ` (plus `|r − c|` zeros) with eigenvectors
/// `(uᵢ, ±vᵢ)/√2`. nalgebra's `SVD` loses accuracy on some small symmetric
/// inputs (reconstruction errors near 1e-3), its symmetric eigensolver does not.
fn embedded_eigen(a: &DMatrix<f64>) -> nalgebra::SymmetricEigen<f64, nalgebra::Dyn> {
    let (r, c) = a.shape();
    let mut j = DMatrix::zeros(r + c, r + c);
    j.view_mut((0, r), (r, c)).copy_from(a);
    j.view_mut((r, 0), (c, r)).copy_from(&a.transpose());
    j.symmetric_eigen()
}

/// Singular values of `a` in decreasing order.
pub fn singular_values(a: &DMatrix<f64>) -> DVector<f64> {
    let (r, c) = a.shape();
    if r == 0 || c == 0 {
        return DVector::zeros(0);
    }
    let mut s: Vec<f64> = embedded_eigen(a)
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .collect();
    s.sort_by(|x, y| y.total_cmp(x));
    // Each σ appears twice; keep one of each pair.
    DVector::from_iterator(r.min(c), s.chunks(2).take(r.min(c)).map(|p| p[0]))
}

/// Minimum-norm least-squares solution of `A x = rhs` and the numerical rank of `A`.
pub fn lstsq_min_norm(a: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<(DVector<f64>, usize)> {
    let (r, c) = a.shape();
    if rhs.len() != r {
        return Err(Error::dim(format!(
            "least squares: matrix has {r} rows but rhs has length {}",
            rhs.len()
        )));
    }
    if r == 0 || c == 0 {
        return Ok((DVector::zeros(c), 0));
    }
    let eig = embedded_eigen(a);
    let smax = eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let tol = r.max(c) as f64 * f64::EPSILON * smax.max(f64::MIN_POSITIVE);
    let mut x = DVector::zeros(c);
    let mut rank = 0;
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l > tol {
            let w = eig.eigenvectors.column(k);
            // u = √2 w_top, v = √2 w_bottom, x += v uᵀrhs / σ.
            let coef = 2.0 * w.rows(0, r).dot(rhs) / l;
            x += w.rows(r, c) * coef;
            rank += 1;
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solver(
            "least squares produced non-finite values".into(),
        ));
    }
    Ok((x, rank))
}

/// Orthonormal basis (as columns) of the null space of `a`.
pub fn null_space(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = a.shape();
    if c == 0 {
        return DMatrix::zeros(0, 0);
    }
    if r == 0 {
        return DMatrix::identity(c, c);
    }
    let eig = embedded_eigen(a);
    let smax = eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let tol = r.max(c) as f64 * f64::EPSILON * smax.max(f64::MIN_POSITIVE);
    // The zero eigenspace is null(Aᵀ) × {0} ⊕ {0} × null(A), so the bottom
    // blocks of its eigenvectors sum to the projector onto null(A).
    let mut proj = DMatrix::zeros(c, c);
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l.abs() <= tol {
            let v = eig.eigenvectors.column(k).rows(r, c).into_owned();
            proj += &v * v.transpose();
        }
    }
    let pe = proj.symmetric_eigen();
    let cols: Vec<_> = (0..c)
        .filter(|&k| pe.eigenvalues[k] > 0.5)
        .map(|k| pe.eigenvectors.column(k).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(c, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}
