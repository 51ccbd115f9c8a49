use nalgebra::DVector;

use super::{check_finite, solve_upper_triangular, householder_qr, Matrix};
use crate::error::{contract, Result};

/// Default multiplier in the rank threshold `tol_factor * max(m, n) * eps * scale`.
pub const DEFAULT_RANK_TOL_FACTOR: f64 = 1.0;

/// Thin singular value decomposition `A = U diag(sigma) V^T`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    /// Nonincreasing.
    pub singular_values: DVector<f64>,
    pub v: Matrix,
}

/// Thin SVD with singular values sorted in nonincreasing order.
pub fn svd(a: &Matrix) -> Result<Svd> {
    check_finite(a)?;
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return Ok(Svd {
            u: Matrix::zeros(m, 0),
            singular_values: DVector::zeros(0),
            v: Matrix::zeros(n, 0),
        });
    }
    // nalgebra's bidiagonal SVD loses accuracy on nearly rank-deficient
    // inputs (reconstruction errors near 1e-3 observed), so use one-sided Jacobi.
    let (u_raw, sv, v_raw) = if m >= n {
        jacobi_svd(a.clone())
    } else {
        let (v, s, u) = jacobi_svd(a.transpose());
        (u, s, v)
    };
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let mut u = Matrix::zeros(m, k);
    let mut v = Matrix::zeros(n, k);
    let mut s = DVector::zeros(k);
    for (dst, &src) in order.iter().enumerate() {
        u.set_column(dst, &u_raw.column(src));
        v.set_column(dst, &v_raw.column(src));
        s[dst] = sv[src];
    }
    Ok(Svd {
        u,
        singular_values: s,
        v,
    })
}

/// Hestenes one-sided Jacobi on a tall `m x n` matrix (`m >= n`).
/// Returns `(U, sigma, V)` unsorted; columns of `U` for zero singular values
/// are completed to an orthonormal set.
fn jacobi_svd(mut w: Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let (m, n) = w.shape();
    let mut v = Matrix::identity(n, n);
    let eps = f64::EPSILON;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut w, &mut v] {
                    for i in 0..mat.nrows() {
                        let (x, y) = (mat[(i, p)], mat[(i, q)]);
                        mat[(i, p)] = c * x - s * y;
                        mat[(i, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let mut u = Matrix::zeros(m, n);
    let mut missing = Vec::new();
    for j in 0..n {
        if sigma[j] > smax * eps * m as f64 && sigma[j] > 0.0 {
            u.set_column(j, &(w.column(j) / sigma[j]));
        } else {
            missing.push(j);
        }
    }
    if !missing.is_empty() {
        // Complete with directions orthogonal to the resolved columns.
        let candidates = Matrix::identity(m, m);
        let mut basis: Vec<nalgebra::DVector<f64>> = (0..n)
            .filter(|j| !missing.contains(j))
            .map(|j| u.column(j).into_owned())
            .collect();
        let mut next = 0;
        for &j in &missing {
            loop {
                let mut x = candidates.column(next).into_owned();
                next += 1;
                for _ in 0..2 {
                    for b in &basis {
                        let d = b.dot(&x);
                        x -= b * d;
                    }
                }
                let nx = x.norm();
                if nx > 0.5 {
                    x /= nx;
                    u.set_column(j, &x);
                    basis.push(x);
                    break;
                }
            }
        }
    }
    (u, sigma, v)
}

/// `tol_factor * max(m, n) * eps * scale`.
pub fn rank_threshold(m: usize, n: usize, tol_factor: f64, scale: f64) -> f64 {
    tol_factor * m.max(n) as f64 * f64::EPSILON * scale
}

fn singular_values(a: &Matrix) -> Vec<f64> {
    match svd(a) {
        Ok(s) => s.singular_values.iter().copied().collect(),
        Err(_) => Vec::new(),
    }
}

/// Number of singular values above `tol_factor * max(m, n) * eps * sigma_1`.
pub fn numerical_rank(a: &Matrix, tol_factor: f64) -> usize {
    numerical_rank_with_scale(a, tol_factor, 0.0)
}

/// Like [`numerical_rank`] but measured against `max(sigma_1, scale)`.
///
/// Useful when `a` is a block of a larger computation whose size sets the
/// noise floor, so that a block of pure rounding error is reported as rank 0.
pub fn numerical_rank_with_scale(a: &Matrix, tol_factor: f64, scale: f64) -> usize {
    let s = singular_values(a);
    let Some(&s1) = s.first() else { return 0 };
    let ref_scale = s1.max(scale);
    if ref_scale == 0.0 {
        return 0;
    }
    let tau = rank_threshold(a.nrows(), a.ncols(), tol_factor, ref_scale);
    s.iter().filter(|&&x| x > tau).count()
}

/// Moore-Penrose pseudo-inverse from the SVD, truncating as [`numerical_rank`].
pub fn pinv_svd(a: &Matrix, tol_factor: f64) -> Result<Matrix> {
    let d = svd(a)?;
    let mut out = Matrix::zeros(a.ncols(), a.nrows());
    let Some(&s1) = d.singular_values.iter().next() else {
        return Ok(out);
    };
    let tau = rank_threshold(a.nrows(), a.ncols(), tol_factor, s1);
    for (i, &s) in d.singular_values.iter().enumerate() {
        if s > tau && s > 0.0 {
            out += d.v.column(i) * d.u.column(i).transpose() / s;
        }
    }
    Ok(out)
}

/// Orthonormal basis of the numerical range of `a`.
pub fn orthonormal_range(a: &Matrix, tol_factor: f64) -> Result<Matrix> {
    let d = svd(a)?;
    let r = numerical_rank(a, tol_factor);
    Ok(d.u.columns(0, r).into_owned())
}

/// Pseudo-inverse of an upper triangular `L x L` matrix whose nonzero rows
/// come first, `N = [Y; 0]` with `Y` of full row rank `r`.
///
/// Returns `[Y^+ 0]`, computed from a QR factorization of `Y^T`. If the
/// leading block is not of full row rank the general SVD pseudo-inverse is
/// returned instead.
pub fn pinv_structured_upper(n_hat: &Matrix) -> Result<Matrix> {
    check_finite(n_hat)?;
    let l = n_hat.nrows();
    if n_hat.ncols() != l || l == 0 {
        return Err(contract(format!(
            "pinv_structured_upper needs a nonempty square matrix, got {}x{}",
            n_hat.nrows(),
            n_hat.ncols()
        )));
    }
    let scale = n_hat.norm();
    let tri_tol = 1e-12 * scale;
    for j in 0..l {
        for i in j + 1..l {
            if n_hat[(i, j)].abs() > tri_tol {
                return Err(contract(format!(
                    "pinv_structured_upper input is not upper triangular (entry ({i},{j}) = {:e})",
                    n_hat[(i, j)]
                )));
            }
        }
    }
    let mut out = Matrix::zeros(l, l);
    if scale == 0.0 {
        return Ok(out);
    }
    let row_tol = rank_threshold(l, l, DEFAULT_RANK_TOL_FACTOR, scale);
    let mut r = l;
    while r > 0 && n_hat.row(r - 1).norm() <= row_tol {
        r -= 1;
    }
    let y = n_hat.rows(0, r).into_owned();
    if numerical_rank(&y, DEFAULT_RANK_TOL_FACTOR) < r {
        return pinv_svd(n_hat, DEFAULT_RANK_TOL_FACTOR);
    }
    // Y^T = Q R  =>  Y^+ = Q R^{-T}.
    let qr = householder_qr(&y.transpose())?;
    let rr = qr.r().rows(0, r).into_owned();
    let Some(rinv) = solve_upper_triangular(&rr, &Matrix::identity(r, r)) else {
        return pinv_svd(n_hat, DEFAULT_RANK_TOL_FACTOR);
    };
    let yp = qr.q_thin(r) * rinv.transpose();
    out.columns_mut(0, r).copy_from(&yp);
    Ok(out)
}
