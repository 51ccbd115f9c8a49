use nalgebra::DVector;

use super::Matrix;
use crate::error::{contract, Result};

/// Unit Householder vector `v` acting as `I - 2 v v^T` on rows `start..`.
#[derive(Debug, Clone)]
struct Reflector {
    start: usize,
    v: DVector<f64>,
}

impl Reflector {
    fn apply(&self, x: &mut Matrix) {
        let rows = self.v.len();
        for mut col in x.column_iter_mut() {
            let mut seg = col.rows_mut(self.start, rows);
            let d = 2.0 * self.v.dot(&seg);
            if d != 0.0 {
                seg.axpy(-d, &self.v, 1.0);
            }
        }
    }
}

/// Householder QR factorization `A = Q R` with `Q` kept as a product of
/// reflectors.
///
/// Produced either by [`householder_qr`] (one reflector per column) or by
/// [`echelon_qr`], where columns that are numerically dependent on their
/// predecessors do not consume a row of `R`. In the echelon form the nonzero
/// rows of `R` come first and `Q`'s leading `rank()` columns span the range
/// of `A`.
#[derive(Debug, Clone)]
pub struct HouseholderQr {
    rows: usize,
    reflectors: Vec<Reflector>,
    r: Matrix,
    pivots: Vec<usize>,
}

impl HouseholderQr {
    pub fn r(&self) -> &Matrix {
        &self.r
    }

    pub fn into_r(self) -> Matrix {
        self.r
    }

    /// Columns of `A` that received a pivot row, in order.
    pub fn pivot_columns(&self) -> &[usize] {
        &self.pivots
    }

    /// Number of pivot rows, i.e. the detected rank for [`echelon_qr`].
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// `x <- Q^T x`.
    pub fn apply_qt(&self, x: &mut Matrix) {
        assert_eq!(x.nrows(), self.rows);
        for h in &self.reflectors {
            h.apply(x);
        }
    }

    /// `x <- Q x`.
    pub fn apply_q(&self, x: &mut Matrix) {
        assert_eq!(x.nrows(), self.rows);
        for h in self.reflectors.iter().rev() {
            h.apply(x);
        }
    }

    /// The full `m x m` orthogonal factor.
    pub fn q(&self) -> Matrix {
        self.q_thin(self.rows)
    }

    /// The leading `k` columns of `Q`.
    pub fn q_thin(&self, k: usize) -> Matrix {
        let mut e = Matrix::identity(self.rows, k);
        self.apply_q(&mut e);
        e
    }

    /// `Q^T` as an explicit matrix.
    pub fn qt(&self) -> Matrix {
        let mut e = Matrix::identity(self.rows, self.rows);
        self.apply_qt(&mut e);
        e
    }
}

/// Householder QR of a tall matrix (`m >= n >= 1`).
///
/// No sign normalisation is applied: the diagonal of `R` carries whatever
/// sign the reflectors produce. `R` is stored with exact zeros below the
/// diagonal.
pub fn householder_qr(a: &Matrix) -> Result<HouseholderQr> {
    let (m, n) = a.shape();
    if n == 0 || m < n {
        return Err(contract(format!(
            "householder_qr needs m >= n >= 1, got {m}x{n}"
        )));
    }
    Ok(factor(a, None))
}

/// Householder QR in row-echelon form.
///
/// A column whose part below the current pivot row has norm `<= drop_tol`
/// is treated as dependent: its trailing entries are set to zero and no
/// reflector is spent on it. Works for any shape.
pub fn echelon_qr(a: &Matrix, drop_tol: f64) -> HouseholderQr {
    factor(a, Some(drop_tol.max(0.0)))
}

fn factor(a: &Matrix, drop_tol: Option<f64>) -> HouseholderQr {
    let (m, n) = a.shape();
    let mut r = a.clone();
    let mut reflectors = Vec::with_capacity(n.min(m));
    let mut pivots = Vec::with_capacity(n.min(m));
    let mut row = 0;
    for c in 0..n {
        if row >= m {
            break;
        }
        let x: DVector<f64> = r.view((row, c), (m - row, 1)).column(0).into_owned();
        let norm = x.norm();
        match drop_tol {
            Some(tol) if norm <= tol => {
                r.view_mut((row, c), (m - row, 1)).fill(0.0);
                continue;
            }
            None if norm == 0.0 => {
                pivots.push(c);
                row += 1;
                continue;
            }
            _ => {}
        }
        let alpha = x[0];
        let beta = if alpha >= 0.0 { -norm } else { norm };
        let mut v = x;
        v[0] -= beta;
        let vnorm = v.norm();
        v /= vnorm;
        let h = Reflector { start: row, v };
        {
            let mut trailing = r.view_mut((0, c + 1), (m, n - c - 1)).into_owned();
            h.apply(&mut trailing);
            r.view_mut((0, c + 1), (m, n - c - 1)).copy_from(&trailing);
        }
        r[(row, c)] = beta;
        r.view_mut((row + 1, c), (m - row - 1, 1)).fill(0.0);
        reflectors.push(h);
        pivots.push(c);
        row += 1;
    }
    HouseholderQr {
        rows: m,
        reflectors,
        r,
        pivots,
    }
}
