//! Dense linear-algebra primitives.
//!
//! Everything here is a pure function of its inputs. Matrices are
//! `nalgebra::DMatrix<f64>` (column-major).

mod angles;
mod cs;
mod qr;
mod signs;
mod svd;
mod triangular;

pub use angles::principal_angles;
pub use cs::{cs_decompose, CsDecomposition};
pub use qr::{echelon_qr, householder_qr, HouseholderQr};
pub use signs::{canonical_signs, sign_equivalent};
pub use svd::{
    numerical_rank, numerical_rank_with_scale, orthonormal_range, pinv_structured_upper,
    pinv_svd, rank_threshold, svd, Svd, DEFAULT_RANK_TOL_FACTOR,
};
pub use triangular::solve_upper_triangular;

use crate::error::{Error, Result};

/// Dense real matrix, column-major.
pub type Matrix = nalgebra::DMatrix<f64>;

/// Rejects matrices holding NaN or infinities.
pub fn check_finite(a: &Matrix) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// `||U^T U - I||_F`.
pub fn orthonormality_defect(u: &Matrix) -> f64 {
    let mut g = u.transpose() * u;
    for i in 0..g.nrows() {
        g[(i, i)] -= 1.0;
    }
    g.norm()
}

/// Horizontal concatenation of equally tall blocks.
pub fn hstack(blocks: &[&Matrix]) -> Matrix {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        debug_assert_eq!(b.nrows(), rows);
        out.view_mut((0, c), (rows, b.ncols())).copy_from(*b);
        c += b.ncols();
    }
    out
}

/// Vertical concatenation of equally wide blocks.
pub fn vstack(blocks: &[&Matrix]) -> Matrix {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        debug_assert_eq!(b.ncols(), cols);
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(*b);
        r += b.nrows();
    }
    out
}

/// Euclidean norms of the columns of `a`.
pub fn column_norms(a: &Matrix) -> Vec<f64> {
    a.column_iter().map(|c| c.norm()).collect()
}

/// `||a - b||_F / denom`, reported as 0 when the numerator vanishes.
pub fn relative_difference(a: &Matrix, b: &Matrix, denom: f64) -> f64 {
    let num = (a - b).norm();
    if num == 0.0 {
        0.0
    } else if denom > 0.0 {
        num / denom
    } else {
        f64::INFINITY
    }
}
