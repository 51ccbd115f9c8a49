use crate::arnoldi::BlockArnoldiState;
use crate::error::{contract, Error, Result};
use crate::kernels::{column_norms, numerical_rank_with_scale, pinv_structured_upper, solve_upper_triangular, Matrix};

use super::GmresFactorization;

/// Block GMRES and (generalized) block FOM iterates at one iteration.
#[derive(Debug, Clone)]
pub struct IteratePair {
    pub iteration: usize,
    pub x_gmres: Matrix,
    pub x_fom: Matrix,
    pub y_gmres: Matrix,
    pub y_fom: Matrix,
    /// The square Hessenberg matrix was singular and the minimum-norm
    /// variant was used.
    pub fom_is_generalized: bool,
    pub gmres_residual_norms: Vec<f64>,
    pub fom_residual_norms: Vec<f64>,
    /// Rank of the GMRES block residual.
    pub residual_rank: usize,
}

impl IteratePair {
    /// Residual norms divided by the column norms of `reference` (usually `F0`).
    pub fn relative(norms: &[f64], reference: &Matrix) -> Vec<f64> {
        norms
            .iter()
            .zip(column_norms(reference))
            .map(|(r, b)| if b > 0.0 { r / b } else { *r })
            .collect()
    }
}

fn check_j(fact: &GmresFactorization, j: usize) -> Result<()> {
    if j == 0 {
        return Err(contract("iterates need j >= 1"));
    }
    if j > fact.iteration() {
        return Err(Error::IterationOutOfRange {
            requested: j,
            available: fact.iteration(),
        });
    }
    Ok(())
}

/// `Y_j = R_j^{-1} G_j`.
pub fn gmres_coordinates(fact: &GmresFactorization, j: usize) -> Result<Matrix> {
    check_j(fact, j)?;
    solve_upper_triangular(&fact.r_factor(j), &fact.g_stack(j)).ok_or(Error::DegenerateBasis { iteration: j })
}

/// Coordinates of the (generalized) FOM iterate, and whether the
/// generalized form was needed.
pub fn fom_coordinates(fact: &GmresFactorization, j: usize) -> Result<(Matrix, bool)> {
    check_j(fact, j)?;
    let l = fact.block_size();
    let st = fact.step(j)?;
    let tail = pinv_structured_upper(&st.n_hat)? * &st.c_hat;
    let mut y = Matrix::zeros(j * l, l);
    if j > 1 {
        let head_rhs = fact.g_stack(j - 1) - &st.z * &tail;
        let head = solve_upper_triangular(&fact.r_factor(j - 1), &head_rhs)
            .ok_or(Error::DegenerateBasis { iteration: j - 1 })?;
        y.rows_mut(0, (j - 1) * l).copy_from(&head);
    }
    y.rows_mut((j - 1) * l, l).copy_from(&tail);
    Ok((y, st.rank_r < l))
}

/// `E S0 - H_j Y` in coordinates of `W_{j+1}`.
fn small_residual(state: &BlockArnoldiState, y: &Matrix) -> Matrix {
    let l = state.block_size();
    let jl = y.nrows();
    let hbar = state.hessenberg().view((0, 0), (jl + l, jl));
    let mut r = -(hbar * y);
    let mut top = r.rows_mut(0, l);
    top += state.s0();
    r
}

/// Block GMRES iterate `X0 + W_j Y_j` with residual norms from `C̃_{j+1}`.
pub fn gmres_iterate(state: &BlockArnoldiState, fact: &GmresFactorization, j: usize) -> Result<(Matrix, Matrix, Vec<f64>)> {
    let y = gmres_coordinates(fact, j)?;
    let x = state.x0() + state.basis_upto(j) * &y;
    let norms = column_norms(&fact.step(j)?.c_tilde_next);
    Ok((x, y, norms))
}

/// (Generalized) block FOM iterate `X0 + W_j Ỹ_j`.
pub fn fom_iterate(state: &BlockArnoldiState, fact: &GmresFactorization, j: usize) -> Result<(Matrix, Matrix, bool, Vec<f64>)> {
    let (y, generalized) = fom_coordinates(fact, j)?;
    let x = state.x0() + state.basis_upto(j) * &y;
    let norms = column_norms(&small_residual(state, &y));
    Ok((x, y, generalized, norms))
}

pub fn iterate_pair(state: &BlockArnoldiState, fact: &GmresFactorization, j: usize) -> Result<IteratePair> {
    let (x_gmres, y_gmres, gmres_residual_norms) = gmres_iterate(state, fact, j)?;
    let (x_fom, y_fom, fom_is_generalized, fom_residual_norms) = fom_iterate(state, fact, j)?;
    let c_next = &fact.step(j)?.c_tilde_next;
    let residual_rank = numerical_rank_with_scale(c_next, 1.0, fact.s0().norm());
    Ok(IteratePair {
        iteration: j,
        x_gmres,
        x_fom,
        y_gmres,
        y_fom,
        fom_is_generalized,
        gmres_residual_norms,
        fom_residual_norms,
        residual_rank,
    })
}

/// Progressive update coordinates `(Y_S^G, Ỹ_S^F)` with
/// `X_j = X_{j-1} + W_j Y_S`.
pub fn progressive_updates(fact: &GmresFactorization, j: usize) -> Result<(Matrix, Matrix)> {
    check_j(fact, j)?;
    let l = fact.block_size();
    let st = fact.step(j)?;
    let g_tail = solve_upper_triangular(&st.n, &st.c).ok_or(Error::DegenerateBasis { iteration: j })?;
    let f_tail = pinv_structured_upper(&st.n_hat)? * &st.c_hat;
    let mut s_g = Matrix::zeros(j * l, l);
    let mut s_f = Matrix::zeros(j * l, l);
    if j > 1 {
        let r_prev = fact.r_factor(j - 1);
        let y1 = solve_upper_triangular(&r_prev, &st.z).ok_or(Error::DegenerateBasis { iteration: j - 1 })?;
        s_g.rows_mut(0, (j - 1) * l).copy_from(&-(&y1 * &g_tail));
        s_f.rows_mut(0, (j - 1) * l).copy_from(&-(&y1 * &f_tail));
    }
    s_g.rows_mut((j - 1) * l, l).copy_from(&g_tail);
    s_f.rows_mut((j - 1) * l, l).copy_from(&f_tail);
    Ok((s_g, s_f))
}
