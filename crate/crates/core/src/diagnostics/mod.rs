//! Stagnation analysis on top of a block GMRES factorization.

use std::f64::consts::FRAC_PI_2;

use crate::arnoldi::BlockArnoldiState;
use crate::error::{contract, Error, Result};
use crate::kernels::{
    cs_decompose, numerical_rank, orthonormal_range,
    principal_angles, rank_threshold, solve_upper_triangular, svd, CsDecomposition, Matrix,
};
use crate::solvers::{progressive_updates, GmresFactorization, IterationFactors, IteratePair};

/// Angle tolerance for subspace intersection counts.
pub const ANGLE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StagnationCase {
    /// `N̂_j` nonsingular: the FOM iterate exists.
    FomExists,
    /// `0 < rank < L`: only part of the new block enters the update.
    PartialContribution,
    /// `N̂_j = 0`: the GMRES iterate did not change.
    TotalStagnation,
}

impl StagnationCase {
    pub fn label(self) -> &'static str {
        match self {
            Self::FomExists => "fom-exists",
            Self::PartialContribution => "partial",
            Self::TotalStagnation => "total-stagnation",
        }
    }
}

#[derive(Debug, Clone)]
pub struct StagnationReport {
    pub iteration: usize,
    /// Rank of `N̂_j`; the square Hessenberg matrix has rank `(j-1)L + rank_r`.
    pub rank_r: usize,
    /// Rank of `C_j`, measured against `||C̃_j||`.
    pub rank_c: usize,
    pub case: StagnationCase,
    /// 0-based columns of `C_j` that vanish.
    pub stagnated_columns: Vec<usize>,
    pub cs: CsDecomposition,
    /// Angles from the CS cosines, ascending.
    pub principal_angles_vs_constraint: Vec<f64>,
    /// Dimension of the projection of `R(S_j)` onto `R(V_j)`.
    pub intersection_dim: usize,
    /// Number of directions of `R(S_j)` lying inside `R(V_j)`.
    pub strict_intersection_dim: usize,
    pub breakdown_p: usize,
    /// Random replacements entered the basis before this iteration.
    pub prior_breakdown: bool,
}

fn check_j(fact: &GmresFactorization, j: usize) -> Result<&IterationFactors> {
    fact.step(j)
}

/// `num / den`, reported as 0 when the numerator vanishes.
fn relative(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

/// Orthonormal basis of `R(S_j^G)` with a noise floor set by the size of the
/// factors producing it.
fn update_range(state: &BlockArnoldiState, fact: &GmresFactorization, j: usize) -> Result<Matrix> {
    let st = fact.step(j)?;
    let (s_g, _) = progressive_updates(fact, j)?;
    let s = state.basis_upto(j) * &s_g;
    let d = svd(&s)?;
    // S = M C_j with M = W_j [-R^{-1} Z; I] N^{-1}; rounding in C_j is
    // relative to ||C̃_j||.
    let ninv = solve_upper_triangular(&st.n, &Matrix::identity(st.n.nrows(), st.n.nrows()))
        .ok_or(Error::DegenerateBasis { iteration: j })?;
    let mut m = Matrix::zeros(s_g.nrows(), st.n.nrows());
    let l = fact.block_size();
    m.rows_mut((j - 1) * l, l).copy_from(&ninv);
    if j > 1 {
        let y1 = solve_upper_triangular(&fact.r_factor(j - 1), &st.z).ok_or(Error::DegenerateBasis { iteration: j })?;
        m.rows_mut(0, (j - 1) * l).copy_from(&-(y1 * &ninv));
    }
    let scale = m.norm() * st.c_tilde.norm();
    let tau = rank_threshold(s.nrows(), s.ncols(), 1.0, scale);
    let r = d.singular_values.iter().filter(|&&x| x > tau).count();
    Ok(d.u.columns(0, r).into_owned())
}

/// Rank of `C_j` with the threshold used for `N̂_j`, scaled by `||C̃_j||`.
pub fn c_rank(fact: &GmresFactorization, j: usize) -> Result<usize> {
    let st = check_j(fact, j)?;
    let l = fact.block_size();
    let tau = fact.rank_tol_factor() * ((j + 1) * l) as f64 * f64::EPSILON * st.c_tilde.norm();
    Ok(svd(&st.c)?.singular_values.iter().filter(|&&s| s > tau).count())
}

pub fn classify(state: &BlockArnoldiState, fact: &GmresFactorization, j: usize) -> Result<StagnationReport> {
    let st = check_j(fact, j)?;
    let l = fact.block_size();
    let rank_r = st.rank_r;
    let case = match rank_r {
        0 => StagnationCase::TotalStagnation,
        r if r == l => StagnationCase::FomExists,
        _ => StagnationCase::PartialContribution,
    };
    let floor = 1e-12 * fact.s0().norm();
    let stagnated_columns = (0..l).filter(|&c| st.c.column(c).norm() <= floor).collect();
    let rank_c = c_rank(fact, j)?;
    let cs = cs_decompose(&st.h_cal)?;
    let mut angles = cs.angles.clone();
    angles.sort_by(f64::total_cmp);

    let s = update_range(state, fact, j)?;
    let vj = state.block(j);
    let pa = principal_angles(&s, &vj)?;
    let intersection_dim = pa.iter().filter(|&&t| t < FRAC_PI_2 - ANGLE_TOL).count();
    let strict_intersection_dim = pa.iter().filter(|&&t| t < ANGLE_TOL).count();

    let breakdown_p = state
        .breakdown_log()
        .iter()
        .find(|b| b.iteration == j)
        .map_or(0, |b| b.p);
    let prior_breakdown = j > 1 && state.breakdown_before(j - 1);
    Ok(StagnationReport {
        iteration: j,
        rank_r,
        rank_c,
        case,
        stagnated_columns,
        cs,
        principal_angles_vs_constraint: angles,
        intersection_dim,
        strict_intersection_dim,
        breakdown_p,
        prior_breakdown,
    })
}

/// `𝒬 = Q̂_b V_1`, valid when `N̂_j` is nonsingular.
fn q_factor(st: &IterationFactors, cs: &CsDecomposition) -> Matrix {
    &st.q_hat_b * &cs.v1
}

fn congruences(st: &IterationFactors, cs: &CsDecomposition) -> (Matrix, Matrix) {
    let q = q_factor(st, cs);
    let c2 = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(cs.cosines.len(), cs.cosines.iter().map(|c| c * c)));
    let s2 = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(cs.sines.len(), cs.sines.iter().map(|s| s * s)));
    (&q * c2 * q.transpose(), &q * s2 * q.transpose())
}

/// Residual of `X^G = X^F Ĉ^{-1}𝒬C²𝒬ᵀĈ + X_{j-1}^G Ĉ^{-1}𝒬S²𝒬ᵀĈ`, relative
/// to `||X^G||_F`.
pub fn verify_trig_relation(pair: &IteratePair, x_prev_gmres: &Matrix, fact: &GmresFactorization) -> Result<f64> {
    let j = pair.iteration;
    let st = check_j(fact, j)?;
    let l = fact.block_size();
    if st.rank_r < l {
        return Err(Error::SingularHessenberg {
            rank: st.rank_r,
            block_size: l,
        });
    }
    // Columns of C-hat that are at rounding level relative to S0 belong to converged residuals.
    let tau = fact.rank_tol_factor() * ((j + 1) * l) as f64 * f64::EPSILON * fact.s0().norm();
    if svd(&st.c_hat)?.singular_values.iter().any(|&s| s <= tau) {
        return Err(contract(format!("C-hat at iteration {j} is singular; the relation is undefined")));
    }
    let cs = cs_decompose(&st.h_cal)?;
    let (qc2, qs2) = congruences(st, &cs);
    let lu = st.c_hat.clone().lu();
    let (Some(m_c), Some(m_s)) = (lu.solve(&(qc2 * &st.c_hat)), lu.solve(&(qs2 * &st.c_hat))) else {
        return Err(contract(format!("C-hat at iteration {j} is singular; the relation is undefined")));
    };
    let rhs = &pair.x_fom * m_c + x_prev_gmres * m_s;
    Ok(relative((&pair.x_gmres - rhs).norm(), pair.x_gmres.norm()))
}

/// Residual of `X^F - X^G = W_j [-R_{j-1}^{-1} Z_j; I] Ŷ2^{-1} 𝒬S²𝒬ᵀĈ`,
/// relative to `||X^G||_F`.
pub fn verify_breakdown_gap(pair: &IteratePair, state: &BlockArnoldiState, fact: &GmresFactorization) -> Result<f64> {
    let j = pair.iteration;
    let st = check_j(fact, j)?;
    let l = fact.block_size();
    let y2 = st.n_hat.rows(0, st.rank_r).into_owned();
    let y2_rank = numerical_rank(&y2, 1.0);
    if st.rank_r < l || y2_rank < l {
        return Err(Error::SingularY2 {
            rank: y2_rank.min(st.rank_r),
            block_size: l,
        });
    }
    let cs = cs_decompose(&st.h_cal)?;
    let (_, qs2) = congruences(st, &cs);
    let tail = solve_upper_triangular(&y2, &(qs2 * &st.c_hat)).ok_or(Error::SingularY2 { rank: y2_rank, block_size: l })?;
    let mut coords = Matrix::zeros(j * l, l);
    if j > 1 {
        let y1 = solve_upper_triangular(&fact.r_factor(j - 1), &st.z).ok_or(Error::DegenerateBasis { iteration: j - 1 })?;
        coords.rows_mut(0, (j - 1) * l).copy_from(&-(y1 * &tail));
    }
    coords.rows_mut((j - 1) * l, l).copy_from(&tail);
    let rhs = state.basis_upto(j) * coords;
    let lhs = &pair.x_fom - &pair.x_gmres;
    Ok(relative((lhs - rhs).norm(), pair.x_gmres.norm()))
}

/// Angles between the residual range and the constraint space `A K_j`.
#[derive(Debug, Clone)]
pub struct ConstraintAngles {
    /// CS cosines of `𝓗_j`, ascending.
    pub cs_cosines: Vec<f64>,
    /// Cosines of principal angles between `R(F_{j-1})` and `A K_j` from
    /// explicit bases, ascending; `None` when `F_{j-1}` is rank deficient.
    pub explicit_cosines: Option<Vec<f64>>,
    /// Sines of the angles between `R(F_0)` and `A K_j`, ascending.
    pub initial_residual_sines: Vec<f64>,
}

impl ConstraintAngles {
    pub fn cs_angles(&self) -> Vec<f64> {
        let mut a: Vec<f64> = self.cs_cosines.iter().map(|c| c.clamp(0.0, 1.0).acos()).collect();
        a.sort_by(f64::total_cmp);
        a
    }

    pub fn max_deviation(&self) -> Option<f64> {
        self.explicit_cosines.as_ref().map(|e| {
            e.iter()
                .zip(&self.cs_cosines)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
    }
}

/// CS cosines of `𝓗_j` alongside an explicit principal-angle computation.
///
/// The explicit side is skipped when `F_{j-1}` has a singular value below
/// `1e-6 ||F_0||` since its basis is then dominated by rounding.
pub fn angles_vs_constraint_space(state: &BlockArnoldiState, fact: &GmresFactorization, j: usize) -> Result<ConstraintAngles> {
    let st = check_j(fact, j)?;
    let l = fact.block_size();
    let cs = cs_decompose(&st.h_cal)?;
    let cs_cosines = cs.cosines.clone();

    let x_prev = if j == 1 {
        state.x0().clone()
    } else {
        crate::solvers::gmres_iterate(state, fact, j - 1)?.0
    };
    let op = state.operator();
    let b = state.f0() + op.apply(state.x0())?;
    let f_prev = b - op.apply(&x_prev)?;
    let f_svd = svd(&f_prev)?;
    let full = f_svd.singular_values.iter().all(|&s| s > 1e-6 * state.f0().norm());
    let explicit_cosines = if full && f_svd.singular_values.len() == l {
        let aw = op.apply(&state.basis_upto(j))?;
        let ak = orthonormal_range(&aw, 1.0)?;
        let ang = principal_angles(&f_svd.u, &ak)?;
        let mut c: Vec<f64> = ang.iter().map(|t| t.cos()).collect();
        c.sort_by(f64::total_cmp);
        Some(c)
    } else {
        None
    };

    let mut prod = Matrix::identity(l, l);
    for i in 1..=j {
        prod = fact.step(i)?.q21() * prod;
    }
    let mut initial_residual_sines: Vec<f64> = svd(&prod)?.singular_values.iter().copied().collect();
    initial_residual_sines.sort_by(f64::total_cmp);
    Ok(ConstraintAngles {
        cs_cosines,
        explicit_cosines,
        initial_residual_sines,
    })
}

/// Residual of `S_{j,1} = -W_{j-1} R_{j-1}^{-1} Z_j V_jᵀ S_{j,2}` where
/// `S_j^G = S_{j,1} + S_{j,2}` and `S_{j,2} = V_j N_j^{-1} C_j`.
pub fn verify_nilpotent_split(state: &BlockArnoldiState, fact: &GmresFactorization, j: usize) -> Result<f64> {
    if j < 2 {
        return Err(contract("nilpotent split needs j >= 2"));
    }
    let st = check_j(fact, j)?;
    let (s_g, _) = progressive_updates(fact, j)?;
    let s = state.basis_upto(j) * &s_g;
    let vj = state.block(j);
    let ninv_c = solve_upper_triangular(&st.n, &st.c).ok_or(Error::DegenerateBasis { iteration: j })?;
    let s2 = &vj * ninv_c;
    let s1 = &s - &s2;
    let y1 = solve_upper_triangular(&fact.r_factor(j - 1), &st.z).ok_or(Error::DegenerateBasis { iteration: j - 1 })?;
    let predicted = -(state.basis_upto(j - 1) * y1 * (vj.transpose() * &s2));
    Ok(relative((s1 - predicted).norm(), s.norm()))
}

/// Rank factorization `Ĥ_jj = M̂_j Ŷ2` with `Ŷ1 = R_{j-1}^{-1} Z_j`.
#[derive(Debug, Clone)]
pub struct HessenbergRankStructure {
    pub rank_r: usize,
    /// `L x r`, orthonormal columns.
    pub m_hat: Matrix,
    /// `r x L`, upper triangular (echelon).
    pub y2: Matrix,
    /// `(j-1)L x L`.
    pub y1: Matrix,
}

pub fn hessenberg_rank_structure(fact: &GmresFactorization, j: usize) -> Result<HessenbergRankStructure> {
    let st = check_j(fact, j)?;
    let r = st.rank_r;
    let m_hat = st.q_hat_b.transpose().columns(0, r).into_owned();
    let y2 = st.n_hat.rows(0, r).into_owned();
    let y1 = if j > 1 {
        solve_upper_triangular(&fact.r_factor(j - 1), &st.z).ok_or(Error::DegenerateBasis { iteration: j - 1 })?
    } else {
        Matrix::zeros(0, fact.block_size())
    };
    Ok(HessenbergRankStructure { rank_r: r, m_hat, y2, y1 })
}

/// `(||Q12 - N^{-T} H_{j+1,j}^T||_F, rank Q11)`, counting cosines above 1e-12.
pub fn transformation_properties(fact: &GmresFactorization, j: usize) -> Result<(f64, usize)> {
    let st = check_j(fact, j)?;
    let l = fact.block_size();
    // Q12 = N^{-T} H_sub^T  <=>  N^T Q12 = H_sub^T.
    let nt_inv_hsub = solve_upper_triangular(&st.n, &Matrix::identity(l, l))
        .ok_or(Error::DegenerateBasis { iteration: j })?
        .transpose()
        * st.h_sub.transpose();
    let rank_q11 = svd(&st.q11())?.singular_values.iter().filter(|&&c| c > 1e-12).count();
    Ok(((st.q12() - nt_inv_hsub).norm(), rank_q11))
}
