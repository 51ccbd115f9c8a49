//! Block GMRES and (generalized) block FOM on a shared block Arnoldi basis.

mod factorization;
mod iterates;

pub use factorization::{GmresFactorization, IterationFactors};
pub use iterates::{
    fom_coordinates, fom_iterate, gmres_coordinates, gmres_iterate, iterate_pair, progressive_updates, IteratePair,
};

use std::sync::Arc;

use crate::arnoldi::{ArnoldiOptions, BlockArnoldiState, BlockOperator, StepReport};
use crate::error::Result;
use crate::kernels::{Matrix, DEFAULT_RANK_TOL_FACTOR};

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub arnoldi: ArnoldiOptions,
    /// Multiplier for the rank threshold on the Hessenberg diagonal blocks.
    pub rank_tol_factor: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            arnoldi: ArnoldiOptions::default(),
            rank_tol_factor: DEFAULT_RANK_TOL_FACTOR,
        }
    }
}

/// Arnoldi state and QR factorization advanced in lockstep.
#[derive(Debug, Clone)]
pub struct Session {
    state: BlockArnoldiState,
    fact: GmresFactorization,
    b: Matrix,
}

impl Session {
    /// `x0 = None` starts from the zero block.
    pub fn new(op: Arc<BlockOperator>, b: &Matrix, x0: Option<&Matrix>, options: SolverOptions) -> Result<Self> {
        let zero;
        let x0 = match x0 {
            Some(x) => x,
            None => {
                zero = Matrix::zeros(b.nrows(), b.ncols());
                &zero
            }
        };
        let state = BlockArnoldiState::initialize(op, b, x0, options.arnoldi)?;
        let fact = GmresFactorization::new(state.s0(), options.rank_tol_factor);
        Ok(Self {
            state,
            fact,
            b: b.clone(),
        })
    }

    pub fn step(&mut self) -> Result<StepReport> {
        let report = self.state.step()?;
        let col = self.state.hessenberg_column(report.iteration);
        self.fact.advance(&col)?;
        Ok(report)
    }

    pub fn state(&self) -> &BlockArnoldiState {
        &self.state
    }

    pub fn factorization(&self) -> &GmresFactorization {
        &self.fact
    }

    pub fn iteration(&self) -> usize {
        self.fact.iteration()
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn iterate(&self, j: usize) -> Result<IteratePair> {
        iterate_pair(&self.state, &self.fact, j)
    }

    /// `X_j^G`, with `X_0 = x0`.
    pub fn gmres_x(&self, j: usize) -> Result<Matrix> {
        if j == 0 {
            return Ok(self.state.x0().clone());
        }
        Ok(gmres_iterate(&self.state, &self.fact, j)?.0)
    }

    /// `B - A X`, evaluated with the operator.
    pub fn explicit_residual(&self, x: &Matrix) -> Result<Matrix> {
        Ok(&self.b - self.state.operator().apply(x)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{column_norms, pinv_svd, sign_equivalent};
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn random_problem(n: usize, l: usize, seed: u64) -> (Arc<BlockOperator>, Matrix) {
        let mut rng = StdRng::seed_from_u64(seed);
        let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let b = Matrix::from_fn(n, l, |_, _| rng.random_range(-1.0..1.0));
        (Arc::new(BlockOperator::dense(a).unwrap()), b)
    }

    fn run(op: &Arc<BlockOperator>, b: &Matrix, steps: usize) -> Session {
        let mut s = Session::new(op.clone(), b, None, Default::default()).unwrap();
        for _ in 0..steps {
            s.step().unwrap();
        }
        s
    }

    #[test]
    fn gmres_matches_dense_least_squares() {
        let (op, b) = random_problem(25, 2, 1);
        let s = run(&op, &b, 4);
        let a = op.to_dense();
        let w = s.state().basis_upto(4);
        // min ||B - A W Y||_F via SVD pseudo-inverse.
        let y = pinv_svd(&(&a * &w), 1.0).unwrap() * &b;
        let x_oracle = &w * y;
        let x = s.gmres_x(4).unwrap();
        assert!((&x - &x_oracle).norm() <= 1e-8 * x_oracle.norm());
    }

    #[test]
    fn fom_matches_dense_galerkin() {
        let (op, b) = random_problem(20, 2, 2);
        let s = run(&op, &b, 3);
        let a = op.to_dense();
        let w = s.state().basis_upto(3);
        let lhs = w.transpose() * &a * &w;
        let rhs = w.transpose() * &b;
        let y = lhs.lu().solve(&rhs).unwrap();
        let pair = s.iterate(3).unwrap();
        assert!(!pair.fom_is_generalized);
        assert!((&pair.x_fom - &w * y).norm() <= 1e-8 * pair.x_fom.norm());
    }

    #[test]
    fn cheap_norms_match_explicit_residuals() {
        let (op, b) = random_problem(18, 3, 3);
        let s = run(&op, &b, 5);
        for j in 1..=5 {
            let pair = s.iterate(j).unwrap();
            let explicit = column_norms(&s.explicit_residual(&pair.x_gmres).unwrap());
            for (c, e) in pair.gmres_residual_norms.iter().zip(&explicit) {
                assert!((c - e).abs() <= 1e-8 * b.norm());
            }
            let explicit_f = column_norms(&s.explicit_residual(&pair.x_fom).unwrap());
            for (c, e) in pair.fom_residual_norms.iter().zip(&explicit_f) {
                assert!((c - e).abs() <= 1e-8 * b.norm());
            }
        }
    }

    #[test]
    fn progressive_updates_are_consistent() {
        let (op, b) = random_problem(25, 2, 4);
        let s = run(&op, &b, 3);
        let (sg, sf) = progressive_updates(s.factorization(), 3).unwrap();
        let w = s.state().basis_upto(3);
        let x2 = s.gmres_x(2).unwrap();
        let x3 = s.gmres_x(3).unwrap();
        assert!((&x2 + &w * &sg - &x3).norm() <= 1e-10 * x3.norm());
        let pair = s.iterate(3).unwrap();
        assert!((&x2 + &w * &sf - &pair.x_fom).norm() <= 1e-10 * pair.x_fom.norm());

        let (s1, _) = progressive_updates(s.factorization(), 1).unwrap();
        assert!((s1 - gmres_coordinates(s.factorization(), 1).unwrap()).norm() < 1e-14);
        assert!(progressive_updates(s.factorization(), 0).is_err());
    }

    #[test]
    fn one_step_convergence() {
        // F0 spans an invariant subspace: A = diag, B = [e1 e2].
        let a = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 3.0, 5.0, 7.0]));
        let op = Arc::new(BlockOperator::dense(a).unwrap());
        let b = Matrix::identity(4, 2);
        let s = run(&op, &b, 1);
        let pair = s.iterate(1).unwrap();
        assert!(pair.gmres_residual_norms.iter().all(|r| *r <= 1e-10));
        assert!(s.state().breakdown_log()[0].p == 2);
        assert_eq!(pair.residual_rank, 0);
    }

    #[test]
    fn scalar_factorization_matches_hand_givens() {
        let a = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let op = Arc::new(BlockOperator::dense(a).unwrap());
        let b = Matrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let s = run(&op, &b, 1);
        let st = s.factorization().step(1).unwrap();
        // H_11 = 2, H_21 = 1 -> c = 2/sqrt5, s = 1/sqrt5.
        let (c, sn) = (2.0 / 5f64.sqrt(), 1.0 / 5f64.sqrt());
        let givens = Matrix::from_row_slice(2, 2, &[c, sn, sn, -c]);
        assert!(sign_equivalent(&st.h_cal, &givens, 1e-14));
    }
}
