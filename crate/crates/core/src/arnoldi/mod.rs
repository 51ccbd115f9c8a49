//! Block Arnoldi with breakdown detection and random replacement.

mod operator;

pub use operator::{BlockOperator, CsrMatrix};

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{contract, Error, Result};
use crate::kernels::{check_finite, echelon_qr, householder_qr, numerical_rank, orthonormality_defect, Matrix};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Debug, Clone)]
pub struct ArnoldiOptions {
    /// A new direction is dependent when its remaining norm is at most
    /// `breakdown_tol * ||A V_j||_F`.
    pub breakdown_tol: f64,
    pub seed: u64,
    /// Random draws per replacement vector after the first.
    pub max_retries: usize,
}

impl Default for ArnoldiOptions {
    fn default() -> Self {
        Self {
            breakdown_tol: 1e-12,
            seed: DEFAULT_SEED,
            max_retries: 3,
        }
    }
}

/// One step with dependent directions.
#[derive(Debug, Clone, PartialEq)]
pub struct Breakdown {
    pub iteration: usize,
    pub p: usize,
    /// Columns of `V_{j+1}` (0-based) filled with random vectors.
    pub replaced: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct StepReport {
    pub iteration: usize,
    pub p: usize,
    pub replaced: Vec<usize>,
    /// No room was left for replacements; `V_{j+1}` holds zero columns
    /// and the process cannot continue.
    pub exhausted: bool,
}

/// Orthonormal basis `W_{j+1}` and block Hessenberg `H_j` with
/// `A W_j = W_{j+1} H_j`.
#[derive(Debug, Clone)]
pub struct BlockArnoldiState {
    op: Arc<BlockOperator>,
    l: usize,
    j: usize,
    basis: Matrix,
    hessenberg: Matrix,
    s0: Matrix,
    x0: Matrix,
    f0: Matrix,
    breakdown_log: Vec<Breakdown>,
    options: ArnoldiOptions,
    rng: ChaCha8Rng,
    exhausted: bool,
}

impl BlockArnoldiState {
    /// Starts from `F0 = B - A X0 = V1 S0`.
    pub fn initialize(op: Arc<BlockOperator>, b: &Matrix, x0: &Matrix, options: ArnoldiOptions) -> Result<Self> {
        check_finite(b)?;
        check_finite(x0)?;
        let n = op.dim();
        let l = b.ncols();
        if b.nrows() != n || x0.shape() != b.shape() || l == 0 || l > n {
            return Err(contract(format!(
                "need n x L blocks with 1 <= L <= n = {n}; got B {}x{}, X0 {}x{}",
                b.nrows(),
                b.ncols(),
                x0.nrows(),
                x0.ncols()
            )));
        }
        let f0 = b - op.apply(x0)?;
        let rank = numerical_rank(&f0, 1.0);
        if rank < l || f0.norm() == 0.0 {
            return Err(Error::RankDeficientStart { rank, block_size: l });
        }
        let qr = householder_qr(&f0)?;
        let basis = qr.q_thin(l);
        let s0 = qr.r().rows(0, l).into_owned();
        let rng = ChaCha8Rng::seed_from_u64(options.seed);
        Ok(Self {
            op,
            l,
            j: 0,
            basis,
            hessenberg: Matrix::zeros(l, 0),
            s0,
            x0: x0.clone(),
            f0,
            breakdown_log: Vec::new(),
            options,
            rng,
            exhausted: false,
        })
    }

    /// Extends the basis by one block.
    pub fn step(&mut self) -> Result<StepReport> {
        let (n, l) = (self.dim(), self.l);
        if self.exhausted {
            return Err(Error::RangeExhausted {
                iteration: self.j + 1,
                needed: l,
            });
        }
        let j = self.j + 1;
        let vj = self.block(j);
        let mut u = self.op.apply(&vj)?;
        let av_norm = u.norm();

        let mut h = Matrix::zeros((j + 1) * l, l);
        for _pass in 0..2 {
            for i in 0..j {
                let vi = self.basis.columns(i * l, l);
                let coef = vi.transpose() * &u;
                u -= vi * &coef;
                let mut hb = h.rows_mut(i * l, l);
                hb += coef;
            }
        }

        let qr = echelon_qr(&u, self.options.breakdown_tol * av_norm);
        let k = qr.rank();
        let p = l - k;
        let mut next = Matrix::zeros(n, l);
        next.columns_mut(0, k).copy_from(&qr.q_thin(k));
        h.view_mut((j * l, 0), (l, l)).copy_from(&qr.r().rows(0, l));

        let mut replaced = Vec::new();
        let mut exhausted = false;
        if p > 0 {
            for col in k..l {
                match self.random_direction(&next.columns(0, col).into_owned()) {
                    Some(z) => {
                        next.set_column(col, &z);
                        replaced.push(col);
                    }
                    None => {
                        exhausted = true;
                        break;
                    }
                }
            }
            if exhausted {
                next.columns_mut(k, p).fill(0.0);
                replaced.clear();
            }
            self.breakdown_log.push(Breakdown {
                iteration: j,
                p,
                replaced: replaced.clone(),
            });
        }

        let mut basis = std::mem::replace(&mut self.basis, Matrix::zeros(0, 0)).resize_horizontally(
            (j + 1) * l,
            0.0,
        );
        basis.columns_mut(j * l, l).copy_from(&next);
        self.basis = basis;

        let old = std::mem::replace(&mut self.hessenberg, Matrix::zeros(0, 0));
        let mut hess = Matrix::zeros((j + 1) * l, j * l);
        hess.view_mut((0, 0), (j * l, (j - 1) * l)).copy_from(&old);
        hess.columns_mut((j - 1) * l, l).copy_from(&h);
        self.hessenberg = hess;

        self.j = j;
        self.exhausted = exhausted;
        Ok(StepReport {
            iteration: j,
            p,
            replaced,
            exhausted,
        })
    }

    /// A random unit vector orthogonal to `W_j` and `extra`.
    fn random_direction(&mut self, extra: &Matrix) -> Option<nalgebra::DVector<f64>> {
        let n = self.dim();
        if self.basis.ncols() + extra.ncols() >= n {
            return None;
        }
        let known = self.basis.clone();
        for _attempt in 0..=self.options.max_retries {
            let mut z = nalgebra::DVector::from_fn(n, |_, _| {
                let v: f64 = StandardNormal.sample(&mut self.rng);
                v
            });
            let start = z.norm();
            for _pass in 0..2 {
                let c = known.transpose() * &z;
                z -= &known * c;
                let c = extra.transpose() * &z;
                z -= extra * c;
            }
            let nz = z.norm();
            if nz > 1e-8 * start {
                return Some(z / nz);
            }
        }
        None
    }

    pub fn operator(&self) -> &Arc<BlockOperator> {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn block_size(&self) -> usize {
        self.l
    }

    /// Completed steps `j`.
    pub fn iteration(&self) -> usize {
        self.j
    }

    /// `W_{j+1}`, all `(j+1) L` basis columns.
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// `W_i`, the first `i L` basis columns.
    pub fn basis_upto(&self, i: usize) -> Matrix {
        assert!(i <= self.j + 1);
        self.basis.columns(0, i * self.l).into_owned()
    }

    /// `V_i`, 1-based.
    pub fn block(&self, i: usize) -> Matrix {
        assert!(i >= 1 && i <= self.j + 1, "block {i} of {}", self.j + 1);
        self.basis.columns((i - 1) * self.l, self.l).into_owned()
    }

    /// `(j+1) L x j L` block upper Hessenberg matrix.
    pub fn hessenberg(&self) -> &Matrix {
        &self.hessenberg
    }

    /// Block column `i` of the Hessenberg matrix restricted to its
    /// `(i+1) L` structurally nonzero rows.
    pub fn hessenberg_column(&self, i: usize) -> Matrix {
        assert!(i >= 1 && i <= self.j);
        let l = self.l;
        self.hessenberg
            .view((0, (i - 1) * l), ((i + 1) * l, l))
            .into_owned()
    }

    /// `H_{i,k}`, 1-based.
    pub fn h_block(&self, i: usize, k: usize) -> Matrix {
        let l = self.l;
        self.hessenberg.view(((i - 1) * l, (k - 1) * l), (l, l)).into_owned()
    }

    pub fn s0(&self) -> &Matrix {
        &self.s0
    }

    pub fn x0(&self) -> &Matrix {
        &self.x0
    }

    /// `F0 = B - A X0`.
    pub fn f0(&self) -> &Matrix {
        &self.f0
    }

    pub fn breakdown_log(&self) -> &[Breakdown] {
        &self.breakdown_log
    }

    pub fn rng_seed(&self) -> u64 {
        self.options.seed
    }

    pub fn options(&self) -> &ArnoldiOptions {
        &self.options
    }

    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    /// Whether any step up to and including `i` needed replacements.
    pub fn breakdown_before(&self, i: usize) -> bool {
        self.breakdown_log.iter().any(|b| b.iteration <= i)
    }

    /// `||A W_j - W_{j+1} H_j||_F / max(1, ||H_j||_F)`.
    pub fn relation_residual(&self) -> Result<f64> {
        let jl = self.j * self.l;
        let wj = self.basis.columns(0, jl).into_owned();
        let lhs = self.op.apply(&wj)?;
        let rhs = &self.basis * &self.hessenberg;
        Ok((lhs - rhs).norm() / self.hessenberg.norm().max(1.0))
    }

    /// `||W^T W - I||_F` over the nonzero part of the basis.
    pub fn orthonormality_residual(&self) -> f64 {
        let cols = if self.exhausted { self.j * self.l } else { (self.j + 1) * self.l };
        orthonormality_defect(&self.basis.columns(0, cols).into_owned())
    }
}
