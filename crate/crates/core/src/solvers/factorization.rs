use crate::error::{contract, Result};
use crate::kernels::{echelon_qr, householder_qr, Matrix};

/// Everything produced while folding block column `j` into the QR
/// factorization.
#[derive(Debug, Clone)]
pub struct IterationFactors {
    pub iteration: usize,
    /// `Z_j`: the `(j-1) L x L` part above the diagonal block.
    pub z: Matrix,
    /// Diagonal block after the earlier transformations, before `𝓗_j`.
    pub h_hat: Matrix,
    /// `H_{j+1,j}`.
    pub h_sub: Matrix,
    /// `N_j`, upper triangular with `𝓗_j [h_hat; h_sub] = [N_j; 0]`.
    pub n: Matrix,
    /// Orthogonal `2L x 2L` block `𝓗_j`.
    pub h_cal: Matrix,
    /// Orthogonal `L x L` with `q_hat_b * h_hat = n_hat`.
    pub q_hat_b: Matrix,
    /// `N̂_j` in echelon form: nonzero rows first.
    pub n_hat: Matrix,
    /// Number of nonzero rows of `n_hat`, the rank of `h_hat`.
    pub rank_r: usize,
    /// Drop tolerance used for `rank_r`.
    pub rank_tol: f64,
    pub c_tilde: Matrix,
    pub c: Matrix,
    pub c_hat: Matrix,
    /// `C̃_{j+1}`, the pending right-hand-side block after this step.
    pub c_tilde_next: Matrix,
}

impl IterationFactors {
    pub fn q11(&self) -> Matrix {
        let l = self.n.nrows();
        self.h_cal.view((0, 0), (l, l)).into_owned()
    }

    pub fn q12(&self) -> Matrix {
        let l = self.n.nrows();
        self.h_cal.view((0, l), (l, l)).into_owned()
    }

    pub fn q21(&self) -> Matrix {
        let l = self.n.nrows();
        self.h_cal.view((l, 0), (l, l)).into_owned()
    }

    pub fn q22(&self) -> Matrix {
        let l = self.n.nrows();
        self.h_cal.view((l, l), (l, l)).into_owned()
    }
}

/// Progressive block QR factorization of the block Hessenberg matrix.
///
/// After `j` steps holds `R_j` and `G_j = [C_1; ...; C_j]`, so that the
/// GMRES coordinates are `R_j^{-1} G_j`.
#[derive(Debug, Clone)]
pub struct GmresFactorization {
    l: usize,
    s0: Matrix,
    r: Matrix,
    g: Matrix,
    steps: Vec<IterationFactors>,
    rank_tol_factor: f64,
}

impl GmresFactorization {
    pub fn new(s0: &Matrix, rank_tol_factor: f64) -> Self {
        let l = s0.nrows();
        Self {
            l,
            s0: s0.clone(),
            r: Matrix::zeros(0, 0),
            g: Matrix::zeros(0, l),
            steps: Vec::new(),
            rank_tol_factor,
        }
    }

    pub fn block_size(&self) -> usize {
        self.l
    }

    pub fn iteration(&self) -> usize {
        self.steps.len()
    }

    pub fn s0(&self) -> &Matrix {
        &self.s0
    }

    pub fn rank_tol_factor(&self) -> f64 {
        self.rank_tol_factor
    }

    /// Folds in block column `j` (`(j+1) L x L`) of the Hessenberg matrix.
    pub fn advance(&mut self, column: &Matrix) -> Result<&IterationFactors> {
        let l = self.l;
        let j = self.steps.len() + 1;
        if column.shape() != ((j + 1) * l, l) {
            return Err(contract(format!(
                "Hessenberg column for iteration {j} must be {}x{l}, got {}x{}",
                (j + 1) * l,
                column.nrows(),
                column.ncols()
            )));
        }
        let mut col = column.clone();
        for (i, prev) in self.steps.iter().enumerate() {
            let mut seg = col.rows_mut(i * l, 2 * l);
            let t = &prev.h_cal * &seg;
            seg.copy_from(&t);
        }
        let z = col.rows(0, (j - 1) * l).into_owned();
        let stacked = col.rows((j - 1) * l, 2 * l).into_owned();
        let h_hat = stacked.rows(0, l).into_owned();
        let h_sub = stacked.rows(l, l).into_owned();

        let qr = householder_qr(&stacked)?;
        let h_cal = qr.qt();
        let n = qr.r().rows(0, l).into_owned();

        let rank_tol = self.rank_tol_factor * ((j + 1) * l) as f64 * f64::EPSILON * stacked.norm();
        let sq = echelon_qr(&h_hat, rank_tol);
        let q_hat_b = sq.qt();
        let rank_r = sq.rank();
        let n_hat = sq.into_r();

        let c_tilde = match self.steps.last() {
            Some(prev) => prev.c_tilde_next.clone(),
            None => self.s0.clone(),
        };
        let q11 = h_cal.view((0, 0), (l, l));
        let q21 = h_cal.view((l, 0), (l, l));
        let c = q11 * &c_tilde;
        let c_tilde_next = q21 * &c_tilde;
        let c_hat = &q_hat_b * &c_tilde;

        let mut r = Matrix::zeros(j * l, j * l);
        r.view_mut((0, 0), ((j - 1) * l, (j - 1) * l)).copy_from(&self.r);
        r.view_mut((0, (j - 1) * l), ((j - 1) * l, l)).copy_from(&z);
        r.view_mut(((j - 1) * l, (j - 1) * l), (l, l)).copy_from(&n);
        self.r = r;
        let mut g = Matrix::zeros(j * l, l);
        g.rows_mut(0, (j - 1) * l).copy_from(&self.g);
        g.rows_mut((j - 1) * l, l).copy_from(&c);
        self.g = g;

        self.steps.push(IterationFactors {
            iteration: j,
            z,
            h_hat,
            h_sub,
            n,
            h_cal,
            q_hat_b,
            n_hat,
            rank_r,
            rank_tol,
            c_tilde,
            c,
            c_hat,
            c_tilde_next,
        });
        Ok(self.steps.last().expect("just pushed"))
    }

    /// Factors of iteration `j` (1-based).
    pub fn step(&self, j: usize) -> Result<&IterationFactors> {
        if j == 0 || j > self.steps.len() {
            return Err(crate::Error::IterationOutOfRange {
                requested: j,
                available: self.steps.len(),
            });
        }
        Ok(&self.steps[j - 1])
    }

    pub fn steps(&self) -> &[IterationFactors] {
        &self.steps
    }

    /// `R_j`, the leading `jL x jL` block of the current R factor.
    pub fn r_factor(&self, j: usize) -> Matrix {
        let k = j * self.l;
        self.r.view((0, 0), (k, k)).into_owned()
    }

    /// `G_j = [C_1; ...; C_j]`.
    pub fn g_stack(&self, j: usize) -> Matrix {
        self.g.rows(0, j * self.l).into_owned()
    }
}
