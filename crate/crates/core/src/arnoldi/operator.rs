use crate::error::{contract, Result};
use crate::kernels::{check_finite, Matrix};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from 0-indexed `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted = triplets.to_vec();
        for &(i, j, v) in &sorted {
            if i >= nrows || j >= ncols {
                return Err(contract(format!(
                    "entry ({i},{j}) outside a {nrows}x{ncols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(crate::Error::NonFinite);
            }
        }
        sorted.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *values.last_mut().expect("previous entry") += v;
                continue;
            }
            col_idx.push(j);
            values.push(v);
            row_ptr[i + 1] += 1;
            last = Some((i, j));
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }

    pub fn to_dense(&self) -> Matrix {
        let mut d = Matrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            d[(i, j)] += v;
        }
        d
    }

    pub fn mul_dense(&self, x: &Matrix) -> Matrix {
        let mut y = Matrix::zeros(self.nrows, x.ncols());
        for c in 0..x.ncols() {
            let xc = x.column(c);
            for i in 0..self.nrows {
                let mut s = 0.0;
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    s += self.values[k] * xc[self.col_idx[k]];
                }
                y[(i, c)] = s;
            }
        }
        y
    }
}

/// A square linear operator applied to `n x L` blocks.
#[derive(Debug, Clone)]
pub enum BlockOperator {
    Dense(Matrix),
    Sparse(CsrMatrix),
    /// `diag(first, second)`.
    BlockDiagonal(Box<BlockOperator>, Box<BlockOperator>),
}

impl BlockOperator {
    pub fn dense(a: Matrix) -> Result<Self> {
        check_finite(&a)?;
        if a.nrows() != a.ncols() || a.nrows() == 0 {
            return Err(contract(format!(
                "operator must be square and nonempty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        Ok(Self::Dense(a))
    }

    pub fn sparse(a: CsrMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() || a.nrows() == 0 {
            return Err(contract(format!(
                "operator must be square and nonempty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        Ok(Self::Sparse(a))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Dense(a) => a.nrows(),
            Self::Sparse(a) => a.nrows(),
            Self::BlockDiagonal(a, b) => a.dim() + b.dim(),
        }
    }

    /// `A X`.
    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.nrows() != self.dim() {
            return Err(contract(format!(
                "operator of dimension {} applied to a block with {} rows",
                self.dim(),
                x.nrows()
            )));
        }
        Ok(self.apply_unchecked(x))
    }

    fn apply_unchecked(&self, x: &Matrix) -> Matrix {
        match self {
            Self::Dense(a) => a * x,
            Self::Sparse(a) => a.mul_dense(x),
            Self::BlockDiagonal(a, b) => {
                let na = a.dim();
                let ya = a.apply_unchecked(&x.rows(0, na).into_owned());
                let yb = b.apply_unchecked(&x.rows(na, b.dim()).into_owned());
                let mut y = Matrix::zeros(x.nrows(), x.ncols());
                y.rows_mut(0, na).copy_from(&ya);
                y.rows_mut(na, b.dim()).copy_from(&yb);
                y
            }
        }
    }

    pub fn to_dense(&self) -> Matrix {
        match self {
            Self::Dense(a) => a.clone(),
            Self::Sparse(a) => a.to_dense(),
            Self::BlockDiagonal(a, b) => {
                let (na, nb) = (a.dim(), b.dim());
                let mut d = Matrix::zeros(na + nb, na + nb);
                d.view_mut((0, 0), (na, na)).copy_from(&a.to_dense());
                d.view_mut((na, na), (nb, nb)).copy_from(&b.to_dense());
                d
            }
        }
    }
}
