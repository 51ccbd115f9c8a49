use nalgebra::DVector;

use super::{householder_qr, orthonormality_defect, svd, Matrix};
use crate::error::{contract, Error, Result};

/// CS decomposition of a `2L x 2L` orthogonal matrix
///
/// ```text
/// [Q11 Q12]   [U1  0] [C  S] [V1  0]^T
/// [Q21 Q22] = [0  U2] [S -C] [0  V2]
/// ```
///
/// with `C = diag(cosines)` ascending and `S = diag(sines)`.
#[derive(Debug, Clone)]
pub struct CsDecomposition {
    pub u1: Matrix,
    pub u2: Matrix,
    pub v1: Matrix,
    pub v2: Matrix,
    pub cosines: Vec<f64>,
    pub sines: Vec<f64>,
    /// `atan2(sines[i], cosines[i])`.
    pub angles: Vec<f64>,
}

impl CsDecomposition {
    pub fn block_size(&self) -> usize {
        self.cosines.len()
    }

    /// Rebuilds the four blocks `(Q11, Q12, Q21, Q22)`.
    pub fn blocks(&self) -> [Matrix; 4] {
        let c = Matrix::from_diagonal(&DVector::from_column_slice(&self.cosines));
        let s = Matrix::from_diagonal(&DVector::from_column_slice(&self.sines));
        [
            &self.u1 * &c * self.v1.transpose(),
            &self.u1 * &s * self.v2.transpose(),
            &self.u2 * &s * self.v1.transpose(),
            -(&self.u2 * &c * self.v2.transpose()),
        ]
    }

    pub fn reconstruct(&self) -> Matrix {
        let l = self.block_size();
        let b = self.blocks();
        let mut h = Matrix::zeros(2 * l, 2 * l);
        h.view_mut((0, 0), (l, l)).copy_from(&b[0]);
        h.view_mut((0, l), (l, l)).copy_from(&b[1]);
        h.view_mut((l, 0), (l, l)).copy_from(&b[2]);
        h.view_mut((l, l), (l, l)).copy_from(&b[3]);
        h
    }
}

/// CS decomposition of an orthogonal `2L x 2L` matrix.
///
/// Fails when `||H^T H - I||_F > 1e-8`.
pub fn cs_decompose(h: &Matrix) -> Result<CsDecomposition> {
    let (m, n) = h.shape();
    if m != n || m == 0 || m % 2 != 0 {
        return Err(contract(format!(
            "cs_decompose needs a 2L x 2L matrix, got {m}x{n}"
        )));
    }
    let residual = orthonormality_defect(h);
    if !(residual <= 1e-8) {
        return Err(Error::NotOrthogonal { residual });
    }
    let l = m / 2;
    let q11 = h.view((0, 0), (l, l)).into_owned();
    let q12 = h.view((0, l), (l, l)).into_owned();
    let q21 = h.view((l, 0), (l, l)).into_owned();
    let q22 = h.view((l, l), (l, l)).into_owned();

    // Ascending cosines: reverse the SVD order.
    let d = svd(&q11)?;
    let mut u1 = Matrix::zeros(l, l);
    let mut v1 = Matrix::zeros(l, l);
    let mut cosines = vec![0.0; l];
    for i in 0..l {
        let src = l - 1 - i;
        u1.set_column(i, &d.u.column(src));
        v1.set_column(i, &d.v.column(src));
        cosines[i] = d.singular_values[src].min(1.0);
    }

    // Q21 V1 has orthogonal columns of norms s_i; its QR yields U2.
    let w = &q21 * &v1;
    let qr = householder_qr(&w)?;
    let mut u2 = qr.q();
    let mut sines = vec![0.0; l];
    for i in 0..l {
        let rii = qr.r()[(i, i)];
        if rii < 0.0 {
            u2.column_mut(i).neg_mut();
        }
        sines[i] = rii.abs().min(1.0);
    }

    // Rows of V2^T from whichever of S V2^T = U1^T Q12, C V2^T = -U2^T Q22
    // is better conditioned.
    let top = u1.transpose() * &q12;
    let bottom = -(u2.transpose() * &q22);
    let mut v2t = Matrix::zeros(l, l);
    for i in 0..l {
        let row = if sines[i] >= cosines[i] {
            top.row(i) / sines[i]
        } else {
            bottom.row(i) / cosines[i]
        };
        v2t.set_row(i, &row);
    }

    let angles = sines
        .iter()
        .zip(&cosines)
        .map(|(s, c)| s.atan2(*c))
        .collect();
    Ok(CsDecomposition {
        u1,
        u2,
        v1,
        v2: v2t.transpose(),
        cosines,
        sines,
        angles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn random_orthogonal(n: usize, seed: u64) -> Matrix {
        let mut rng = StdRng::seed_from_u64(seed);
        let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        householder_qr(&a).unwrap().q()
    }

    fn check_invariants(h: &Matrix, cs: &CsDecomposition) {
        let l = cs.block_size();
        for i in 0..l {
            let one = cs.cosines[i].powi(2) + cs.sines[i].powi(2);
            assert!((one - 1.0).abs() <= 1e-12, "c^2+s^2 = {one}");
            assert!((cs.angles[i] - cs.sines[i].atan2(cs.cosines[i])).abs() == 0.0);
        }
        for w in cs.cosines.windows(2) {
            assert!(w[0] <= w[1]);
        }
        let blocks = cs.blocks();
        let offsets = [(0, 0), (0, l), (l, 0), (l, l)];
        for (b, (r, c)) in blocks.iter().zip(offsets) {
            let orig = h.view((r, c), (l, l));
            assert!((b - orig).norm() <= 1e-10);
        }
        for u in [&cs.u1, &cs.u2, &cs.v1, &cs.v2] {
            assert!(orthonormality_defect(u) <= 1e-10);
        }
    }

    #[test]
    fn scalar_givens() {
        let h = Matrix::from_row_slice(2, 2, &[0.6, 0.8, 0.8, -0.6]);
        let cs = cs_decompose(&h).unwrap();
        assert!((cs.cosines[0] - 0.6).abs() < 1e-15);
        assert!((cs.sines[0] - 0.8).abs() < 1e-15);
        check_invariants(&h, &cs);
    }

    #[test]
    fn block_swap() {
        let l = 3;
        let mut h = Matrix::zeros(2 * l, 2 * l);
        h.view_mut((0, l), (l, l)).fill_with_identity();
        h.view_mut((l, 0), (l, l)).fill_with_identity();
        let cs = cs_decompose(&h).unwrap();
        assert!(cs.cosines.iter().all(|c| *c == 0.0));
        assert!(cs.sines.iter().all(|s| (*s - 1.0).abs() < 1e-15));
        check_invariants(&h, &cs);
    }

    #[test]
    fn random_orthogonal_cosines_match_svd() {
        for seed in 0..5 {
            let h = random_orthogonal(6, seed);
            let cs = cs_decompose(&h).unwrap();
            let q11 = h.view((0, 0), (3, 3)).into_owned();
            let mut sv: Vec<f64> = svd(&q11).unwrap().singular_values.iter().copied().collect();
            sv.reverse();
            for (c, s) in cs.cosines.iter().zip(sv) {
                assert!((c - s).abs() < 1e-10);
            }
            check_invariants(&h, &cs);
        }
    }

    #[test]
    fn mixed_zero_and_unit_cosines() {
        // Q11 = diag(0, 1): one swapped pair, one untouched pair.
        let h = Matrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, -1.0,
            ],
        );
        let cs = cs_decompose(&h).unwrap();
        assert_eq!(cs.cosines, vec![0.0, 1.0]);
        check_invariants(&h, &cs);
    }

    #[test]
    fn non_orthogonal_is_rejected() {
        let h = Matrix::identity(4, 4) * 2.0;
        match cs_decompose(&h) {
            Err(Error::NotOrthogonal { residual }) => assert!(residual > 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
