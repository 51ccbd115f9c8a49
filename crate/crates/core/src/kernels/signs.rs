use super::Matrix;

const MAX_BRUTE_ROWS: usize = 20;

/// Whether `b = D1 a D2` for some diagonal sign matrices, entrywise to `tol`.
///
/// Searches all row-sign patterns (with the first row fixed, since a global
/// flip is absorbed by the column signs) and picks column signs greedily.
/// Panics beyond 20 rows.
pub fn sign_equivalent(a: &Matrix, b: &Matrix, tol: f64) -> bool {
    if a.shape() != b.shape() {
        return false;
    }
    let (m, n) = a.shape();
    assert!(m <= MAX_BRUTE_ROWS, "sign_equivalent is exhaustive in rows");
    if m == 0 || n == 0 {
        return true;
    }
    let patterns = 1u64 << (m - 1);
    'pattern: for mask in 0..patterns {
        let row_sign = |i: usize| {
            if i > 0 && mask & (1 << (i - 1)) != 0 {
                -1.0
            } else {
                1.0
            }
        };
        for j in 0..n {
            let dev = |s: f64| {
                (0..m)
                    .map(|i| (s * row_sign(i) * a[(i, j)] - b[(i, j)]).abs())
                    .fold(0.0, f64::max)
            };
            if dev(1.0).min(dev(-1.0)) > tol {
                continue 'pattern;
            }
        }
        return true;
    }
    false
}

/// A sign-normalised representative for display.
///
/// Entries above `tol` are visited in column-major order; each one that links
/// two so-far unconnected rows/columns is made positive. Equivalent matrices
/// with the same pattern of significant entries map to the same output.
pub fn canonical_signs(a: &Matrix, tol: f64) -> Matrix {
    let (m, n) = a.shape();
    // Nodes 0..m are rows, m..m+n columns.
    let mut sign = vec![1.0; m + n];
    let mut comp: Vec<usize> = (0..m + n).collect();
    for j in 0..n {
        for i in 0..m {
            let v = a[(i, j)];
            if v.abs() <= tol || comp[i] == comp[m + j] {
                continue;
            }
            let (keep, flip) = (comp[i], comp[m + j]);
            let negate = sign[i] * sign[m + j] * v < 0.0;
            for k in 0..m + n {
                if comp[k] == flip {
                    if negate {
                        sign[k] = -sign[k];
                    }
                    comp[k] = keep;
                }
            }
        }
    }
    Matrix::from_fn(m, n, |i, j| {
        let v = sign[i] * sign[m + j] * a[(i, j)];
        if v == 0.0 {
            0.0
        } else {
            v
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_variants() {
        let i = Matrix::identity(4, 4);
        assert!(sign_equivalent(&(-&i), &i, 1e-12));
        let mut d = i.clone();
        d[(2, 2)] = -1.0;
        assert!(sign_equivalent(&d, &i, 1e-12));
    }

    #[test]
    fn rejects_different_magnitudes() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]);
        let b = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(!sign_equivalent(&a, &b, 1e-12));
        assert!(!sign_equivalent(&a, &(2.0 * &a), 1e-12));
    }

    #[test]
    fn two_sided_flip() {
        let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let b = Matrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]);
        assert!(sign_equivalent(&a, &b, 1e-12));
    }

    #[test]
    fn canonical_form_is_shared_by_equivalent_matrices() {
        let a = Matrix::from_row_slice(2, 2, &[0.3, -0.5, 0.0, 0.7]);
        let b = Matrix::from_row_slice(2, 2, &[-0.3, -0.5, 0.0, -0.7]);
        assert!(sign_equivalent(&a, &b, 1e-14));
        assert_eq!(canonical_signs(&a, 1e-14), canonical_signs(&b, 1e-14));
    }
}
