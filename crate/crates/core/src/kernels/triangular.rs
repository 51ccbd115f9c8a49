use super::Matrix;

/// Back-substitution for `R X = B` using the upper triangle of `r`.
///
/// Returns `None` when a diagonal entry is zero relative to the largest one
/// (below machine precision) or the result is not finite.
pub fn solve_upper_triangular(r: &Matrix, b: &Matrix) -> Option<Matrix> {
    let n = r.nrows();
    assert_eq!(r.ncols(), n, "triangular factor must be square");
    assert_eq!(b.nrows(), n, "right-hand side height mismatch");
    let dmax = (0..n).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if n > 0 && (0..n).any(|i| r[(i, i)].abs() <= f64::EPSILON * dmax || r[(i, i)] == 0.0) {
        return None;
    }
    let mut x = b.clone();
    for c in 0..x.ncols() {
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for k in i + 1..n {
                s -= r[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / r[(i, i)];
        }
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
