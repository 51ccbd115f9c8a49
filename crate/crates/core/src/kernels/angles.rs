use super::{orthonormality_defect, svd, Matrix};
use crate::error::{contract, Error, Result};

/// Principal angles between `span(u)` and `span(v)`, ascending.
///
/// Both inputs must have orthonormal columns (to 1e-8). Small angles are
/// taken from the sines of the projection onto the complement, the rest from
/// the cosines, so both ends of `[0, pi/2]` are resolved accurately.
pub fn principal_angles(u: &Matrix, v: &Matrix) -> Result<Vec<f64>> {
    if u.nrows() != v.nrows() {
        return Err(contract(format!(
            "principal_angles: bases live in different spaces ({} vs {})",
            u.nrows(),
            v.nrows()
        )));
    }
    for b in [u, v] {
        let residual = orthonormality_defect(b);
        if !(residual <= 1e-8) {
            return Err(Error::NotOrthonormal { residual });
        }
    }
    let k = u.ncols().min(v.ncols());
    if k == 0 {
        return Ok(Vec::new());
    }
    let cosines: Vec<f64> = svd(&(u.transpose() * v))?
        .singular_values
        .iter()
        .take(k)
        .map(|c| c.clamp(0.0, 1.0))
        .collect();

    let (big, small) = if u.ncols() >= v.ncols() { (u, v) } else { (v, u) };
    let resid = small - big * (big.transpose() * small);
    let mut sines: Vec<f64> = svd(&resid)?
        .singular_values
        .iter()
        .map(|s| s.clamp(0.0, 1.0))
        .collect();
    sines.sort_by(f64::total_cmp);

    let mut angles: Vec<f64> = cosines
        .iter()
        .zip(&sines)
        .map(|(&c, &s)| if c * c < 0.5 { c.acos() } else { s.asin() })
        .collect();
    angles.sort_by(f64::total_cmp);
    Ok(angles)
}
