//! Small dense linear-algebra helpers shared by the checks.
//!
//! Every operator norm here is the spectral norm (largest singular value).

use nalgebra::{DMatrix, DVector};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Singular values at or above this level count as range directions of a projector.
pub const PROJECTOR_RANGE_CUTOFF: f64 = 0.5;

/// Relative singular-value floor below which a restriction is treated as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

pub fn spectral_norm(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

pub fn singular_values(m: &Mat) -> Vector {
    if m.is_empty() {
        return Vector::zeros(0);
    }
    m.clone().singular_values()
}

/// Orthonormal basis (as columns) of the range of a projector.
pub fn range_basis(p: &Mat) -> Mat {
    let n = p.nrows();
    if p.is_empty() {
        return Mat::zeros(n, 0);
    }
    let svd = p.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] >= PROJECTOR_RANGE_CUTOFF)
        .collect();
    let mut basis = Mat::zeros(n, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        basis.set_column(c, &u.column(i));
    }
    basis
}

/// Norm of `m` restricted to the subspace spanned by the orthonormal columns of `basis`.
pub fn restricted_norm(m: &Mat, basis: &Mat) -> f64 {
    if basis.ncols() == 0 {
        return 0.0;
    }
    spectral_norm(&(m * basis))
}

/// `‖a − b‖ / max(1, ‖b‖)`: absolute for unit-scale matrices, relative for large ones.
pub fn scaled_residual(a: &Mat, b: &Mat) -> f64 {
    spectral_norm(&(a - b)) / spectral_norm(b).max(1.0)
}

/// Euclidean norm of `m * x`.
pub fn apply_norm(m: &Mat, x: &Vector) -> f64 {
    (m * x).norm()
}

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

/// Row-major constructor; every row must have `ncols` entries.
pub fn from_rows(rows: &[Vec<f64>]) -> Option<Mat> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(Mat::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Diagonal matrix with ones on `range`, zeros elsewhere.
pub fn coordinate_projector(n: usize, range: std::ops::Range<usize>) -> Mat {
    Mat::from_fn(n, n, |i, j| if i == j && range.contains(&i) { 1.0 } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = Mat::from_diagonal(&Vector::from_vec(vec![0.5, -3.0, 2.0]));
        assert_abs_diff_eq!(spectral_norm(&m), 3.0, epsilon = 1e-14);
        assert_eq!(spectral_norm(&Mat::zeros(3, 0)), 0.0);
    }

    #[test]
    fn range_of_oblique_projector() {
        // P = [[1, 1], [0, 0]] projects onto e1 along (1, -1).
        let p = from_rows(&[vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let b = range_basis(&p);
        assert_eq!(b.ncols(), 1);
        assert_abs_diff_eq!(b[(0, 0)].abs(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b[(1, 0)], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn restricted_norm_only_sees_the_subspace() {
        let m = Mat::from_diagonal(&Vector::from_vec(vec![2.0, 7.0]));
        let b = range_basis(&coordinate_projector(2, 0..1));
        assert_abs_diff_eq!(restricted_norm(&m, &b), 2.0, epsilon = 1e-14);
        assert_eq!(restricted_norm(&m, &Mat::zeros(2, 0)), 0.0);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_none());
    }
}
