//! LU factorisation with partial pivoting for small dense solves.

use super::Matrix;
use crate::error::{Error, Result};

/// Solves `A X = B` for square `A`.
pub fn solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    if !a.is_square() || b.rows() != n {
        return Err(Error::ShapeMismatch {
            expected: (n, n),
            found: b.shape(),
        });
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let m = b.cols();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| lu[(i, col)].abs().total_cmp(&lu[(j, col)].abs()))
            .unwrap_or(col);
        if lu[(pivot, col)].abs() <= 1e-14 * scale {
            return Err(Error::Singular);
        }
        if pivot != col {
            for j in 0..n {
                let t = lu[(col, j)];
                lu[(col, j)] = lu[(pivot, j)];
                lu[(pivot, j)] = t;
            }
            for j in 0..m {
                let t = x[(col, j)];
                x[(col, j)] = x[(pivot, j)];
                x[(pivot, j)] = t;
            }
        }
        let d = lu[(col, col)];
        for r in (col + 1)..n {
            let f = lu[(r, col)] / d;
            if f == 0.0 {
                continue;
            }
            lu[(r, col)] = 0.0;
            for j in (col + 1)..n {
                lu[(r, j)] -= f * lu[(col, j)];
            }
            for j in 0..m {
                x[(r, j)] -= f * x[(col, j)];
            }
        }
    }
    for col in (0..n).rev() {
        let d = lu[(col, col)];
        for j in 0..m {
            let mut acc = x[(col, j)];
            for c in (col + 1)..n {
                acc -= lu[(col, c)] * x[(c, j)];
            }
            x[(col, j)] = acc / d;
        }
    }
    Ok(x)
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(a: &Matrix) -> f64 {
    assert!(a.is_square(), "determinant of a non-square matrix");
    let n = a.rows();
    let mut lu = a.clone();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| lu[(i, col)].abs().total_cmp(&lu[(j, col)].abs()))
            .unwrap_or(col);
        if lu[(pivot, col)] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..n {
                let t = lu[(col, j)];
                lu[(col, j)] = lu[(pivot, j)];
                lu[(pivot, j)] = t;
            }
            det = -det;
        }
        let d = lu[(col, col)];
        det *= d;
        for r in (col + 1)..n {
            let f = lu[(r, col)] / d;
            for j in (col + 1)..n {
                lu[(r, j)] -= f * lu[(col, j)];
            }
        }
    }
    det
}

pub fn inverse(a: &Matrix) -> Result<Matrix> {
    solve(a, &Matrix::identity(a.rows()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_with_pivoting() {
        let a = Matrix::from_rows(&[[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]]);
        let inv = inverse(&a).unwrap();
        assert!(a.matmul(&inv).distance(&Matrix::identity(3)) < 1e-14);
    }

    #[test]
    fn determinant_tracks_row_swaps() {
        let a = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        assert_eq!(determinant(&a), -1.0);
        let b = Matrix::from_rows(&[[2.0, 1.0], [1.0, 3.0]]);
        assert!((determinant(&b) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        assert_eq!(inverse(&a), Err(Error::Singular));
    }
}
