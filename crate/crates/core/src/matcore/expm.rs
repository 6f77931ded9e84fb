use super::{lu, Matrix};
use crate::error::{Error, Result};

/// Coefficients of the diagonal [6/6] Padé approximant of `exp`.
const PADE6: [f64; 7] = [
    1.0,
    1.0 / 2.0,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15840.0,
    1.0 / 665280.0,
];

/// Matrix exponential by scaling and squaring with a [6/6] Padé approximant.
///
/// The input is scaled so that its 1-norm is at most 1/2, where the
/// approximant is accurate to double precision.
pub fn matrix_exp(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch {
            expected: (a.rows(), a.rows()),
            found: a.shape(),
        });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = a.rows();
    let norm = a.norm_one();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let x = a.scale(0.5f64.powi(squarings));

    let mut num = Matrix::identity(n);
    let mut den = Matrix::identity(n);
    let mut power = Matrix::identity(n);
    for (j, c) in PADE6.iter().enumerate().skip(1) {
        power = power.matmul(&x);
        let term = power.scale(*c);
        num += &term;
        if j % 2 == 0 {
            den += &term;
        } else {
            den -= &term;
        }
    }
    let mut r = lu::solve(&den, &num)?;
    for _ in 0..squarings {
        r = r.matmul(&r);
    }
    Ok(r)
}
