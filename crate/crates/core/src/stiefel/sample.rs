use rand::Rng;
use rand_distr::StandardNormal;

use super::{StiefelPoint, StiefelShape};
use crate::matcore::{thin_qr, Matrix};

pub(crate) fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Haar-uniform sample on `St(n,k)`: the `Q` factor of a standard Gaussian
/// `n × k` matrix, with the sign convention `diag(R) > 0`.
pub fn sample_uniform<R: Rng + ?Sized>(shape: StiefelShape, rng: &mut R) -> StiefelPoint {
    loop {
        let g = gaussian_matrix(shape.n, shape.k, rng);
        // A rank-deficient Gaussian draw has probability zero; redraw.
        if let Ok((q, _)) = thin_qr(&g) {
            return StiefelPoint::from_trusted(q);
        }
    }
}

/// Haar-uniform element of `O(n)`.
pub fn haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    sample_uniform(StiefelShape { n, k: n }, rng).into_matrix()
}
