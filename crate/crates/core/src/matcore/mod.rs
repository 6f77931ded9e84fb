//! Dense real matrix kernels: inner products, symmetric eigendecomposition,
//! inverse square roots, the matrix exponential and thin QR.
//!
//! Nothing in here knows about manifolds. All routines are pure functions of
//! their inputs.

mod eig;
mod expm;
pub mod lu;
mod matrix;
mod qr;

pub use eig::{sym_eig, sym_inv_sqrt, sym_sqrt, SymEig};
pub use expm::matrix_exp;
pub use matrix::{AmbientMatrix, Matrix};
pub use qr::thin_qr;

use crate::error::Result;

/// Frobenius inner product `trace(Vᵀ W)`.
pub fn frobenius_inner(v: &Matrix, w: &Matrix) -> Result<f64> {
    v.check_same_shape(w)?;
    Ok(v.as_slice().iter().zip(w.as_slice()).map(|(a, b)| a * b).sum())
}
