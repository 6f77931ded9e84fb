//! Closed-form canonical-metric geodesics.
//!
//! For `X ∈ St(n,k)` and tangent `V`, write `A = XᵀV` (skew) and factor the
//! horizontal part `(I − XXᵀ)V = Q R` with `Q ⟂ X`. Then
//!
//! ```text
//! exp_X(V) = [X Q] · expm([[A, −Rᵀ], [R, 0]]) · [I_k; 0]
//! ```
//!
//! which only needs the exponential of a `(k+r) × (k+r)` skew matrix,
//! `r = min(k, n−k)`.

use super::{StiefelPoint, TangentVector};
use crate::error::{Error, Result};
use crate::matcore::{matrix_exp, Matrix};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Removes the components of `v` along the columns of `x` and the vectors
/// in `basis`; returns the coefficients on `basis`. Classical Gram–Schmidt
/// applied twice.
fn orthogonalize(v: &mut [f64], x: &Matrix, basis: &[Vec<f64>]) -> Vec<f64> {
    let n = x.rows();
    let mut coeffs = vec![0.0; basis.len()];
    for _ in 0..2 {
        for j in 0..x.cols() {
            let c: f64 = (0..n).map(|i| x[(i, j)] * v[i]).sum();
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= c * x[(i, j)];
            }
        }
        for (b, coeff) in basis.iter().zip(coeffs.iter_mut()) {
            let c = dot(b, v);
            *coeff += c;
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= c * bi;
            }
        }
    }
    coeffs
}

/// Extends `basis` (orthonormal, orthogonal to the columns of `x`) with the
/// best-conditioned projected standard basis vectors until it holds
/// `target` vectors.
fn complete_basis(x: &Matrix, basis: &mut Vec<Vec<f64>>, target: usize) -> Result<()> {
    let n = x.rows();
    while basis.len() < target {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            orthogonalize(&mut e, x, basis);
            let nrm = norm(&e);
            if best.as_ref().is_none_or(|(b, _)| nrm > *b) {
                best = Some((nrm, e));
            }
        }
        match best {
            Some((nrm, mut e)) if nrm > 1e-8 => {
                for t in &mut e {
                    *t /= nrm;
                }
                basis.push(e);
            }
            _ => return Err(Error::RankDeficient { smallest: 0.0 }),
        }
    }
    Ok(())
}

/// Factors `W = Q R` with `Q` an `n × r` matrix of orthonormal columns that
/// are also orthogonal to the columns of `x`, and `R` an `r × k` matrix.
///
/// `W` is expected to lie (up to rounding) in the orthogonal complement of
/// `span(x)`. Rank-deficient `W` is handled by completing `Q` with further
/// complement directions, paired with zero rows of `R`.
pub(crate) fn complement_qr(x: &Matrix, w: &Matrix, r: usize) -> Result<(Matrix, Matrix)> {
    let (n, k) = w.shape();
    let scale = w.frobenius_norm();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(r);
    let mut rmat = Matrix::zeros(r, k);
    for j in 0..k {
        let mut col = w.col_vec(j);
        let coeffs = orthogonalize(&mut col, x, &basis);
        for (i, c) in coeffs.iter().enumerate() {
            rmat[(i, j)] = *c;
        }
        let nrm = norm(&col);
        if basis.len() < r && nrm > 1e-13 * scale && nrm > 1e-300 {
            rmat[(basis.len(), j)] = nrm;
            for t in &mut col {
                *t /= nrm;
            }
            basis.push(col);
        }
    }
    complete_basis(x, &mut basis, r)?;
    let q = Matrix::from_fn(n, r, |i, j| basis[j][i]);
    Ok((q, rmat))
}

/// Orthonormal basis of the orthogonal complement of the column space of
/// `u` (which must have orthonormal columns), as an `m × (m − p)` matrix.
pub(crate) fn orthonormal_completion(u: &Matrix) -> Result<Matrix> {
    let (m, p) = u.shape();
    let mut basis = Vec::with_capacity(m - p);
    complete_basis(u, &mut basis, m - p)?;
    Ok(Matrix::from_fn(m, m - p, |i, j| basis[j][i]))
}

/// Riemannian exponential `exp_X(V)` for the canonical metric.
pub fn exp_map(x: &StiefelPoint, v: &TangentVector) -> Result<StiefelPoint> {
    if v.base().matrix().shape() != x.matrix().shape()
        || v.base().matrix().distance(x.matrix()) > 1e-12
    {
        return Err(Error::BaseMismatch);
    }
    let xm = x.matrix();
    let (n, k) = xm.shape();
    let vd = v.dir();
    if vd.max_abs() == 0.0 {
        return Ok(x.clone());
    }
    let xtv = xm.tr_matmul(vd);
    let a = xtv.skew_part();
    let r = k.min(n - k);
    if r == 0 {
        return StiefelPoint::new(xm.matmul(&matrix_exp(&a)?));
    }
    let w = vd - &xm.matmul(&xtv);
    let (q, rr) = complement_qr(xm, &w, r)?;

    let mut gen = Matrix::zeros(k + r, k + r);
    gen.set_block(0, 0, &a);
    gen.set_block(0, k, &rr.transpose().scale(-1.0));
    gen.set_block(k, 0, &rr);
    let e = matrix_exp(&gen)?;
    let m = e.block(0, 0, k, k);
    let nn = e.block(k, 0, r, k);
    StiefelPoint::new(xm.matmul(&m) + q.matmul(&nn))
}
