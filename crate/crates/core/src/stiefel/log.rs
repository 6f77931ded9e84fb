//! Riemannian logarithm for the canonical metric.
//!
//! The algorithm embeds the pair `(X, Y)` into an orthogonal matrix
//!
//! ```text
//! V = [[M, X0], [N, Y0]],   M = XᵀY,   Y − XM = QN,
//! ```
//!
//! and rotates the free completion block `[X0; Y0]` until the lower-right
//! block `C` of the principal logarithm `log V = [[A, −Bᵀ], [B, C]]` vanishes.
//! At that point `exp_X(XA + QB) = Y`. Each rotation solves the
//! Baker–Campbell–Hausdorff-corrected Sylvester equation
//!
//! ```text
//! (½I − BBᵀ/12) Φ + Φ (½I − BBᵀ/12) = −C
//! ```
//!
//! and multiplies the completion by `expm(Φ)`.
//!
//! The principal logarithm of the embedded rotation is evaluated through a
//! Cayley transform (see [`log_orthogonal`]). Points on the sphere (`k = 1`)
//! use the great-circle closed form.

use super::geodesic::orthonormal_completion;
use super::{canonical_norm_sq, complement_qr, StiefelPoint, TangentVector};
use crate::error::{Error, Result};
use crate::matcore::{lu, matrix_exp, sym_eig, sym_inv_sqrt, Matrix};
use crate::tolerance::tolerances;

/// Principal logarithm of a special orthogonal matrix, returned as an exact
/// skew-symmetric matrix.
///
/// The Cayley transform `S = (U − I)(U + I)^{-1}` is skew with eigenvalues
/// `i·tan(θ/2)`, so `log U = 2 artanh(S) = 2 S g(S²)` where
/// `g(−t²) = arctan(t)/t` is evaluated on the symmetric matrix `S²`. Valid
/// for every rotation angle in `(−π, π)`.
pub(crate) fn log_orthogonal(u: &Matrix) -> Result<Matrix> {
    let m = u.rows();
    let id = Matrix::identity(m);
    let num = u - &id;
    let den = u + &id;
    let s = lu::solve(&den.transpose(), &num.transpose())
        .map_err(|_| Error::CutLocus {
            detail: "rotation block has eigenvalue -1",
        })?
        .transpose()
        .skew_part();
    if !s.is_finite() || s.max_abs() > 1e8 {
        return Err(Error::CutLocus {
            detail: "rotation block has eigenvalue -1",
        });
    }
    let neg_s2 = s.matmul(&s).scale(-1.0).sym_part();
    let eig = sym_eig(&neg_s2)?;
    let g = eig.apply(|t2| {
        let t2 = t2.max(0.0);
        if t2 < 1e-8 {
            1.0 - t2 / 3.0 + t2 * t2 / 5.0
        } else {
            let t = t2.sqrt();
            t.atan() / t
        }
    });
    Ok(s.matmul(&g).scale(2.0).skew_part())
}

/// Completion of `[M; N]` to an orthogonal matrix that is close to the
/// identity when `M ≈ I`, which keeps the first logarithm small.
fn initial_completion(u: &Matrix, m: &Matrix, nmat: &Matrix) -> Result<Matrix> {
    let (k, r) = (m.rows(), nmat.rows());
    let mut cand = Matrix::zeros(k + r, r);
    cand.set_block(0, 0, &nmat.transpose().scale(-1.0));
    cand.set_block(k, 0, &Matrix::identity(r));
    // Remove the span of u, then take the polar factor.
    cand -= &u.matmul(&u.tr_matmul(&cand));
    match sym_inv_sqrt(&cand.tr_matmul(&cand).sym_part()) {
        Ok(inv) if inv.max_abs() < 1e4 => Ok(cand.matmul(&inv)),
        _ => orthonormal_completion(u),
    }
}

/// Solves the corrected Sylvester equation for the completion rotation.
fn completion_step(l: &Matrix, k: usize, r: usize) -> Result<Matrix> {
    let b = l.block(k, 0, r, k);
    let c = l.block(k, k, r, r).skew_part();
    let s = b.matmul(&b.transpose()).sym_part();
    let eig = sym_eig(&s)?;
    let u = &eig.vectors;
    let ct = u.tr_matmul(&c).matmul(u);
    let phi_t = Matrix::from_fn(r, r, |i, j| {
        let denom = 1.0 - (eig.values[i] + eig.values[j]) / 12.0;
        if denom > 0.25 {
            -ct[(i, j)] / denom
        } else {
            -ct[(i, j)]
        }
    });
    Ok(u.matmul(&phi_t).matmul(&u.transpose()).skew_part())
}

fn sphere_log(x: &StiefelPoint, y: &StiefelPoint) -> Result<TangentVector> {
    let xm = x.matrix();
    let ym = y.matrix();
    let c: f64 = xm.as_slice().iter().zip(ym.as_slice()).map(|(a, b)| a * b).sum();
    let w = ym - &xm.scale(c);
    let s = w.frobenius_norm();
    if s < 1e-15 {
        if c > 0.0 {
            return Ok(x.zero_tangent());
        }
        return Err(Error::CutLocus {
            detail: "antipodal points",
        });
    }
    let theta = s.atan2(c);
    // Re-project onto the tangent space to clear rounding in w.
    let mut dir = w.scale(theta / s);
    let along: f64 = xm.as_slice().iter().zip(dir.as_slice()).map(|(a, b)| a * b).sum();
    dir -= &xm.scale(along);
    Ok(TangentVector::from_trusted(x.clone(), dir))
}

/// Riemannian logarithm `log_X(Y)` for the canonical metric.
///
/// Returns [`Error::NoConvergence`] when the iteration cap is reached while
/// the residual is still decreasing, and [`Error::CutLocus`] when the
/// residual stagnates or the embedded rotation has an eigenvalue at −1.
pub fn log_map(x: &StiefelPoint, y: &StiefelPoint) -> Result<TangentVector> {
    let xm = x.matrix();
    let ym = y.matrix();
    xm.check_same_shape(ym)?;
    let (n, k) = xm.shape();
    if xm == ym {
        return Ok(x.zero_tangent());
    }
    if k == 1 && n >= 2 {
        return sphere_log(x, y);
    }
    stiefel_log(x, y)
}

pub(crate) fn stiefel_log(x: &StiefelPoint, y: &StiefelPoint) -> Result<TangentVector> {
    let tol = tolerances();
    let xm = x.matrix();
    let ym = y.matrix();
    let (n, k) = xm.shape();
    let m = xm.tr_matmul(ym);
    let r = k.min(n - k);

    if r == 0 {
        if lu::determinant(&m) < 0.0 {
            return Err(Error::CutLocus {
                detail: "points lie in different connected components",
            });
        }
        let a = log_orthogonal(&m)?;
        return Ok(TangentVector::from_trusted(x.clone(), xm.matmul(&a)));
    }

    let w = ym - &xm.matmul(&m);
    let (q, nmat) = complement_qr(xm, &w, r)?;
    let u = m.vstack(&nmat);
    let mut v = u.hstack(&initial_completion(&u, &m, &nmat)?);
    if lu::determinant(&v) < 0.0 {
        let last = k + r - 1;
        for i in 0..(k + r) {
            v[(i, last)] = -v[(i, last)];
        }
    }

    let mut best = f64::INFINITY;
    let mut since_improved = 0;
    let mut iterations = 0;
    let l = loop {
        let l = log_orthogonal(&v)?;
        let residual = l.block(k, k, r, r).frobenius_norm();
        if !residual.is_finite() {
            return Err(Error::CutLocus {
                detail: "non-finite residual",
            });
        }
        if residual <= tol.log_residual {
            break l;
        }
        if residual < 0.9 * best {
            best = residual;
            since_improved = 0;
        } else {
            since_improved += 1;
            if since_improved >= 10 {
                return Err(Error::CutLocus {
                    detail: "residual stagnation",
                });
            }
        }
        if iterations == tol.log_max_iter {
            return Err(Error::NoConvergence {
                what: "Stiefel logarithm",
                iterations,
                residual,
            });
        }
        iterations += 1;
        let rot = matrix_exp(&completion_step(&l, k, r)?)?;
        let tail = v.block(0, k, k + r, r).matmul(&rot);
        v.set_block(0, k, &tail);
    };

    let a = l.block(0, 0, k, k);
    let b = l.block(k, 0, r, k);
    let dir = xm.matmul(&a) + q.matmul(&b);
    Ok(TangentVector::from_trusted(x.clone(), dir))
}

/// Geodesic distance `‖log_X(Y)‖_c`.
///
/// On spheres this is the great-circle angle, which stays defined at
/// antipodal points.
pub fn geodesic_distance(x: &StiefelPoint, y: &StiefelPoint) -> Result<f64> {
    let xm = x.matrix();
    let ym = y.matrix();
    xm.check_same_shape(ym)?;
    let (n, k) = xm.shape();
    if k == 1 && n >= 2 {
        let c: f64 = xm.as_slice().iter().zip(ym.as_slice()).map(|(a, b)| a * b).sum();
        let s = (ym - &xm.scale(c)).frobenius_norm();
        return Ok(s.atan2(c));
    }
    let v = log_map(x, y)?;
    Ok(canonical_norm_sq(xm, v.dir()).max(0.0).sqrt())
}
