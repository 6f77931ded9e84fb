//! Symmetric eigendecomposition by cyclic Jacobi rotations, and the matrix
//! functions built on it.

use super::Matrix;
use crate::error::{Error, Result};
use crate::tolerance::tolerances;

/// Eigen-decomposition `S = Q diag(λ) Qᵀ` of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEig {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthogonal matrix whose columns are the matching eigenvectors.
    pub vectors: Matrix,
}

impl SymEig {
    /// `Q diag(f(λ)) Qᵀ`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.values.len();
        let q = &self.vectors;
        let mut out = Matrix::zeros(n, n);
        for (l, &lambda) in self.values.iter().enumerate() {
            let fl = f(lambda);
            if fl == 0.0 {
                continue;
            }
            for i in 0..n {
                let qi = q[(i, l)] * fl;
                if qi == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += qi * q[(j, l)];
                }
            }
        }
        out
    }

    pub fn min_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::INFINITY)
    }
}

fn check_symmetric(s: &Matrix) -> Result<()> {
    if !s.is_square() {
        return Err(Error::ShapeMismatch {
            expected: (s.rows(), s.rows()),
            found: s.shape(),
        });
    }
    if !s.is_finite() {
        return Err(Error::NonFinite);
    }
    let norm = s.frobenius_norm();
    let asym = s.distance(&s.transpose());
    let rel = if norm > 0.0 { asym / norm } else { 0.0 };
    if rel > tolerances().symmetry {
        return Err(Error::NotSymmetric { asymmetry: rel });
    }
    Ok(())
}

/// Eigenvalues (descending) and orthonormal eigenvectors of a symmetric
/// matrix.
pub fn sym_eig(s: &Matrix) -> Result<SymEig> {
    check_symmetric(s)?;
    let n = s.rows();
    let mut a = s.sym_part().into_vec();
    let mut v = Matrix::identity(n).into_vec();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let max_sweeps = tolerances().jacobi_max_sweeps;

    let off_norm = |a: &[f64]| -> f64 {
        let mut off = 0.0;
        for i in 0..n {
            for x in &a[i * n + i + 1..(i + 1) * n] {
                off += x * x;
            }
        }
        off.sqrt()
    };

    let mut converged = scale == 0.0;
    let mut sweeps = 0;
    while !converged {
        if off_norm(&a) <= f64::EPSILON * 0.1 * scale {
            converged = true;
            break;
        }
        if sweeps == max_sweeps {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // Rotations below the diagonal's resolution change nothing.
                let g = 100.0 * apq.abs();
                if app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                // Columns p and q.
                for r in 0..n {
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    a[r * n + p] = c * arp - sn * arq;
                    a[r * n + q] = sn * arp + c * arq;
                }
                // Rows p and q.
                let (lo, hi) = a.split_at_mut(q * n);
                let row_p = &mut lo[p * n..(p + 1) * n];
                let row_q = &mut hi[..n];
                for (x, y) in row_p.iter_mut().zip(row_q.iter_mut()) {
                    let (apr, aqr) = (*x, *y);
                    *x = c * apr - sn * aqr;
                    *y = sn * apr + c * aqr;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = c * vrp - sn * vrq;
                    v[r * n + q] = sn * vrp + c * vrq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            what: "Jacobi eigensolver",
            iterations: sweeps,
            residual: off_norm(&a),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[r * n + order[c]]);
    Ok(SymEig { values, vectors })
}

/// `S^{-1/2}` for symmetric positive definite `S`.
///
/// Fails with [`Error::RankDeficient`] when the smallest eigenvalue does not
/// exceed the rank tolerance.
pub fn sym_inv_sqrt(s: &Matrix) -> Result<Matrix> {
    let eig = sym_eig(s)?;
    let smallest = eig.min_value();
    if smallest <= tolerances().rank {
        return Err(Error::RankDeficient { smallest });
    }
    Ok(eig.apply(|l| 1.0 / l.sqrt()))
}

/// `S^{1/2}` for symmetric positive semidefinite `S`.
pub fn sym_sqrt(s: &Matrix) -> Result<Matrix> {
    let eig = sym_eig(s)?;
    Ok(eig.apply(|l| l.max(0.0).sqrt()))
}
