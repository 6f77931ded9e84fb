use super::Matrix;
use crate::error::{Error, Result};
use crate::tolerance::tolerances;

/// Thin QR factorisation `X = Q R` by Householder reflections.
///
/// `Q` is `n × k` with orthonormal columns and `R` is `k × k` upper
/// triangular with a nonnegative diagonal, which makes the factorisation of
/// a full-rank input unique.
pub fn thin_qr(x: &Matrix) -> Result<(Matrix, Matrix)> {
    let (n, k) = x.shape();
    if k == 0 || k > n {
        return Err(Error::ShapeMismatch {
            expected: (n, k.min(n)),
            found: (n, k),
        });
    }
    if !x.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut a = x.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(k);

    for j in 0..k {
        let mut v: Vec<f64> = (j..n).map(|i| a[(i, j)]).collect();
        let norm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if norm == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        for t in &mut v {
            *t /= vnorm;
        }
        for c in j..k {
            let dot: f64 = (j..n).map(|i| v[i - j] * a[(i, c)]).sum();
            for i in j..n {
                a[(i, c)] -= 2.0 * v[i - j] * dot;
            }
        }
        reflectors.push(v);
    }

    let mut r = Matrix::from_fn(k, k, |i, j| if j >= i { a[(i, j)] } else { 0.0 });
    let scale = x.frobenius_norm();
    let smallest = (0..k).map(|i| r[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if smallest <= tolerances().rank * scale.max(1.0) {
        return Err(Error::RankDeficient { smallest });
    }

    let mut q = Matrix::eye(n, k);
    for (j, v) in reflectors.iter().enumerate().rev() {
        if v.is_empty() {
            continue;
        }
        for c in 0..k {
            let dot: f64 = (j..n).map(|i| v[i - j] * q[(i, c)]).sum();
            if dot == 0.0 {
                continue;
            }
            for i in j..n {
                q[(i, c)] -= 2.0 * v[i - j] * dot;
            }
        }
    }

    for i in 0..k {
        if r[(i, i)] < 0.0 {
            for c in 0..k {
                r[(i, c)] = -r[(i, c)];
            }
            for row in 0..n {
                q[(row, i)] = -q[(row, i)];
            }
        }
    }
    Ok((q, r))
}
