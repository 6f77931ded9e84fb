use rayon::prelude::*;

use super::CompensatedSum;
use crate::error::{Error, Result};
use crate::matcore::Matrix;
use crate::stiefel::{exp_map, log_map, project_to_stiefel, StiefelPoint, TangentVector};

/// Stopping threshold on the canonical norm of the Riemannian gradient.
pub const FRECHET_GRAD_TOL: f64 = 1e-8;
pub const FRECHET_MAX_ITER: usize = 500;

struct Eval {
    objective: f64,
    grad: TangentVector,
}

/// Weighted objective `Σ wᵢ dist²(p, yᵢ)` and the descent direction
/// `Σ wᵢ log_p(yᵢ)`. Terms are reduced in input order.
fn evaluate(p: &StiefelPoint, points: &[StiefelPoint], weights: &[f64]) -> Result<Eval> {
    let logs: Vec<Result<TangentVector>> = points.par_iter().map(|y| log_map(p, y)).collect();
    let (n, k) = p.matrix().shape();
    let mut grad = Matrix::zeros(n, k);
    let mut objective = CompensatedSum::default();
    for (v, &w) in logs.into_iter().zip(weights) {
        let v = v?;
        let norm = v.norm();
        objective.add(w * norm * norm);
        grad += &v.dir().scale(w);
    }
    Ok(Eval {
        objective: objective.value(),
        grad: TangentVector::from_trusted(p.clone(), grad),
    })
}

fn initial_point(points: &[StiefelPoint], weights: &[f64]) -> Result<StiefelPoint> {
    let (n, k) = points[0].matrix().shape();
    let mut mean = Matrix::zeros(n, k);
    for (y, &w) in points.iter().zip(weights) {
        mean += &y.matrix().scale(w);
    }
    if let Ok(p) = project_to_stiefel(&mean) {
        return Ok(p);
    }
    let mut best: Option<(f64, &StiefelPoint)> = None;
    for cand in points {
        if let Ok(e) = evaluate(cand, points, weights) {
            if best.is_none_or(|(f, _)| e.objective < f) {
                best = Some((e.objective, cand));
            }
        }
    }
    best.map(|(_, p)| p.clone()).ok_or(Error::CutLocus {
        detail: "no input point reaches all others",
    })
}

/// Weighted Fréchet mean `argmin_p Σ wᵢ dist²(p, yᵢ)` by Riemannian gradient
/// descent `p ← exp_p(τ Σ wᵢ log_p(yᵢ))` with `τ = 1`, halving `τ` whenever
/// the objective would increase.
///
/// The iteration starts from the polar projection of the weighted extrinsic
/// mean, or from the best input point when that projection is rank deficient.
pub fn frechet_mean(points: &[StiefelPoint], weights: &[f64]) -> Result<StiefelPoint> {
    if points.is_empty() {
        return Err(Error::invalid("Fréchet mean of an empty set"));
    }
    if weights.len() != points.len() {
        return Err(Error::invalid(format!(
            "{} weights for {} points",
            weights.len(),
            points.len()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::invalid("weights must be finite and nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("weights sum to {total}, expected 1")));
    }
    let shape = points[0].shape();
    if points.iter().any(|p| p.shape() != shape) {
        return Err(Error::ShapeMismatch {
            expected: (shape.n, shape.k),
            found: points
                .iter()
                .map(|p| p.matrix().shape())
                .find(|s| *s != (shape.n, shape.k))
                .unwrap_or_default(),
        });
    }

    let mut p = initial_point(points, weights)?;
    let mut cur = evaluate(&p, points, weights)?;
    let mut tau = 1.0;
    for _ in 0..FRECHET_MAX_ITER {
        let gnorm = cur.grad.norm();
        if gnorm <= FRECHET_GRAD_TOL {
            return Ok(p);
        }
        let cand = exp_map(&p, &cur.grad.scale(tau))?;
        let next = evaluate(&cand, points, weights)?;
        if next.objective <= cur.objective * (1.0 + 1e-14) {
            p = cand;
            cur = next;
            tau = 1.0;
        } else {
            tau *= 0.5;
            if tau < 1e-12 {
                break;
            }
        }
    }
    Err(Error::NoConvergence {
        what: "Fréchet mean",
        iterations: FRECHET_MAX_ITER,
        residual: cur.grad.norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stiefel::geodesic_distance;

    fn circle(theta: f64) -> StiefelPoint {
        StiefelPoint::new(Matrix::column(&[theta.cos(), theta.sin()])).unwrap()
    }

    #[test]
    fn single_point() {
        let p = circle(0.7);
        let m = frechet_mean(std::slice::from_ref(&p), &[1.0]).unwrap();
        assert!(geodesic_distance(&m, &p).unwrap() < 1e-12);
    }

    #[test]
    fn circle_midpoint() {
        let m = frechet_mean(&[circle(0.2), circle(1.4)], &[0.5, 0.5]).unwrap();
        assert!(geodesic_distance(&m, &circle(0.8)).unwrap() < 1e-10);
    }

    #[test]
    fn unequal_weights_on_circle() {
        let m = frechet_mean(&[circle(0.0), circle(1.0)], &[0.75, 0.25]).unwrap();
        assert!(geodesic_distance(&m, &circle(0.25)).unwrap() < 1e-10);
    }

    #[test]
    fn rejects_bad_weights() {
        let pts = [circle(0.0), circle(1.0)];
        assert!(frechet_mean(&pts, &[0.5]).is_err());
        assert!(frechet_mean(&pts, &[0.7, 0.7]).is_err());
        assert!(frechet_mean(&pts, &[1.5, -0.5]).is_err());
        assert!(frechet_mean(&[], &[]).is_err());
    }
}
