use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matcore::Matrix;
use crate::stiefel::{project_to_stiefel, StiefelPoint};

/// Isotropic matrix normal `N(μ, σ² I)` on `M_{n,k}(ℝ)`: entries are
/// independent with the given mean and common variance.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropicNormalSpec {
    mean: Matrix,
    variance: f64,
}

impl IsotropicNormalSpec {
    pub fn new(mean: Matrix, variance: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::NonFinite);
        }
        if !(variance.is_finite() && variance > 0.0) {
            return Err(Error::invalid(format!(
                "normal variance must be positive, got {variance}"
            )));
        }
        Ok(IsotropicNormalSpec { mean, variance })
    }

    /// Point mass at `mean`.
    #[cfg(test)]
    pub(crate) fn degenerate(mean: Matrix) -> Self {
        IsotropicNormalSpec {
            mean,
            variance: 0.0,
        }
    }

    pub fn mean(&self) -> &Matrix {
        &self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}

pub fn sample_normal<R: Rng + ?Sized>(spec: &IsotropicNormalSpec, rng: &mut R) -> Matrix {
    let sd = spec.variance.sqrt();
    let mut out = spec.mean.clone();
    for i in 0..out.rows() {
        for j in 0..out.cols() {
            let z: f64 = rng.sample(StandardNormal);
            out[(i, j)] += sd * z;
        }
    }
    out
}

/// Projected normal `pr(X)`, `X ~ N(μ, v² I)` with `μ` on the manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedNormalSpec {
    mean: StiefelPoint,
    variance: f64,
}

impl ProjectedNormalSpec {
    pub fn new(mean: StiefelPoint, variance: f64) -> Result<Self> {
        if !(variance.is_finite() && variance > 0.0) {
            return Err(Error::invalid(format!(
                "projected normal variance must be positive, got {variance}"
            )));
        }
        Ok(ProjectedNormalSpec { mean, variance })
    }

    pub fn mean(&self) -> &StiefelPoint {
        &self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}

/// Draws `pr(μ + ε)`, `ε ~ N(0, v² I)`. The measure-zero rank-deficient
/// draws are discarded and redrawn.
pub fn sample_projected_normal<R: Rng + ?Sized>(spec: &ProjectedNormalSpec, rng: &mut R) -> StiefelPoint {
    let ambient = IsotropicNormalSpec {
        mean: spec.mean.matrix().clone(),
        variance: spec.variance,
    };
    loop {
        if let Ok(p) = project_to_stiefel(&sample_normal(&ambient, rng)) {
            return p;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stiefel::{geodesic_distance, StiefelShape};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degenerate_variance_returns_the_mean() {
        let mean = Matrix::from_fn(3, 2, |i, j| (i + 2 * j) as f64);
        let spec = IsotropicNormalSpec::degenerate(mean.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_normal(&spec, &mut rng), mean);
    }

    #[test]
    fn production_constructor_rejects_zero_variance() {
        assert!(IsotropicNormalSpec::new(Matrix::zeros(2, 1), 0.0).is_err());
        let p = StiefelPoint::identity(StiefelShape::new(2, 1).unwrap());
        assert!(ProjectedNormalSpec::new(p, -1.0).is_err());
    }

    #[test]
    fn sample_moments() {
        let mean = Matrix::from_rows(&[[1.0, -2.0], [0.5, 0.0]]);
        let variance = 0.7;
        let spec = IsotropicNormalSpec::new(mean.clone(), variance).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 100_000;
        let mut sum = Matrix::zeros(2, 2);
        let mut sumsq = Matrix::zeros(2, 2);
        for _ in 0..draws {
            let x = sample_normal(&spec, &mut rng);
            let d = &x - &mean;
            sum += &d;
            sumsq += &Matrix::from_fn(2, 2, |i, j| d[(i, j)] * d[(i, j)]);
        }
        let sd = variance.sqrt();
        for i in 0..2 {
            for j in 0..2 {
                let m = sum[(i, j)] / draws as f64;
                assert!(m.abs() < 4.0 * sd / (draws as f64).sqrt(), "mean entry {m}");
                let v = sumsq[(i, j)] / draws as f64;
                assert!((v / variance - 1.0).abs() < 0.05, "variance entry {v}");
            }
        }
    }

    #[test]
    fn small_variance_projected_normal_concentrates_at_mean() {
        let mu = StiefelPoint::identity(StiefelShape::new(4, 2).unwrap());
        let spec = ProjectedNormalSpec::new(mu.clone(), 1e-14).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = sample_projected_normal(&spec, &mut rng);
        assert!(geodesic_distance(&mu, &x).unwrap() < 1e-6);
    }
}
