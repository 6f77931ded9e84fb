//! Maximal scalar variance `𝓜(M) = (1 / (dim M · vol M)) ∫ dist²(p, y) dvol(y)`
//! and Monte Carlo estimators of dimension-normalised squared distances.

use std::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::normal::{sample_projected_normal, ProjectedNormalSpec};
use super::{substream, CompensatedSum};
use crate::error::{Error, Result};
use crate::stiefel::{
    geodesic_distance, sample_uniform, ManifoldSpec, MaxVarProvenance, StiefelPoint, StiefelShape,
};

/// Minimum sample count accepted by the estimators.
pub const MIN_MC_SAMPLES: usize = 1000;
/// Largest tolerated fraction of logarithm failures.
pub const MAX_FAILURE_FRACTION: f64 = 0.05;

const CHUNK: usize = 4096;

/// Closed form of `𝓜(Sⁿ)` for the unit sphere `Sⁿ ⊂ ℝⁿ⁺¹`:
///
/// * `n = 1`: `π²/3`
/// * even `n`: `(1/2n) (π² − 4 Σ_{j=0}^{(n−2)/2} 1/(2j+1)²)`
/// * odd `n ≥ 3`: `(1/n) (π²/3 − 2 Σ_{j=1}^{(n−1)/2} 1/(2j)²)`
pub fn max_scalar_variance_sphere(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("sphere dimension must be at least 1"));
    }
    let nf = n as f64;
    if n % 2 == 0 {
        let s: f64 = (0..=(n - 2) / 2)
            .map(|j| 1.0 / ((2 * j + 1) as f64).powi(2))
            .sum();
        Ok((PI * PI - 4.0 * s) / (2.0 * nf))
    } else {
        let s: f64 = (1..=(n - 1) / 2).map(|j| 1.0 / ((2 * j) as f64).powi(2)).sum();
        Ok((PI * PI / 3.0 - 2.0 * s) / nf)
    }
}

/// A Monte Carlo mean of per-sample values with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub std_error: f64,
    /// Requested draws, including failures.
    pub samples: usize,
    pub failures: usize,
    pub seed: u64,
}

impl MonteCarloEstimate {
    pub fn failure_fraction(&self) -> f64 {
        self.failures as f64 / self.samples as f64
    }
}

#[derive(Default)]
struct ChunkResult {
    sum: CompensatedSum,
    sum_sq: CompensatedSum,
    ok: usize,
    failures: usize,
}

/// Runs `draw` on `samples` independent draws split into fixed-size chunks,
/// each on its own RNG substream, and combines chunks in index order. The
/// result does not depend on the number of worker threads.
pub(crate) fn chunked_mean<F>(samples: usize, seed: u64, draw: F) -> Result<MonteCarloEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    if samples < MIN_MC_SAMPLES {
        return Err(Error::invalid(format!(
            "Monte Carlo estimates need at least {MIN_MC_SAMPLES} samples, got {samples}"
        )));
    }
    let chunks = samples.div_ceil(CHUNK);
    let results: Vec<Result<ChunkResult>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut acc = ChunkResult::default();
            for _ in 0..count {
                match draw(&mut rng) {
                    Ok(v) => {
                        acc.sum.add(v);
                        acc.sum_sq.add(v * v);
                        acc.ok += 1;
                    }
                    Err(e) if e.is_log_failure() => acc.failures += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok(acc)
        })
        .collect();

    let mut sum = CompensatedSum::default();
    let mut sum_sq = CompensatedSum::default();
    let (mut ok, mut failures) = (0usize, 0usize);
    for r in results {
        let r = r?;
        sum.add(r.sum.value());
        sum_sq.add(r.sum_sq.value());
        ok += r.ok;
        failures += r.failures;
    }
    let (estimate, std_error) = if ok > 1 {
        let m = sum.value() / ok as f64;
        let var = ((sum_sq.value() - ok as f64 * m * m) / (ok - 1) as f64).max(0.0);
        (m, (var / ok as f64).sqrt())
    } else {
        (f64::NAN, f64::NAN)
    };
    let est = MonteCarloEstimate {
        estimate,
        std_error,
        samples,
        failures,
        seed,
    };
    if est.failure_fraction() > MAX_FAILURE_FRACTION {
        return Err(Error::UnreliableEstimate {
            estimate,
            std_error,
            samples,
            failures,
        });
    }
    Ok(est)
}

/// Monte Carlo estimate of `𝓜(St(n,k))` as `E[dist²(p, Y)] / dim` with
/// `p = I_{n,k}` and `Y` Haar-uniform. The integral is independent of `p` by
/// homogeneity. Logarithm failures are excluded and reported.
pub fn max_scalar_variance_mc(shape: StiefelShape, samples: usize, seed: u64) -> Result<MonteCarloEstimate> {
    let dim = shape.dim();
    if dim == 0 {
        return Err(Error::invalid(format!("{shape} is zero-dimensional")));
    }
    let p = StiefelPoint::identity(shape);
    chunked_mean(samples, seed, |rng| {
        let y = sample_uniform(shape, rng);
        let d = geodesic_distance(&p, &y)?;
        Ok(d * d / dim as f64)
    })
}

/// Monte Carlo estimate of the intrinsic scalar variance
/// `η(v²) = E[dist²(pr(μ + ε), μ)] / dim` of a projected normal.
///
/// Draws with the same seed reuse the same Gaussian noise up to scaling, so
/// estimates at different variances are positively correlated.
pub fn intrinsic_scalar_variance_mc(
    spec: &ProjectedNormalSpec,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    let shape = spec.mean().shape();
    let dim = shape.dim();
    if dim == 0 {
        return Err(Error::invalid(format!("{shape} is zero-dimensional")));
    }
    chunked_mean(samples, seed, |rng| {
        let x = sample_projected_normal(spec, rng);
        let d = geodesic_distance(spec.mean(), &x)?;
        Ok(d * d / dim as f64)
    })
}

/// Manifold spec with the closed-form maximal variance; spheres only.
pub fn closed_form_spec(shape: StiefelShape) -> Result<ManifoldSpec> {
    if shape.k != 1 {
        return Err(Error::invalid(format!(
            "no closed-form maximal scalar variance for {shape}; use Monte Carlo or a table"
        )));
    }
    let maxvar = max_scalar_variance_sphere(shape.n - 1)?;
    ManifoldSpec::new(shape, maxvar, MaxVarProvenance::ClosedForm)
}

/// Manifold spec whose maximal variance is estimated by Monte Carlo.
pub fn monte_carlo_spec(shape: StiefelShape, samples: usize, seed: u64) -> Result<ManifoldSpec> {
    let est = max_scalar_variance_mc(shape, samples, seed)?;
    ManifoldSpec::new(
        shape,
        est.estimate,
        MaxVarProvenance::MonteCarlo {
            samples: est.samples,
            seed: est.seed,
            std_error: est.std_error,
            failure_fraction: est.failure_fraction(),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_closed_forms() {
        assert!((max_scalar_variance_sphere(1).unwrap() - PI * PI / 3.0).abs() < 1e-15);
        assert!((max_scalar_variance_sphere(2).unwrap() - (PI * PI - 4.0) / 4.0).abs() < 1e-15);
        let s3 = (PI * PI / 3.0 - 0.5) / 3.0;
        assert!((max_scalar_variance_sphere(3).unwrap() - s3).abs() < 1e-15);
        assert!((max_scalar_variance_sphere(1).unwrap() - 3.289868).abs() < 1e-6);
        assert!((max_scalar_variance_sphere(2).unwrap() - 1.467401).abs() < 1e-6);
        assert!((max_scalar_variance_sphere(3).unwrap() - 0.929956).abs() < 1e-6);
        assert!(max_scalar_variance_sphere(0).is_err());
    }

    #[test]
    fn too_few_samples_rejected() {
        let shape = StiefelShape::new(3, 1).unwrap();
        assert!(max_scalar_variance_mc(shape, 10, 0).is_err());
    }

    #[test]
    fn estimates_are_reproducible() {
        let shape = StiefelShape::new(3, 1).unwrap();
        let a = max_scalar_variance_mc(shape, 5000, 42).unwrap();
        let b = max_scalar_variance_mc(shape, 5000, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.failures, 0);
    }

    #[test]
    fn closed_form_spec_only_for_spheres() {
        let s = closed_form_spec(StiefelShape::new(2, 1).unwrap()).unwrap();
        assert!((s.maxvar() - PI * PI / 3.0).abs() < 1e-15);
        assert!(closed_form_spec(StiefelShape::new(4, 2).unwrap()).is_err());
    }
}
