//! Ground truth and measurements for one replicate.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use stiefel_ekf::stats::{
    sample_normal, sample_projected_normal, substream, IsotropicNormalSpec, ProjectedNormalSpec,
};
use stiefel_ekf::stiefel::project_to_stiefel;
use stiefel_ekf::{Error, Matrix, Result, StiefelPoint, StiefelShape};

use crate::config::MeasurementModel;

/// Stream index of replicate `replicate` in panel `(sigma_idx, xi_idx)`.
/// Changing the replicate count leaves earlier replicates untouched.
pub fn stream_id(sigma_idx: usize, xi_idx: usize, replicate: usize) -> u64 {
    ((sigma_idx as u64) << 48) | ((xi_idx as u64) << 32) | replicate as u64
}

pub fn replicate_rng(seed: u64, sigma_idx: usize, xi_idx: usize, replicate: usize) -> ChaCha8Rng {
    substream(seed, stream_id(sigma_idx, xi_idx, replicate))
}

/// Source of measurements around a fixed ground truth.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub x0: Matrix,
    pub truth: StiefelPoint,
    pub model: MeasurementModel,
    pub xi2: f64,
    /// Rank-deficient prior draws that were redrawn.
    pub redrawn_priors: usize,
}

impl Scenario {
    /// Draws `x₀ ~ N(I_{n,k}, σ₀² I)` and sets `truth = pr(x₀)`.
    pub fn generate<R: Rng + ?Sized>(
        shape: StiefelShape,
        sigma0_2: f64,
        xi2: f64,
        model: MeasurementModel,
        rng: &mut R,
    ) -> Result<Self> {
        let prior = IsotropicNormalSpec::new(Matrix::eye(shape.n, shape.k), sigma0_2)?;
        if !(xi2.is_finite() && xi2 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "measurement variance must be positive, got {xi2}"
            )));
        }
        let mut redrawn_priors = 0;
        loop {
            let x0 = sample_normal(&prior, rng);
            match project_to_stiefel(&x0) {
                Ok(truth) => {
                    return Ok(Scenario {
                        x0,
                        truth,
                        model,
                        xi2,
                        redrawn_priors,
                    })
                }
                Err(_) => redrawn_priors += 1,
            }
        }
    }

    /// One measurement: `pr(x₀ + ε)` or `pr(pr(x₀) + ε)`, `ε ~ N(0, ξ² I)`.
    pub fn measure<R: Rng + ?Sized>(&self, rng: &mut R) -> StiefelPoint {
        match self.model {
            MeasurementModel::Section4 => {
                let spec = IsotropicNormalSpec::new(self.x0.clone(), self.xi2)
                    .expect("validated at generation");
                loop {
                    if let Ok(z) = project_to_stiefel(&sample_normal(&spec, rng)) {
                        return z;
                    }
                }
            }
            MeasurementModel::EqFiltering => {
                let spec = ProjectedNormalSpec::new(self.truth.clone(), self.xi2)
                    .expect("validated at generation");
                sample_projected_normal(&spec, rng)
            }
        }
    }

    /// `count` measurements drawn in order.
    pub fn measurements<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<StiefelPoint> {
        (0..count).map(|_| self.measure(rng)).collect()
    }
}
