//! Distributions on the ambient space and on `St(n,k)`, maximal and
//! intrinsic scalar variances, the Padé variance map, Fréchet means.

mod frechet;
mod maxvar;
mod normal;
mod table;
mod variance;

pub use frechet::{frechet_mean, FRECHET_GRAD_TOL, FRECHET_MAX_ITER};
pub use maxvar::{
    closed_form_spec, intrinsic_scalar_variance_mc, max_scalar_variance_mc,
    max_scalar_variance_sphere, monte_carlo_spec, MonteCarloEstimate, MAX_FAILURE_FRACTION,
    MIN_MC_SAMPLES,
};
pub use normal::{
    sample_normal, sample_projected_normal, IsotropicNormalSpec, ProjectedNormalSpec,
};
pub use table::{MaxVarEntry, MaxVarTable};
pub use variance::{eta_hat, eta_hat_inv};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent RNG substream `stream` of the generator keyed by `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}
