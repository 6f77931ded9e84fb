//! Extended Kalman filter on `St(n,k)` for the model
//!
//! ```text
//! dX_t = A X_t dt + ν dB_t,    Z_m = pr(pr(X_{t_m}) + ε_m),   ε_m ~ N(0, ξ² I)
//! ```
//!
//! One step predicts with `μ_pred = expm(tA) μ`, `v² = σ² + tν²`,
//! `P_pred = η̂(v²)`, then updates along the innovation `y = log_{μ_pred}(z)`:
//!
//! ```text
//! K = v² / (v² + ξ²),   μ^K = exp_{μ_pred}(K y),   P^K = (1 − K) P_pred,
//! ```
//!
//! and maps `P^K` back to an ambient variance `σ² = η̂⁻¹(P^K)` for the next
//! step.

use crate::error::{Error, Result};
use crate::matcore::{matrix_exp, Matrix};
use crate::stats::{eta_hat, eta_hat_inv, IsotropicNormalSpec};
use crate::stiefel::{exp_map, geodesic_distance, log_map, ManifoldSpec, StiefelPoint};
use crate::tolerance::tolerances;

const SKEW_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    a: Matrix,
    nu2: f64,
    xi2: f64,
    spec: ManifoldSpec,
}

impl SystemModel {
    pub fn new(a: Matrix, nu2: f64, xi2: f64, spec: ManifoldSpec) -> Result<Self> {
        let n = spec.n();
        if a.shape() != (n, n) {
            return Err(Error::ShapeMismatch {
                expected: (n, n),
                found: a.shape(),
            });
        }
        if !a.is_finite() {
            return Err(Error::NonFinite);
        }
        let asym = (&a + &a.transpose()).frobenius_norm();
        if asym > SKEW_TOL {
            return Err(Error::invalid(format!(
                "drift matrix must be skew-symmetric, ‖A + Aᵀ‖ = {asym:e}"
            )));
        }
        if !(nu2.is_finite() && nu2 >= 0.0) {
            return Err(Error::invalid(format!(
                "process noise variance must be nonnegative, got {nu2}"
            )));
        }
        if !(xi2.is_finite() && xi2 > 0.0) {
            return Err(Error::invalid(format!(
                "measurement noise variance must be positive, got {xi2}"
            )));
        }
        Ok(SystemModel { a, nu2, xi2, spec })
    }

    /// The constant process `A = 0`, `ν = 0`.
    pub fn constant(spec: ManifoldSpec, xi2: f64) -> Result<Self> {
        let n = spec.n();
        SystemModel::new(Matrix::zeros(n, n), 0.0, xi2, spec)
    }

    pub fn drift(&self) -> &Matrix {
        &self.a
    }

    pub fn nu2(&self) -> f64 {
        self.nu2
    }

    pub fn xi2(&self) -> f64 {
        self.xi2
    }

    pub fn spec(&self) -> &ManifoldSpec {
        &self.spec
    }

    pub fn maxvar(&self) -> f64 {
        self.spec.maxvar()
    }
}

/// Filtered mean with its variance in ambient and intrinsic coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    mean: StiefelPoint,
    ambient_var: f64,
    intrinsic_var: f64,
    step_index: usize,
    last_gain: Option<f64>,
}

impl FilterState {
    /// Prior state from `N(μ₀, σ₀² I)`; `μ₀` must lie on the manifold.
    pub fn initial(prior: &IsotropicNormalSpec, model: &SystemModel) -> Result<Self> {
        let mean = StiefelPoint::new(prior.mean().clone())?;
        let shape = model.spec.shape();
        if mean.shape() != shape {
            return Err(Error::ShapeMismatch {
                expected: (shape.n, shape.k),
                found: mean.matrix().shape(),
            });
        }
        let ambient_var = prior.variance();
        Ok(FilterState {
            mean,
            ambient_var,
            intrinsic_var: eta_hat(ambient_var, model.maxvar())?,
            step_index: 0,
            last_gain: None,
        })
    }

    pub fn mean(&self) -> &StiefelPoint {
        &self.mean
    }

    /// Ambient variance `σ²` of the normal the state is read back into.
    pub fn ambient_var(&self) -> f64 {
        self.ambient_var
    }

    /// Intrinsic scalar variance `P^K = η̂(σ²)`.
    pub fn intrinsic_var(&self) -> f64 {
        self.intrinsic_var
    }

    /// Number of measurements absorbed so far.
    pub fn step_index(&self) -> usize {
        self.step_index
    }

    /// Gain of the most recent update; `None` before the first one.
    pub fn last_gain(&self) -> Option<f64> {
        self.last_gain
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub mean: StiefelPoint,
    pub ambient_var: f64,
    pub intrinsic_var: f64,
    /// Step index of the state the prediction was made from.
    pub step_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub mean_pred: StiefelPoint,
    pub ambient_var_pred: f64,
    pub intrinsic_var_pred: f64,
    pub gain: f64,
    /// Canonical norm of the innovation `log_{μ_pred}(z)`.
    pub innovation_norm: f64,
    pub state: FilterState,
}

/// Propagates the state over an elapsed time `t ≥ 0`.
pub fn predict(state: &FilterState, model: &SystemModel, t: f64) -> Result<Prediction> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("elapsed time must be nonnegative, got {t}")));
    }
    let mean = if t == 0.0 || model.a.max_abs() == 0.0 {
        state.mean.clone()
    } else {
        state.mean.left_mul(&matrix_exp(&model.a.scale(t))?)?
    };
    let ambient_var = state.ambient_var + t * model.nu2;
    Ok(Prediction {
        mean,
        ambient_var,
        intrinsic_var: eta_hat(ambient_var, model.maxvar())?,
        step_index: state.step_index,
    })
}

/// Kalman gain `v² / (v² + ξ²)`.
pub fn gain(ambient_var: f64, xi2: f64) -> f64 {
    ambient_var / (ambient_var + xi2)
}

/// Absorbs the measurement `z`. Logarithm failures are wrapped in
/// [`Error::Step`] with the 1-based index of the measurement.
pub fn update(pred: &Prediction, z: &StiefelPoint, model: &SystemModel) -> Result<(FilterState, StepReport)> {
    let index = pred.step_index + 1;
    let wrap = |e: Error| Error::Step {
        index,
        source: Box::new(e),
    };
    let y = log_map(&pred.mean, z).map_err(wrap)?;
    let k = gain(pred.ambient_var, model.xi2);
    let mean = exp_map(&pred.mean, &y.scale(k)).map_err(wrap)?;
    let intrinsic_var = (1.0 - k) * pred.intrinsic_var;
    let ambient_var = eta_hat_inv(intrinsic_var, model.maxvar()).map_err(wrap)?;
    let state = FilterState {
        mean,
        ambient_var,
        intrinsic_var,
        step_index: index,
        last_gain: Some(k),
    };
    let report = StepReport {
        mean_pred: pred.mean.clone(),
        ambient_var_pred: pred.ambient_var,
        intrinsic_var_pred: pred.intrinsic_var,
        gain: k,
        innovation_norm: y.norm(),
        state: state.clone(),
    };
    Ok((state, report))
}

/// One predict/update cycle.
pub fn step(state: &FilterState, model: &SystemModel, t: f64, z: &StiefelPoint) -> Result<StepReport> {
    let pred = predict(state, model, t)?;
    update(&pred, z, model).map(|(_, r)| r)
}

/// Folds the filter over measurements `(t_m, z_m)` with strictly increasing
/// times. Step `m` predicts over `t_m − t_{m−1}` with `t₀ = 0`.
pub fn run(
    initial: &IsotropicNormalSpec,
    model: &SystemModel,
    measurements: &[(f64, StiefelPoint)],
) -> Result<Vec<StepReport>> {
    let mut state = FilterState::initial(initial, model)?;
    let mut prev_t = 0.0;
    let mut reports = Vec::with_capacity(measurements.len());
    for (i, (t, z)) in measurements.iter().enumerate() {
        if !(t.is_finite() && *t >= prev_t) || (i > 0 && *t == prev_t) {
            return Err(Error::invalid(format!(
                "measurement times must be strictly increasing from 0; t[{i}] = {t} after {prev_t}"
            )));
        }
        let report = step(&state, model, t - prev_t, z)?;
        state = report.state.clone();
        prev_t = *t;
        reports.push(report);
    }
    Ok(reports)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRow {
    pub step: usize,
    pub intrinsic_var: f64,
    /// `dist²(μ^K_m, truth) / dim`, `None` where the logarithm failed.
    pub dist2_norm: Option<f64>,
}

/// The two series plotted against the step index: the filter's intrinsic
/// variance and the dimension-normalised squared distance to `truth`.
pub fn diagnostics(reports: &[StepReport], truth: &StiefelPoint) -> Vec<DiagnosticRow> {
    reports
        .iter()
        .map(|r| {
            let dim = r.state.mean.shape().dim() as f64;
            let dist2_norm = geodesic_distance(&r.state.mean, truth)
                .ok()
                .map(|d| d * d / dim);
            DiagnosticRow {
                step: r.state.step_index,
                intrinsic_var: r.state.intrinsic_var,
                dist2_norm,
            }
        })
        .collect()
}

/// Checks the state invariants: `η̂(σ²) = P^K` to 1e-12 relative,
/// `0 < P^K < 𝓜` and `K ∈ (0,1)`.
pub fn check_state(state: &FilterState, model: &SystemModel) -> Result<()> {
    let m = model.maxvar();
    let p = state.intrinsic_var;
    let expected = eta_hat(state.ambient_var, m)?;
    if (expected - p).abs() > 1e-12 * p.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::invalid(format!(
            "intrinsic variance {p} disagrees with η̂(σ²) = {expected}"
        )));
    }
    if !(p > 0.0 && p < m) {
        return Err(Error::VarianceExceedsMaximum { value: p, maxvar: m });
    }
    if let Some(k) = state.last_gain {
        if !(k > 0.0 && k < 1.0) {
            return Err(Error::invalid(format!("gain {k} outside (0,1)")));
        }
    }
    let tol = tolerances();
    let defect = crate::stiefel::orthogonality_defect(state.mean.matrix());
    if defect > tol.orthogonality {
        return Err(Error::NotOnManifold { defect });
    }
    Ok(())
}
