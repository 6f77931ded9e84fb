//! Replicated filter runs on a grid of prior and measurement variances.

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use stiefel_ekf::filter::{step, FilterState, SystemModel};
use stiefel_ekf::stats::IsotropicNormalSpec;
use stiefel_ekf::stiefel::geodesic_distance;
use stiefel_ekf::{ManifoldSpec, Matrix};

use crate::config::ExperimentConfig;
use crate::error::{SimError, SimResult};
use crate::scenario::{replicate_rng, stream_id, Scenario};

/// Redraws allowed per step when the innovation logarithm fails.
pub const MAX_REDRAWS_PER_STEP: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TraceRow {
    pub step: usize,
    pub pk: Option<f64>,
    pub gain: Option<f64>,
    pub dist2_norm: Option<f64>,
    pub innov_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub sigma_idx: usize,
    pub xi_idx: usize,
    pub sigma0_2: f64,
    pub xi2: f64,
    pub replicate: usize,
    pub stream: u64,
    pub rows: Vec<TraceRow>,
    /// Measurements replaced after a logarithm failure.
    pub redrawn_measurements: usize,
    pub redrawn_priors: usize,
    /// Final distance `dist(μ^K_N, pr(x₀))`, if defined.
    pub final_distance: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub step: usize,
    /// Replicates with a defined distance at this step.
    pub count: usize,
    pub pk_median: Option<f64>,
    pub dist2_median: Option<f64>,
    pub dist2_q1: Option<f64>,
    pub dist2_q3: Option<f64>,
    pub gain_median: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelSummary {
    pub n: usize,
    pub k: usize,
    pub sigma0_2: f64,
    pub xi2: f64,
    pub rows: Vec<SummaryRow>,
}

impl PanelSummary {
    pub fn last(&self) -> Option<&SummaryRow> {
        self.rows.last()
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub spec: ManifoldSpec,
    pub config_hash: String,
    pub traces: Vec<RunTrace>,
    pub panels: Vec<PanelSummary>,
}

/// SHA-256 of the canonical config text and the resolved maximal variance.
pub fn config_hash(config: &ExperimentConfig, maxvar: f64) -> String {
    let mut h = Sha256::new();
    h.update(config.canonical().as_bytes());
    h.update(format!("maxvar = {:016x}\n", maxvar.to_bits()).as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo]))
}

fn sorted(xs: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = xs.collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

pub fn run_replicate(
    config: &ExperimentConfig,
    spec: &ManifoldSpec,
    sigma_idx: usize,
    xi_idx: usize,
    replicate: usize,
) -> SimResult<RunTrace> {
    let sigma0_2 = config.sigma0_2[sigma_idx];
    let xi2 = config.xi2_list[xi_idx];
    let shape = spec.shape();
    let dim = shape.dim() as f64;
    let mut rng = replicate_rng(config.seed, sigma_idx, xi_idx, replicate);
    let scenario = Scenario::generate(shape, sigma0_2, xi2, config.measurement_model, &mut rng)?;
    let planned = scenario.measurements(config.num_steps, &mut rng);

    let model = SystemModel::constant(spec.clone(), xi2)?;
    let prior = IsotropicNormalSpec::new(Matrix::eye(shape.n, shape.k), sigma0_2)?;
    let mut state = FilterState::initial(&prior, &model)?;
    let mut rows = Vec::with_capacity(config.num_steps);
    let mut redrawn = 0;
    let mut error = None;
    for (i, planned_z) in planned.into_iter().enumerate() {
        let mut z = planned_z;
        let mut attempts = 0;
        let report = loop {
            match step(&state, &model, 1.0, &z) {
                Ok(r) => break Some(r),
                Err(e) if e.is_log_failure() && attempts < MAX_REDRAWS_PER_STEP => {
                    attempts += 1;
                    redrawn += 1;
                    z = scenario.measure(&mut rng);
                }
                Err(e) => {
                    error = Some(format!("step {}: {e}", i + 1));
                    break None;
                }
            }
        };
        let Some(report) = report else { break };
        state = report.state.clone();
        let dist2_norm = geodesic_distance(state.mean(), &scenario.truth)
            .ok()
            .map(|d| d * d / dim);
        rows.push(TraceRow {
            step: i + 1,
            pk: Some(state.intrinsic_var()),
            gain: Some(report.gain),
            dist2_norm,
            innov_norm: Some(report.innovation_norm),
        });
    }
    let final_distance = if rows.len() == config.num_steps {
        geodesic_distance(state.mean(), &scenario.truth).ok()
    } else {
        None
    };
    for m in rows.len()..config.num_steps {
        rows.push(TraceRow {
            step: m + 1,
            ..TraceRow::default()
        });
    }
    Ok(RunTrace {
        sigma_idx,
        xi_idx,
        sigma0_2,
        xi2,
        replicate,
        stream: stream_id(sigma_idx, xi_idx, replicate),
        rows,
        redrawn_measurements: redrawn,
        redrawn_priors: scenario.redrawn_priors,
        final_distance,
        error,
    })
}

pub fn summarize(config: &ExperimentConfig, traces: &[RunTrace]) -> Vec<PanelSummary> {
    let mut panels = Vec::new();
    for (si, &sigma0_2) in config.sigma0_2.iter().enumerate() {
        for (xi, &xi2) in config.xi2_list.iter().enumerate() {
            let group: Vec<&RunTrace> = traces
                .iter()
                .filter(|t| t.sigma_idx == si && t.xi_idx == xi)
                .collect();
            let rows = (0..config.num_steps)
                .map(|m| {
                    let col = |f: fn(&TraceRow) -> Option<f64>| {
                        sorted(group.iter().filter_map(|t| f(&t.rows[m])))
                    };
                    let pk = col(|r| r.pk);
                    let d2 = col(|r| r.dist2_norm);
                    let gain = col(|r| r.gain);
                    SummaryRow {
                        step: m + 1,
                        count: d2.len(),
                        pk_median: quantile(&pk, 0.5),
                        dist2_median: quantile(&d2, 0.5),
                        dist2_q1: quantile(&d2, 0.25),
                        dist2_q3: quantile(&d2, 0.75),
                        gain_median: quantile(&gain, 0.5),
                    }
                })
                .collect();
            panels.push(PanelSummary {
                n: config.n,
                k: config.k,
                sigma0_2,
                xi2,
                rows,
            });
        }
    }
    panels
}

/// Runs every replicate of every panel. `jobs` bounds the worker threads;
/// results do not depend on it.
pub fn run_experiment(config: &ExperimentConfig, jobs: Option<usize>) -> SimResult<ExperimentResult> {
    config.validate()?;
    let spec = config.resolve_maxvar()?;
    let hash = config_hash(config, spec.maxvar());
    let tasks: Vec<(usize, usize, usize)> = (0..config.sigma0_2.len())
        .flat_map(|si| {
            (0..config.xi2_list.len())
                .flat_map(move |xi| (0..config.num_replicates).map(move |r| (si, xi, r)))
        })
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build().map_err(|e| SimError::Runtime {
        context: "thread pool".into(),
        message: e.to_string(),
    })?;
    let traces: Vec<RunTrace> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(si, xi, r)| run_replicate(config, &spec, si, xi, r))
            .collect::<SimResult<Vec<_>>>()
    })?;
    let panels = summarize(config, &traces);
    Ok(ExperimentResult {
        config: config.clone(),
        spec,
        config_hash: hash,
        traces,
        panels,
    })
}
