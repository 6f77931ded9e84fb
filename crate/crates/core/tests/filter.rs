use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stiefel_ekf::filter::{check_state, predict, run, update, FilterState, SystemModel};
use stiefel_ekf::stats::{
    eta_hat, eta_hat_inv, sample_projected_normal, IsotropicNormalSpec, MaxVarTable,
    ProjectedNormalSpec,
};
use stiefel_ekf::stiefel::{haar_orthogonal, sample_uniform};
use stiefel_ekf::{ManifoldSpec, StiefelPoint, StiefelShape};

const SIGMAS: [f64; 3] = [1.0, 0.5, 0.1];
const XIS: [f64; 2] = [0.1, 0.5];

fn table_spec(n: usize, k: usize) -> ManifoldSpec {
    MaxVarTable::builtin().spec(StiefelShape::new(n, k).unwrap()).unwrap()
}

fn measurements(truth: &StiefelPoint, xi2: f64, count: usize, seed: u64) -> Vec<(f64, StiefelPoint)> {
    let spec = ProjectedNormalSpec::new(truth.clone(), xi2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=count)
        .map(|m| (m as f64, sample_projected_normal(&spec, &mut rng)))
        .collect()
}

/// `K_i = v²_{i−1}/(v²_{i−1} + ξ²)`, `v²_i = η̂⁻¹((1 − K_i) η̂(v²_{i−1}))`.
fn scalar_recursion(s0: f64, xi2: f64, m: f64, steps: usize) -> Vec<(f64, f64)> {
    let mut v2 = s0;
    (0..steps)
        .map(|_| {
            let k = v2 / (v2 + xi2);
            v2 = eta_hat_inv((1.0 - k) * eta_hat(v2, m).unwrap(), m).unwrap();
            (k, v2)
        })
        .collect()
}

#[test]
fn gains_follow_the_scalar_recursion() {
    for (n, k) in [(4, 2), (6, 3)] {
        let spec = table_spec(n, k);
        let mu0 = StiefelPoint::identity(spec.shape());
        for (i, &s0) in SIGMAS.iter().enumerate() {
            for (j, &xi2) in XIS.iter().enumerate() {
                let model = SystemModel::constant(spec.clone(), xi2).unwrap();
                let prior = IsotropicNormalSpec::new(mu0.matrix().clone(), s0).unwrap();
                // Gains do not depend on measurement values; moderate noise
                // keeps every innovation inside the logarithm's domain.
                let ms = measurements(&mu0, 0.1, 200, (10 * i + j) as u64);
                let reports = run(&prior, &model, &ms).unwrap();
                let expected = scalar_recursion(s0, xi2, spec.maxvar(), 200);
                for (r, (kx, vx)) in reports.iter().zip(expected) {
                    assert!((r.gain - kx).abs() <= 1e-12);
                    assert!((r.state.ambient_var() - vx).abs() <= 1e-12 * vx);
                    check_state(&r.state, &model).unwrap();
                }
            }
        }
    }
}

#[test]
fn ambient_variance_is_dominated_by_linear_filter() {
    for (n, k) in [(4, 2), (6, 3), (12, 3), (15, 5)] {
        let spec = table_spec(n, k);
        let mu0 = StiefelPoint::identity(spec.shape());
        // The variance bookkeeping does not depend on the measurement values.
        let ms: Vec<_> = (1..=10_000).map(|m| (m as f64, mu0.clone())).collect();
        for &s0 in &SIGMAS {
            for &xi2 in &XIS {
                let model = SystemModel::constant(spec.clone(), xi2).unwrap();
                let prior = IsotropicNormalSpec::new(mu0.matrix().clone(), s0).unwrap();
                let reports = run(&prior, &model, &ms).unwrap();
                for (idx, r) in reports.iter().enumerate() {
                    let m = (idx + 1) as f64;
                    let bound = s0 * xi2 / (xi2 + m * s0);
                    assert!(r.state.ambient_var() <= bound * (1.0 + 1e-12), "m = {m}");
                }
            }
        }
    }
}

#[test]
fn constant_process_variance_collapses() {
    let spec = table_spec(4, 2);
    let mu0 = StiefelPoint::identity(spec.shape());
    for &s0 in &SIGMAS {
        for &xi2 in &XIS {
            let model = SystemModel::constant(spec.clone(), xi2).unwrap();
            let prior = IsotropicNormalSpec::new(mu0.matrix().clone(), s0).unwrap();
            let ms: Vec<_> = (1..=200).map(|m| (m as f64, mu0.clone())).collect();
            let reports = run(&prior, &model, &ms).unwrap();
            let p1 = reports[0].state.intrinsic_var();
            let p200 = reports[199].state.intrinsic_var();
            assert!(p200 / p1 < 0.05);
            let weight: f64 = reports.iter().map(|r| 1.0 - r.gain).product();
            assert!(weight < 0.05);
            assert!(reports[199].gain < reports[0].gain);
            for w in reports.windows(2) {
                assert!(w[1].state.intrinsic_var() < w[0].state.intrinsic_var());
            }
        }
    }
}

#[test]
fn single_step_variance() {
    let spec = table_spec(4, 2);
    let mu0 = StiefelPoint::identity(spec.shape());
    let (s0, xi2) = (0.5, 0.1);
    let model = SystemModel::constant(spec.clone(), xi2).unwrap();
    let prior = IsotropicNormalSpec::new(mu0.matrix().clone(), s0).unwrap();
    let reports = run(&prior, &model, &measurements(&mu0, xi2, 1, 1)).unwrap();
    let k1 = s0 / (s0 + xi2);
    let expected = (1.0 - k1) * eta_hat(s0, spec.maxvar()).unwrap();
    assert!((reports[0].state.intrinsic_var() - expected).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn update_is_equivariant(idx in 0usize..3, seed in any::<u64>(), s0 in 0.05f64..1.0, xi2 in 0.05f64..0.5) {
        let (n, k) = [(3, 1), (4, 2), (6, 3)][idx];
        let shape = StiefelShape::new(n, k).unwrap();
        let spec = if k == 1 {
            stiefel_ekf::stats::closed_form_spec(shape).unwrap()
        } else {
            table_spec(n, k)
        };
        let model = SystemModel::constant(spec, xi2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mean = sample_uniform(shape, &mut rng);
        let z = sample_projected_normal(&ProjectedNormalSpec::new(mean.clone(), 0.05).unwrap(), &mut rng);
        let phi = haar_orthogonal(n, &mut rng);

        let state = |m: &StiefelPoint| {
            FilterState::initial(&IsotropicNormalSpec::new(m.matrix().clone(), s0).unwrap(), &model).unwrap()
        };
        let plain = update(&predict(&state(&mean), &model, 1.0).unwrap(), &z, &model).unwrap().0;
        let moved_mean = mean.left_mul(&phi).unwrap();
        let moved = update(
            &predict(&state(&moved_mean), &model, 1.0).unwrap(),
            &z.left_mul(&phi).unwrap(),
            &model,
        )
        .unwrap()
        .0;
        let rotated = phi.matmul(plain.mean().matrix());
        prop_assert!(moved.mean().matrix().distance(&rotated) < 1e-8);
        prop_assert!((moved.intrinsic_var() - plain.intrinsic_var()).abs() < 1e-15);
    }
}
