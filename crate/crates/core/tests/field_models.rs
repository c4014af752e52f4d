mod common;

use common::{iid, linear_test_model, volterra_single_pair, volterra_test_model};
use latspec::lattice::{box_sites, LatticeShape};
use latspec::models::{analytic_covariance, simulate, FieldModel, LatticeSample};
use latspec::rng::StreamKey;
use latspec::stats::Estimate;

/// `|overlap|^{-1} sum_v X_v X_{v+u}` over the pairs inside the sample.
fn empirical_covariance(sample: &LatticeSample, u: &[i64]) -> f64 {
    let (n1, n2) = (sample.shape.extents()[0] as i64, sample.shape.extents()[1] as i64);
    let at = |a: i64, b: i64| sample.values[(a * n2 + b) as usize];
    let mut sum = 0.0;
    let mut count = 0usize;
    for a in 0.max(-u[0])..n1.min(n1 - u[0]) {
        for b in 0.max(-u[1])..n2.min(n2 - u[1]) {
            sum += at(a, b) * at(a + u[0], b + u[1]);
            count += 1;
        }
    }
    sum / count as f64
}

#[test]
fn empirical_covariances_on_a_large_lattice() {
    let shape = LatticeShape::cube(2, 256).unwrap();
    let models = [iid(), linear_test_model(), volterra_test_model(), FieldModel::gaussian_columns(0.6).unwrap()];
    for (m, model) in models.iter().enumerate() {
        let samples: Vec<LatticeSample> =
            (0..4).map(|r| simulate(model, &shape, StreamKey::innovations(77 + m as u64, r)).unwrap()).collect();
        for u in box_sites(2, 2) {
            let per_sample: Vec<f64> = samples.iter().map(|s| empirical_covariance(s, &u)).collect();
            let estimate = Estimate::from_samples(&per_sample);
            let gamma = analytic_covariance(model, &u);
            // sampling error of a lag-u covariance on 2^16 sites is about 0.01 gamma(0)
            let tol = 0.03 * analytic_covariance(model, &[0, 0]);
            assert!((estimate.mean - gamma).abs() < tol, "{} lag {u:?}: {estimate:?} vs {gamma}", model.kind_name());
        }
    }
}

#[test]
fn volterra_field_is_centered() {
    let shape = LatticeShape::cube(2, 64).unwrap();
    for model in [volterra_single_pair(), volterra_test_model()] {
        let means: Vec<f64> = (0..400)
            .map(|r| {
                let s = simulate(&model, &shape, StreamKey::innovations(5, r)).unwrap();
                s.values.iter().sum::<f64>() / s.values.len() as f64
            })
            .collect();
        let estimate = Estimate::from_samples(&means);
        assert!(estimate.z_score(0.0).abs() < 4.0, "{estimate:?}");
    }
}

#[test]
fn volterra_covariance_by_brute_force() {
    // E[X_0 X_u] from many independent 4x4 windows
    let model = volterra_test_model();
    let shape = LatticeShape::cube(2, 4).unwrap();
    let samples: Vec<LatticeSample> =
        (0..40_000).map(|r| simulate(&model, &shape, StreamKey::innovations(11, r)).unwrap()).collect();
    for u in [[0, 0], [0, 1], [1, 0], [1, 1], [1, -1], [2, 0], [0, 2]] {
        let products: Vec<f64> = samples
            .iter()
            .map(|s| {
                let a = s.shape.offset_of(&[1, 2]).unwrap();
                let b = s.shape.offset_of(&[1 + u[0], 2 + u[1]]).unwrap();
                s.values[a] * s.values[b]
            })
            .collect();
        let estimate = Estimate::from_samples(&products);
        let gamma = analytic_covariance(&model, &u);
        assert!(estimate.z_score(gamma).abs() < 4.0, "lag {u:?}: {estimate:?} vs {gamma}");
    }
}

#[test]
fn same_key_reproduces_the_sample() {
    let shape = LatticeShape::new(vec![9, 4]).unwrap();
    for model in [iid(), linear_test_model(), volterra_test_model(), FieldModel::gaussian_columns(-0.4).unwrap()] {
        let a = simulate(&model, &shape, StreamKey::innovations(42, 3)).unwrap();
        let b = simulate(&model, &shape, StreamKey::innovations(42, 3)).unwrap();
        let c = simulate(&model, &shape, StreamKey::innovations(42, 4)).unwrap();
        assert_eq!(a.values, b.values);
        assert_ne!(a.values, c.values);
    }
}

#[test]
fn gaussian_columns_are_independent_across_columns() {
    let model = FieldModel::gaussian_columns(0.8).unwrap();
    assert_eq!(analytic_covariance(&model, &[0, 1]), 0.0);
    assert!((analytic_covariance(&model, &[2, 0]) - 0.64 / (1.0 - 0.64)).abs() < 1e-12);
}
