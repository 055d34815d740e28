mod common;

use common::stack;
use truncmvn::linalg::{CovarianceModel, DenseMatrix};
use truncmvn::mvn::GaussianSpec;
use truncmvn::validate::{ks_two_sample, moment_match_report, summarize};
use truncmvn::{NoiseSource, RngState};

#[test]
fn summary_matches_two_pass_oracle() {
    let mut rng = RngState::new(1);
    let x = stack(500, || (0..4).map(|_| rng.standard_normal()).collect());
    let s = summarize(&x).unwrap();
    let n = x.rows() as f64;
    let mean: Vec<f64> = (0..4)
        .map(|j| x.column(j).iter().sum::<f64>() / n)
        .collect();
    for j in 0..4 {
        assert!((s.mean[j] - mean[j]).abs() < 1e-14);
        for l in 0..4 {
            let c: f64 = (0..x.rows())
                .map(|i| (x.get(i, j) - mean[j]) * (x.get(i, l) - mean[l]))
                .sum::<f64>()
                / (n - 1.0);
            assert!((s.cov.get(j, l) - c).abs() < 1e-12);
        }
    }
}

#[test]
fn ks_is_calibrated() {
    let mut rejections = 0;
    for seed in 0..200 {
        let mut rng = RngState::new(seed);
        let a: Vec<f64> = (0..10_000).map(|_| rng.standard_normal()).collect();
        let b: Vec<f64> = (0..10_000).map(|_| rng.standard_normal()).collect();
        if ks_two_sample(&a, &b).unwrap().p_value < 0.01 {
            rejections += 1;
        }
    }
    // Binomial(200, 0.01) exceeds 6 with probability below 0.5%.
    assert!(rejections <= 6, "{rejections} rejections out of 200");
}

#[test]
fn ks_detects_a_shift() {
    let mut rng = RngState::new(3);
    let a: Vec<f64> = (0..10_000).map(|_| rng.standard_normal()).collect();
    let b: Vec<f64> = (0..10_000).map(|_| 0.2 + rng.standard_normal()).collect();
    assert!(ks_two_sample(&a, &b).unwrap().p_value < 1e-6);
}

fn spec() -> (GaussianSpec, DenseMatrix) {
    let sigma = DenseMatrix::from_rows(&[&[1.0, 0.4, 0.0], &[0.4, 2.0, -0.3], &[0.0, -0.3, 0.5]]);
    (
        GaussianSpec::new(
            vec![1.0, 0.0, -2.0],
            CovarianceModel::dense(sigma.clone()).unwrap(),
        )
        .unwrap(),
        sigma,
    )
}

#[test]
fn moment_report_false_failure_rate() {
    let (g, sigma) = spec();
    let failures = (0..100)
        .filter(|&seed| {
            !moment_match_report(
                &g.sample_n(100_000, &mut RngState::new(seed)),
                g.mean(),
                &sigma,
            )
            .unwrap()
            .pass
        })
        .count();
    assert!(failures <= 2, "{failures} false failures");
}

#[test]
fn moment_report_detects_wrong_mean_or_covariance() {
    let (g, sigma) = spec();
    let draws = g.sample_n(100_000, &mut RngState::new(4));
    let shifted = vec![1.0 + 10.0 * (1.0f64 / 1e5).sqrt(), 0.0, -2.0];
    assert!(!moment_match_report(&draws, &shifted, &sigma).unwrap().pass);
    assert!(
        !moment_match_report(&draws, g.mean(), &sigma.scale(2.0))
            .unwrap()
            .pass
    );
    assert!(moment_match_report(&draws, &[0.0], &sigma).is_err());
}
