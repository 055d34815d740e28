mod common;

use common::{normals, random_spd, stack};
use truncmvn::linalg::{CovarianceModel, DenseMatrix};
use truncmvn::mvn::{
    conditional_spec_cov, conditional_spec_prec, sample_conditional_projection, sample_mvn,
    BlockGaussianSpec, ConditionalProjector, GaussianSpec,
};
use truncmvn::validate::{moment_match_report, summarize};
use truncmvn::RngState;

fn two_dim_block() -> BlockGaussianSpec {
    BlockGaussianSpec::new(
        vec![1.0],
        vec![1.2],
        DenseMatrix::from_rows(&[&[1.0]]),
        DenseMatrix::from_rows(&[&[0.3]]),
        DenseMatrix::from_rows(&[&[1.0]]),
    )
    .unwrap()
}

fn random_block(k1: usize, k2: usize, rng: &mut RngState) -> BlockGaussianSpec {
    let k = k1 + k2;
    let joint = random_spd(k, rng);
    BlockGaussianSpec::new(
        normals(rng, k1),
        normals(rng, k2),
        joint.block(0, k1, 0, k1),
        joint.block(0, k1, k1, k),
        joint.block(k1, k, k1, k),
    )
    .unwrap()
}

#[test]
fn standard_normal_mean() {
    let spec = GaussianSpec::new(vec![0.0; 4], CovarianceModel::identity(4)).unwrap();
    let mut rng = RngState::new(1);
    let s = summarize(&stack(100_000, || sample_mvn(&spec, &mut rng))).unwrap();
    for m in &s.mean {
        assert!(m.abs() <= 4.0 / (1e5f64).sqrt());
    }
}

#[test]
fn two_dimensional_covariance() {
    let sigma = DenseMatrix::from_rows(&[&[1.0, 0.3], &[0.3, 1.0]]);
    let spec = GaussianSpec::new(
        vec![1.0, 1.2],
        CovarianceModel::dense(sigma.clone()).unwrap(),
    )
    .unwrap();
    let report = moment_match_report(
        &spec.sample_n(100_000, &mut RngState::new(2)),
        &[1.0, 1.2],
        &sigma,
    )
    .unwrap();
    assert!(report.pass, "{report:?}");
}

#[test]
fn fixed_seed_gives_identical_streams() {
    let spec = GaussianSpec::new(
        vec![0.5; 3],
        CovarianceModel::diagonal(vec![1.0, 2.0, 3.0]).unwrap(),
    )
    .unwrap();
    let a = spec.sample_n(50, &mut RngState::new(42));
    let b = spec.sample_n(50, &mut RngState::new(42));
    assert_eq!(a, b);
}

#[test]
fn conditional_matches_density_grid() {
    // Brute force: normalize the joint density along x₂ = 1 on a fine grid.
    let (m1, m2, rho) = (1.0f64, 1.2f64, 0.3f64);
    let density = |x1: f64, x2: f64| {
        let (a, b) = (x1 - m1, x2 - m2);
        (-(a * a - 2.0 * rho * a * b + b * b) / (2.0 * (1.0 - rho * rho))).exp()
    };
    let h = 1e-3;
    let xs: Vec<f64> = (0..16_000).map(|i| -7.0 + i as f64 * h).collect();
    let w: Vec<f64> = xs.iter().map(|&x| density(x, 1.0)).collect();
    let z: f64 = w.iter().sum();
    let mean: f64 = xs.iter().zip(&w).map(|(x, p)| x * p).sum::<f64>() / z;
    let var: f64 = xs
        .iter()
        .zip(&w)
        .map(|(x, p)| (x - mean).powi(2) * p)
        .sum::<f64>()
        / z;
    assert!((mean - 0.94).abs() < 1e-6 && (var - 0.91).abs() < 1e-6);
    let spec = conditional_spec_cov(&two_dim_block(), &[1.0]).unwrap();
    assert!((spec.mean()[0] - mean).abs() < 1e-6);
    assert!((spec.cov().to_dense().get(0, 0) - var).abs() < 1e-6);
}

#[test]
fn covariance_and_precision_forms_agree() {
    let mut rng = RngState::new(3);
    let mut cases = vec![(6, 4), (10, 5)];
    cases.extend(std::iter::repeat((4, 3)).take(50));
    for (k1, k2) in cases {
        let block = random_block(k1, k2, &mut rng);
        let r = normals(&mut rng, k2);
        let a = conditional_spec_cov(&block, &r).unwrap();
        let b = conditional_spec_prec(&block, &r).unwrap();
        for (x, y) in a.mean().iter().zip(b.mean()) {
            assert!((x - y).abs() < 1e-9);
        }
        let diff = a.cov().to_dense().sub(&b.cov().to_dense()).unwrap();
        assert!(diff.frobenius_norm() < 1e-9);
    }
}

#[test]
fn precision_form_with_diagonal_joint() {
    let block = BlockGaussianSpec::new(
        vec![1.0, -1.0],
        vec![2.0],
        DenseMatrix::from_rows(&[&[2.0, 0.0], &[0.0, 3.0]]),
        DenseMatrix::zeros(2, 1),
        DenseMatrix::from_rows(&[&[5.0]]),
    )
    .unwrap();
    let c = conditional_spec_prec(&block, &[7.0]).unwrap();
    assert!((c.mean()[0] - 1.0).abs() < 1e-12 && (c.mean()[1] + 1.0).abs() < 1e-12);
    assert!(c.cov().to_dense().sub(block.s11()).unwrap().max_abs() < 1e-12);
}

#[test]
fn projection_sampler_matches_two_dimensional_analytics() {
    let block = two_dim_block();
    let mut rng = RngState::new(4);
    let draws = stack(100_000, || {
        sample_conditional_projection(&block, &[1.0], &mut rng).unwrap()
    });
    let report = moment_match_report(&draws, &[0.94], &DenseMatrix::from_rows(&[&[0.91]])).unwrap();
    assert!(report.pass, "{report:?}");
}

#[test]
fn projection_sampler_matches_random_block_analytics() {
    let mut rng = RngState::new(5);
    let block = random_block(6, 3, &mut rng);
    let r = normals(&mut rng, 3);
    let analytic = conditional_spec_cov(&block, &r).unwrap();
    let projector = ConditionalProjector::new(&block, &r).unwrap();
    let draws = stack(100_000, || projector.sample(&mut rng));
    let report = moment_match_report(&draws, analytic.mean(), &analytic.cov().to_dense()).unwrap();
    assert!(report.pass, "{report:?}");
}

#[test]
fn projection_of_the_mean_is_the_first_block_mean() {
    let mut rng = RngState::new(6);
    let block = random_block(5, 2, &mut rng);
    let projector = ConditionalProjector::new(&block, block.mu2()).unwrap();
    let y: Vec<f64> = block.mu1().iter().chain(block.mu2()).copied().collect();
    let x = projector.project(&y).unwrap();
    for (a, b) in x.iter().zip(block.mu1()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn block_spec_rejects_indefinite_joint() {
    let r = BlockGaussianSpec::new(
        vec![0.0],
        vec![0.0],
        DenseMatrix::from_rows(&[&[1.0]]),
        DenseMatrix::from_rows(&[&[2.0]]),
        DenseMatrix::from_rows(&[&[1.0]]),
    );
    assert!(r.is_err());
}
