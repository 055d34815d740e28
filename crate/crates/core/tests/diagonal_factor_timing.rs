//! Runs in its own test binary so the timing is not disturbed by other tests.

use std::time::Instant;

use truncmvn::linalg::{cholesky, CholeskyFactor, CovarianceModel};

#[test]
fn million_dimensional_diagonal_factorization_is_linear_time() {
    let d: Vec<f64> = (0..1_000_000).map(|i| 1.0 + (i % 7) as f64).collect();
    let mut best = f64::INFINITY;
    for _ in 0..5 {
        let start = Instant::now();
        let model = CovarianceModel::diagonal(d.clone()).unwrap();
        let f = cholesky(&model);
        best = best.min(start.elapsed().as_secs_f64() * 1e3);
        assert!(matches!(f, CholeskyFactor::Diagonal(ref s) if s.len() == 1_000_000));
    }
    assert!(best < 10.0, "diagonal factorization took {best:.2} ms");
}
