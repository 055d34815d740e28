mod common;

use common::{dense_inverse, normals, random_spd, triple_loop};
use proptest::prelude::*;
use truncmvn::linalg::{
    cholesky, norm_inf, null_space_basis, spd_solve, CovarianceModel, DenseMatrix, DiagMatrix,
};
use truncmvn::{Error, RngState};

#[test]
fn cholesky_reconstructs_random_spd() {
    let mut rng = RngState::new(11);
    let m = random_spd(8, &mut rng);
    let l = cholesky(&CovarianceModel::dense(m.clone()).unwrap()).to_dense();
    let rel = l
        .matmul_transpose(&l)
        .unwrap()
        .sub(&m)
        .unwrap()
        .frobenius_norm()
        / m.frobenius_norm();
    assert!(rel < 1e-10, "relative reconstruction error {rel}");
    for i in 0..8 {
        for j in i + 1..8 {
            assert_eq!(l.get(i, j), 0.0);
        }
    }
}

#[test]
fn cholesky_of_identity_is_identity() {
    let f = cholesky(&CovarianceModel::dense(DenseMatrix::identity(3)).unwrap());
    assert_eq!(f.to_dense(), DenseMatrix::identity(3));
}

#[test]
fn cholesky_reports_failing_pivot() {
    let mut m = DenseMatrix::identity(4);
    m.set(2, 2, -1.0);
    match CovarianceModel::dense(m) {
        Err(Error::NotPositiveDefinite { pivot, .. }) => assert_eq!(pivot, 2),
        other => panic!("expected NotPositiveDefinite, got {other:?}"),
    }
}

#[test]
fn spd_solve_matches_explicit_inverse() {
    let mut rng = RngState::new(12);
    let m = random_spd(10, &mut rng);
    let b = normals(&mut rng, 10);
    let alpha = spd_solve(&CovarianceModel::dense(m.clone()).unwrap(), &b).unwrap();
    let oracle = dense_inverse(&m).matvec(&b).unwrap();
    for (a, o) in alpha.iter().zip(&oracle) {
        assert!((a - o).abs() < 1e-8);
    }
}

#[test]
fn spd_solve_rejects_wrong_length() {
    let m = CovarianceModel::identity(3);
    assert!(matches!(
        spd_solve(&m, &[1.0, 2.0]),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn null_space_of_random_full_rank_inputs() {
    let mut rng = RngState::new(13);
    for _ in 0..100 {
        let g = DenseMatrix::new(5, 20, normals(&mut rng, 100)).unwrap();
        let h1 = null_space_basis(&g).unwrap();
        assert_eq!(h1.shape(), (20, 15));
        assert!(g.matmul(&h1).unwrap().max_abs() <= 1e-10);
        let gram = h1.transpose_matmul(&h1).unwrap();
        assert!(gram.sub(&DenseMatrix::identity(15)).unwrap().max_abs() <= 1e-10);
    }
}

#[test]
fn null_space_is_deterministic() {
    let mut rng = RngState::new(14);
    let g = DenseMatrix::new(3, 9, normals(&mut rng, 27)).unwrap();
    assert_eq!(null_space_basis(&g).unwrap(), null_space_basis(&g).unwrap());
}

#[test]
fn products_match_triple_loop() {
    let mut rng = RngState::new(15);
    let a = DenseMatrix::new(6, 7, normals(&mut rng, 42)).unwrap();
    let b = DenseMatrix::new(7, 5, normals(&mut rng, 35)).unwrap();
    let oracle = triple_loop(&a, &b);
    assert!(a.matmul(&b).unwrap().sub(&oracle).unwrap().max_abs() <= 1e-12);
    assert!(
        a.transpose()
            .transpose_matmul(&b)
            .unwrap()
            .sub(&oracle)
            .unwrap()
            .max_abs()
            <= 1e-12
    );
    assert!(
        a.matmul_transpose(&b.transpose())
            .unwrap()
            .sub(&oracle)
            .unwrap()
            .max_abs()
            <= 1e-12
    );
    assert!(matches!(a.matmul(&a), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn identity_and_diagonal_products() {
    let v = [1.0, -2.0, 3.5];
    assert_eq!(DenseMatrix::identity(3).matvec(&v).unwrap(), v.to_vec());
    let d = DiagMatrix::new(vec![2.0, 3.0, 4.0]).unwrap();
    assert_eq!(d.mul_vec(&v).unwrap(), vec![2.0, -6.0, 14.0]);
}

fn spd_strategy() -> impl Strategy<Value = (DenseMatrix, Vec<f64>)> {
    (1usize..12).prop_flat_map(|k| {
        (
            prop::collection::vec(-3.0f64..3.0, k * k),
            prop::collection::vec(-100.0f64..100.0, k),
            0.01f64..10.0,
        )
            .prop_map(move |(b, rhs, shift)| {
                let b = DenseMatrix::new(k, k, b).unwrap();
                let m = b
                    .transpose_matmul(&b)
                    .unwrap()
                    .add(&DenseMatrix::identity(k).scale(shift))
                    .unwrap();
                (m, rhs)
            })
    })
}

proptest! {
    #[test]
    fn solve_then_multiply_recovers_rhs((m, b) in spd_strategy()) {
        let model = CovarianceModel::dense(m.clone()).unwrap();
        let alpha = spd_solve(&model, &b).unwrap();
        let back = m.matvec(&alpha).unwrap();
        let err: Vec<f64> = back.iter().zip(&b).map(|(x, y)| x - y).collect();
        prop_assert!(norm_inf(&err) <= 1e-8 * norm_inf(&b).max(1.0));
    }

    #[test]
    fn diagonal_factor_is_elementwise_sqrt(d in prop::collection::vec(1e-6f64..1e6, 1..50)) {
        let f = cholesky(&CovarianceModel::diagonal(d.clone()).unwrap()).to_dense();
        for (i, v) in d.iter().enumerate() {
            prop_assert_eq!(f.get(i, i), v.sqrt());
        }
    }
}
