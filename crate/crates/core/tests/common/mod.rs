#![allow(dead_code)]

use truncmvn::hyperplane::HyperplaneConstraint;
use truncmvn::linalg::{DenseMatrix, LuFactor};
use truncmvn::mvn::GaussianSpec;
use truncmvn::NoiseSource;
use truncmvn::RngState;

/// Inverse through LU with partial pivoting, independent of the Cholesky path.
pub fn dense_inverse(m: &DenseMatrix) -> DenseMatrix {
    LuFactor::new(m).unwrap().inverse()
}

/// Textbook triple loop.
pub fn triple_loop(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::from_fn(a.rows(), b.cols(), |i, j| {
        (0..a.cols()).map(|l| a.get(i, l) * b.get(l, j)).sum()
    })
}

/// Mean and covariance of `x ∼ N(μ, Σ)` conditioned on `G x = r`:
/// `μ + ΣGᵀ(GΣGᵀ)⁻¹(r − Gμ)` and `Σ − ΣGᵀ(GΣGᵀ)⁻¹GΣ`, by explicit inverses.
pub fn hyperplane_moments(
    spec: &GaussianSpec,
    c: &HyperplaneConstraint,
) -> (Vec<f64>, DenseMatrix) {
    let sigma = spec.cov().to_dense();
    let g = c.g();
    let sgt = sigma.matmul(&g.transpose()).unwrap();
    let gsg_inv = dense_inverse(&g.matmul(&sgt).unwrap());
    let w = sgt.matmul(&gsg_inv).unwrap();
    let gmu = g.matvec(spec.mean()).unwrap();
    let resid: Vec<f64> = c.r().iter().zip(&gmu).map(|(a, b)| a - b).collect();
    let shift = w.matvec(&resid).unwrap();
    let mean = spec.mean().iter().zip(&shift).map(|(a, b)| a + b).collect();
    let cov = sigma.sub(&w.matmul(&sgt.transpose()).unwrap()).unwrap();
    (mean, cov)
}

/// Stacks `n` draws as rows.
pub fn stack(n: usize, mut draw: impl FnMut() -> Vec<f64>) -> DenseMatrix {
    let first = draw();
    let k = first.len();
    let mut data = Vec::with_capacity(n * k);
    data.extend(first);
    for _ in 1..n {
        data.extend(draw());
    }
    DenseMatrix::new(n, k, data).unwrap()
}

pub fn normals(rng: &mut RngState, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.standard_normal()).collect()
}

/// `BᵀB + I` with standard-normal `B`.
pub fn random_spd(k: usize, rng: &mut RngState) -> DenseMatrix {
    let b = DenseMatrix::new(k, k, normals(rng, k * k)).unwrap();
    b.transpose_matmul(&b)
        .unwrap()
        .add(&DenseMatrix::identity(k))
        .unwrap()
}
