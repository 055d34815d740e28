//! Seeded random problem instances shared by the benchmarks and the tests.
//!
//! Every generator is a pure function of its arguments and the state of the
//! supplied [`RngState`].

use crate::error::Result;
use crate::hyperplane::HyperplaneConstraint;
use crate::linalg::{orthogonal_factor, scale_cols, scale_rows, CovarianceModel, DenseMatrix};
use crate::mvn::GaussianSpec;
use crate::rng::{standard_normal_matrix, NoiseSource, RngState};
use crate::structured::{StructuredCovSpec, StructuredPrecSpec};

/// Storage of a generated covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CovKind {
    Dense,
    Diagonal,
}

impl CovKind {
    pub fn label(self) -> &'static str {
        match self {
            CovKind::Dense => "dense",
            CovKind::Diagonal => "diagonal",
        }
    }
}

fn standard_normals(rng: &mut RngState, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    rng.fill_standard_normal(&mut v);
    v
}

/// Spectrum `0.05 + Uniform(0, 1)`.
fn random_spectrum(rng: &mut RngState, k: usize) -> Vec<f64> {
    (0..k).map(|_| 0.05 + rng.uniform()).collect()
}

/// Random orthogonal `k × k` matrix from the orthogonal factor of a
/// standard-normal matrix.
pub fn random_orthogonal(k: usize, rng: &mut RngState) -> DenseMatrix {
    let a = standard_normal_matrix(rng, k, k);
    orthogonal_factor(&a).expect("square by construction")
}

/// `diag(0.05 + u)` or `Uᵀ diag(0.05 + u) U` with `U` random orthogonal.
pub fn random_covariance(k: usize, kind: CovKind, rng: &mut RngState) -> Result<CovarianceModel> {
    let d = random_spectrum(rng, k);
    match kind {
        CovKind::Diagonal => CovarianceModel::diagonal(d),
        CovKind::Dense => {
            let u = random_orthogonal(k, rng);
            let du = scale_rows(&u, &d);
            CovarianceModel::dense_computed(u.transpose_matmul(&du)?)
        }
    }
}

/// `μ`, `r` and `G` with i.i.d. standard-normal entries and `Σ` from
/// [`random_covariance`]. The constraint's rank is checked on construction.
pub fn hyperplane_instance(
    k: usize,
    k2: usize,
    kind: CovKind,
    rng: &mut RngState,
) -> Result<(GaussianSpec, HyperplaneConstraint)> {
    let cov = random_covariance(k, kind, rng)?;
    let mu = standard_normals(rng, k);
    let g = standard_normal_matrix(rng, k2, k);
    let r = standard_normals(rng, k2);
    Ok((
        GaussianSpec::new(mu, cov)?,
        HyperplaneConstraint::new(g, r)?,
    ))
}

/// Structured-covariance instance with `Σ₁₁` of the given kind, diagonal
/// `Σ₂₂`, and `Σ₁₂ = L₁₁ W L₂₂ᵀ` where `W` has i.i.d. `N(0, 1)` entries scaled
/// by `1/(2(√k₁ + √k₂))`. Then `‖W‖₂ < 1` with overwhelming probability, so
/// the joint matrix `L (I W; Wᵀ I) Lᵀ` is SPD.
pub fn structured_cov_instance(
    k1: usize,
    k2: usize,
    kind: CovKind,
    rng: &mut RngState,
) -> Result<StructuredCovSpec> {
    let s11 = random_covariance(k1, kind, rng)?;
    let s22_diag = random_spectrum(rng, k2);
    let scale = 1.0 / (2.0 * ((k1 as f64).sqrt() + (k2 as f64).sqrt()));
    let w = standard_normal_matrix(rng, k1, k2).scale(scale);
    let s22_sqrt: Vec<f64> = s22_diag.iter().map(|v| v.sqrt()).collect();
    let left = match s11.as_diagonal() {
        Some(d) => scale_rows(&w, &d.iter().map(|v| v.sqrt()).collect::<Vec<_>>()),
        None => s11.factor().to_dense().matmul(&w)?,
    };
    let s12 = scale_cols(&left, &s22_sqrt);
    let mu1 = standard_normals(rng, k1);
    StructuredCovSpec::new(mu1, s11, s12, CovarianceModel::diagonal(s22_diag)?)
}

/// Structured-precision instance: `A` of the given kind with spectrum
/// `0.05 + Uniform(0, 1)`, `Ω = diag(0.5 + Uniform(0, 1))`, and `Φ`, `μ_β`
/// with i.i.d. standard-normal entries.
pub fn structured_prec_instance(
    p: usize,
    n: usize,
    kind: CovKind,
    rng: &mut RngState,
) -> Result<StructuredPrecSpec> {
    let a = random_covariance(p, kind, rng)?;
    let omega: Vec<f64> = (0..n).map(|_| 0.5 + rng.uniform()).collect();
    let phi = standard_normal_matrix(rng, n, p);
    let mu_beta = standard_normals(rng, p);
    StructuredPrecSpec::new(mu_beta, a, phi, CovarianceModel::diagonal(omega)?)
}

/// Dirichlet(1, …, 1) draw of length `k`, by normalized exponentials.
pub fn dirichlet_ones(k: usize, rng: &mut RngState) -> Vec<f64> {
    let e: Vec<f64> = (0..k).map(|_| -rng.uniform().ln()).collect();
    let total: f64 = e.iter().sum();
    e.iter().map(|v| v / total).collect()
}

/// Inputs of the simplex-covariance example `N(μ₁, a·diag φ₁ − a·φ₁φ₁ᵀ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexCovInstance {
    pub mu1: Vec<f64>,
    pub a: f64,
    pub phi1: Vec<f64>,
}

/// `φ ∼ Dir(1, …, 1)` over `k` coordinates, `μ = 1/k`, `a = 0.5`; the
/// returned vectors hold the first `k − 1` coordinates.
pub fn simplex_cov_instance(k: usize, rng: &mut RngState) -> SimplexCovInstance {
    let mut phi = dirichlet_ones(k, rng);
    phi.pop();
    SimplexCovInstance {
        mu1: vec![1.0 / k as f64; k - 1],
        a: 0.5,
        phi1: phi,
    }
}
