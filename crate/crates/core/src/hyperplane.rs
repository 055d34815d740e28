//! Sampling `x ∼ N(μ, Σ)` restricted to the affine set `{x : G x = r}`.
//!
//! Two exact samplers are provided:
//!
//! * [`TransformCache`] reparameterizes `x = H z` with `G H = (0, G H₂)`, so the
//!   constraint pins `z₂` and `z₁` follows a conditional Gaussian in precision
//!   form. It needs a null-space basis and a `(k − k₂)`-dimensional factor.
//! * [`FastProjector`] draws an unconstrained `y ∼ N(μ, Σ)` and maps it onto
//!   the hyperplane with `x = y + ΣGᵀ(GΣGᵀ)⁻¹(r − G y)`; only a `k₂ × k₂`
//!   system is ever solved and `Σ` is never inverted.
//!
//! Both produce the same law; the tests check this statistically.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    gemm, mul_by_lower, norm_inf, null_space_basis, numerical_rank, CovarianceModel, DenseMatrix,
    LuFactor,
};
use crate::mvn::{add_row_vector, GaussianSpec};
use crate::rng::{standard_normal_matrix, NoiseSource};

/// The affine constraint `G x = r` with `G` of full row rank `k₂ < k`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneConstraint {
    g: DenseMatrix,
    r: Vec<f64>,
}

impl HyperplaneConstraint {
    /// Checks shapes and verifies the numerical rank of `g` once, here.
    pub fn new(g: DenseMatrix, r: Vec<f64>) -> Result<Self> {
        check_dim("HyperplaneConstraint r", g.rows(), r.len())?;
        if g.rows() == 0 || g.rows() >= g.cols() {
            return Err(Error::InvalidArgument(format!(
                "constraint matrix must have 1 <= rows < cols, got {}x{}",
                g.rows(),
                g.cols()
            )));
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("HyperplaneConstraint r"));
        }
        let rank = numerical_rank(&g);
        if rank < g.rows() {
            return Err(Error::RankDeficient {
                rank,
                required: g.rows(),
            });
        }
        Ok(Self { g, r })
    }

    /// The simplex hyperplane `1ᵀx = 1` in `k` dimensions.
    pub fn sum_to_one(k: usize) -> Result<Self> {
        Self::new(DenseMatrix::row_vector(&vec![1.0; k]), vec![1.0])
    }

    pub fn k(&self) -> usize {
        self.g.cols()
    }

    pub fn k2(&self) -> usize {
        self.g.rows()
    }

    pub fn g(&self) -> &DenseMatrix {
        &self.g
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    /// `‖G x − r‖∞ / max(1, ‖r‖∞)`.
    pub fn residual(&self, x: &[f64]) -> Result<f64> {
        let gx = self.g.matvec(x)?;
        let diff: Vec<f64> = gx.iter().zip(&self.r).map(|(a, b)| a - b).collect();
        Ok(norm_inf(&diff) / norm_inf(&self.r).max(1.0))
    }
}

/// Picks `k₂` columns of `g` by Gaussian elimination with the largest
/// remaining entry of each row as pivot, so `g[:, cols]` is invertible.
fn greedy_pivot_columns(g: &DenseMatrix) -> Result<Vec<usize>> {
    let (m, k) = g.shape();
    let mut work = g.clone();
    let mut used = vec![false; k];
    let mut cols = Vec::with_capacity(m);
    for j in 0..m {
        let row = work.row(j);
        let (c, best) = (0..k)
            .filter(|&c| !used[c])
            .map(|c| (c, row[c].abs()))
            .fold(
                (usize::MAX, -1.0),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );
        if !(best > 0.0) {
            return Err(Error::RankDeficient {
                rank: j,
                required: m,
            });
        }
        used[c] = true;
        cols.push(c);
        let pivot_row = work.row(j).to_vec();
        for i in j + 1..m {
            let f = work.get(i, c) / pivot_row[c];
            if f != 0.0 {
                for (w, p) in work.row_mut(i).iter_mut().zip(&pivot_row) {
                    *w -= f * p;
                }
            }
        }
    }
    Ok(cols)
}

/// Everything the transform-based sampler precomputes for a fixed `(μ, Σ, G, r)`.
///
/// With `H = (H₁, H₂)`, `G H₁ = 0` and `G H₂` invertible, writing `x = H z`
/// turns the constraint into `z₂ = (G H₂)⁻¹ r`, and `z₁` is the conditional
/// `N(μ_z₁, Λ₁₁⁻¹)` of the transformed Gaussian with precision
/// `Λ = Hᵀ Σ⁻¹ H`.
#[derive(Debug, Clone)]
pub struct TransformCache {
    h1: DenseMatrix,
    h2: DenseMatrix,
    h_inv: DenseMatrix,
    gh2: LuFactor,
    lambda11: CovarianceModel,
    lambda12: DenseMatrix,
    z2: Vec<f64>,
    mu_z1: Vec<f64>,
    /// `H₂ z₂`, the constant part of every draw.
    x_offset: Vec<f64>,
    /// `L⁻¹` for `Λ₁₁ = L Lᵀ`, so a batch of `z₁` rows is `Ξ L⁻¹`.
    lambda11_lower_inv: DenseMatrix,
}

impl TransformCache {
    /// `H₁` from an orthonormal null-space basis of `G`; `H₂` from `k₂`
    /// standard basis vectors chosen by greedy pivoting on `G`.
    pub fn new(spec: &GaussianSpec, c: &HyperplaneConstraint) -> Result<Self> {
        check_dim("TransformCache spec vs constraint", c.k(), spec.dim())?;
        let h1 = null_space_basis(c.g())?;
        let cols = greedy_pivot_columns(c.g())?;
        let mut h2 = DenseMatrix::zeros(c.k(), c.k2());
        for (j, &col) in cols.iter().enumerate() {
            h2.set(col, j, 1.0);
        }
        Self::build(spec, c, h1, h2, true)
    }

    /// Uses caller-supplied blocks; requires `G H₁ ≈ 0` and `G H₂` invertible.
    pub fn from_basis(
        spec: &GaussianSpec,
        c: &HyperplaneConstraint,
        h1: DenseMatrix,
        h2: DenseMatrix,
    ) -> Result<Self> {
        check_dim("TransformCache spec vs constraint", c.k(), spec.dim())?;
        check_dim("TransformCache H₁ rows", c.k(), h1.rows())?;
        check_dim("TransformCache H₁ cols", c.k() - c.k2(), h1.cols())?;
        check_dim("TransformCache H₂ rows", c.k(), h2.rows())?;
        check_dim("TransformCache H₂ cols", c.k2(), h2.cols())?;
        let gh1 = c.g().matmul(&h1)?;
        let scale = c.g().max_abs() * h1.max_abs();
        if gh1.max_abs() > 1e-10 * scale.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "H₁ does not annihilate G (max |G H₁| = {:e})",
                gh1.max_abs()
            )));
        }
        Self::build(spec, c, h1, h2, false)
    }

    fn build(
        spec: &GaussianSpec,
        c: &HyperplaneConstraint,
        h1: DenseMatrix,
        h2: DenseMatrix,
        h1_orthonormal: bool,
    ) -> Result<Self> {
        let (k, k2) = (c.k(), c.k2());
        let k1 = k - k2;
        let gh2 = LuFactor::new(&c.g().matmul(&h2)?)?;
        let z2 = gh2.solve(c.r())?;

        // H⁻¹ = [ (H₁ᵀH₁)⁻¹H₁ᵀ(I − H₂(GH₂)⁻¹G) ; (GH₂)⁻¹G ], valid because GH₁ = 0.
        let lower = gh2.inverse().matmul(c.g())?;
        let mut upper = h1.transpose();
        let h1t_h2 = h1.transpose_matmul(&h2)?;
        gemm(-1.0, h1t_h2.view(), lower.view(), 1.0, &mut upper);
        if !h1_orthonormal {
            let gram = CovarianceModel::dense_computed(h1.transpose_matmul(&h1)?)?;
            upper = gram.solve_matrix(&upper)?;
        }
        let mut h_inv = DenseMatrix::zeros(k, k);
        for i in 0..k1 {
            h_inv.row_mut(i).copy_from_slice(upper.row(i));
        }
        for i in 0..k2 {
            h_inv.row_mut(k1 + i).copy_from_slice(lower.row(i));
        }

        // Λ₁₁ = H₁ᵀΣ⁻¹H₁ and Λ₁₂ = H₁ᵀΣ⁻¹H₂.
        let sinv_h1 = spec.cov().solve_matrix(&h1)?;
        let lambda11 = CovarianceModel::dense_computed(h1.transpose_matmul(&sinv_h1)?)?;
        let sinv_h2 = spec.cov().solve_matrix(&h2)?;
        let lambda12 = h1.transpose_matmul(&sinv_h2)?;

        // μ_z₁ = (I, 0)H⁻¹μ − Λ₁₁⁻¹Λ₁₂[z₂ − (0, I)H⁻¹μ].
        let hinv_mu = h_inv.matvec(spec.mean())?;
        let gap: Vec<f64> = z2.iter().zip(&hinv_mu[k1..]).map(|(a, b)| a - b).collect();
        let correction = lambda11.solve(&lambda12.matvec(&gap)?)?;
        let mu_z1: Vec<f64> = hinv_mu[..k1]
            .iter()
            .zip(&correction)
            .map(|(a, b)| a - b)
            .collect();

        let x_offset = h2.matvec(&z2)?;
        let lambda11_lower_inv = lambda11.factor().lower_inverse();
        Ok(Self {
            h1,
            h2,
            h_inv,
            gh2,
            lambda11,
            lambda12,
            z2,
            mu_z1,
            x_offset,
            lambda11_lower_inv,
        })
    }

    pub fn k(&self) -> usize {
        self.h1.rows()
    }

    pub fn h1(&self) -> &DenseMatrix {
        &self.h1
    }

    pub fn h2(&self) -> &DenseMatrix {
        &self.h2
    }

    pub fn h_inv(&self) -> &DenseMatrix {
        &self.h_inv
    }

    /// `G H₂` in factored form.
    pub fn gh2(&self) -> &LuFactor {
        &self.gh2
    }

    /// `z₂ = (G H₂)⁻¹ r`.
    pub fn z2(&self) -> &[f64] {
        &self.z2
    }

    /// `Λ₁₁ = H₁ᵀΣ⁻¹H₁`.
    pub fn lambda11(&self) -> &CovarianceModel {
        &self.lambda11
    }

    /// `Λ₁₂ = H₁ᵀΣ⁻¹H₂`.
    pub fn lambda12(&self) -> &DenseMatrix {
        &self.lambda12
    }

    /// Mean of the free coordinates `z₁`.
    pub fn mu_z1(&self) -> &[f64] {
        &self.mu_z1
    }

    /// Covariance `Λ₁₁⁻¹` of the free coordinates `z₁`.
    pub fn z1_cov(&self) -> DenseMatrix {
        let li = &self.lambda11_lower_inv;
        li.transpose_matmul(li).expect("square")
    }

    /// Mean and covariance of `x = H₁z₁ + H₂z₂` implied by the cache.
    pub fn implied_moments(&self) -> (Vec<f64>, DenseMatrix) {
        let mut mean = self.h1.matvec(&self.mu_z1).expect("dimension fixed");
        for (m, o) in mean.iter_mut().zip(&self.x_offset) {
            *m += o;
        }
        // H₁Λ₁₁⁻¹H₁ᵀ = (H₁L⁻ᵀ)(H₁L⁻ᵀ)ᵀ
        let t = self
            .h1
            .matmul_transpose(&self.lambda11_lower_inv)
            .expect("dimension fixed");
        (mean, t.matmul_transpose(&t).expect("dimension fixed"))
    }

    /// One draw: `z₁ = μ_z₁ + L⁻ᵀξ`, `x = H₁z₁ + H₂z₂`.
    pub fn sample<N: NoiseSource + ?Sized>(&self, noise: &mut N) -> Vec<f64> {
        let mut xi = vec![0.0; self.mu_z1.len()];
        noise.fill_standard_normal(&mut xi);
        let mut z1 = self
            .lambda11
            .factor()
            .solve_upper(&xi)
            .expect("dimension fixed");
        for (z, m) in z1.iter_mut().zip(&self.mu_z1) {
            *z += m;
        }
        let mut x = self.h1.matvec(&z1).expect("dimension fixed");
        for (xi, o) in x.iter_mut().zip(&self.x_offset) {
            *xi += o;
        }
        x
    }

    /// `n` draws as rows, consuming noise in the same order as repeated
    /// [`TransformCache::sample`] calls.
    pub fn sample_n<N: NoiseSource + ?Sized>(&self, n: usize, noise: &mut N) -> DenseMatrix {
        let xi = standard_normal_matrix(noise, n, self.mu_z1.len());
        let mut z1 = mul_by_lower(&xi, &self.lambda11_lower_inv);
        add_row_vector(&mut z1, &self.mu_z1);
        let mut x = z1.matmul_transpose(&self.h1).expect("dimension fixed");
        add_row_vector(&mut x, &self.x_offset);
        x
    }
}

/// Builds the transform cache (null space, pivot completion, factorizations).
pub fn make_transform_cache(
    spec: &GaussianSpec,
    c: &HyperplaneConstraint,
) -> Result<TransformCache> {
    TransformCache::new(spec, c)
}

/// One draw by the transform method, reusing `cache` when given.
pub fn sample_naive<N: NoiseSource + ?Sized>(
    spec: &GaussianSpec,
    c: &HyperplaneConstraint,
    cache: Option<&TransformCache>,
    noise: &mut N,
) -> Result<Vec<f64>> {
    match cache {
        Some(cache) => {
            check_dim("sample_naive cache", spec.dim(), cache.k())?;
            Ok(cache.sample(noise))
        }
        None => Ok(TransformCache::new(spec, c)?.sample(noise)),
    }
}

/// The projection sampler: `x = y + ΣGᵀα` with `(GΣGᵀ)α = r − G y`.
#[derive(Debug, Clone)]
pub struct FastProjector {
    spec: GaussianSpec,
    g: DenseMatrix,
    r: Vec<f64>,
    /// `ΣGᵀ`, `k × k₂`.
    sigma_gt: DenseMatrix,
    /// `GΣGᵀ`, factored.
    gsg: CovarianceModel,
    /// `ΣGᵀ(GΣGᵀ)⁻¹`, used by the batch path.
    weights: DenseMatrix,
}

impl FastProjector {
    /// Precomputes `ΣGᵀ` and the factor of `GΣGᵀ`. With diagonal `Σ` this costs
    /// `O(k₂² k)` and allocates nothing of size `k × k`.
    pub fn new(spec: &GaussianSpec, c: &HyperplaneConstraint) -> Result<Self> {
        check_dim("FastProjector spec vs constraint", c.k(), spec.dim())?;
        let gt = c.g().transpose();
        let sigma_gt = spec.cov().mul_matrix(&gt)?;
        let gsg = CovarianceModel::dense_computed(spec.cov().sandwich(c.g())?)?;
        let weights = gsg.solve_matrix(&sigma_gt.transpose())?.transpose();
        Ok(Self {
            spec: spec.clone(),
            g: c.g().clone(),
            r: c.r().to_vec(),
            sigma_gt,
            gsg,
            weights,
        })
    }

    /// The affine map onto the hyperplane, applied to any `y`.
    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        let gy = self.g.matvec(y)?;
        let rhs: Vec<f64> = self.r.iter().zip(&gy).map(|(a, b)| a - b).collect();
        let alpha = self.gsg.solve(&rhs)?;
        let shift = self.sigma_gt.matvec(&alpha)?;
        Ok(y.iter().zip(&shift).map(|(a, b)| a + b).collect())
    }

    /// Constant part of the map, `ΣGᵀ(GΣGᵀ)⁻¹r`.
    pub fn offset(&self) -> Vec<f64> {
        self.weights.matvec(&self.r).expect("dimension fixed")
    }

    /// Linear part of the map, `I − ΣGᵀ(GΣGᵀ)⁻¹G` (dense `k × k`; for
    /// inspection only).
    pub fn projection_matrix(&self) -> DenseMatrix {
        let k = self.g.cols();
        let mut p = DenseMatrix::identity(k);
        gemm(-1.0, self.weights.view(), self.g.view(), 1.0, &mut p);
        p
    }

    pub fn sample<N: NoiseSource + ?Sized>(&self, noise: &mut N) -> Vec<f64> {
        let y = self.spec.sample(noise);
        self.project(&y).expect("dimension fixed")
    }

    /// `n` draws as rows, consuming noise like repeated
    /// [`FastProjector::sample`] calls.
    pub fn sample_n<N: NoiseSource + ?Sized>(&self, n: usize, noise: &mut N) -> DenseMatrix {
        let mut y = self.spec.sample_n(n, noise);
        let k2 = self.r.len();
        // R = 1rᵀ − Y Gᵀ, then X = Y + R Wᵀ
        let mut resid = DenseMatrix::zeros(n, k2);
        for i in 0..n {
            resid.row_mut(i).copy_from_slice(&self.r);
        }
        gemm(-1.0, y.view(), self.g.view().t(), 1.0, &mut resid);
        gemm(1.0, resid.view(), self.weights.view().t(), 1.0, &mut y);
        y
    }
}

/// One draw by projection. Precomputation is not amortized; build a
/// [`FastProjector`] for repeated draws.
pub fn sample_fast<N: NoiseSource + ?Sized>(
    spec: &GaussianSpec,
    c: &HyperplaneConstraint,
    noise: &mut N,
) -> Result<Vec<f64>> {
    Ok(FastProjector::new(spec, c)?.sample(noise))
}

/// Checks that `phi` is a strictly positive probability vector.
pub(crate) fn check_simplex(phi: &[f64]) -> Result<f64> {
    if phi.is_empty() {
        return Err(Error::InvalidSimplex("empty vector".into()));
    }
    if let Some(i) = phi.iter().position(|&p| !(p > 0.0) || !p.is_finite()) {
        return Err(Error::InvalidSimplex(format!(
            "entry {i} = {} is not positive",
            phi[i]
        )));
    }
    let total: f64 = phi.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidSimplex(format!(
            "entries sum to {total}, not 1"
        )));
    }
    Ok(total)
}

/// Draws from `N(μ, a·diag φ)` truncated to `1ᵀx = 1` in `O(k)`:
/// `y ∼ N(μ, a·diag φ)`, then `x = y + (1 − 1ᵀy) φ`.
///
/// `φ` is renormalized by its (already ≈ 1) sum so the output lies on the
/// hyperplane to rounding error; this is exactly the general projection with
/// `G = 1ᵀ`, `r = 1`.
pub fn sample_simplex_diag<N: NoiseSource + ?Sized>(
    mu: &[f64],
    a: f64,
    phi: &[f64],
    noise: &mut N,
) -> Result<Vec<f64>> {
    check_dim("sample_simplex_diag mu vs phi", phi.len(), mu.len())?;
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "scale a must be positive, got {a}"
        )));
    }
    let total = check_simplex(phi)?;
    let mut y: Vec<f64> = mu
        .iter()
        .zip(phi)
        .map(|(m, p)| m + (a * p).sqrt() * noise.standard_normal())
        .collect();
    project_to_simplex_plane(&mut y, phi, total);
    Ok(y)
}

/// `y ← y + (1 − 1ᵀy) φ / 1ᵀφ`.
pub(crate) fn project_to_simplex_plane(y: &mut [f64], phi: &[f64], phi_total: f64) {
    let gap = (1.0 - y.iter().sum::<f64>()) / phi_total;
    for (v, p) in y.iter_mut().zip(phi) {
        *v += gap * p;
    }
}
