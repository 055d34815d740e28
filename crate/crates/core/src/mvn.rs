//! Unconstrained Gaussian draws and conditional Gaussians.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{gemm, CholeskyFactor, CovarianceModel, DenseMatrix};
use crate::rng::{standard_normal_matrix, NoiseSource};

/// `N(μ, Σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpec {
    mean: Vec<f64>,
    cov: CovarianceModel,
}

impl GaussianSpec {
    pub fn new(mean: Vec<f64>, cov: CovarianceModel) -> Result<Self> {
        check_dim("GaussianSpec mean vs covariance", cov.dim(), mean.len())?;
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("GaussianSpec mean"));
        }
        Ok(Self { mean, cov })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn cov(&self) -> &CovarianceModel {
        &self.cov
    }

    /// One draw `μ + L ξ`.
    pub fn sample<N: NoiseSource + ?Sized>(&self, noise: &mut N) -> Vec<f64> {
        let mut xi = vec![0.0; self.dim()];
        noise.fill_standard_normal(&mut xi);
        let mut y = self
            .cov
            .factor()
            .mul_vec(&xi)
            .expect("dimension fixed at construction");
        for (yi, mi) in y.iter_mut().zip(&self.mean) {
            *yi += mi;
        }
        y
    }

    /// `n` draws as the rows of an `n × k` matrix, consuming the noise in the
    /// same order as `n` calls to [`GaussianSpec::sample`].
    pub fn sample_n<N: NoiseSource + ?Sized>(&self, n: usize, noise: &mut N) -> DenseMatrix {
        let mut xi = standard_normal_matrix(noise, n, self.dim());
        if let CholeskyFactor::Diagonal(sd) = self.cov.factor() {
            // scale and shift in place: no second n × k buffer
            for i in 0..n {
                for ((v, s), m) in xi.row_mut(i).iter_mut().zip(sd).zip(&self.mean) {
                    *v = m + s * *v;
                }
            }
            return xi;
        }
        let mut y = self
            .cov
            .factor()
            .apply_rows(&xi)
            .expect("dimension fixed at construction");
        add_row_vector(&mut y, &self.mean);
        y
    }
}

/// Adds `v` to every row of `m`.
pub(crate) fn add_row_vector(m: &mut DenseMatrix, v: &[f64]) {
    for i in 0..m.rows() {
        for (a, b) in m.row_mut(i).iter_mut().zip(v) {
            *a += b;
        }
    }
}

/// One draw from `N(μ, Σ)`; the diagonal representation costs `O(k)`.
pub fn sample_mvn<N: NoiseSource + ?Sized>(spec: &GaussianSpec, noise: &mut N) -> Vec<f64> {
    spec.sample(noise)
}

/// A joint Gaussian over `(x₁, x₂)` given by its blocks; `Σ₂₁ = Σ₁₂ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGaussianSpec {
    mu1: Vec<f64>,
    mu2: Vec<f64>,
    s11: DenseMatrix,
    s12: DenseMatrix,
    s22: CovarianceModel,
    joint: GaussianSpec,
}

impl BlockGaussianSpec {
    /// Validates the blocks and checks that the assembled joint covariance is
    /// SPD by factoring it.
    pub fn new(
        mu1: Vec<f64>,
        mu2: Vec<f64>,
        s11: DenseMatrix,
        s12: DenseMatrix,
        s22: DenseMatrix,
    ) -> Result<Self> {
        let (k1, k2) = (mu1.len(), mu2.len());
        check_dim("BlockGaussianSpec Σ₁₁ rows", k1, s11.rows())?;
        check_dim("BlockGaussianSpec Σ₁₁ cols", k1, s11.cols())?;
        check_dim("BlockGaussianSpec Σ₁₂ rows", k1, s12.rows())?;
        check_dim("BlockGaussianSpec Σ₁₂ cols", k2, s12.cols())?;
        check_dim("BlockGaussianSpec Σ₂₂ rows", k2, s22.rows())?;
        check_dim("BlockGaussianSpec Σ₂₂ cols", k2, s22.cols())?;
        let k = k1 + k2;
        let joint_cov = DenseMatrix::from_fn(k, k, |i, j| match (i < k1, j < k1) {
            (true, true) => s11.get(i, j),
            (true, false) => s12.get(i, j - k1),
            (false, true) => s12.get(j, i - k1),
            (false, false) => s22.get(i - k1, j - k1),
        });
        let joint_mean = mu1.iter().chain(&mu2).copied().collect();
        let joint = GaussianSpec::new(joint_mean, CovarianceModel::dense(joint_cov)?)?;
        let s22 = CovarianceModel::dense(s22)?;
        Ok(Self {
            mu1,
            mu2,
            s11,
            s12,
            s22,
            joint,
        })
    }

    pub fn k1(&self) -> usize {
        self.mu1.len()
    }

    pub fn k2(&self) -> usize {
        self.mu2.len()
    }

    pub fn mu1(&self) -> &[f64] {
        &self.mu1
    }

    pub fn mu2(&self) -> &[f64] {
        &self.mu2
    }

    pub fn s11(&self) -> &DenseMatrix {
        &self.s11
    }

    pub fn s12(&self) -> &DenseMatrix {
        &self.s12
    }

    pub fn s22(&self) -> &CovarianceModel {
        &self.s22
    }

    /// The assembled joint `N(μ, Σ)`.
    pub fn joint(&self) -> &GaussianSpec {
        &self.joint
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Law of `x₁ | x₂ = r` in covariance form:
/// mean `μ₁ + Σ₁₂Σ₂₂⁻¹(r − μ₂)`, covariance `Σ₁₁ − Σ₁₂Σ₂₂⁻¹Σ₂₁`.
pub fn conditional_spec_cov(block: &BlockGaussianSpec, r: &[f64]) -> Result<GaussianSpec> {
    check_dim("conditional_spec_cov r", block.k2(), r.len())?;
    let w = block.s22.solve(&sub(r, &block.mu2))?;
    let shift = block.s12.matvec(&w)?;
    let mean = block.mu1.iter().zip(&shift).map(|(m, s)| m + s).collect();
    // Σ₂₂⁻¹Σ₂₁, then Σ₁₁ − Σ₁₂ (Σ₂₂⁻¹Σ₂₁)
    let s22_inv_s21 = block.s22.solve_matrix(&block.s12.transpose())?;
    let mut cov = block.s11.clone();
    gemm(-1.0, block.s12.view(), s22_inv_s21.view(), 1.0, &mut cov);
    GaussianSpec::new(mean, CovarianceModel::dense_computed(cov)?)
}

/// Law of `x₁ | x₂ = r` in precision form with `Λ = Σ⁻¹`:
/// mean `μ₁ − Λ₁₁⁻¹Λ₁₂(r − μ₂)`, covariance `Λ₁₁⁻¹`.
pub fn conditional_spec_prec(block: &BlockGaussianSpec, r: &[f64]) -> Result<GaussianSpec> {
    check_dim("conditional_spec_prec r", block.k2(), r.len())?;
    let (k1, k) = (block.k1(), block.k1() + block.k2());
    let lambda = block.joint.cov().solve_matrix(&DenseMatrix::identity(k))?;
    let lambda11 = CovarianceModel::dense_computed(lambda.block(0, k1, 0, k1))?;
    let lambda12 = lambda.block(0, k1, k1, k);
    let t = lambda11.solve(&lambda12.matvec(&sub(r, &block.mu2))?)?;
    let mean = block.mu1.iter().zip(&t).map(|(m, s)| m - s).collect();
    let cov = lambda11.solve_matrix(&DenseMatrix::identity(k1))?;
    GaussianSpec::new(mean, CovarianceModel::dense_computed(cov)?)
}

/// Draws `x₁ | x₂ = r` by drawing the joint `y ∼ N(μ, Σ)` and projecting:
/// `x₁ = y₁ + Σ₁₂Σ₂₂⁻¹(r − y₂)`. The conditional covariance is never formed.
#[derive(Debug, Clone)]
pub struct ConditionalProjector<'a> {
    block: &'a BlockGaussianSpec,
    r: Vec<f64>,
}

impl<'a> ConditionalProjector<'a> {
    pub fn new(block: &'a BlockGaussianSpec, r: &[f64]) -> Result<Self> {
        check_dim("ConditionalProjector r", block.k2(), r.len())?;
        Ok(Self {
            block,
            r: r.to_vec(),
        })
    }

    /// Projects a joint draw `y` onto `x₂ = r`, returning `x₁`.
    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        let k1 = self.block.k1();
        check_dim(
            "ConditionalProjector::project",
            k1 + self.block.k2(),
            y.len(),
        )?;
        let alpha = self.block.s22.solve(&sub(&self.r, &y[k1..]))?;
        let shift = self.block.s12.matvec(&alpha)?;
        Ok(y[..k1].iter().zip(&shift).map(|(a, b)| a + b).collect())
    }

    pub fn sample<N: NoiseSource + ?Sized>(&self, noise: &mut N) -> Vec<f64> {
        let y = self.block.joint.sample(noise);
        self.project(&y).expect("dimension fixed at construction")
    }
}

/// One conditional draw by projection (see [`ConditionalProjector`]).
pub fn sample_conditional_projection<N: NoiseSource + ?Sized>(
    block: &BlockGaussianSpec,
    r: &[f64],
    noise: &mut N,
) -> Result<Vec<f64>> {
    Ok(ConditionalProjector::new(block, r)?.sample(noise))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{RngState, ZeroNoise};

    fn worked_block() -> BlockGaussianSpec {
        BlockGaussianSpec::new(
            vec![1.0],
            vec![1.2],
            DenseMatrix::from_rows(&[&[1.0]]),
            DenseMatrix::from_rows(&[&[0.3]]),
            DenseMatrix::from_rows(&[&[1.0]]),
        )
        .unwrap()
    }

    #[test]
    fn two_dimensional_conditional_by_hand() {
        let b = worked_block();
        for spec in [
            conditional_spec_cov(&b, &[1.0]).unwrap(),
            conditional_spec_prec(&b, &[1.0]).unwrap(),
        ] {
            assert!((spec.mean()[0] - 0.94).abs() < 1e-12);
            assert!((spec.cov().to_dense().get(0, 0) - 0.91).abs() < 1e-12);
        }
    }

    #[test]
    fn independent_blocks_leave_first_block_unchanged() {
        let b = BlockGaussianSpec::new(
            vec![1.0, 2.0],
            vec![3.0],
            DenseMatrix::from_rows(&[&[2.0, 0.5], &[0.5, 1.0]]),
            DenseMatrix::zeros(2, 1),
            DenseMatrix::from_rows(&[&[4.0]]),
        )
        .unwrap();
        let c = conditional_spec_cov(&b, &[10.0]).unwrap();
        assert_eq!(c.mean(), &[1.0, 2.0]);
        assert!(c.cov().to_dense().sub(b.s11()).unwrap().max_abs() < 1e-15);
        let mut noise = RngState::new(3);
        let y = b.joint().sample(&mut noise.clone());
        let x = sample_conditional_projection(&b, &[10.0], &mut noise).unwrap();
        assert_eq!(x, y[..2].to_vec());
    }

    #[test]
    fn zero_noise_at_the_mean_returns_mu1() {
        let b = worked_block();
        let x = sample_conditional_projection(&b, &[1.2], &mut ZeroNoise).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn batch_draws_match_single_draws() {
        let cov =
            CovarianceModel::dense(DenseMatrix::from_rows(&[&[1.0, 0.3], &[0.3, 1.0]])).unwrap();
        let spec = GaussianSpec::new(vec![1.0, 1.2], cov).unwrap();
        let batch = spec.sample_n(5, &mut RngState::new(9));
        let mut rng = RngState::new(9);
        for i in 0..5 {
            let y = spec.sample(&mut rng);
            for j in 0..2 {
                assert!((batch.get(i, j) - y[j]).abs() < 1e-14);
            }
        }
    }
}
