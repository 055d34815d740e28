//! Samplers for Gaussians whose covariance is a Schur complement
//! `Σ₁₁ − Σ₁₂Σ₂₂⁻¹Σ₂₁` or whose precision is `A + ΦᵀΩΦ`.
//!
//! The fast samplers lift the target into a larger joint Gaussian that is
//! cheap to draw from and condition back by projection, so when `Σ₁₁` (resp.
//! `A`) is diagonal they only ever factor a `k₂ × k₂` (resp. `n × n`) matrix.
//! The naive samplers form the target matrix and factor it, as a baseline.

use crate::error::{check_dim, Error, Result};
use crate::hyperplane::project_to_simplex_plane;
use crate::linalg::{
    cholesky_dense, gemm, mul_by_lower, scale_cols, CholeskyFactor, CovarianceModel, DenseMatrix,
    Representation,
};
use crate::mvn::add_row_vector;
use crate::rng::{standard_normal_matrix, NoiseSource};

/// `x₁ ∼ N(μ₁, Σ₁₁ − Σ₁₂Σ₂₂⁻¹Σ₂₁)` given by its four blocks.
///
/// Construction precomputes `B = Σ₁₁⁻¹Σ₁₂` and the `k₂ × k₂` Schur complement
/// `S = Σ₂₂ − Σ₂₁B`; factoring `S` proves the joint matrix
/// `[[Σ₁₁, Σ₁₂], [Σ₂₁, Σ₂₂]]` is SPD (given SPD `Σ₁₁`), which is equivalent to
/// the target covariance being SPD.
#[derive(Debug, Clone)]
pub struct StructuredCovSpec {
    mu1: Vec<f64>,
    s11: CovarianceModel,
    s12: DenseMatrix,
    s22: CovarianceModel,
    /// `Σ₁₁⁻¹Σ₁₂`, `k₁ × k₂`.
    b: DenseMatrix,
    /// `Σ₂₂ − Σ₂₁Σ₁₁⁻¹Σ₁₂`, factored.
    schur: CovarianceModel,
    /// `Σ₁₂Σ₂₂⁻¹`, `k₁ × k₂`.
    w: DenseMatrix,
}

impl StructuredCovSpec {
    pub fn new(
        mu1: Vec<f64>,
        s11: CovarianceModel,
        s12: DenseMatrix,
        s22: CovarianceModel,
    ) -> Result<Self> {
        let (k1, k2) = (mu1.len(), s22.dim());
        check_dim("StructuredCovSpec Σ₁₁", k1, s11.dim())?;
        check_dim("StructuredCovSpec Σ₁₂ rows", k1, s12.rows())?;
        check_dim("StructuredCovSpec Σ₁₂ cols", k2, s12.cols())?;
        if mu1.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("StructuredCovSpec μ₁"));
        }
        let b = s11.solve_matrix(&s12)?;
        let mut schur = s22.to_dense();
        gemm(-1.0, s12.view().t(), b.view(), 1.0, &mut schur);
        let schur = CovarianceModel::dense_computed(schur)?;
        let w = s22.solve_matrix(&s12.transpose())?.transpose();
        Ok(Self {
            mu1,
            s11,
            s12,
            s22,
            b,
            schur,
            w,
        })
    }

    pub fn k1(&self) -> usize {
        self.mu1.len()
    }

    pub fn k2(&self) -> usize {
        self.s22.dim()
    }

    pub fn mu1(&self) -> &[f64] {
        &self.mu1
    }

    pub fn s11(&self) -> &CovarianceModel {
        &self.s11
    }

    pub fn s12(&self) -> &DenseMatrix {
        &self.s12
    }

    pub fn s22(&self) -> &CovarianceModel {
        &self.s22
    }

    /// The target covariance `Σ₁₁ − Σ₁₂Σ₂₂⁻¹Σ₂₁` as a dense `k₁ × k₁` matrix.
    pub fn target_cov_dense(&self) -> DenseMatrix {
        let mut c = self.s11.to_dense();
        gemm(-1.0, self.w.view(), self.s12.view().t(), 1.0, &mut c);
        c.symmetrize_in_place();
        c
    }

    /// One draw: `y₁ ∼ N(0, Σ₁₁)`, `y₂ ∼ N(0, S)`, `Σ₂₂α = Bᵀy₁ + y₂`,
    /// `x₁ = μ₁ + y₁ − Σ₁₂α`. Noise order: `k₁` normals, then `k₂`.
    pub fn sample<N: NoiseSource + ?Sized>(&self, noise: &mut N) -> Vec<f64> {
        let (k1, k2) = (self.k1(), self.k2());
        let mut xi = vec![0.0; k1 + k2];
        noise.fill_standard_normal(&mut xi);
        let y1 = self
            .s11
            .factor()
            .mul_vec(&xi[..k1])
            .expect("dimension fixed");
        let y2 = self
            .schur
            .factor()
            .mul_vec(&xi[k1..])
            .expect("dimension fixed");
        let mut rhs = self.b.matvec_transpose(&y1).expect("dimension fixed");
        for (r, v) in rhs.iter_mut().zip(&y2) {
            *r += v;
        }
        let alpha = self.s22.solve(&rhs).expect("dimension fixed");
        let shift = self.s12.matvec(&alpha).expect("dimension fixed");
        self.mu1
            .iter()
            .zip(&y1)
            .zip(&shift)
            .map(|((m, y), s)| m + y - s)
            .collect()
    }

    /// `n` draws as rows, consuming noise like repeated
    /// [`StructuredCovSpec::sample`] calls.
    pub fn sample_n<N: NoiseSource + ?Sized>(&self, n: usize, noise: &mut N) -> DenseMatrix {
        let (k1, k2) = (self.k1(), self.k2());
        let xi = standard_normal_matrix(noise, n, k1 + k2);
        let y1 = self
            .s11
            .factor()
            .apply_rows(&xi.block(0, n, 0, k1))
            .expect("dimension fixed");
        let mut rhs = self
            .schur
            .factor()
            .apply_rows(&xi.block(0, n, k1, k1 + k2))
            .expect("dimension fixed");
        // RHS = Y₁B + Y₂ (each row is Bᵀy₁ + y₂), then X = 1μ₁ᵀ + Y₁ − RHS·(Σ₁₂Σ₂₂⁻¹)ᵀ
        gemm(1.0, y1.view(), self.b.view(), 1.0, &mut rhs);
        let mut x = y1;
        gemm(-1.0, rhs.view(), self.w.view().t(), 1.0, &mut x);
        add_row_vector(&mut x, &self.mu1);
        x
    }
}

/// One fast draw from a structured-covariance spec.
pub fn sample_structured_cov<N: NoiseSource + ?Sized>(
    spec: &StructuredCovSpec,
    noise: &mut N,
) -> Vec<f64> {
    spec.sample(noise)
}

/// The Cholesky baseline: factors the dense target covariance once.
#[derive(Debug, Clone)]
pub struct NaiveStructuredCov {
    mu1: Vec<f64>,
    factor: CholeskyFactor,
}

impl NaiveStructuredCov {
    pub fn new(spec: &StructuredCovSpec) -> Result<Self> {
        let c = spec.target_cov_dense();
        Ok(Self {
            mu1: spec.mu1.clone(),
            factor: CholeskyFactor::Dense(cholesky_dense(&c)?),
        })
    }

    pub fn sample<N: NoiseSource + ?Sized>(&self, noise: &mut N) -> Vec<f64> {
        let mut xi = vec![0.0; self.mu1.len()];
        noise.fill_standard_normal(&mut xi);
        let mut x = self.factor.mul_vec(&xi).expect("dimension fixed");
        for (v, m) in x.iter_mut().zip(&self.mu1) {
            *v += m;
        }
        x
    }

    pub fn sample_n<N: NoiseSource + ?Sized>(&self, n: usize, noise: &mut N) -> DenseMatrix {
        let xi = standard_normal_matrix(noise, n, self.mu1.len());
        let mut x = self.factor.apply_rows(&xi).expect("dimension fixed");
        add_row_vector(&mut x, &self.mu1);
        x
    }
}

/// One naive draw (forms and factors the `k₁ × k₁` target covariance).
pub fn sample_structured_cov_naive<N: NoiseSource + ?Sized>(
    spec: &StructuredCovSpec,
    noise: &mut N,
) -> Result<Vec<f64>> {
    Ok(NaiveStructuredCov::new(spec)?.sample(noise))
}

fn check_partial_simplex(a: f64, phi1: &[f64]) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "scale a must be positive, got {a}"
        )));
    }
    if phi1.is_empty() {
        return Err(Error::InvalidSimplex("empty vector".into()));
    }
    if let Some(i) = phi1.iter().position(|&p| !(p > 0.0) || !p.is_finite()) {
        return Err(Error::InvalidSimplex(format!(
            "entry {i} = {} is not positive",
            phi1[i]
        )));
    }
    let last = 1.0 - phi1.iter().sum::<f64>();
    if !(last > 0.0) {
        return Err(Error::InvalidSimplex(format!(
            "entries must sum to strictly less than 1, remainder is {last}"
        )));
    }
    Ok(last)
}

/// Draws `x₁ ∼ N(μ₁, a·diag(φ₁) − a·φ₁φ₁ᵀ)` in `O(k)`.
///
/// Completes `φ₁` to a probability vector with `φ_k = 1 − 1ᵀφ₁`, draws
/// `y ∼ N(μ, a·diag φ)` with `μ_k = 1 − 1ᵀμ₁`, and returns the first `k − 1`
/// coordinates of `y + (1 − 1ᵀy)φ`.
pub fn sample_simplex_cov<N: NoiseSource + ?Sized>(
    mu1: &[f64],
    a: f64,
    phi1: &[f64],
    noise: &mut N,
) -> Result<Vec<f64>> {
    check_dim("sample_simplex_cov mu1 vs phi1", phi1.len(), mu1.len())?;
    let phi_last = check_partial_simplex(a, phi1)?;
    let mu_last = 1.0 - mu1.iter().sum::<f64>();
    let k1 = phi1.len();
    let mut y = Vec::with_capacity(k1 + 1);
    for (m, p) in mu1.iter().zip(phi1) {
        y.push(m + (a * p).sqrt() * noise.standard_normal());
    }
    y.push(mu_last + (a * phi_last).sqrt() * noise.standard_normal());
    let gap = 1.0 - y.iter().sum::<f64>();
    y.truncate(k1);
    for (v, p) in y.iter_mut().zip(phi1) {
        *v += gap * p;
    }
    Ok(y)
}

/// [`sample_simplex_cov`] for many draws (rows), reusing the validated inputs.
pub fn sample_simplex_cov_n<N: NoiseSource + ?Sized>(
    mu1: &[f64],
    a: f64,
    phi1: &[f64],
    n: usize,
    noise: &mut N,
) -> Result<DenseMatrix> {
    check_dim("sample_simplex_cov_n mu1 vs phi1", phi1.len(), mu1.len())?;
    let phi_last = check_partial_simplex(a, phi1)?;
    let k1 = phi1.len();
    let mut mu = mu1.to_vec();
    mu.push(1.0 - mu1.iter().sum::<f64>());
    let mut phi = phi1.to_vec();
    phi.push(phi_last);
    let sd: Vec<f64> = phi.iter().map(|p| (a * p).sqrt()).collect();
    let mut out = DenseMatrix::zeros(n, k1);
    let mut y = vec![0.0; k1 + 1];
    for i in 0..n {
        for (j, v) in y.iter_mut().enumerate() {
            *v = mu[j] + sd[j] * noise.standard_normal();
        }
        project_to_simplex_plane(&mut y, &phi, 1.0);
        out.row_mut(i).copy_from_slice(&y[..k1]);
    }
    Ok(out)
}

/// The diagonal-minus-rank-one simplex target written as a structured-covariance spec:
/// `Σ₁₁ = a·diag φ₁`, `Σ₁₂ = φ₁`, `Σ₂₂ = 1/a`, so that
/// `Σ₁₁ − Σ₁₂Σ₂₂⁻¹Σ₂₁ = a·diag φ₁ − a·φ₁φ₁ᵀ`.
pub fn simplex_cov_spec(mu1: &[f64], a: f64, phi1: &[f64]) -> Result<StructuredCovSpec> {
    check_dim("simplex_cov_spec mu1 vs phi1", phi1.len(), mu1.len())?;
    check_partial_simplex(a, phi1)?;
    StructuredCovSpec::new(
        mu1.to_vec(),
        CovarianceModel::diagonal(phi1.iter().map(|p| a * p).collect())?,
        DenseMatrix::column_vector(phi1),
        CovarianceModel::diagonal(vec![1.0 / a])?,
    )
}

/// `β ∼ N(μ_β, (A + ΦᵀΩΦ)⁻¹)` with `A` (`p × p`) and `Ω` (`n × n`) SPD
/// precisions and `Φ` of shape `n × p`.
///
/// Construction precomputes `A⁻¹Φᵀ` and the `n × n` matrix
/// `K = Ω⁻¹ + ΦA⁻¹Φᵀ`, factored.
#[derive(Debug, Clone)]
pub struct StructuredPrecSpec {
    mu_beta: Vec<f64>,
    a: CovarianceModel,
    phi: DenseMatrix,
    omega: CovarianceModel,
    /// `A⁻¹Φᵀ`, `p × n`.
    ainv_phit: DenseMatrix,
    /// `Ω⁻¹ + ΦA⁻¹Φᵀ`, factored.
    k: CovarianceModel,
    /// `A⁻¹ΦᵀK⁻¹`, `p × n`, for the batch path.
    w: DenseMatrix,
    /// `L⁻¹` for `A = L Lᵀ` when `A` is dense (batch draws of `N(0, A⁻¹)`).
    a_lower_inv: Option<DenseMatrix>,
    /// `L⁻¹` for `Ω = L Lᵀ` when `Ω` is dense.
    omega_lower_inv: Option<DenseMatrix>,
}

fn dense_lower_inverse(m: &CovarianceModel) -> Option<DenseMatrix> {
    match m.representation() {
        Representation::Dense(_) => Some(m.factor().lower_inverse()),
        Representation::Diagonal(_) => None,
    }
}

impl StructuredPrecSpec {
    pub fn new(
        mu_beta: Vec<f64>,
        a: CovarianceModel,
        phi: DenseMatrix,
        omega: CovarianceModel,
    ) -> Result<Self> {
        let (p, n) = (mu_beta.len(), omega.dim());
        check_dim("StructuredPrecSpec A", p, a.dim())?;
        check_dim("StructuredPrecSpec Φ rows", n, phi.rows())?;
        check_dim("StructuredPrecSpec Φ cols", p, phi.cols())?;
        if mu_beta.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("StructuredPrecSpec μ_β"));
        }
        let ainv_phit = a.solve_matrix(&phi.transpose())?;
        let mut k = match omega.as_diagonal() {
            Some(d) => {
                let mut m = DenseMatrix::zeros(n, n);
                for (i, v) in d.iter().enumerate() {
                    m.set(i, i, 1.0 / v);
                }
                m
            }
            None => omega.solve_matrix(&DenseMatrix::identity(n))?,
        };
        gemm(1.0, phi.view(), ainv_phit.view(), 1.0, &mut k);
        let k = CovarianceModel::dense_computed(k)?;
        let w = k.solve_matrix(&ainv_phit.transpose())?.transpose();
        let a_lower_inv = dense_lower_inverse(&a);
        let omega_lower_inv = dense_lower_inverse(&omega);
        Ok(Self {
            mu_beta,
            a,
            phi,
            omega,
            ainv_phit,
            k,
            w,
            a_lower_inv,
            omega_lower_inv,
        })
    }

    pub fn p(&self) -> usize {
        self.mu_beta.len()
    }

    pub fn n(&self) -> usize {
        self.omega.dim()
    }

    pub fn mu_beta(&self) -> &[f64] {
        &self.mu_beta
    }

    pub fn a(&self) -> &CovarianceModel {
        &self.a
    }

    pub fn phi(&self) -> &DenseMatrix {
        &self.phi
    }

    pub fn omega(&self) -> &CovarianceModel {
        &self.omega
    }

    /// The dense `p × p` posterior precision `A + ΦᵀΩΦ`.
    pub fn precision_dense(&self) -> DenseMatrix {
        let omega_phi = self.omega.mul_matrix(&self.phi).expect("dimension fixed");
        let mut prec = self.a.to_dense();
        gemm(1.0, self.phi.view().t(), omega_phi.view(), 1.0, &mut prec);
        prec.symmetrize_in_place();
        prec
    }

    /// `y₁ ∼ N(0, A⁻¹)`, `y₂ ∼ N(0, Ω⁻¹)`; noise order `p` then `n` normals.
    fn draw_auxiliary<N: NoiseSource + ?Sized>(&self, noise: &mut N) -> (Vec<f64>, Vec<f64>) {
        let (p, n) = (self.p(), self.n());
        let mut xi = vec![0.0; p + n];
        noise.fill_standard_normal(&mut xi);
        let y1 = self
            .a
            .factor()
            .solve_upper(&xi[..p])
            .expect("dimension fixed");
        let y2 = self
            .omega
            .factor()
            .solve_upper(&xi[p..])
            .expect("dimension fixed");
        (y1, y2)
    }

    /// Batch version of the auxiliary draws, rows in the same noise order.
    fn draw_auxiliary_n<N: NoiseSource + ?Sized>(
        &self,
        count: usize,
        noise: &mut N,
    ) -> (DenseMatrix, DenseMatrix) {
        let (p, n) = (self.p(), self.n());
        let xi = standard_normal_matrix(noise, count, p + n);
        // rows yᵀ = ξᵀL⁻¹ give y = L⁻ᵀξ ∼ N(0, (L Lᵀ)⁻¹)
        let map = |m: &CovarianceModel, inv: &Option<DenseMatrix>, block: DenseMatrix| match inv {
            Some(li) => mul_by_lower(&block, li),
            None => {
                let s: Vec<f64> = m
                    .as_diagonal()
                    .expect("diagonal")
                    .iter()
                    .map(|v| 1.0 / v.sqrt())
                    .collect();
                scale_cols(&block, &s)
            }
        };
        let y1 = map(&self.a, &self.a_lower_inv, xi.block(0, count, 0, p));
        let y2 = map(
            &self.omega,
            &self.omega_lower_inv,
            xi.block(0, count, p, p + n),
        );
        (y1, y2)
    }

    /// One draw: `Kα = Φy₁ + y₂`, `β = μ_β + y₁ − A⁻¹Φᵀα`.
    pub fn sample<N: NoiseSource + ?Sized>(&self, noise: &mut N) -> Vec<f64> {
        let (y1, y2) = self.draw_auxiliary(noise);
        let mut rhs = self.phi.matvec(&y1).expect("dimension fixed");
        for (r, v) in rhs.iter_mut().zip(&y2) {
            *r += v;
        }
        let alpha = self.k.solve(&rhs).expect("dimension fixed");
        let shift = self.ainv_phit.matvec(&alpha).expect("dimension fixed");
        self.mu_beta
            .iter()
            .zip(&y1)
            .zip(&shift)
            .map(|((m, y), s)| m + y - s)
            .collect()
    }

    pub fn sample_n<N: NoiseSource + ?Sized>(&self, count: usize, noise: &mut N) -> DenseMatrix {
        let (mut y1, mut rhs) = self.draw_auxiliary_n(count, noise);
        gemm(1.0, y1.view(), self.phi.view().t(), 1.0, &mut rhs);
        gemm(-1.0, rhs.view(), self.w.view().t(), 1.0, &mut y1);
        add_row_vector(&mut y1, &self.mu_beta);
        y1
    }

    /// One draw of the regression posterior
    /// `β | t ∼ N((A + ΦᵀΩΦ)⁻¹ΦᵀΩt, (A + ΦᵀΩΦ)⁻¹)` (prior mean zero; `μ_β` is
    /// ignored): `Kα = t − Φy₁ − y₂`, `β = y₁ + A⁻¹Φᵀα`.
    pub fn sample_regression<N: NoiseSource + ?Sized>(
        &self,
        t: &[f64],
        noise: &mut N,
    ) -> Result<Vec<f64>> {
        check_dim("sample_regression_posterior t", self.n(), t.len())?;
        let (y1, y2) = self.draw_auxiliary(noise);
        let phi_y1 = self.phi.matvec(&y1)?;
        let rhs: Vec<f64> = t
            .iter()
            .zip(&phi_y1)
            .zip(&y2)
            .map(|((t, a), b)| t - a - b)
            .collect();
        let alpha = self.k.solve(&rhs)?;
        let shift = self.ainv_phit.matvec(&alpha)?;
        Ok(y1.iter().zip(&shift).map(|(y, s)| y + s).collect())
    }

    pub fn sample_regression_n<N: NoiseSource + ?Sized>(
        &self,
        t: &[f64],
        count: usize,
        noise: &mut N,
    ) -> Result<DenseMatrix> {
        check_dim("sample_regression_posterior t", self.n(), t.len())?;
        let (mut y1, y2) = self.draw_auxiliary_n(count, noise);
        // RHS = 1tᵀ − Y₁Φᵀ − Y₂, then B = Y₁ + RHS·Wᵀ
        let mut rhs = y2.scale(-1.0);
        add_row_vector(&mut rhs, t);
        gemm(-1.0, y1.view(), self.phi.view().t(), 1.0, &mut rhs);
        gemm(1.0, rhs.view(), self.w.view().t(), 1.0, &mut y1);
        Ok(y1)
    }
}

/// One fast draw from a structured-precision spec.
pub fn sample_structured_prec<N: NoiseSource + ?Sized>(
    spec: &StructuredPrecSpec,
    noise: &mut N,
) -> Vec<f64> {
    spec.sample(noise)
}

/// One draw of the regression posterior (see [`StructuredPrecSpec::sample_regression`]).
pub fn sample_regression_posterior<N: NoiseSource + ?Sized>(
    spec: &StructuredPrecSpec,
    t: &[f64],
    noise: &mut N,
) -> Result<Vec<f64>> {
    spec.sample_regression(t, noise)
}

/// The Cholesky baseline: `P = A + ΦᵀΩΦ = L Lᵀ`, `β = μ_β + L⁻ᵀξ`.
#[derive(Debug, Clone)]
pub struct NaiveStructuredPrec {
    mu_beta: Vec<f64>,
    factor: CholeskyFactor,
}

impl NaiveStructuredPrec {
    pub fn new(spec: &StructuredPrecSpec) -> Result<Self> {
        Ok(Self {
            mu_beta: spec.mu_beta.clone(),
            factor: CholeskyFactor::Dense(cholesky_dense(&spec.precision_dense())?),
        })
    }

    pub fn sample<N: NoiseSource + ?Sized>(&self, noise: &mut N) -> Vec<f64> {
        let mut xi = vec![0.0; self.mu_beta.len()];
        noise.fill_standard_normal(&mut xi);
        let mut x = self.factor.solve_upper(&xi).expect("dimension fixed");
        for (v, m) in x.iter_mut().zip(&self.mu_beta) {
            *v += m;
        }
        x
    }

    pub fn sample_n<N: NoiseSource + ?Sized>(&self, count: usize, noise: &mut N) -> DenseMatrix {
        let xi = standard_normal_matrix(noise, count, self.mu_beta.len());
        let mut x = mul_by_lower(&xi, &self.factor.lower_inverse());
        add_row_vector(&mut x, &self.mu_beta);
        x
    }
}

/// One naive draw (forms and factors the `p × p` posterior precision).
pub fn sample_structured_prec_naive<N: NoiseSource + ?Sized>(
    spec: &StructuredPrecSpec,
    noise: &mut N,
) -> Result<Vec<f64>> {
    Ok(NaiveStructuredPrec::new(spec)?.sample(noise))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{RngState, ScriptedNoise};

    #[test]
    fn independent_blocks_give_first_block() {
        let s11 = CovarianceModel::diagonal(vec![1.0, 2.0, 3.0]).unwrap();
        let spec = StructuredCovSpec::new(
            vec![1.0, 2.0, 3.0],
            s11.clone(),
            DenseMatrix::zeros(3, 2),
            CovarianceModel::identity(2),
        )
        .unwrap();
        let mut a = RngState::new(5);
        let mut b = RngState::new(5);
        let x = spec.sample(&mut a);
        let mut xi = vec![0.0; 3];
        b.fill_standard_normal(&mut xi);
        let expect: Vec<f64> = [1.0, 2.0, 3.0]
            .iter()
            .zip(s11.factor().mul_vec(&xi).unwrap())
            .map(|(m, y)| m + y)
            .collect();
        assert_eq!(x, expect);
    }

    #[test]
    fn simplex_cov_forms_agree_exactly() {
        let mu1 = [0.2, 0.3];
        let phi1 = [0.3, 0.3];
        let spec = simplex_cov_spec(&mu1, 0.5, &phi1).unwrap();
        let c = spec.target_cov_dense();
        assert!((c.get(0, 0) - (0.5 * 0.3 - 0.5 * 0.09)).abs() < 1e-15);
        assert!((c.get(0, 1) + 0.5 * 0.09).abs() < 1e-15);
        for seed in 0..20 {
            let x = spec.sample(&mut RngState::new(seed));
            let y = sample_simplex_cov(&mu1, 0.5, &phi1, &mut RngState::new(seed)).unwrap();
            for (u, v) in x.iter().zip(&y) {
                assert!((u - v).abs() < 1e-12, "{x:?} vs {y:?}");
            }
        }
    }

    #[test]
    fn simplex_cov_on_plane_input_passes_through() {
        // μ₁ = (0.2, 0.3), μ_k = 0.5; zero normals give 1ᵀy = 1
        let x = sample_simplex_cov(
            &[0.2, 0.3],
            1.0,
            &[0.3, 0.3],
            &mut ScriptedNoise::new(vec![0.0]),
        )
        .unwrap();
        assert_eq!(x, vec![0.2, 0.3]);
    }

    #[test]
    fn simplex_cov_rejects_full_simplex() {
        assert!(matches!(
            sample_simplex_cov(&[0.0, 0.0], 1.0, &[0.5, 0.5], &mut RngState::new(0)),
            Err(Error::InvalidSimplex(_))
        ));
    }

    #[test]
    fn rank_one_precision_matches_closed_form() {
        // n = 1: (A + φᵀωφ)⁻¹ = A⁻¹ − A⁻¹φᵀφA⁻¹ / (1/ω + φA⁻¹φᵀ)
        let a = CovarianceModel::diagonal(vec![1.0, 2.0, 4.0]).unwrap();
        let phi = DenseMatrix::row_vector(&[1.0, -1.0, 2.0]);
        let omega = CovarianceModel::diagonal(vec![3.0]).unwrap();
        let spec = StructuredPrecSpec::new(vec![0.0; 3], a, phi, omega).unwrap();
        let ainv = [1.0, 0.5, 0.25];
        let u = [1.0, -0.5, 0.5];
        let denom = 1.0 / 3.0 + 1.0 + 0.5 + 1.0;
        let prec = spec.precision_dense();
        let cov = CovarianceModel::dense(prec)
            .unwrap()
            .solve_matrix(&DenseMatrix::identity(3))
            .unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { ainv[i] } else { 0.0 } - u[i] * u[j] / denom;
                assert!((cov.get(i, j) - expect).abs() < 1e-12);
            }
        }
        // posterior mean for t = 2: cov · φᵀ ω t
        let t = [2.0];
        let mean: Vec<f64> = (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| cov.get(i, j) * [1.0, -1.0, 2.0][j] * 3.0 * 2.0)
                    .sum()
            })
            .collect();
        let mut zero = ScriptedNoise::new(vec![0.0]);
        let beta = spec.sample_regression(&t, &mut zero).unwrap();
        for (b, m) in beta.iter().zip(&mean) {
            assert!((b - m).abs() < 1e-12);
        }
    }

    #[test]
    fn batch_paths_match_single_draws() {
        let s12 = DenseMatrix::from_fn(4, 2, |i, j| 0.1 * (i as f64 - j as f64));
        let cov = StructuredCovSpec::new(
            vec![0.5; 4],
            CovarianceModel::diagonal(vec![1.0, 2.0, 1.5, 0.7]).unwrap(),
            s12,
            CovarianceModel::dense(DenseMatrix::from_rows(&[&[2.0, 0.3], &[0.3, 1.0]])).unwrap(),
        )
        .unwrap();
        let batch = cov.sample_n(3, &mut RngState::new(4));
        let mut rng = RngState::new(4);
        for i in 0..3 {
            let x = cov.sample(&mut rng);
            for j in 0..4 {
                assert!((batch.get(i, j) - x[j]).abs() < 1e-12);
            }
        }
        let prec = StructuredPrecSpec::new(
            vec![0.1, 0.2, 0.3],
            CovarianceModel::dense(DenseMatrix::from_rows(&[
                &[2.0, 0.5, 0.0],
                &[0.5, 1.0, 0.1],
                &[0.0, 0.1, 3.0],
            ]))
            .unwrap(),
            DenseMatrix::from_fn(2, 3, |i, j| (i + 2 * j) as f64 * 0.3 - 0.4),
            CovarianceModel::diagonal(vec![1.5, 0.5]).unwrap(),
        )
        .unwrap();
        let batch = prec.sample_n(3, &mut RngState::new(8));
        let reg = prec
            .sample_regression_n(&[1.0, -1.0], 3, &mut RngState::new(8))
            .unwrap();
        let mut rng = RngState::new(8);
        let mut rng2 = RngState::new(8);
        for i in 0..3 {
            let x = prec.sample(&mut rng);
            let r = prec.sample_regression(&[1.0, -1.0], &mut rng2).unwrap();
            for j in 0..3 {
                assert!((batch.get(i, j) - x[j]).abs() < 1e-12);
                assert!((reg.get(i, j) - r[j]).abs() < 1e-12);
            }
        }
    }
}
