use super::cholesky::{cholesky_dense, CholeskyFactor};
use super::dense::{gemm, DenseMatrix, DiagMatrix};
use crate::error::{check_dim, Error, Result};

/// Relative asymmetry accepted (and then removed) for dense SPD input.
const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Storage of a covariance (or precision) matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    Dense(DenseMatrix),
    Diagonal(DiagMatrix),
}

/// A symmetric positive-definite matrix together with its Cholesky factor.
///
/// The factor is computed once at construction, so a successfully built model
/// is SPD by construction and every later solve or draw reuses it.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceModel {
    repr: Representation,
    factor: CholeskyFactor,
}

impl CovarianceModel {
    /// Dense SPD matrix. Asymmetry up to `1e-12` relative to the largest entry
    /// is averaged away; anything larger is rejected.
    pub fn dense(mut m: DenseMatrix) -> Result<Self> {
        let asymmetry = m.max_asymmetry().ok_or(Error::DimensionMismatch {
            context: "CovarianceModel::dense (square)",
            expected: m.rows(),
            found: m.cols(),
        })?;
        let scale = m.max_abs();
        if asymmetry > SYMMETRY_TOLERANCE * scale {
            return Err(Error::NotSymmetric { asymmetry, scale });
        }
        m.symmetrize_in_place();
        let factor = CholeskyFactor::Dense(cholesky_dense(&m)?);
        Ok(Self {
            repr: Representation::Dense(m),
            factor,
        })
    }

    /// Dense matrix produced by our own arithmetic (e.g. a Schur complement),
    /// where round-off asymmetry is expected and simply averaged away.
    pub(crate) fn dense_computed(mut m: DenseMatrix) -> Result<Self> {
        m.symmetrize_in_place();
        let factor = CholeskyFactor::Dense(cholesky_dense(&m)?);
        Ok(Self {
            repr: Representation::Dense(m),
            factor,
        })
    }

    /// Diagonal matrix with the given (strictly positive) entries.
    pub fn diagonal(d: Vec<f64>) -> Result<Self> {
        Ok(Self::from_diag(DiagMatrix::new(d)?))
    }

    pub fn from_diag(d: DiagMatrix) -> Self {
        let factor = CholeskyFactor::Diagonal(d.diagonal().iter().map(|v| v.sqrt()).collect());
        Self {
            repr: Representation::Diagonal(d),
            factor,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(DiagMatrix::new(vec![1.0; n]).expect("ones are positive"))
    }

    pub fn dim(&self) -> usize {
        self.factor.dim()
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.repr, Representation::Diagonal(_))
    }

    /// Diagonal entries when the representation is diagonal.
    pub fn as_diagonal(&self) -> Option<&[f64]> {
        match &self.repr {
            Representation::Diagonal(d) => Some(d.diagonal()),
            Representation::Dense(_) => None,
        }
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    /// `Σ v`.
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        match &self.repr {
            Representation::Dense(m) => m.matvec(v),
            Representation::Diagonal(d) => d.mul_vec(v),
        }
    }

    /// `Σ B`.
    pub fn mul_matrix(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        match &self.repr {
            Representation::Dense(m) => m.matmul(b),
            Representation::Diagonal(d) => {
                check_dim("CovarianceModel::mul_matrix", d.dim(), b.rows())?;
                Ok(scale_rows(b, d.diagonal()))
            }
        }
    }

    /// `Σ⁻¹ b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        match &self.repr {
            Representation::Diagonal(d) => {
                check_dim("CovarianceModel::solve", d.dim(), b.len())?;
                Ok(b.iter().zip(d.diagonal()).map(|(x, s)| x / s).collect())
            }
            Representation::Dense(_) => self.factor.solve(b),
        }
    }

    /// `Σ⁻¹ B`.
    pub fn solve_matrix(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        match &self.repr {
            Representation::Diagonal(d) => {
                check_dim("CovarianceModel::solve_matrix", d.dim(), b.rows())?;
                let inv: Vec<f64> = d.diagonal().iter().map(|s| 1.0 / s).collect();
                Ok(scale_rows(b, &inv))
            }
            Representation::Dense(_) => self.factor.solve_matrix(b),
        }
    }

    /// `G Σ Gᵀ`. With diagonal `Σ` this costs `O(rows(G)² · cols(G))` and never
    /// touches a `cols(G) × cols(G)` matrix.
    pub fn sandwich(&self, g: &DenseMatrix) -> Result<DenseMatrix> {
        check_dim("CovarianceModel::sandwich", self.dim(), g.cols())?;
        let gs = match &self.repr {
            Representation::Dense(m) => g.matmul(m)?,
            Representation::Diagonal(d) => scale_cols(g, d.diagonal()),
        };
        let mut out = DenseMatrix::zeros(g.rows(), g.rows());
        gemm(1.0, gs.view(), g.view().t(), 0.0, &mut out);
        out.symmetrize_in_place();
        Ok(out)
    }

    /// `a · Σ` for `a > 0`.
    pub fn scaled(&self, a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "scale must be positive, got {a}"
            )));
        }
        Ok(match &self.repr {
            Representation::Dense(m) => Self::dense_computed(m.scale(a))?,
            Representation::Diagonal(d) => {
                Self::diagonal(d.diagonal().iter().map(|v| v * a).collect())?
            }
        })
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match &self.repr {
            Representation::Dense(m) => m.clone(),
            Representation::Diagonal(d) => d.to_dense(),
        }
    }

    /// Diagonal entries `Σ_ii`.
    pub fn diagonal_entries(&self) -> Vec<f64> {
        match &self.repr {
            Representation::Dense(m) => m.diagonal(),
            Representation::Diagonal(d) => d.diagonal().to_vec(),
        }
    }
}

/// `diag(s) · B`.
pub(crate) fn scale_rows(b: &DenseMatrix, s: &[f64]) -> DenseMatrix {
    let mut out = b.clone();
    for (i, &si) in s.iter().enumerate() {
        out.row_mut(i).iter_mut().for_each(|v| *v *= si);
    }
    out
}

/// `B · diag(s)`.
pub(crate) fn scale_cols(b: &DenseMatrix, s: &[f64]) -> DenseMatrix {
    let mut out = b.clone();
    for i in 0..out.rows() {
        out.row_mut(i)
            .iter_mut()
            .zip(s)
            .for_each(|(v, si)| *v *= si);
    }
    out
}

/// Cholesky factor of an SPD model; the diagonal case is the elementwise
/// square root and costs `O(dim)`.
pub fn cholesky(m: &CovarianceModel) -> CholeskyFactor {
    m.factor().clone()
}

/// Solves `m α = b` through the cached Cholesky factor (two triangular solves).
pub fn spd_solve(m: &CovarianceModel, b: &[f64]) -> Result<Vec<f64>> {
    m.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_factor_is_sqrt() {
        let m = CovarianceModel::diagonal(vec![4.0, 9.0]).unwrap();
        assert_eq!(cholesky(&m), CholeskyFactor::Diagonal(vec![2.0, 3.0]));
    }

    #[test]
    fn diagonal_solve_divides() {
        let m = CovarianceModel::diagonal(vec![2.0, 4.0]).unwrap();
        assert_eq!(spd_solve(&m, &[2.0, 8.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn identity_solve_is_identity() {
        let m = CovarianceModel::dense(DenseMatrix::identity(3)).unwrap();
        assert_eq!(
            spd_solve(&m, &[1.0, -2.0, 3.0]).unwrap(),
            vec![1.0, -2.0, 3.0]
        );
    }

    #[test]
    fn tiny_asymmetry_is_absorbed_large_is_rejected() {
        let ok = DenseMatrix::from_rows(&[&[2.0, 0.5 + 1e-14], &[0.5, 2.0]]);
        let m = CovarianceModel::dense(ok).unwrap();
        assert_eq!(m.to_dense().max_asymmetry(), Some(0.0));
        let bad = DenseMatrix::from_rows(&[&[2.0, 0.6], &[0.5, 2.0]]);
        assert!(matches!(
            CovarianceModel::dense(bad),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn rejects_non_positive_definite() {
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(
            CovarianceModel::dense(m),
            Err(Error::NotPositiveDefinite { pivot: 1, .. })
        ));
        assert!(matches!(
            CovarianceModel::diagonal(vec![1.0, 0.0]),
            Err(Error::NotPositiveDefinite { pivot: 1, .. })
        ));
    }

    #[test]
    fn sandwich_diag_matches_dense() {
        let g = DenseMatrix::from_fn(3, 5, |i, j| (i * 5 + j) as f64 * 0.1 - 0.7);
        let d = vec![0.5, 1.0, 1.5, 2.0, 2.5];
        let diag = CovarianceModel::diagonal(d.clone()).unwrap();
        let dense = CovarianceModel::dense(diag.to_dense()).unwrap();
        let a = diag.sandwich(&g).unwrap();
        let b = dense.sandwich(&g).unwrap();
        assert!(a.sub(&b).unwrap().max_abs() < 1e-13);
        let oracle = g
            .matmul(&diag.to_dense())
            .unwrap()
            .matmul_transpose(&g)
            .unwrap();
        assert!(a.sub(&oracle).unwrap().max_abs() < 1e-13);
    }
}
