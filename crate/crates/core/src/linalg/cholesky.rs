use super::dense::{axpy, dot, gemm_into, DenseMatrix};
use crate::error::{check_dim, Error, Result};

/// Lower-triangular Cholesky factor `L` of an SPD matrix `Σ = L Lᵀ`.
///
/// Diagonal matrices keep the `O(n)` representation: the factor is just the
/// elementwise square root.
#[derive(Debug, Clone, PartialEq)]
pub enum CholeskyFactor {
    Dense(DenseMatrix),
    Diagonal(Vec<f64>),
}

/// Dense Cholesky factorization (row-oriented Cholesky–Banachiewicz).
///
/// Only the lower triangle of `a` is read. Fails with
/// [`Error::NotPositiveDefinite`] naming the first pivot that is not strictly
/// positive.
pub fn cholesky_dense(a: &DenseMatrix) -> Result<DenseMatrix> {
    check_dim("cholesky (square)", a.rows(), a.cols())?;
    let n = a.rows();
    let mut l = DenseMatrix::zeros(n, n);
    let data = l.as_mut_slice();
    for i in 0..n {
        let (done, rest) = data.split_at_mut(i * n);
        let row_i = &mut rest[..n];
        for j in 0..i {
            let row_j = &done[j * n..j * n + j];
            let s = a.get(i, j) - dot(&row_i[..j], row_j);
            row_i[j] = s / done[j * n + j];
        }
        let d = a.get(i, i) - dot(&row_i[..i], &row_i[..i]);
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: i, value: d });
        }
        row_i[i] = d.sqrt();
    }
    Ok(l)
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        match self {
            CholeskyFactor::Dense(l) => l.rows(),
            CholeskyFactor::Diagonal(d) => d.len(),
        }
    }

    /// `L · v`: maps standard-normal noise to `N(0, Σ)` noise.
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim("CholeskyFactor::mul_vec", self.dim(), v.len())?;
        Ok(match self {
            CholeskyFactor::Dense(l) => (0..l.rows())
                .map(|i| dot(&l.row(i)[..=i], &v[..=i]))
                .collect(),
            CholeskyFactor::Diagonal(d) => d.iter().zip(v).map(|(a, b)| a * b).collect(),
        })
    }

    /// Solves `L x = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_dim("CholeskyFactor::solve_lower", self.dim(), b.len())?;
        Ok(match self {
            CholeskyFactor::Dense(l) => {
                let mut x = b.to_vec();
                for i in 0..x.len() {
                    let s = x[i] - dot(&l.row(i)[..i], &x[..i]);
                    x[i] = s / l.get(i, i);
                }
                x
            }
            CholeskyFactor::Diagonal(d) => b.iter().zip(d).map(|(x, s)| x / s).collect(),
        })
    }

    /// Solves `Lᵀ x = b`.
    pub fn solve_upper(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_dim("CholeskyFactor::solve_upper", self.dim(), b.len())?;
        Ok(match self {
            CholeskyFactor::Dense(l) => {
                let mut x = b.to_vec();
                for i in (0..x.len()).rev() {
                    x[i] /= l.get(i, i);
                    let xi = x[i];
                    axpy(-xi, &l.row(i)[..i], &mut x[..i]);
                }
                x
            }
            CholeskyFactor::Diagonal(d) => b.iter().zip(d).map(|(x, s)| x / s).collect(),
        })
    }

    /// Solves `L Lᵀ x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        match self {
            CholeskyFactor::Diagonal(d) => {
                check_dim("CholeskyFactor::solve", d.len(), b.len())?;
                Ok(b.iter().zip(d).map(|(x, s)| x / (s * s)).collect())
            }
            CholeskyFactor::Dense(_) => self.solve_upper(&self.solve_lower(b)?),
        }
    }

    /// Solves `L Lᵀ X = B` for every column of `B` at once.
    pub fn solve_matrix(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        check_dim("CholeskyFactor::solve_matrix", self.dim(), b.rows())?;
        let mut x = b.clone();
        let m = b.cols();
        match self {
            CholeskyFactor::Diagonal(d) => {
                for (i, s) in d.iter().enumerate() {
                    let inv = 1.0 / (s * s);
                    x.row_mut(i).iter_mut().for_each(|v| *v *= inv);
                }
            }
            CholeskyFactor::Dense(l) => {
                let n = l.rows();
                let data = x.as_mut_slice();
                // forward: rows of Y = L⁻¹ B
                for i in 0..n {
                    let (done, rest) = data.split_at_mut(i * m);
                    let row_i = &mut rest[..m];
                    for (j, &lij) in l.row(i)[..i].iter().enumerate() {
                        if lij != 0.0 {
                            axpy(-lij, &done[j * m..(j + 1) * m], row_i);
                        }
                    }
                    let inv = 1.0 / l.get(i, i);
                    row_i.iter_mut().for_each(|v| *v *= inv);
                }
                // backward: rows of X = L⁻ᵀ Y
                for i in (0..n).rev() {
                    let inv = 1.0 / l.get(i, i);
                    let (head, tail) = data.split_at_mut(i * m);
                    let row_i = &mut tail[..m];
                    row_i.iter_mut().for_each(|v| *v *= inv);
                    for (j, &lij) in l.row(i)[..i].iter().enumerate() {
                        if lij != 0.0 {
                            axpy(-lij, row_i, &mut head[j * m..(j + 1) * m]);
                        }
                    }
                }
            }
        }
        Ok(x)
    }

    /// Explicit `L⁻¹` (lower triangular).
    pub fn lower_inverse(&self) -> DenseMatrix {
        match self {
            CholeskyFactor::Diagonal(d) => {
                let n = d.len();
                let mut m = DenseMatrix::zeros(n, n);
                for (i, s) in d.iter().enumerate() {
                    m.set(i, i, 1.0 / s);
                }
                m
            }
            CholeskyFactor::Dense(l) => {
                let n = l.rows();
                let mut inv = DenseMatrix::zeros(n, n);
                // row i of L⁻¹ from rows 0..i: (L⁻¹)_i = (e_i - Σ_{j<i} L_ij (L⁻¹)_j) / L_ii
                let data = inv.as_mut_slice();
                for i in 0..n {
                    let (done, rest) = data.split_at_mut(i * n);
                    let row_i = &mut rest[..n];
                    row_i[i] = 1.0;
                    for (j, &lij) in l.row(i)[..i].iter().enumerate() {
                        if lij != 0.0 {
                            axpy(-lij, &done[j * n..j * n + j + 1], &mut row_i[..j + 1]);
                        }
                    }
                    let d = 1.0 / l.get(i, i);
                    row_i[..=i].iter_mut().for_each(|v| *v *= d);
                }
                inv
            }
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            CholeskyFactor::Dense(l) => l.clone(),
            CholeskyFactor::Diagonal(d) => {
                let n = d.len();
                let mut m = DenseMatrix::zeros(n, n);
                for (i, &v) in d.iter().enumerate() {
                    m.set(i, i, v);
                }
                m
            }
        }
    }

    /// Maps each row `ξᵀ` of `xi` to `(L ξ)ᵀ`, i.e. returns `Ξ Lᵀ`.
    ///
    /// This is how a batch of standard-normal rows becomes a batch of
    /// `N(0, L Lᵀ)` rows.
    pub fn apply_rows(&self, xi: &DenseMatrix) -> Result<DenseMatrix> {
        check_dim("CholeskyFactor::apply_rows", self.dim(), xi.cols())?;
        Ok(match self {
            CholeskyFactor::Diagonal(d) => super::covariance::scale_cols(xi, d),
            CholeskyFactor::Dense(l) => mul_by_lower_transpose(xi, l),
        })
    }

    /// `L Lᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let l = self.to_dense();
        l.matmul_transpose(&l).expect("square factor")
    }
}

/// Column block width for the triangular products below.
const TRI_BLOCK: usize = 128;

/// `X Lᵀ` for lower-triangular `L`, skipping the structural zeros.
pub(super) fn mul_by_lower_transpose(x: &DenseMatrix, l: &DenseMatrix) -> DenseMatrix {
    let (n, k) = x.shape();
    debug_assert_eq!(l.shape(), (k, k));
    let mut out = DenseMatrix::zeros(n, k);
    let mut c0 = 0;
    while c0 < k {
        let c1 = (c0 + TRI_BLOCK).min(k);
        // out[:, c0..c1] = X[:, 0..c1] · (L[c0..c1, 0..c1])ᵀ
        let a = x.view().sub(0, n, 0, c1);
        let b = l.view().sub(c0, c1, 0, c1).t();
        gemm_into(1.0, a, b, 0.0, &mut out.as_mut_slice()[c0..], n, c1 - c0, k);
        c0 = c1;
    }
    out
}

/// `X M` for lower-triangular `M`, skipping the structural zeros.
pub(crate) fn mul_by_lower(x: &DenseMatrix, m: &DenseMatrix) -> DenseMatrix {
    let (n, k) = x.shape();
    debug_assert_eq!(m.shape(), (k, k));
    let mut out = DenseMatrix::zeros(n, k);
    let mut c0 = 0;
    while c0 < k {
        let c1 = (c0 + TRI_BLOCK).min(k);
        // out[:, c0..c1] = X[:, c0..k] · M[c0..k, c0..c1]
        let a = x.view().sub(0, n, c0, k);
        let b = m.view().sub(c0, k, c0, c1);
        gemm_into(1.0, a, b, 0.0, &mut out.as_mut_slice()[c0..], n, c1 - c0, k);
        c0 = c1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize, seed: u64) -> DenseMatrix {
        let mut state = seed;
        let b = DenseMatrix::from_fn(n, n, |_, _| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        });
        b.transpose_matmul(&b)
            .unwrap()
            .add(&DenseMatrix::identity(n))
            .unwrap()
    }

    #[test]
    fn identity_factor() {
        let l = cholesky_dense(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(l, DenseMatrix::identity(3));
    }

    #[test]
    fn reconstructs_random_spd() {
        let a = spd(8, 11);
        let l = CholeskyFactor::Dense(cholesky_dense(&a).unwrap());
        let err = l.reconstruct().sub(&a).unwrap().frobenius_norm() / a.frobenius_norm();
        assert!(err < 1e-10, "relative error {err}");
    }

    #[test]
    fn reports_failing_pivot() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0, 0.0], &[2.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        match cholesky_dense(&a) {
            Err(Error::NotPositiveDefinite { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn triangular_solves_invert_products() {
        let a = spd(6, 3);
        let l = CholeskyFactor::Dense(cholesky_dense(&a).unwrap());
        let b = [1.0, -2.0, 0.5, 3.0, 0.0, -1.0];
        let y = l.mul_vec(&b).unwrap();
        let back = l.solve_lower(&y).unwrap();
        for (u, v) in back.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
        let x = l.solve(&b).unwrap();
        let r = a.matvec(&x).unwrap();
        for (u, v) in r.iter().zip(&b) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn matrix_solve_matches_columnwise() {
        let a = spd(7, 5);
        let l = CholeskyFactor::Dense(cholesky_dense(&a).unwrap());
        let rhs = DenseMatrix::from_fn(7, 3, |i, j| (i as f64 + 1.0) * (j as f64 - 1.0) + 0.5);
        let x = l.solve_matrix(&rhs).unwrap();
        for j in 0..3 {
            let col = l.solve(&rhs.column(j)).unwrap();
            for i in 0..7 {
                assert!((x.get(i, j) - col[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn blocked_triangular_products_match_dense() {
        let a = spd(300, 21);
        let l = cholesky_dense(&a).unwrap();
        let x = DenseMatrix::from_fn(7, 300, |i, j| ((i * 31 + j * 17) % 13) as f64 - 6.0);
        let t = mul_by_lower_transpose(&x, &l);
        let t_ref = x.matmul_transpose(&l).unwrap();
        assert!(t.sub(&t_ref).unwrap().max_abs() < 1e-9);
        let m = mul_by_lower(&x, &l);
        let m_ref = x.matmul(&l).unwrap();
        assert!(m.sub(&m_ref).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn lower_inverse_is_inverse() {
        let a = spd(9, 8);
        let l = cholesky_dense(&a).unwrap();
        let inv = CholeskyFactor::Dense(l.clone()).lower_inverse();
        let prod = inv.matmul(&l).unwrap();
        assert!(prod.sub(&DenseMatrix::identity(9)).unwrap().max_abs() < 1e-12);
    }
}
