use super::dense::{axpy, dot, norm2, DenseMatrix};
use crate::error::{Error, Result};

/// Relative threshold below which a triangular pivot counts as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Householder QR of `Gᵀ`, stored as the reflectors acting on the rows of `G`.
struct HouseholderRows {
    /// Reflector `j` is `I − 2 v vᵀ / (vᵀv)` with `v` supported on `j..k`.
    vectors: Vec<Vec<f64>>,
    /// `|R_jj|` for each processed row.
    pivots: Vec<f64>,
    /// Largest row norm of the input, the scale for the rank test.
    scale: f64,
}

fn householder_rows(g: &DenseMatrix) -> HouseholderRows {
    let (m, k) = g.shape();
    let scale = (0..m).map(|i| norm2(g.row(i))).fold(0.0, f64::max);
    let mut work = g.clone();
    let mut vectors = Vec::with_capacity(m.min(k));
    let mut pivots = Vec::with_capacity(m.min(k));
    for j in 0..m.min(k) {
        let x = work.row(j)[j..].to_vec();
        let alpha = norm2(&x);
        // reflect x onto −sign(x₀)·‖x‖·e₀ to avoid cancellation
        let beta = if x[0] >= 0.0 { -alpha } else { alpha };
        let mut v = x;
        v[0] -= beta;
        let vv = dot(&v, &v);
        pivots.push(alpha);
        if vv > 0.0 {
            for i in j..m {
                let row = &mut work.row_mut(i)[j..];
                let f = -2.0 * dot(&v, row) / vv;
                axpy(f, &v, row);
            }
        }
        vectors.push(v);
    }
    HouseholderRows {
        vectors,
        pivots,
        scale,
    }
}

fn rank_of(h: &HouseholderRows) -> usize {
    let tol = RANK_TOLERANCE * h.scale;
    h.pivots.iter().filter(|&&p| p > tol).count()
}

/// Numerical rank of `g` from the pivots of an orthogonal factorization of
/// `gᵀ`, with threshold `1e-10` relative to the largest row norm.
pub fn numerical_rank(g: &DenseMatrix) -> usize {
    if g.rows() == 0 {
        return 0;
    }
    rank_of(&householder_rows(g))
}

/// Orthonormal basis of `{x : g x = 0}` as the columns of a `k × (k − k₂)`
/// matrix, for `g` of shape `k₂ × k` with full row rank.
pub fn null_space_basis(g: &DenseMatrix) -> Result<DenseMatrix> {
    let (m, k) = g.shape();
    if m >= k {
        return Err(Error::InvalidArgument(format!(
            "null space needs fewer rows than columns, got {m}x{k}"
        )));
    }
    let h = householder_rows(g);
    let rank = rank_of(&h);
    if rank < m {
        return Err(Error::RankDeficient { rank, required: m });
    }
    Ok(q_columns(&h, m, k).transpose())
}

/// Rows are `Q e_c` for `c = first..k`, where `Q` is the product of the
/// reflectors; built by applying them in reverse order (each is symmetric).
fn q_columns(h: &HouseholderRows, first: usize, k: usize) -> DenseMatrix {
    let d = k - first;
    let mut basis_t = DenseMatrix::zeros(d, k);
    for c in 0..d {
        basis_t.set(c, first + c, 1.0);
    }
    for (j, v) in h.vectors.iter().enumerate().rev() {
        let vv = dot(v, v);
        if vv == 0.0 {
            continue;
        }
        for c in 0..d {
            let row = &mut basis_t.row_mut(c)[j..];
            let f = -2.0 * dot(v, row) / vv;
            if f != 0.0 {
                axpy(f, v, row);
            }
        }
    }
    basis_t
}

/// The orthogonal factor `Q` of `aᵀ = Q R` for square `a`. Applied to a
/// standard-normal matrix this gives a random orthogonal matrix.
pub fn orthogonal_factor(a: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            context: "orthogonal_factor (square)",
            expected: a.rows(),
            found: a.cols(),
        });
    }
    let k = a.rows();
    Ok(q_columns(&householder_rows(a), 0, k).transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_constraint_null_space() {
        let g = DenseMatrix::from_rows(&[&[1.0, 1.0]]);
        let h1 = null_space_basis(&g).unwrap();
        assert_eq!(h1.shape(), (2, 1));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((h1.get(0, 0).abs() - s).abs() < 1e-12);
        assert!((h1.get(0, 0) + h1.get(1, 0)).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_factor_is_orthogonal() {
        let a = DenseMatrix::from_fn(6, 6, |i, j| {
            ((i * 7 + j * 3) % 5) as f64 - 2.0 + (i == j) as u8 as f64
        });
        let q = orthogonal_factor(&a).unwrap();
        let qtq = q.transpose_matmul(&q).unwrap();
        assert!(qtq.sub(&DenseMatrix::identity(6)).unwrap().max_abs() < 1e-12);
        assert!(orthogonal_factor(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn coordinate_null_space() {
        let g = DenseMatrix::from_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let h1 = null_space_basis(&g).unwrap();
        assert!((h1.get(0, 0).abs() - 1.0).abs() < 1e-12);
        assert!(h1.get(1, 0).abs() < 1e-12 && h1.get(2, 0).abs() < 1e-12);
    }

    #[test]
    fn rank_deficiency_detected() {
        let g = DenseMatrix::from_rows(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]]);
        assert_eq!(numerical_rank(&g), 1);
        assert!(matches!(
            null_space_basis(&g),
            Err(Error::RankDeficient {
                rank: 1,
                required: 2
            })
        ));
    }
}
