use super::dense::{axpy, DenseMatrix};
use crate::error::{check_dim, Error, Result};

/// LU factorization with partial pivoting, `P A = L U`, for general square
/// matrices (used where the matrix is invertible but not symmetric).
#[derive(Debug, Clone, PartialEq)]
pub struct LuFactor {
    /// Unit-lower `L` below the diagonal, `U` on and above it.
    lu: DenseMatrix,
    /// `perm[i]` is the original row placed at position `i`.
    perm: Vec<usize>,
}

impl LuFactor {
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        check_dim("LuFactor::new (square)", a.rows(), a.cols())?;
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs();
        for j in 0..n {
            let (p, best) = (j..n)
                .map(|i| (i, lu.get(i, j).abs()))
                .fold((j, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if !(best > f64::EPSILON * scale * n as f64) {
                return Err(Error::Singular { pivot: j });
            }
            if p != j {
                perm.swap(p, j);
                let data = lu.as_mut_slice();
                for c in 0..n {
                    data.swap(p * n + c, j * n + c);
                }
            }
            let pivot = lu.get(j, j);
            let data = lu.as_mut_slice();
            let (top, bottom) = data.split_at_mut((j + 1) * n);
            let row_j = &top[j * n + j + 1..(j + 1) * n];
            for i in 0..n - j - 1 {
                let row_i = &mut bottom[i * n..(i + 1) * n];
                let f = row_i[j] / pivot;
                row_i[j] = f;
                if f != 0.0 {
                    axpy(-f, row_j, &mut row_i[j + 1..]);
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        check_dim("LuFactor::solve", n, b.len())?;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: f64 = row[..i].iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: f64 = row[i + 1..]
                .iter()
                .zip(&x[i + 1..])
                .map(|(a, b)| a * b)
                .sum();
            x[i] = (x[i] - s) / row[i];
        }
        Ok(x)
    }

    /// Explicit `A⁻¹`.
    pub fn inverse(&self) -> DenseMatrix {
        let n = self.dim();
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.solve(&e).expect("dimension checked");
            for (i, v) in col.into_iter().enumerate() {
                inv.set(i, j, v);
            }
            e[j] = 0.0;
        }
        inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_permuted_system() {
        let a = DenseMatrix::from_rows(&[&[0.0, 2.0, 1.0], &[1.0, 1.0, 0.0], &[3.0, 0.0, 1.0]]);
        let lu = LuFactor::new(&a).unwrap();
        let x = lu.solve(&[3.0, 2.0, 4.0]).unwrap();
        let back = a.matvec(&x).unwrap();
        for (u, v) in back.iter().zip([3.0, 2.0, 4.0]) {
            assert!((u - v).abs() < 1e-12);
        }
        let prod = a.matmul(&lu.inverse()).unwrap();
        assert!(prod.sub(&DenseMatrix::identity(3)).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn singular_is_reported() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(
            LuFactor::new(&a),
            Err(Error::Singular { pivot: 1 })
        ));
    }
}
