//! Dense and diagonal linear-algebra kernels shared by every sampler.

mod cholesky;
mod covariance;
mod dense;
mod lu;
mod qr;

pub(crate) use cholesky::mul_by_lower;
pub use cholesky::{cholesky_dense, CholeskyFactor};
pub use covariance::{cholesky, spd_solve, CovarianceModel, Representation};
pub(crate) use covariance::{scale_cols, scale_rows};
pub(crate) use dense::gemm;
pub use dense::{axpy, dot, norm2, norm_inf, track_dense_allocations, DenseMatrix, DiagMatrix};
pub use lu::LuFactor;
pub use qr::{null_space_basis, numerical_rank, orthogonal_factor, RANK_TOLERANCE};
