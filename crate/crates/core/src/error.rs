use thiserror::Error;

/// Errors reported by the linear-algebra kernels and the samplers built on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    /// Cholesky hit a pivot that is not strictly positive.
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e} relative to scale {scale:e})")]
    NotSymmetric { asymmetry: f64, scale: f64 },

    /// Numerical rank of a constraint matrix is below its row count.
    #[error("matrix is rank deficient: numerical rank {rank} < required {required}")]
    RankDeficient { rank: usize, required: usize },

    #[error("matrix is singular (zero pivot at {pivot})")]
    Singular { pivot: usize },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("invalid simplex parameter: {0}")]
    InvalidSimplex(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
