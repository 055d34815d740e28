//! Exact samplers for multivariate normals truncated to hyperplanes
//! `{x : G x = r}` and for normals with structured covariance or precision.
//!
//! * [`linalg`] — dense/diagonal kernels (Cholesky, SPD solves, null spaces).
//! * [`mvn`] — unconstrained and conditional Gaussian sampling.
//! * [`hyperplane`] — the transform-based and projection-based samplers for
//!   hyperplane truncation, and the O(k) simplex specialization.
//! * [`structured`] — matrix-free samplers for `Σ₁₁ − Σ₁₂Σ₂₂⁻¹Σ₂₁` and
//!   `(A + ΦᵀΩΦ)⁻¹` covariances, with Cholesky baselines.
//! * [`sgmcmc`] — stochastic-gradient MCMC on the probability simplex.
//! * [`validate`] — moment and Kolmogorov–Smirnov checks.
//! * [`instances`] — seeded random problem instances.

pub mod error;
pub mod hyperplane;
pub mod instances;
pub mod linalg;
pub mod mvn;
pub mod rng;
pub mod sgmcmc;
pub mod structured;
pub mod validate;

pub use error::{Error, Result};
pub use rng::{NoiseSource, RngState, ScriptedNoise, ZeroNoise};
