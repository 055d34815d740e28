//! Benchmark and validation harness for the `truncmvn` samplers.
//!
//! - [`bench`]: timing sweeps of each fast sampler against its Cholesky
//!   baseline, written as CSV ([`record`]).
//! - [`validation`]: moment and KS checks across random trials.
//! - [`sgmcmc_run`]: residual traces of the simplex SG-MCMC samplers.
//! - [`plot`]: SVG line charts of any of those CSVs.
//! - [`cli`] and [`config`]: argument parsing and configuration layering.

pub mod bench;
pub mod cli;
pub mod config;
pub mod error;
pub mod plot;
pub mod record;
pub mod sgmcmc_run;
pub mod timing;
pub mod validation;

pub use error::{CliError, Result};
