//! Experiment configuration: built-in desk and paper-scale defaults, an
//! optional JSON file, and command-line flags, in increasing precedence.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use truncmvn::instances::CovKind;

use crate::error::{CliError, Result};

/// Contents of a `--config` JSON file. Every key is optional; unknown keys
/// are rejected so typos do not pass silently.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub samples: Option<usize>,
    pub grid: Option<Vec<usize>>,
    pub cov: Option<CovChoice>,
    pub out: Option<PathBuf>,
    pub paper_scale: Option<bool>,
    pub repetitions: Option<usize>,
    pub draws_only: Option<bool>,
    pub k1: Option<usize>,
    pub k2: Option<usize>,
    pub k2_fraction: Option<f64>,
    pub n: Option<usize>,
    pub sweep: Option<CovSweep>,
    pub vocab: Option<usize>,
    pub docs: Option<usize>,
    pub minibatches: Option<usize>,
    pub minibatch_size: Option<usize>,
    pub eta: Option<f64>,
    pub spikes: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Covariance storage as spelled on the command line and in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CovChoice {
    Dense,
    #[serde(alias = "diagonal")]
    #[value(alias = "diagonal")]
    Diag,
}

impl From<CovChoice> for CovKind {
    fn from(c: CovChoice) -> Self {
        match c {
            CovChoice::Dense => CovKind::Dense,
            CovChoice::Diag => CovKind::Diagonal,
        }
    }
}

/// Which structured-covariance sweep to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CovSweep {
    /// Vary `k₂` at fixed `k₁`.
    K2,
    /// Diagonal-minus-rank-one simplex covariance, varying `k`.
    Simplex,
}

/// First present value, so `pick(flag, file, default)` gives flags
/// precedence over the file and the file over the default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Built-in sizes of one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepDefaults {
    pub grid: Vec<usize>,
    pub trials: usize,
    pub samples: usize,
}

pub fn hyperplane_defaults(paper_scale: bool) -> SweepDefaults {
    if paper_scale {
        SweepDefaults {
            grid: vec![100, 500, 1000, 2000, 3000, 4000, 5000],
            trials: 5,
            samples: 10_000,
        }
    } else {
        SweepDefaults {
            grid: vec![50, 200, 1000],
            trials: 5,
            samples: 10_000,
        }
    }
}

/// `k₁` and the `k₂` grid.
pub fn structured_cov_defaults(paper_scale: bool) -> (usize, SweepDefaults) {
    if paper_scale {
        (
            4000,
            SweepDefaults {
                grid: vec![1, 10, 100, 500, 1000, 2000, 4000, 8000],
                trials: 50,
                samples: 1,
            },
        )
    } else {
        (
            1000,
            SweepDefaults {
                grid: vec![10, 25, 50, 100, 250, 500, 1000, 2000],
                trials: 5,
                samples: 1,
            },
        )
    }
}

pub fn simplex_cov_defaults(paper_scale: bool) -> SweepDefaults {
    if paper_scale {
        SweepDefaults {
            grid: vec![100, 300, 1000, 3000, 10_000],
            trials: 100,
            samples: 10_000,
        }
    } else {
        SweepDefaults {
            grid: vec![250, 500, 1000, 2000, 4000],
            trials: 5,
            samples: 10_000,
        }
    }
}

/// `n` and the `p` grid.
pub fn structured_prec_defaults(paper_scale: bool) -> (usize, SweepDefaults) {
    if paper_scale {
        (
            4000,
            SweepDefaults {
                grid: vec![1, 10, 100, 1000, 2000, 4000, 8000],
                trials: 50,
                samples: 1,
            },
        )
    } else {
        (
            500,
            SweepDefaults {
                grid: vec![50, 100, 250, 500, 1000, 2000, 4000],
                trials: 5,
                samples: 1,
            },
        )
    }
}

pub const DEFAULT_SEED: u64 = 20_160_101;
pub const DEFAULT_REPETITIONS: usize = 3;
pub const DEFAULT_K2: usize = 20;
pub const VALIDATE_TRIALS: usize = 5;
pub const VALIDATE_SAMPLES: usize = 100_000;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::InvalidArgument(msg.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beats_default() {
        assert_eq!(pick(Some(1), Some(2), 3), 1);
        assert_eq!(pick(None, Some(2), 3), 2);
        assert_eq!(pick(None, None, 3), 3);
    }

    #[test]
    fn parses_known_keys_and_rejects_unknown() {
        let c: FileConfig =
            serde_json::from_str(r#"{"seed": 4, "grid": [1, 2], "cov": "diagonal"}"#).unwrap();
        assert_eq!(c.seed, Some(4));
        assert_eq!(c.grid, Some(vec![1, 2]));
        assert_eq!(c.cov, Some(CovChoice::Diag));
        assert!(serde_json::from_str::<FileConfig>(r#"{"sede": 4}"#).is_err());
    }
}
