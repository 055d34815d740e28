//! The benchmark CSV schema.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Column order of every benchmark CSV.
pub const BENCH_HEADER: &str =
    "experiment,algorithm,k,k1,k2,n,p,trial,seed,n_samples,wall_time_ms,cov_kind";

/// One timed measurement. Dimensions that do not apply to the experiment
/// are left empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub experiment: String,
    pub algorithm: String,
    pub k: Option<usize>,
    pub k1: Option<usize>,
    pub k2: Option<usize>,
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub trial: usize,
    pub seed: u64,
    pub n_samples: usize,
    pub wall_time_ms: f64,
    pub cov_kind: String,
}

/// Writes records with the fixed header; an empty slice still gets the header.
pub fn write_bench_csv<W: Write>(out: W, records: &[BenchRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(BENCH_HEADER.split(','))?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Median wall time per `(algorithm, x)` over trials, where `x` is read by
/// `dim` from each record. Output is sorted by algorithm, then `x`.
pub fn median_by_point(
    records: &[BenchRecord],
    dim: impl Fn(&BenchRecord) -> Option<usize>,
) -> Vec<(String, usize, f64)> {
    let mut groups: std::collections::BTreeMap<(String, usize), Vec<f64>> = Default::default();
    for r in records {
        if let Some(x) = dim(r) {
            groups
                .entry((r.algorithm.clone(), x))
                .or_default()
                .push(r.wall_time_ms);
        }
    }
    groups
        .into_iter()
        .map(|((alg, x), mut t)| (alg, x, crate::timing::median(&mut t)))
        .collect()
}
