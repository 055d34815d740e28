//! Timing sweeps comparing each fast sampler with its Cholesky baseline.
//!
//! Every instance is a pure function of `(experiment, grid point, trial,
//! seed)`. A measurement covers sampler setup plus `n_samples` draws (setup
//! is skipped when `draws_only` is set) and reports the median of the
//! configured repetitions.

use std::hint::black_box;

use truncmvn::hyperplane::{FastProjector, TransformCache};
use truncmvn::instances::{
    hyperplane_instance, simplex_cov_instance, structured_cov_instance, structured_prec_instance,
    CovKind,
};
use truncmvn::linalg::DenseMatrix;
use truncmvn::rng::derive_seed;
use truncmvn::structured::{
    sample_simplex_cov_n, simplex_cov_spec, NaiveStructuredCov, NaiveStructuredPrec,
    StructuredCovSpec, StructuredPrecSpec,
};
use truncmvn::RngState;

use crate::error::{CliError, Result};
use crate::record::BenchRecord;
use crate::timing::median_time_ms;

/// Upper bound on the entries of one batch of draws (4 MiB of `f64`), so
/// large sweeps stay within memory.
pub const CHUNK_ENTRIES: usize = 1 << 19;

pub const HYPERPLANE: &str = "hyperplane";
pub const STRUCTURED_COV: &str = "structured-cov";
pub const SIMPLEX_COV: &str = "simplex-cov";
pub const STRUCTURED_PREC: &str = "structured-prec";

/// Settings shared by every sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub seed: u64,
    pub trials: usize,
    pub samples: usize,
    pub grid: Vec<usize>,
    pub cov: CovKind,
    /// Timed runs per measurement; the median is reported.
    pub repetitions: usize,
    /// Exclude sampler setup from the timed region.
    pub draws_only: bool,
}

impl SweepSettings {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(CliError::InvalidArgument("grid must not be empty".into()));
        }
        if self.grid.contains(&0) {
            return Err(CliError::InvalidArgument(
                "grid values must be positive".into(),
            ));
        }
        if self.trials == 0 {
            return Err(CliError::InvalidArgument(
                "trials must be at least 1".into(),
            ));
        }
        if self.samples == 0 {
            return Err(CliError::InvalidArgument(
                "samples must be at least 1".into(),
            ));
        }
        if self.repetitions < 3 {
            return Err(CliError::InvalidArgument(
                "repetitions must be at least 3".into(),
            ));
        }
        Ok(())
    }
}

/// Number of hyperplane constraints at a grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstraintCount {
    Fixed(usize),
    /// `round(fraction · k)`, at least 1.
    Fraction(f64),
}

impl ConstraintCount {
    pub fn resolve(self, k: usize) -> Result<usize> {
        let k2 = match self {
            ConstraintCount::Fixed(k2) => k2,
            ConstraintCount::Fraction(f) => {
                if !(f > 0.0 && f < 1.0) {
                    return Err(CliError::InvalidArgument(format!(
                        "k2 fraction must lie in (0, 1), got {f}"
                    )));
                }
                ((f * k as f64).round() as usize).max(1)
            }
        };
        if k2 == 0 || k2 >= k {
            return Err(CliError::InvalidArgument(format!(
                "need 1 ≤ k2 < k, got k2 = {k2}, k = {k}"
            )));
        }
        Ok(k2)
    }
}

/// Seed of one instance: a pure function of the experiment, the grid point
/// (all its dimensions), the trial, and the base seed.
pub fn instance_seed(seed: u64, experiment: &str, point: &[usize], trial: usize) -> u64 {
    let tag = experiment.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    });
    let mut s = derive_seed(seed, tag);
    for &d in point {
        s = derive_seed(s, d as u64);
    }
    derive_seed(s, trial as u64)
}

/// Draws `n` rows of width `width` in batches of at most [`CHUNK_ENTRIES`]
/// entries, discarding them.
fn draw_chunked(n: usize, width: usize, mut draw: impl FnMut(usize) -> DenseMatrix) {
    let rows = (CHUNK_ENTRIES / width.max(1)).max(1);
    let mut left = n;
    while left > 0 {
        let m = left.min(rows);
        black_box(draw(m));
        left -= m;
    }
}

/// Noise stream for the timed draws, distinct from the instance stream.
fn draw_noise(instance_seed: u64) -> RngState {
    RngState::derived(instance_seed, 1)
}

struct Row<'a> {
    experiment: &'a str,
    k: Option<usize>,
    k1: Option<usize>,
    k2: Option<usize>,
    n: Option<usize>,
    p: Option<usize>,
    trial: usize,
    seed: u64,
}

impl Row<'_> {
    fn record(
        &self,
        algorithm: &str,
        s: &SweepSettings,
        cov_kind: CovKind,
        wall_time_ms: f64,
    ) -> BenchRecord {
        BenchRecord {
            experiment: self.experiment.into(),
            algorithm: algorithm.into(),
            k: self.k,
            k1: self.k1,
            k2: self.k2,
            n: self.n,
            p: self.p,
            trial: self.trial,
            seed: self.seed,
            n_samples: s.samples,
            // a zero reading only means the clock was too coarse
            wall_time_ms: wall_time_ms.max(1e-6),
            cov_kind: cov_kind.label().into(),
        }
    }
}

fn label(base: &str, s: &SweepSettings) -> String {
    if s.draws_only {
        format!("{base}-draws-only")
    } else {
        base.to_string()
    }
}

/// Transform method (naive) versus projection (fast) for hyperplane
/// truncation; the grid holds `k`.
pub fn bench_hyperplane(s: &SweepSettings, k2: ConstraintCount) -> Result<Vec<BenchRecord>> {
    s.validate()?;
    let mut out = Vec::new();
    for &k in &s.grid {
        let k2 = k2.resolve(k)?;
        for trial in 0..s.trials {
            let seed = instance_seed(s.seed, HYPERPLANE, &[k, k2], trial);
            let (spec, c) = hyperplane_instance(k, k2, s.cov, &mut RngState::new(seed))?;
            let row = Row {
                experiment: HYPERPLANE,
                k: Some(k),
                k1: None,
                k2: Some(k2),
                n: None,
                p: None,
                trial,
                seed,
            };
            // construct once outside the clock so failures surface as errors
            let cache = TransformCache::new(&spec, &c)?;
            let proj = FastProjector::new(&spec, &c)?;
            let naive_ms = if s.draws_only {
                median_time_ms(s.repetitions, || {
                    let mut noise = draw_noise(seed);
                    draw_chunked(s.samples, k, |m| cache.sample_n(m, &mut noise));
                })
            } else {
                median_time_ms(s.repetitions, || {
                    let mut noise = draw_noise(seed);
                    let cache = TransformCache::new(&spec, &c).expect("instance validated above");
                    draw_chunked(s.samples, k, |m| cache.sample_n(m, &mut noise));
                })
            };
            let fast_ms = if s.draws_only {
                median_time_ms(s.repetitions, || {
                    let mut noise = draw_noise(seed);
                    draw_chunked(s.samples, k, |m| proj.sample_n(m, &mut noise));
                })
            } else {
                median_time_ms(s.repetitions, || {
                    let mut noise = draw_noise(seed);
                    let proj = FastProjector::new(&spec, &c).expect("instance validated above");
                    draw_chunked(s.samples, k, |m| proj.sample_n(m, &mut noise));
                })
            };
            out.push(row.record(&label("naive", s), s, s.cov, naive_ms));
            out.push(row.record(&label("fast", s), s, s.cov, fast_ms));
        }
    }
    Ok(out)
}

/// Structured-covariance sampler versus the Cholesky baseline at fixed `k₁`;
/// the grid holds `k₂`.
pub fn bench_structured_cov(s: &SweepSettings, k1: usize) -> Result<Vec<BenchRecord>> {
    s.validate()?;
    if k1 == 0 {
        return Err(CliError::InvalidArgument("k1 must be positive".into()));
    }
    let mut out = Vec::new();
    for &k2 in &s.grid {
        for trial in 0..s.trials {
            let seed = instance_seed(s.seed, STRUCTURED_COV, &[k1, k2], trial);
            let spec = structured_cov_instance(k1, k2, s.cov, &mut RngState::new(seed))?;
            let row = Row {
                experiment: STRUCTURED_COV,
                k: None,
                k1: Some(k1),
                k2: Some(k2),
                n: None,
                p: None,
                trial,
                seed,
            };
            let fast_ms = if s.draws_only {
                median_time_ms(s.repetitions, || {
                    let mut noise = draw_noise(seed);
                    draw_chunked(s.samples, k1, |m| spec.sample_n(m, &mut noise));
                })
            } else {
                median_time_ms(s.repetitions, || {
                    let mut noise = draw_noise(seed);
                    let fresh = StructuredCovSpec::new(
                        spec.mu1().to_vec(),
                        spec.s11().clone(),
                        spec.s12().clone(),
                        spec.s22().clone(),
                    )
                    .expect("instance validated above");
                    draw_chunked(s.samples, k1, |m| fresh.sample_n(m, &mut noise));
                })
            };
            let naive_ms = if s.draws_only {
                let naive = NaiveStructuredCov::new(&spec)?;
                median_time_ms(s.repetitions, || {
                    let mut noise = draw_noise(seed);
                    draw_chunked(s.samples, k1, |m| naive.sample_n(m, &mut noise));
                })
            } else {
                NaiveStructuredCov::new(&spec)?;
                median_time_ms(s.repetitions, || {
                    let mut noise = draw_noise(seed);
                    let naive = NaiveStructuredCov::new(&spec).expect("target checked above");
                    draw_chunked(s.samples, k1, |m| naive.sample_n(m, &mut noise));
                })
            };
            out.push(row.record(&label("fast", s), s, s.cov, fast_ms));
            out.push(row.record(&label("naive", s), s, s.cov, naive_ms));
        }
    }
    Ok(out)
}

/// `N(μ₁, a·diag φ₁ − a·φ₁φ₁ᵀ)` with `φ ∼ Dir(1, …, 1)`, `μ = 1/k`, `a = 0.5`;
/// the grid holds `k` and draws have `k − 1` coordinates. The covariance is
/// diagonal-plus-rank-one by construction, so the `cov` setting is ignored.
pub fn bench_simplex_cov(s: &SweepSettings) -> Result<Vec<BenchRecord>> {
    s.validate()?;
    if s.grid.contains(&1) {
        return Err(CliError::InvalidArgument(
            "simplex sweep needs k ≥ 2".into(),
        ));
    }
    let mut out = Vec::new();
    for &k in &s.grid {
        for trial in 0..s.trials {
            let seed = instance_seed(s.seed, SIMPLEX_COV, &[k], trial);
            let inst = simplex_cov_instance(k, &mut RngState::new(seed));
            let row = Row {
                experiment: SIMPLEX_COV,
                k: Some(k),
                k1: Some(k - 1),
                k2: Some(1),
                n: None,
                p: None,
                trial,
                seed,
            };
            sample_simplex_cov_n(&inst.mu1, inst.a, &inst.phi1, 1, &mut draw_noise(seed))?;
            let fast_ms = median_time_ms(s.repetitions, || {
                let mut noise = draw_noise(seed);
                draw_chunked(s.samples, k, |m| {
                    sample_simplex_cov_n(&inst.mu1, inst.a, &inst.phi1, m, &mut noise)
                        .expect("inputs validated above")
                });
            });
            let spec = simplex_cov_spec(&inst.mu1, inst.a, &inst.phi1)?;
            let naive_ms = if s.draws_only {
                let naive = NaiveStructuredCov::new(&spec)?;
                median_time_ms(s.repetitions, || {
                    let mut noise = draw_noise(seed);
                    draw_chunked(s.samples, k, |m| naive.sample_n(m, &mut noise));
                })
            } else {
                NaiveStructuredCov::new(&spec)?;
                median_time_ms(s.repetitions, || {
                    let mut noise = draw_noise(seed);
                    let naive = NaiveStructuredCov::new(&spec).expect("target checked above");
                    draw_chunked(s.samples, k, |m| naive.sample_n(m, &mut noise));
                })
            };
            out.push(row.record(&label("fast", s), s, CovKind::Diagonal, fast_ms));
            out.push(row.record(&label("naive", s), s, CovKind::Diagonal, naive_ms));
        }
    }
    Ok(out)
}

/// Structured-precision sampler versus the Cholesky baseline at fixed `n`;
/// the grid holds `p`. `Ω` is always diagonal; `A` follows `cov`.
pub fn bench_structured_prec(s: &SweepSettings, n: usize) -> Result<Vec<BenchRecord>> {
    s.validate()?;
    if n == 0 {
        return Err(CliError::InvalidArgument("n must be positive".into()));
    }
    let mut out = Vec::new();
    for &p in &s.grid {
        for trial in 0..s.trials {
            let seed = instance_seed(s.seed, STRUCTURED_PREC, &[n, p], trial);
            let spec = structured_prec_instance(p, n, s.cov, &mut RngState::new(seed))?;
            let row = Row {
                experiment: STRUCTURED_PREC,
                k: None,
                k1: None,
                k2: None,
                n: Some(n),
                p: Some(p),
                trial,
                seed,
            };
            let fast_draw = |spec: &StructuredPrecSpec, noise: &mut RngState| {
                if s.samples == 1 {
                    black_box(spec.sample(noise));
                } else {
                    draw_chunked(s.samples, spec.p(), |m| spec.sample_n(m, noise));
                }
            };
            let fast_ms = if s.draws_only {
                median_time_ms(s.repetitions, || fast_draw(&spec, &mut draw_noise(seed)))
            } else {
                median_time_ms(s.repetitions, || {
                    let fresh = StructuredPrecSpec::new(
                        spec.mu_beta().to_vec(),
                        spec.a().clone(),
                        spec.phi().clone(),
                        spec.omega().clone(),
                    )
                    .expect("instance validated above");
                    fast_draw(&fresh, &mut draw_noise(seed));
                })
            };
            // The baseline's batch path inverts its factor once per call, so
            // all draws go through a single call.
            let naive_draw = |naive: &NaiveStructuredPrec, noise: &mut RngState| {
                if s.samples == 1 {
                    black_box(naive.sample(noise));
                } else {
                    black_box(naive.sample_n(s.samples, noise));
                }
            };
            let naive_ms = if s.draws_only {
                let naive = NaiveStructuredPrec::new(&spec)?;
                median_time_ms(s.repetitions, || naive_draw(&naive, &mut draw_noise(seed)))
            } else {
                NaiveStructuredPrec::new(&spec)?;
                median_time_ms(s.repetitions, || {
                    let naive = NaiveStructuredPrec::new(&spec).expect("precision checked above");
                    naive_draw(&naive, &mut draw_noise(seed));
                })
            };
            out.push(row.record(&label("fast", s), s, s.cov, fast_ms));
            out.push(row.record(&label("naive", s), s, s.cov, naive_ms));
        }
    }
    Ok(out)
}
