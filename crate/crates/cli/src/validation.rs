//! Distributional cross-checks of every fast sampler against its baseline
//! and against dense-inverse moment oracles.
//!
//! Each sampler pair runs over several random trials. A trial passes when
//! the per-coordinate KS battery between the two samplers accepts and both
//! samplers match the analytic mean and covariance.

use std::fmt::Write as _;

use truncmvn::hyperplane::{
    sample_simplex_diag, FastProjector, HyperplaneConstraint, TransformCache,
};
use truncmvn::instances::{
    dirichlet_ones, hyperplane_instance, simplex_cov_instance, structured_cov_instance,
    structured_prec_instance, CovKind,
};
use truncmvn::linalg::{CovarianceModel, DenseMatrix, LuFactor};
use truncmvn::mvn::GaussianSpec;
use truncmvn::structured::{
    sample_simplex_cov_n, simplex_cov_spec, NaiveStructuredCov, NaiveStructuredPrec,
};
use truncmvn::validate::{compare_samples, ks_battery, moment_match_report, MomentReport};
use truncmvn::{NoiseSource, RngState};

use crate::bench::instance_seed;
use crate::error::{CliError, Result};

/// Family-wise KS significance level of a whole run, split evenly across
/// batteries and then across coordinates.
pub const KS_ALPHA: f64 = 0.01;

/// Dimensions of the validation instances.
const HYPERPLANE_DIMS: (usize, usize) = (20, 5);
const STRUCTURED_COV_DIMS: (usize, usize) = (20, 5);
const STRUCTURED_PREC_DIMS: (usize, usize) = (20, 8);
const SIMPLEX_DIM: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateSettings {
    pub seed: u64,
    pub trials: usize,
    pub samples: usize,
    /// Covariance kinds for the pairs that accept either.
    pub cov_kinds: Vec<CovKind>,
    /// Test hook: inflates the fast samplers' spread by 10% so every
    /// covariance check must fail.
    pub corrupt: bool,
}

impl ValidateSettings {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(CliError::InvalidArgument(
                "trials must be at least 1".into(),
            ));
        }
        if self.samples < 2 {
            return Err(CliError::InvalidArgument(
                "validation needs at least 2 samples".into(),
            ));
        }
        if self.cov_kinds.is_empty() {
            return Err(CliError::InvalidArgument(
                "no covariance kind selected".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of one pair on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub pair: &'static str,
    pub cov_kind: CovKind,
    pub trial: usize,
    pub ks_min_p: f64,
    pub ks_threshold: f64,
    pub fast_vs_oracle: MomentReport,
    pub baseline_vs_oracle: MomentReport,
    pub fast_vs_baseline: MomentReport,
}

impl TrialOutcome {
    pub fn pass(&self) -> bool {
        self.ks_min_p >= self.ks_threshold
            && self.fast_vs_oracle.pass
            && self.baseline_vs_oracle.pass
            && self.fast_vs_baseline.pass
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub outcomes: Vec<TrialOutcome>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.outcomes.iter().all(TrialOutcome::pass)
    }

    /// One line per trial plus a summary; contains no timings, so a pinned
    /// seed reproduces it byte for byte.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for o in &self.outcomes {
            let _ = writeln!(
                s,
                "{} {:<16} {:<8} trial {}  ks min p {:.3e} (>= {:.1e})  mean z {:.2}/{:.2}/{:.2}  cov rel {:.4}/{:.4}/{:.4}",
                if o.pass() { "PASS" } else { "FAIL" },
                o.pair,
                o.cov_kind.label(),
                o.trial,
                o.ks_min_p,
                o.ks_threshold,
                o.fast_vs_oracle.max_mean_z,
                o.baseline_vs_oracle.max_mean_z,
                o.fast_vs_baseline.max_mean_z,
                o.fast_vs_oracle.cov_rel_error,
                o.baseline_vs_oracle.cov_rel_error,
                o.fast_vs_baseline.cov_rel_error,
            );
        }
        let failed = self.outcomes.iter().filter(|o| !o.pass()).count();
        let _ = writeln!(
            s,
            "{}: {} of {} trials passed",
            if failed == 0 { "PASS" } else { "FAIL" },
            self.outcomes.len() - failed,
            self.outcomes.len()
        );
        s
    }
}

/// Dense inverse by LU with partial pivoting, independent of the Cholesky
/// code paths under test.
fn dense_inverse(m: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(LuFactor::new(m)?.inverse())
}

/// Mean and covariance of `N(μ, Σ)` conditioned on `G x = r`.
pub fn hyperplane_oracle(
    spec: &GaussianSpec,
    c: &HyperplaneConstraint,
) -> Result<(Vec<f64>, DenseMatrix)> {
    let sigma = spec.cov().to_dense();
    let sgt = sigma.matmul_transpose(c.g())?;
    let w = sgt.matmul(&dense_inverse(&c.g().matmul(&sgt)?)?)?;
    let gmu = c.g().matvec(spec.mean())?;
    let gap: Vec<f64> = c.r().iter().zip(&gmu).map(|(a, b)| a - b).collect();
    let mean = spec
        .mean()
        .iter()
        .zip(w.matvec(&gap)?)
        .map(|(m, s)| m + s)
        .collect();
    let cov = sigma.sub(&w.matmul_transpose(&sgt)?)?;
    Ok((mean, cov))
}

/// Scales each row's deviation from `center` by `factor`.
fn inflate(mut x: DenseMatrix, center: &[f64], factor: f64) -> DenseMatrix {
    for i in 0..x.rows() {
        for (v, c) in x.row_mut(i).iter_mut().zip(center) {
            *v = c + factor * (*v - c);
        }
    }
    x
}

struct PairDraws {
    fast: DenseMatrix,
    baseline: DenseMatrix,
    mean: Vec<f64>,
    cov: DenseMatrix,
}

fn judge(
    pair: &'static str,
    cov_kind: CovKind,
    trial: usize,
    d: PairDraws,
    corrupt: bool,
    alpha: f64,
) -> Result<TrialOutcome> {
    let fast = if corrupt {
        inflate(d.fast, &d.mean, 1.1)
    } else {
        d.fast
    };
    let ks = ks_battery(&fast, &d.baseline, alpha)?;
    Ok(TrialOutcome {
        pair,
        cov_kind,
        trial,
        ks_min_p: ks.min_p_value,
        ks_threshold: ks.threshold,
        fast_vs_oracle: moment_match_report(&fast, &d.mean, &d.cov)?,
        baseline_vs_oracle: moment_match_report(&d.baseline, &d.mean, &d.cov)?,
        fast_vs_baseline: compare_samples(&fast, &d.baseline)?,
    })
}

fn hyperplane_pair(seed: u64, kind: CovKind, n: usize) -> Result<PairDraws> {
    let (k, k2) = HYPERPLANE_DIMS;
    let (spec, c) = hyperplane_instance(k, k2, kind, &mut RngState::new(seed))?;
    let (mean, cov) = hyperplane_oracle(&spec, &c)?;
    Ok(PairDraws {
        fast: FastProjector::new(&spec, &c)?.sample_n(n, &mut RngState::derived(seed, 1)),
        baseline: TransformCache::new(&spec, &c)?.sample_n(n, &mut RngState::derived(seed, 2)),
        mean,
        cov,
    })
}

fn structured_cov_pair(seed: u64, kind: CovKind, n: usize) -> Result<PairDraws> {
    let (k1, k2) = STRUCTURED_COV_DIMS;
    let spec = structured_cov_instance(k1, k2, kind, &mut RngState::new(seed))?;
    let s12 = spec.s12();
    let s22_inv = dense_inverse(&spec.s22().to_dense())?;
    let cov = spec
        .s11()
        .to_dense()
        .sub(&s12.matmul(&s22_inv)?.matmul_transpose(s12)?)?;
    Ok(PairDraws {
        fast: spec.sample_n(n, &mut RngState::derived(seed, 1)),
        baseline: NaiveStructuredCov::new(&spec)?.sample_n(n, &mut RngState::derived(seed, 2)),
        mean: spec.mu1().to_vec(),
        cov,
    })
}

fn structured_prec_pair(seed: u64, kind: CovKind, n: usize) -> Result<PairDraws> {
    let (p, rows) = STRUCTURED_PREC_DIMS;
    let spec = structured_prec_instance(p, rows, kind, &mut RngState::new(seed))?;
    let phi = spec.phi();
    let precision = spec
        .a()
        .to_dense()
        .add(&phi.transpose_matmul(&spec.omega().to_dense().matmul(phi)?)?)?;
    Ok(PairDraws {
        fast: spec.sample_n(n, &mut RngState::derived(seed, 1)),
        baseline: NaiveStructuredPrec::new(&spec)?.sample_n(n, &mut RngState::derived(seed, 2)),
        mean: spec.mu_beta().to_vec(),
        cov: dense_inverse(&precision)?,
    })
}

/// `O(k)` simplex projection versus the general projector with `G = 1ᵀ`.
fn simplex_plane_pair(seed: u64, n: usize) -> Result<PairDraws> {
    let k = SIMPLEX_DIM;
    let mut rng = RngState::new(seed);
    let phi = dirichlet_ones(k, &mut rng);
    let mu: Vec<f64> = (0..k).map(|_| rng.standard_normal() / k as f64).collect();
    let a = 0.5;
    let spec = GaussianSpec::new(
        mu.clone(),
        CovarianceModel::diagonal(phi.iter().map(|p| a * p).collect())?,
    )?;
    let c = HyperplaneConstraint::sum_to_one(k)?;
    let (mean, cov) = hyperplane_oracle(&spec, &c)?;
    let mut noise = RngState::derived(seed, 1);
    let mut fast = DenseMatrix::zeros(n, k);
    for i in 0..n {
        fast.row_mut(i)
            .copy_from_slice(&sample_simplex_diag(&mu, a, &phi, &mut noise)?);
    }
    Ok(PairDraws {
        fast,
        baseline: FastProjector::new(&spec, &c)?.sample_n(n, &mut RngState::derived(seed, 2)),
        mean,
        cov,
    })
}

/// Diagonal-minus-rank-one sampler versus the Cholesky baseline.
fn simplex_cov_pair(seed: u64, n: usize) -> Result<PairDraws> {
    let inst = simplex_cov_instance(SIMPLEX_DIM, &mut RngState::new(seed));
    let k1 = inst.phi1.len();
    let cov = DenseMatrix::from_fn(k1, k1, |i, j| {
        let d = if i == j { inst.a * inst.phi1[i] } else { 0.0 };
        d - inst.a * inst.phi1[i] * inst.phi1[j]
    });
    let spec = simplex_cov_spec(&inst.mu1, inst.a, &inst.phi1)?;
    Ok(PairDraws {
        fast: sample_simplex_cov_n(
            &inst.mu1,
            inst.a,
            &inst.phi1,
            n,
            &mut RngState::derived(seed, 1),
        )?,
        baseline: NaiveStructuredCov::new(&spec)?.sample_n(n, &mut RngState::derived(seed, 2)),
        mean: inst.mu1,
        cov,
    })
}

/// Runs every sampler pair over `trials` random instances.
pub fn run_validation(s: &ValidateSettings) -> Result<ValidationReport> {
    s.validate()?;
    type Job = (&'static str, CovKind);
    let mut jobs: Vec<Job> = Vec::new();
    for &kind in &s.cov_kinds {
        jobs.push(("hyperplane", kind));
        jobs.push(("structured-cov", kind));
        jobs.push(("structured-prec", kind));
    }
    jobs.push(("simplex-plane", CovKind::Diagonal));
    jobs.push(("simplex-cov", CovKind::Diagonal));
    let alpha = KS_ALPHA / (jobs.len() * s.trials) as f64;

    let mut outcomes = Vec::new();
    for (pair, kind) in jobs {
        for trial in 0..s.trials {
            let seed = instance_seed(
                s.seed,
                &format!("validate-{pair}-{}", kind.label()),
                &[],
                trial,
            );
            let draws = match pair {
                "hyperplane" => hyperplane_pair(seed, kind, s.samples)?,
                "structured-cov" => structured_cov_pair(seed, kind, s.samples)?,
                "structured-prec" => structured_prec_pair(seed, kind, s.samples)?,
                "simplex-plane" => simplex_plane_pair(seed, s.samples)?,
                _ => simplex_cov_pair(seed, s.samples)?,
            };
            outcomes.push(judge(pair, kind, trial, draws, s.corrupt, alpha)?);
        }
    }
    Ok(ValidationReport { outcomes })
}
