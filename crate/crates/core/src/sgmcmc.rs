//! Mini-batch SG-MCMC for a probability vector `φ` on the simplex under a
//! multinomial likelihood with a symmetric Dirichlet(η) prior.
//!
//! Each step draws from a Gaussian whose covariance is `c·diag(φ_t)` restricted
//! to the hyperplane `1ᵀφ = 1`. [`sgmcmc_step_fast`] does this in `O(V)` with a
//! single projection (the simplex case of the hyperplane projection), then
//! clips into the simplex if needed. [`sgmcmc_step_gibbs`] is the baseline: a
//! single-site Gibbs sampler for the same Gaussian in reduced coordinates
//! `ϕ = φ₁..φ_{V−1}`, with covariance `c[diag(ϕ) − ϕϕᵀ]`, truncated to the
//! simplex.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{check_dim, Error, Result};
use crate::rng::{derive_seed, NoiseSource, RngState};

/// Tolerance on `1ᵀφ = 1` for a valid state.
pub const SIMPLEX_SUM_TOLERANCE: f64 = 1e-10;

/// Current point of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexState {
    phi: Vec<f64>,
    m_estimate: f64,
    step_index: u64,
}

impl SimplexState {
    /// A state at step `t = 1`. `φ` must be strictly positive and sum to 1;
    /// `m_estimate` must be positive.
    pub fn new(phi: Vec<f64>, m_estimate: f64) -> Result<Self> {
        if phi.len() < 2 {
            return Err(Error::InvalidSimplex(format!(
                "need at least 2 coordinates, got {}",
                phi.len()
            )));
        }
        if let Some(i) = phi.iter().position(|p| !(*p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidSimplex(format!(
                "coordinate {i} is {} (must be positive)",
                phi[i]
            )));
        }
        let total: f64 = phi.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_SUM_TOLERANCE {
            return Err(Error::InvalidSimplex(format!("coordinates sum to {total}")));
        }
        if !(m_estimate > 0.0) || !m_estimate.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "M must be positive, got {m_estimate}"
            )));
        }
        Ok(Self {
            phi,
            m_estimate,
            step_index: 1,
        })
    }

    /// The uniform point `1/V`.
    pub fn uniform(v: usize, m_estimate: f64) -> Result<Self> {
        Self::new(vec![1.0 / v as f64; v], m_estimate)
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// The first `V − 1` coordinates.
    pub fn reduced(&self) -> &[f64] {
        &self.phi[..self.phi.len() - 1]
    }

    pub fn dim(&self) -> usize {
        self.phi.len()
    }

    pub fn m_estimate(&self) -> f64 {
        self.m_estimate
    }

    /// Index `t` of the next step.
    pub fn step_index(&self) -> u64 {
        self.step_index
    }
}

/// Sufficient statistics of one minibatch.
#[derive(Debug, Clone, PartialEq)]
pub struct MinibatchCounts {
    n_colon: Vec<u64>,
    n_total: u64,
    rho: f64,
}

impl MinibatchCounts {
    /// Per-coordinate counts summed over the minibatch, and `ρ = N / |batch|`.
    pub fn new(n_colon: Vec<u64>, rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "rho must be positive, got {rho}"
            )));
        }
        let n_total = n_colon.iter().sum();
        Ok(Self {
            n_colon,
            n_total,
            rho,
        })
    }

    /// Sums the counts of `docs` over a vocabulary of size `v`.
    pub fn from_documents<'a>(
        v: usize,
        docs: impl IntoIterator<Item = &'a Document>,
        rho: f64,
    ) -> Result<Self> {
        let mut n = vec![0u64; v];
        for doc in docs {
            for &(i, c) in &doc.entries {
                if i >= v {
                    return Err(Error::DimensionMismatch {
                        context: "MinibatchCounts::from_documents index",
                        expected: v,
                        found: i + 1,
                    });
                }
                n[i] += c;
            }
        }
        Self::new(n, rho)
    }

    pub fn n_colon(&self) -> &[u64] {
        &self.n_colon
    }

    pub fn n_total(&self) -> u64 {
        self.n_total
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// Chain settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SgmcmcConfig {
    /// Dirichlet concentration `η > 0`.
    pub eta: f64,
    /// `κ` in the step size `ε_t = t^{−κ}`; must lie in `(0.5, 1]`.
    pub step_exponent: f64,
    /// Floor applied to coordinates when a draw leaves the simplex.
    pub epsilon_floor: f64,
    pub minibatch_size: usize,
    pub seed: u64,
    /// Multiplier on the injected noise variance: 1 for the sampler, 0 for
    /// the deterministic drift.
    pub noise_scale: f64,
}

impl SgmcmcConfig {
    pub fn new(eta: f64, minibatch_size: usize, seed: u64) -> Self {
        Self {
            eta,
            step_exponent: 0.99,
            epsilon_floor: 1e-10,
            minibatch_size,
            seed,
            noise_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "eta must be positive, got {}",
                self.eta
            )));
        }
        if !(self.step_exponent > 0.5 && self.step_exponent <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "step exponent must lie in (0.5, 1], got {}",
                self.step_exponent
            )));
        }
        if !(self.epsilon_floor >= 0.0) || !self.epsilon_floor.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "epsilon floor must be nonnegative, got {}",
                self.epsilon_floor
            )));
        }
        if self.minibatch_size == 0 {
            return Err(Error::InvalidArgument(
                "minibatch size must be positive".into(),
            ));
        }
        if !(self.noise_scale >= 0.0) || !self.noise_scale.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise scale must be nonnegative, got {}",
                self.noise_scale
            )));
        }
        Ok(())
    }
}

/// Step size, updated `M`, and the Gaussian mean shared by both samplers.
struct StepMoments {
    m_new: f64,
    /// Per-coordinate variance multiplier `c = 2ε_t/M` (times the noise scale).
    c: f64,
    mean: Vec<f64>,
}

fn step_moments(
    state: &SimplexState,
    batch: &MinibatchCounts,
    cfg: &SgmcmcConfig,
) -> Result<StepMoments> {
    check_dim(
        "SG-MCMC step counts vs state",
        state.dim(),
        batch.n_colon.len(),
    )?;
    cfg.validate()?;
    let v = state.dim() as f64;
    let eps = (state.step_index as f64).powf(-cfg.step_exponent);
    let rho_n = batch.rho * batch.n_total as f64;
    let m_new = (1.0 - eps) * state.m_estimate + eps * rho_n;
    if !(m_new > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "running M became {m_new}; the first minibatch is empty"
        )));
    }
    let h = eps / m_new;
    let total_rate = rho_n + cfg.eta * v;
    let mean = state
        .phi
        .iter()
        .zip(&batch.n_colon)
        .map(|(p, &n)| p + h * ((batch.rho * n as f64 + cfg.eta) - total_rate * p))
        .collect();
    Ok(StepMoments {
        m_new,
        c: cfg.noise_scale * 2.0 * h,
        mean,
    })
}

/// `d = max(floor, z)`, `e = d / 1ᵀd`, applied only when some coordinate is
/// not strictly positive.
fn into_simplex(mut z: Vec<f64>, floor: f64) -> Vec<f64> {
    if z.iter().all(|v| *v > 0.0) {
        return z;
    }
    z.iter_mut().for_each(|v| *v = v.max(floor));
    let total: f64 = z.iter().sum();
    z.iter_mut().for_each(|v| *v /= total);
    z
}

/// The Gaussian draw of the fast step before any clipping:
/// `y ∼ N(mean, c·diag φ_t)`, `z = y + (1 − 1ᵀy)φ_t`, so `1ᵀz = 1`.
/// Returns `z` and the updated `M`.
pub fn sgmcmc_fast_proposal<N: NoiseSource + ?Sized>(
    state: &SimplexState,
    batch: &MinibatchCounts,
    cfg: &SgmcmcConfig,
    noise: &mut N,
) -> Result<(Vec<f64>, f64)> {
    let StepMoments { m_new, c, mean } = step_moments(state, batch, cfg)?;
    let mut y = mean;
    for (yi, p) in y.iter_mut().zip(&state.phi) {
        *yi += (c * p).sqrt() * noise.standard_normal();
    }
    let gap = 1.0 - y.iter().sum::<f64>();
    for (yi, p) in y.iter_mut().zip(&state.phi) {
        *yi += gap * p;
    }
    Ok((y, m_new))
}

/// One fast step: the projected Gaussian draw, clipped into the simplex only
/// if a coordinate is not positive. `O(V)`.
pub fn sgmcmc_step_fast<N: NoiseSource + ?Sized>(
    state: &SimplexState,
    batch: &MinibatchCounts,
    cfg: &SgmcmcConfig,
    noise: &mut N,
) -> Result<SimplexState> {
    let (z, m_new) = sgmcmc_fast_proposal(state, batch, cfg, noise)?;
    Ok(SimplexState {
        phi: into_simplex(z, cfg.epsilon_floor),
        m_estimate: m_new,
        step_index: state.step_index + 1,
    })
}

/// One Gibbs-baseline step: `n_gibbs_iters` sweeps of single-site updates,
/// each coordinate drawn from its full conditional truncated to
/// `[0, 1 − Σ_{i≠v} φᵢ]`, starting from `φ_t`.
///
/// The Gaussian lives on `1ᵀφ = 1`, so one coordinate `p` is eliminated and
/// recovered as `1 − Σ_{i≠p} φᵢ`; the remaining coordinates have covariance
/// `c[diag(ϕ) − ϕϕᵀ]` whatever `p` is. We eliminate the largest coordinate
/// of `φ_t` and sweep the others in ascending order. With precision
/// `(1/c)[diag(1/ϕ) + 11ᵀ/φ_p]`, coordinate `v` has conditional mean
/// `m_v − ϕ_v/(ϕ_v + φ_p) · Σ_{i≠v,p}(xᵢ − mᵢ)` and variance
/// `c·ϕ_v φ_p/(ϕ_v + φ_p)`. Eliminating a tiny coordinate instead would shrink
/// every conditional to width `O(φ_p)` and freeze the scan.
pub fn sgmcmc_step_gibbs<N: NoiseSource + ?Sized>(
    state: &SimplexState,
    batch: &MinibatchCounts,
    cfg: &SgmcmcConfig,
    n_gibbs_iters: usize,
    noise: &mut N,
) -> Result<SimplexState> {
    if n_gibbs_iters == 0 {
        return Err(Error::InvalidArgument(
            "at least one Gibbs sweep is required".into(),
        ));
    }
    let StepMoments { m_new, c, mean } = step_moments(state, batch, cfg)?;
    let phi = &state.phi;
    let pivot = (0..phi.len()).fold(0, |best, i| if phi[i] > phi[best] { i } else { best });
    let phi_p = phi[pivot];
    let mut x = phi.clone();
    for _ in 0..n_gibbs_iters {
        // Fresh sums each sweep keep round-off from accumulating.
        let (mut dev, mut total) = (0.0, 0.0);
        for i in (0..x.len()).filter(|&i| i != pivot) {
            dev += x[i] - mean[i];
            total += x[i];
        }
        for v in (0..x.len()).filter(|&v| v != pivot) {
            let dev_others = dev - (x[v] - mean[v]);
            let hi = 1.0 - (total - x[v]);
            let denom = phi[v] + phi_p;
            let (cond_mean, cond_var) = (
                mean[v] - phi[v] / denom * dev_others,
                c * phi[v] * phi_p / denom,
            );
            let new = if hi <= 0.0 {
                0.0
            } else if cond_var > 0.0 {
                truncated_normal_sample(cond_mean, cond_var.sqrt(), 0.0, hi, noise)?
            } else {
                cond_mean.clamp(0.0, hi)
            };
            dev += new - x[v];
            total += new - x[v];
            x[v] = new;
        }
    }
    x[pivot] = 0.0;
    x[pivot] = 1.0 - x.iter().sum::<f64>();
    Ok(SimplexState {
        phi: into_simplex(x, cfg.epsilon_floor),
        m_estimate: m_new,
        step_index: state.step_index + 1,
    })
}

/// Standard normal CDF, accurate in the lower tail.
fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile, accurate for small `u`.
fn std_normal_quantile(u: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u)
}

/// Half-width (in standard deviations) of the window used when the CDF mass
/// of the interval underflows.
const TAIL_CLIP: f64 = 40.0;

/// Draws from `N(mean, sd²)` truncated to `[lo, hi]` by inverting the CDF.
/// Intervals entirely in the upper tail are reflected into the lower tail,
/// where the CDF keeps full relative precision. If the interval's mass
/// underflows, returns the midpoint of the interval clipped to `mean ± 40 sd`.
pub fn truncated_normal_sample<N: NoiseSource + ?Sized>(
    mean: f64,
    sd: f64,
    lo: f64,
    hi: f64,
    noise: &mut N,
) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "empty interval [{lo}, {hi}]"
        )));
    }
    if !(sd > 0.0) || !sd.is_finite() || !mean.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need finite mean and sd > 0, got ({mean}, {sd})"
        )));
    }
    let (mut a, mut b) = ((lo - mean) / sd, (hi - mean) / sd);
    let reflect = a > 0.0;
    if reflect {
        (a, b) = (-b, -a);
    }
    let (pa, pb) = (std_normal_cdf(a), std_normal_cdf(b));
    let width = pb - pa;
    let z = if width >= 1e-300 {
        std_normal_quantile(pa + noise.uniform() * width).clamp(a, b)
    } else {
        let (ca, cb) = (a.max(-TAIL_CLIP), b.min(TAIL_CLIP));
        if ca <= cb {
            0.5 * (ca + cb)
        } else if b < -TAIL_CLIP {
            b
        } else {
            a
        }
    };
    let z = if reflect { -z } else { z };
    Ok((mean + sd * z).clamp(lo, hi))
}

/// `‖a − b‖₂`.
pub fn residual_error(phi_est: &[f64], phi_ref: &[f64]) -> Result<f64> {
    check_dim("residual_error", phi_ref.len(), phi_est.len())?;
    Ok(phi_est
        .iter()
        .zip(phi_ref)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// Sparse word counts of one document: `(coordinate, count)` pairs with
/// positive counts, in ascending coordinate order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    entries: Vec<(usize, u64)>,
}

impl Document {
    /// Builds a document from a dense count vector.
    pub fn from_dense(counts: &[u64]) -> Self {
        Self {
            entries: counts
                .iter()
                .enumerate()
                .filter(|(_, c)| **c > 0)
                .map(|(i, c)| (i, *c))
                .collect(),
        }
    }

    pub fn entries(&self) -> &[(usize, u64)] {
        &self.entries
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|(_, c)| c).sum()
    }
}

/// A synthetic corpus together with the probability vector that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub v: usize,
    pub true_phi: Vec<f64>,
    pub docs: Vec<Document>,
}

/// `f ∼ Uniform(0,1)^V` with `n_spike` random coordinates reset to
/// `spike_value`, `φ = f/1ᵀf`; document `j` has `n_j ∼ Pois(poisson_mean)`
/// words drawn from `φ`. Each document uses its own seed derived from `rng`,
/// so documents are independent of generation order.
pub fn generate_synthetic_corpus(
    v: usize,
    n_docs: usize,
    n_spike: usize,
    spike_value: f64,
    poisson_mean: f64,
    rng: &mut RngState,
) -> Result<Corpus> {
    if v < 2 || n_spike >= v {
        return Err(Error::InvalidArgument(format!(
            "need 2 ≤ V and n_spike < V, got V = {v}, n_spike = {n_spike}"
        )));
    }
    if n_spike > 0 && (!(spike_value > 0.0) || !spike_value.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "spike value must be positive, got {spike_value}"
        )));
    }
    let poisson = Poisson::new(poisson_mean)
        .map_err(|e| Error::InvalidArgument(format!("poisson mean {poisson_mean}: {e}")))?;
    let mut f: Vec<f64> = (0..v).map(|_| rng.uniform()).collect();
    let mut idx: Vec<usize> = (0..v).collect();
    idx.shuffle(rng.rng_mut());
    for &i in &idx[..n_spike] {
        f[i] = spike_value;
    }
    let total: f64 = f.iter().sum();
    let true_phi: Vec<f64> = f.iter().map(|x| x / total).collect();

    let mut cdf = Vec::with_capacity(v);
    let mut acc = 0.0;
    for p in &true_phi {
        acc += p;
        cdf.push(acc);
    }
    let base = rng.rng_mut().random::<u64>();
    let docs = (0..n_docs)
        .map(|j| {
            let mut doc_rng = RngState::derived(base, j as u64);
            let n = poisson.sample(doc_rng.rng_mut()) as u64;
            let mut counts = vec![0u64; v];
            for _ in 0..n {
                let u = doc_rng.uniform() * acc;
                let i = cdf.partition_point(|c| *c < u).min(v - 1);
                counts[i] += 1;
            }
            Document::from_dense(&counts)
        })
        .collect();
    Ok(Corpus { v, true_phi, docs })
}

/// `(Σⱼ nⱼ + η) / (Σⱼ n_{·j} + ηV)`.
pub fn batch_posterior_mean(docs: &[Document], v: usize, eta: f64) -> Result<Vec<f64>> {
    if docs.is_empty() {
        return Err(Error::InvalidArgument(
            "batch posterior mean needs at least one document".into(),
        ));
    }
    let counts = MinibatchCounts::from_documents(v, docs, 1.0)?;
    let denom = counts.n_total as f64 + eta * v as f64;
    Ok(counts
        .n_colon
        .iter()
        .map(|&n| (n as f64 + eta) / denom)
        .collect())
}

/// Which update a chain uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepMethod {
    Fast,
    Gibbs { sweeps: usize },
}

impl StepMethod {
    pub fn label(&self) -> String {
        match self {
            StepMethod::Fast => "sgmcmc-fast".into(),
            StepMethod::Gibbs { sweeps } => format!("sgmcmc-gibbs-{sweeps}"),
        }
    }
}

/// One point of a residual trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    /// 1-based minibatch index.
    pub minibatch: usize,
    /// Wall time of this step alone.
    pub step_ms: f64,
    /// Cumulative wall time of all steps so far (residual evaluation excluded).
    pub elapsed_ms: f64,
    /// `‖φ_t − φ_true‖₂`.
    pub residual: f64,
}

/// Document order for `epoch`: a permutation derived from `seed`, identical
/// for every method run with the same seed.
pub fn epoch_order(n_docs: usize, seed: u64, epoch: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n_docs).collect();
    order.shuffle(RngState::derived(seed, epoch).rng_mut());
    order
}

/// Runs one chain for `n_minibatches` steps from the uniform point, recording
/// the residual against the generating `φ` after every step.
pub fn run_chain(
    corpus: &Corpus,
    cfg: &SgmcmcConfig,
    method: StepMethod,
    n_minibatches: usize,
) -> Result<Vec<TracePoint>> {
    cfg.validate()?;
    if corpus.docs.is_empty() {
        return Err(Error::InvalidArgument("corpus has no documents".into()));
    }
    let n_docs = corpus.docs.len();
    let rho = n_docs as f64 / cfg.minibatch_size as f64;
    let mut noise = RngState::new(derive_seed(cfg.seed, u64::MAX));
    let mut state = SimplexState::uniform(corpus.v, 1.0)?;
    let mut trace = Vec::with_capacity(n_minibatches);
    let mut order = Vec::new();
    let mut cursor = 0usize;
    let mut epoch = 0u64;
    let mut elapsed_ms = 0.0;
    for t in 1..=n_minibatches {
        let mut batch_docs = Vec::with_capacity(cfg.minibatch_size);
        while batch_docs.len() < cfg.minibatch_size {
            if cursor == order.len() {
                order = epoch_order(n_docs, cfg.seed, epoch);
                epoch += 1;
                cursor = 0;
            }
            batch_docs.push(&corpus.docs[order[cursor]]);
            cursor += 1;
        }
        let batch = MinibatchCounts::from_documents(corpus.v, batch_docs, rho)?;
        let start = Instant::now();
        state = match method {
            StepMethod::Fast => sgmcmc_step_fast(&state, &batch, cfg, &mut noise)?,
            StepMethod::Gibbs { sweeps } => {
                sgmcmc_step_gibbs(&state, &batch, cfg, sweeps, &mut noise)?
            }
        };
        let step_ms = start.elapsed().as_secs_f64() * 1e3;
        elapsed_ms += step_ms;
        trace.push(TracePoint {
            minibatch: t,
            step_ms,
            elapsed_ms,
            residual: residual_error(&state.phi, &corpus.true_phi)?,
        });
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::ZeroNoise;

    fn cfg() -> SgmcmcConfig {
        SgmcmcConfig::new(0.1, 10, 1)
    }

    fn assert_simplex(phi: &[f64]) {
        assert!((phi.iter().sum::<f64>() - 1.0).abs() <= SIMPLEX_SUM_TOLERANCE);
        assert!(phi.iter().all(|p| *p > 0.0));
    }

    #[test]
    fn state_validation() {
        assert!(SimplexState::new(vec![0.5, 0.5], 1.0).is_ok());
        assert!(SimplexState::new(vec![1.0, 0.0], 1.0).is_err());
        assert!(SimplexState::new(vec![0.5, 0.6], 1.0).is_err());
        assert!(SimplexState::new(vec![1.0], 1.0).is_err());
        assert!(SimplexState::new(vec![0.5, 0.5], 0.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        for bad in [0.5, 1.01] {
            let c = SgmcmcConfig {
                step_exponent: bad,
                ..cfg()
            };
            assert!(c.validate().is_err());
        }
        let c = SgmcmcConfig { eta: 0.0, ..cfg() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn fixed_point_without_gradient_or_noise() {
        // With counts proportional to φ and η·V matching, the drift vanishes.
        let phi = vec![0.25, 0.25, 0.5];
        let state = SimplexState::new(phi.clone(), 40.0).unwrap();
        let batch = MinibatchCounts::new(vec![10, 10, 20], 1.0).unwrap();
        let c = SgmcmcConfig {
            eta: 1e-300,
            noise_scale: 0.0,
            ..cfg()
        };
        let next = sgmcmc_step_fast(&state, &batch, &c, &mut ZeroNoise).unwrap();
        for (a, b) in next.phi().iter().zip(&phi) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(next.step_index(), 2);
    }

    #[test]
    fn positive_draw_is_returned_unclipped() {
        let state = SimplexState::uniform(4, 1.0).unwrap();
        let batch = MinibatchCounts::new(vec![3, 1, 0, 2], 2.0).unwrap();
        let c = cfg();
        let mut a = RngState::new(5);
        let (z, m) = sgmcmc_fast_proposal(&state, &batch, &c, &mut a.clone()).unwrap();
        assert!(z.iter().all(|v| *v > 0.0));
        let next = sgmcmc_step_fast(&state, &batch, &c, &mut a).unwrap();
        assert_eq!(next.phi(), &z[..]);
        assert_eq!(next.m_estimate(), m);
    }

    #[test]
    fn m_update_is_convex_combination() {
        let mut state = SimplexState::uniform(3, 7.0).unwrap();
        state.step_index = 4;
        let batch = MinibatchCounts::new(vec![1, 2, 3], 2.0).unwrap();
        let next = sgmcmc_step_fast(&state, &batch, &cfg(), &mut ZeroNoise).unwrap();
        let eps = 4f64.powf(-0.99);
        assert!((next.m_estimate() - ((1.0 - eps) * 7.0 + eps * 12.0)).abs() < 1e-12);
        assert!(next.m_estimate() > 7.0 && next.m_estimate() < 12.0);
    }

    #[test]
    fn clipping_floors_and_renormalizes() {
        let e = into_simplex(vec![0.7, -0.1, 0.4], 1e-10);
        assert_simplex(&e);
        let total = 0.7 + 1e-10 + 0.4;
        assert!((e[1] - 1e-10 / total).abs() < 1e-24);
        assert!((e[0] - 0.7 / total).abs() < 1e-15);
    }

    #[test]
    fn gibbs_without_noise_returns_clipped_mean() {
        let state = SimplexState::new(vec![0.5, 0.5], 1.0).unwrap();
        let c = SgmcmcConfig {
            noise_scale: 0.0,
            ..cfg()
        };
        // First step: ε = 1, M = ρ n = 10, mean₁ = (ρ n₁ + η)/M − (ηV/M)φ₁ = 0.9 + 0.01 − 0.01.
        let batch = MinibatchCounts::new(vec![9, 1], 1.0).unwrap();
        let next = sgmcmc_step_gibbs(&state, &batch, &c, 1, &mut ZeroNoise).unwrap();
        assert!((next.phi()[0] - 0.9).abs() < 1e-15);
        // All mass on the first coordinate pushes the mean past 1: clipped.
        let batch = MinibatchCounts::new(vec![10, 0], 1.0).unwrap();
        let c = SgmcmcConfig { eta: 1e-3, ..c };
        let next = sgmcmc_step_gibbs(&state, &batch, &c, 1, &mut ZeroNoise).unwrap();
        assert_simplex(next.phi());
        assert!(next.phi()[1] <= 1e-9);
    }

    #[test]
    fn gibbs_requires_a_sweep() {
        let state = SimplexState::uniform(3, 1.0).unwrap();
        let batch = MinibatchCounts::new(vec![1, 1, 1], 1.0).unwrap();
        assert!(sgmcmc_step_gibbs(&state, &batch, &cfg(), 0, &mut ZeroNoise).is_err());
    }

    #[test]
    fn truncated_normal_median_and_support() {
        // ZeroNoise gives u = ½: the median of the truncated law.
        let x = truncated_normal_sample(0.0, 1.0, -1.0, 1.0, &mut ZeroNoise).unwrap();
        assert!(x.abs() < 1e-12);
        let mut rng = RngState::new(2);
        for _ in 0..1000 {
            let x = truncated_normal_sample(5.0, 2.0, 4.0, 6.0, &mut rng).unwrap();
            assert!((4.0..=6.0).contains(&x));
        }
        assert!(truncated_normal_sample(0.0, 1.0, 1.0, 1.0, &mut rng).is_err());
        assert!(truncated_normal_sample(0.0, 0.0, 0.0, 1.0, &mut rng).is_err());
    }

    #[test]
    fn truncated_normal_far_tails() {
        // Upper tail reflected: the median of N(0,1) on [30, 31] is near 30.02.
        let x = truncated_normal_sample(0.0, 1.0, 30.0, 31.0, &mut ZeroNoise).unwrap();
        assert!((30.0..30.1).contains(&x), "{x}");
        let y = truncated_normal_sample(0.0, 1.0, -31.0, -30.0, &mut ZeroNoise).unwrap();
        assert!((x + y).abs() < 1e-9);
        // Mass underflows entirely: clipped-interval midpoint.
        let z = truncated_normal_sample(0.0, 1.0, 50.0, 60.0, &mut ZeroNoise).unwrap();
        assert_eq!(z, 50.0);
        let w = truncated_normal_sample(0.0, 1.0, 39.0, 1e10, &mut ZeroNoise).unwrap();
        assert!((39.0..=40.0).contains(&w));
    }

    #[test]
    fn residual_examples() {
        assert_eq!(residual_error(&[0.2, 0.8], &[0.2, 0.8]).unwrap(), 0.0);
        assert_eq!(residual_error(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert!(residual_error(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn posterior_mean_by_hand() {
        let docs = [Document::from_dense(&[1, 0])];
        let m = batch_posterior_mean(&docs, 2, 1.0).unwrap();
        assert!((m[0] - 2.0 / 3.0).abs() < 1e-15 && (m[1] - 1.0 / 3.0).abs() < 1e-15);
        let empty = [Document::from_dense(&[0, 0, 0])];
        assert_eq!(
            batch_posterior_mean(&empty, 3, 1.0).unwrap(),
            vec![1.0 / 3.0; 3]
        );
        assert!(batch_posterior_mean(&[], 3, 1.0).is_err());
    }

    #[test]
    fn corpus_shape_and_validation() {
        let mut rng = RngState::new(3);
        let c = generate_synthetic_corpus(50, 20, 5, 100.0, 50.0, &mut rng).unwrap();
        assert_eq!(c.docs.len(), 20);
        assert!((c.true_phi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let spikes = c
            .true_phi
            .iter()
            .filter(|p| **p > 100.0 / (100.0 * 5.0 + 45.0) * 0.99)
            .count();
        assert_eq!(spikes, 5);
        assert!(generate_synthetic_corpus(5, 1, 5, 100.0, 50.0, &mut rng).is_err());
        assert!(generate_synthetic_corpus(5, 1, 1, 100.0, -1.0, &mut rng).is_err());
    }

    #[test]
    fn epoch_order_is_a_reproducible_permutation() {
        let a = epoch_order(100, 9, 0);
        assert_eq!(a, epoch_order(100, 9, 0));
        assert_ne!(a, epoch_order(100, 9, 1));
        let mut s = a.clone();
        s.sort_unstable();
        assert_eq!(s, (0..100).collect::<Vec<_>>());
    }
}
