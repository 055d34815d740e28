//! Residual traces of the simplex SG-MCMC samplers on one synthetic corpus.

use std::io::Write;

use truncmvn::rng::RngState;
use truncmvn::sgmcmc::{
    batch_posterior_mean, generate_synthetic_corpus, residual_error, run_chain, SgmcmcConfig,
    StepMethod, TracePoint,
};

use crate::error::{CliError, Result};

pub const SGMCMC_HEADER: &str = "method,minibatch,elapsed_ms,step_ms,residual,floor";

#[derive(Debug, Clone, PartialEq)]
pub struct SgmcmcSettings {
    pub seed: u64,
    /// Vocabulary size `V`.
    pub v: usize,
    pub docs: usize,
    pub minibatches: usize,
    pub minibatch_size: usize,
    pub eta: f64,
    /// Sweeps per step for each Gibbs chain.
    pub gibbs_sweeps: Vec<usize>,
    pub n_spike: usize,
    pub spike_value: f64,
    pub poisson_mean: f64,
}

impl SgmcmcSettings {
    /// `V = 500`, `N = 5000`, 300 minibatches of 10 documents, `η = 0.1`,
    /// 40 spikes of height 100, `Pois(50)` document lengths.
    pub fn desk(seed: u64) -> Self {
        Self {
            seed,
            v: 500,
            docs: 5000,
            minibatches: 300,
            minibatch_size: 10,
            eta: 0.1,
            gibbs_sweeps: vec![1, 5, 10],
            n_spike: 40,
            spike_value: 100.0,
            poisson_mean: 50.0,
        }
    }

    /// `V = 2000`, `N = 10⁴`, otherwise as [`SgmcmcSettings::desk`].
    pub fn paper(seed: u64) -> Self {
        Self {
            v: 2000,
            docs: 10_000,
            minibatches: 1000,
            ..Self::desk(seed)
        }
    }
}

/// One trace per method plus the residual of the batch posterior mean.
#[derive(Debug, Clone, PartialEq)]
pub struct SgmcmcRun {
    pub floor: f64,
    pub traces: Vec<(String, Vec<TracePoint>)>,
}

impl SgmcmcRun {
    pub fn trace(&self, method: &str) -> Option<&[TracePoint]> {
        self.traces
            .iter()
            .find(|(m, _)| m == method)
            .map(|(_, t)| t.as_slice())
    }
}

/// Runs the fast chain and one Gibbs chain per sweep count on the same
/// corpus and document order.
pub fn run_sgmcmc(s: &SgmcmcSettings) -> Result<SgmcmcRun> {
    if s.gibbs_sweeps.contains(&0) {
        return Err(CliError::InvalidArgument(
            "Gibbs sweep counts must be positive".into(),
        ));
    }
    let corpus = generate_synthetic_corpus(
        s.v,
        s.docs,
        s.n_spike,
        s.spike_value,
        s.poisson_mean,
        &mut RngState::new(s.seed),
    )?;
    let floor = residual_error(
        &batch_posterior_mean(&corpus.docs, s.v, s.eta)?,
        &corpus.true_phi,
    )?;
    let cfg = SgmcmcConfig::new(s.eta, s.minibatch_size, s.seed);
    let methods = std::iter::once(StepMethod::Fast).chain(
        s.gibbs_sweeps
            .iter()
            .map(|&sweeps| StepMethod::Gibbs { sweeps }),
    );
    let traces = methods
        .map(|m| Ok((m.label(), run_chain(&corpus, &cfg, m, s.minibatches)?)))
        .collect::<Result<_>>()?;
    Ok(SgmcmcRun { floor, traces })
}

/// Long-format CSV; every row repeats the floor so each file is
/// self-contained. Zero minibatches produce the header alone.
pub fn write_sgmcmc_csv<W: Write>(out: W, run: &SgmcmcRun) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(SGMCMC_HEADER.split(','))?;
    for (method, trace) in &run.traces {
        for p in trace {
            w.write_record([
                method.clone(),
                p.minibatch.to_string(),
                p.elapsed_ms.to_string(),
                p.step_ms.to_string(),
                p.residual.to_string(),
                run.floor.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
