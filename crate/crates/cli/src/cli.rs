//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use truncmvn::instances::CovKind;

use crate::bench::{
    bench_hyperplane, bench_simplex_cov, bench_structured_cov, bench_structured_prec,
    ConstraintCount, SweepSettings,
};
use crate::config::{
    hyperplane_defaults, pick, simplex_cov_defaults, structured_cov_defaults,
    structured_prec_defaults, usage, CovChoice, CovSweep, FileConfig, SweepDefaults, DEFAULT_K2,
    DEFAULT_REPETITIONS, DEFAULT_SEED, VALIDATE_SAMPLES, VALIDATE_TRIALS,
};
use crate::error::{CliError, Result};
use crate::plot::render_csv;
use crate::record::write_bench_csv;
use crate::sgmcmc_run::{run_sgmcmc, write_sgmcmc_csv, SgmcmcSettings};
use crate::validation::{run_validation, ValidateSettings};

#[derive(Debug, Parser)]
#[command(
    name = "truncmvn",
    version,
    about = "Benchmarks and statistical checks for the truncmvn samplers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time the transform and projection samplers for hyperplane truncation.
    BenchHyperplane {
        #[command(flatten)]
        base: BaseArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        /// Number of constraints at every grid point [default: 20].
        #[arg(long, conflicts_with = "k2_fraction")]
        k2: Option<usize>,
        /// Number of constraints as a fraction of k.
        #[arg(long)]
        k2_fraction: Option<f64>,
    },
    /// Time the structured-covariance sampler against the Cholesky baseline.
    BenchStructuredCov {
        #[command(flatten)]
        base: BaseArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        /// `k2` sweeps k₂ at fixed k₁; `simplex` sweeps k for the
        /// diagonal-minus-rank-one covariance [default: k2].
        #[arg(long, value_enum)]
        sweep_kind: Option<CovSweep>,
        /// Fixed k₁ for the k₂ sweep.
        #[arg(long)]
        k1: Option<usize>,
    },
    /// Time the structured-precision sampler against the Cholesky baseline.
    BenchStructuredPrec {
        #[command(flatten)]
        base: BaseArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        /// Fixed number of observations n.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run the moment and KS battery for every sampler pair; exits nonzero
    /// on any failure.
    Validate {
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        /// Restrict the pairs that accept either covariance kind.
        #[arg(long, value_enum)]
        cov: Option<CovChoice>,
        #[arg(long, hide = true)]
        corrupt: bool,
    },
    /// Residual traces of the simplex SG-MCMC samplers on a synthetic corpus.
    Sgmcmc {
        #[command(flatten)]
        base: BaseArgs,
        /// Vocabulary size V.
        #[arg(long)]
        vocab: Option<usize>,
        #[arg(long)]
        docs: Option<usize>,
        #[arg(long)]
        minibatches: Option<usize>,
        #[arg(long)]
        minibatch_size: Option<usize>,
        /// Dirichlet prior concentration.
        #[arg(long)]
        eta: Option<f64>,
        /// Number of coordinates of the generating vector set to the spike
        /// height before normalizing.
        #[arg(long)]
        spikes: Option<usize>,
    },
    /// Render SVG charts from a benchmark or SG-MCMC CSV.
    Plot {
        csv: PathBuf,
        /// Output directory [default: the CSV's directory].
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct BaseArgs {
    /// JSON file with defaults for any flag; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Use the full-size grids instead of the desk-scale ones.
    #[arg(long)]
    pub paper_scale: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub trials: Option<usize>,
    /// Draws per measurement.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Comma-separated values of the swept dimension.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub cov: Option<CovChoice>,
    /// Timed repetitions per measurement (median reported, at least 3).
    #[arg(long)]
    pub repetitions: Option<usize>,
    /// Time the draws only, excluding sampler setup.
    #[arg(long)]
    pub draws_only: bool,
}

struct Base {
    file: FileConfig,
    seed: u64,
    out: Option<PathBuf>,
    paper_scale: bool,
}

fn resolve_base(b: BaseArgs) -> Result<Base> {
    let file = match &b.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    Ok(Base {
        seed: pick(b.seed, file.seed, DEFAULT_SEED),
        out: b.out.or_else(|| file.out.clone()),
        paper_scale: b.paper_scale || file.paper_scale.unwrap_or(false),
        file,
    })
}

fn resolve_sweep(
    base: &Base,
    a: SweepArgs,
    d: SweepDefaults,
    default_cov: CovKind,
) -> SweepSettings {
    let f = &base.file;
    SweepSettings {
        seed: base.seed,
        trials: pick(a.trials, f.trials, d.trials),
        samples: pick(a.samples, f.samples, d.samples),
        grid: pick(a.grid, f.grid.clone(), d.grid),
        cov: a.cov.or(f.cov).map(CovKind::from).unwrap_or(default_cov),
        repetitions: pick(a.repetitions, f.repetitions, DEFAULT_REPETITIONS),
        draws_only: a.draws_only || f.draws_only.unwrap_or(false),
    }
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(())
}

/// Sends `write` to the output file, or to stdout when none is configured.
fn emit(out: &Option<PathBuf>, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            create_parent(path)?;
            let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
            write(&mut f)?;
            f.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => e.exit(),
        _ => usage(e.to_string()),
    })?;
    execute(cli.command)
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::BenchHyperplane {
            base,
            sweep,
            k2,
            k2_fraction,
        } => {
            let base = resolve_base(base)?;
            let s = resolve_sweep(
                &base,
                sweep,
                hyperplane_defaults(base.paper_scale),
                CovKind::Diagonal,
            );
            let count = match (k2, k2_fraction, base.file.k2, base.file.k2_fraction) {
                (Some(k2), _, _, _) => ConstraintCount::Fixed(k2),
                (None, Some(f), _, _) => ConstraintCount::Fraction(f),
                (None, None, Some(_), Some(_)) => {
                    return Err(usage("config sets both k2 and k2_fraction"))
                }
                (None, None, Some(k2), None) => ConstraintCount::Fixed(k2),
                (None, None, None, Some(f)) => ConstraintCount::Fraction(f),
                (None, None, None, None) => ConstraintCount::Fixed(DEFAULT_K2),
            };
            let records = bench_hyperplane(&s, count)?;
            emit(&base.out, |w| write_bench_csv(w, &records))
        }
        Command::BenchStructuredCov {
            base,
            sweep,
            sweep_kind,
            k1,
        } => {
            let base = resolve_base(base)?;
            let records = match pick(sweep_kind, base.file.sweep, CovSweep::K2) {
                CovSweep::K2 => {
                    let (k1_default, d) = structured_cov_defaults(base.paper_scale);
                    let s = resolve_sweep(&base, sweep, d, CovKind::Diagonal);
                    bench_structured_cov(&s, pick(k1, base.file.k1, k1_default))?
                }
                CovSweep::Simplex => {
                    let s = resolve_sweep(
                        &base,
                        sweep,
                        simplex_cov_defaults(base.paper_scale),
                        CovKind::Diagonal,
                    );
                    bench_simplex_cov(&s)?
                }
            };
            emit(&base.out, |w| write_bench_csv(w, &records))
        }
        Command::BenchStructuredPrec { base, sweep, n } => {
            let base = resolve_base(base)?;
            let (n_default, d) = structured_prec_defaults(base.paper_scale);
            let s = resolve_sweep(&base, sweep, d, CovKind::Diagonal);
            let records = bench_structured_prec(&s, pick(n, base.file.n, n_default))?;
            emit(&base.out, |w| write_bench_csv(w, &records))
        }
        Command::Validate {
            base,
            trials,
            samples,
            cov,
            corrupt,
        } => {
            let base = resolve_base(base)?;
            let cov_kinds = match cov.or(base.file.cov) {
                Some(c) => vec![CovKind::from(c)],
                None => vec![CovKind::Diagonal, CovKind::Dense],
            };
            let s = ValidateSettings {
                seed: base.seed,
                trials: pick(trials, base.file.trials, VALIDATE_TRIALS),
                samples: pick(samples, base.file.samples, VALIDATE_SAMPLES),
                cov_kinds,
                corrupt,
            };
            let report = run_validation(&s)?;
            let text = report.render();
            emit(&base.out, |w| Ok(w.write_all(text.as_bytes())?))?;
            if base.out.is_some() {
                print!("{text}");
            }
            if report.pass() {
                Ok(())
            } else {
                let failed = report.outcomes.iter().filter(|o| !o.pass()).count();
                Err(CliError::ValidationFailed(format!(
                    "{failed} of {} trials failed",
                    report.outcomes.len()
                )))
            }
        }
        Command::Sgmcmc {
            base,
            vocab,
            docs,
            minibatches,
            minibatch_size,
            eta,
            spikes,
        } => {
            let base = resolve_base(base)?;
            let f = &base.file;
            let d = if base.paper_scale {
                SgmcmcSettings::paper(base.seed)
            } else {
                SgmcmcSettings::desk(base.seed)
            };
            let s = SgmcmcSettings {
                v: pick(vocab, f.vocab, d.v),
                docs: pick(docs, f.docs, d.docs),
                minibatches: pick(minibatches, f.minibatches, d.minibatches),
                minibatch_size: pick(minibatch_size, f.minibatch_size, d.minibatch_size),
                eta: pick(eta, f.eta, d.eta),
                n_spike: pick(spikes, f.spikes, d.n_spike),
                ..d
            };
            let run = run_sgmcmc(&s)?;
            emit(&base.out, |w| write_sgmcmc_csv(w, &run))
        }
        Command::Plot { csv, out } => {
            let bytes = std::fs::read(&csv)?;
            let figures = render_csv(&bytes)?;
            let dir =
                out.unwrap_or_else(|| csv.parent().map(Path::to_path_buf).unwrap_or_default());
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(&dir)?;
            }
            for fig in figures {
                let path = dir.join(format!("{}.svg", fig.name));
                std::fs::write(&path, fig.svg)?;
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

/// Process exit status for an error: 2 for usage mistakes, 1 otherwise.
pub fn exit_code(e: &CliError) -> i32 {
    match e {
        CliError::InvalidArgument(_) | CliError::Config(_) => 2,
        _ => 1,
    }
}
