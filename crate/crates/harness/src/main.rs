use clap::{Parser, Subcommand};
use ftsreg::cli::{
    cmd_autocov, cmd_ingest, cmd_locreg, cmd_mean, cmd_run, cmd_simulate, PipelineArgs,
};
use ftsreg::config::{parse_lag_cap, parse_list, parse_pairs};
use ftsreg::error::Result;
use ftsreg::ingest::IngestSchema;
use std::path::PathBuf;

/// Adaptive estimation of mean and autocovariance functions for functional
/// time series observed discretely with noise.
#[derive(Parser)]
#[command(name = "ftsreg", version, about)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct SmoothingOpts {
    /// Exponent of the regularity window rule Δ = exp(-(log λ)^γ).
    #[arg(long, default_value_t = 1.0 / 3.0)]
    gamma: f64,
    /// Number of bandwidths in the risk-minimization grid.
    #[arg(long, default_value_t = 51)]
    grid_count: usize,
    /// Number of presmoothing cross-validation candidates.
    #[arg(long, default_value_t = 15)]
    cv_count: usize,
    /// Curves used by the cross-validation.
    #[arg(long, default_value_t = 50)]
    cv_subsample: usize,
    /// Lag truncation: rule, full or an integer.
    #[arg(long, default_value = "rule")]
    lag_cap: String,
    /// Seed of the cross-validation subsampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SmoothingOpts {
    fn pipeline(&self) -> Result<PipelineArgs> {
        Ok(PipelineArgs {
            gamma: self.gamma,
            grid_count: self.grid_count,
            cv_count: self.cv_count,
            cv_subsample: self.cv_subsample,
            lag_cap: parse_lag_cap(&self.lag_cap)?,
            seed: self.seed,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a functional time series and write sample + truth files.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed from the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate local regularity (with derivative-order search).
    Locreg {
        #[arg(long)]
        sample: PathBuf,
        /// Comma-separated evaluation points, e.g. 0.2,0.4,0.7.
        #[arg(long)]
        points: String,
        #[arg(long, default_value_t = 3)]
        max_order: usize,
        #[command(flatten)]
        smoothing: SmoothingOpts,
        #[arg(long)]
        out: PathBuf,
        /// Dump cross-validation scores (b, cv_error) to this file.
        #[arg(long)]
        cv_dump: Option<PathBuf>,
    },
    /// Adaptive mean function estimation.
    Mean {
        #[arg(long)]
        sample: PathBuf,
        #[arg(long)]
        points: String,
        /// Require (and exploit) a common design.
        #[arg(long)]
        common_design: bool,
        #[arg(long, default_value_t = 0.95)]
        ci_level: f64,
        /// Also emit undersmoothed components with h = (h*)^1.1.
        #[arg(long)]
        qq: bool,
        /// Exponent of the undersmoothing rule used with --qq.
        #[arg(long, default_value_t = 1.1)]
        qq_exponent: f64,
        #[command(flatten)]
        smoothing: SmoothingOpts,
        #[arg(long)]
        out: PathBuf,
        /// Dump the per-bandwidth risk decomposition to this file.
        #[arg(long)]
        risk_out: Option<PathBuf>,
        #[arg(long)]
        cv_dump: Option<PathBuf>,
    },
    /// Adaptive lag-ℓ cross-product / autocovariance estimation.
    Autocov {
        #[arg(long)]
        sample: PathBuf,
        /// Comma-separated coordinate pairs, e.g. 0.2:0.4,0.7:0.8.
        #[arg(long)]
        pairs: String,
        #[arg(long, default_value_t = 1)]
        lag: usize,
        #[arg(long, default_value_t = 0.95)]
        ci_level: f64,
        /// Reproduce the printed variance-weight location.
        #[arg(long)]
        verbatim_variance: bool,
        /// Center the second-moment plug-in.
        #[arg(long)]
        centered_nu2: bool,
        #[command(flatten)]
        smoothing: SmoothingOpts,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a full Monte Carlo experiment from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed from the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert a common-design CSV into the long sample layout.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        /// Input schema: long or wide.
        #[arg(long, default_value = "wide")]
        schema: String,
        /// Map design points onto (0, 1].
        #[arg(long)]
        normalize_domain: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, seed, out } => cmd_simulate(&config, seed, &out),
        Command::Locreg {
            sample,
            points,
            max_order,
            smoothing,
            out,
            cv_dump,
        } => {
            let pts = parse_list(&points)?;
            cmd_locreg(
                &sample,
                &pts,
                max_order,
                &smoothing.pipeline()?,
                &out,
                cv_dump.as_ref(),
            )
        }
        Command::Mean {
            sample,
            points,
            common_design,
            ci_level,
            qq,
            qq_exponent,
            smoothing,
            out,
            risk_out,
            cv_dump,
        } => {
            let pts = parse_list(&points)?;
            cmd_mean(
                &sample,
                &pts,
                common_design,
                ci_level,
                qq.then_some(qq_exponent),
                &smoothing.pipeline()?,
                &out,
                risk_out.as_ref(),
                cv_dump.as_ref(),
            )
        }
        Command::Autocov {
            sample,
            pairs,
            lag,
            ci_level,
            verbatim_variance,
            centered_nu2,
            smoothing,
            out,
        } => {
            let prs = parse_pairs(&pairs)?;
            cmd_autocov(
                &sample,
                &prs,
                lag,
                ci_level,
                verbatim_variance,
                centered_nu2,
                &smoothing.pipeline()?,
                &out,
            )
        }
        Command::Run { config, seed, out } => cmd_run(&config, seed, &out),
        Command::Ingest {
            input,
            schema,
            normalize_domain,
            out,
        } => {
            let schema = match schema.as_str() {
                "long" => IngestSchema::Long,
                "wide" => IngestSchema::Wide,
                other => {
                    return Err(ftsreg::HarnessError::Config(format!(
                        "schema must be long or wide, got {other:?}"
                    )))
                }
            };
            cmd_ingest(&input, schema, normalize_domain, &out)
        }
    }
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    let run = |cli: Cli| -> Result<()> {
        match cli.threads {
            Some(k) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build()
                    .map_err(|e| ftsreg::HarnessError::Config(e.to_string()))?;
                pool.install(|| dispatch(cli))
            }
            None => dispatch(cli),
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
