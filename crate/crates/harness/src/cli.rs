//! Subcommand implementations shared by the binary and the CLI tests.

use crate::config::{
    parse_design, parse_experiment_text, parse_kv, parse_sim, to_config_text, ExperimentSpec,
};
use crate::error::{HarnessError, Result};
use crate::experiment::{run_experiment, stream_seed};
use crate::ingest::{ingest_common_csv, IngestSchema};
use crate::report::emit_reports;
use ftsreg_core::csvio;
use ftsreg_core::domain::{BandwidthGrid, DesignKind};
use ftsreg_core::locreg::{
    delta_window, local_regularity, regularity_level_scaled, RegularityOptions,
};
use ftsreg_core::mean::{
    clt_components, common_design_profile, dependence_bound, mean_at, select_bandwidth,
    series_variance, smoothing_variance, LagCap, Regime,
};
use ftsreg_core::presmooth::{cv_scores, global_noise_variance, noise_variance, presmooth};
use ftsreg_core::simulate::{far1_generate, observe};
use ftsreg_core::stats::normal_quantile;
use ftsreg_core::{autocov, FunctionalSample64};
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

const SALT_OBS: u64 = 0xB2;

fn read_sample(path: &Path) -> Result<FunctionalSample64> {
    csvio::read_sample_path::<f64>(path).map_err(|e| HarnessError::Data(e.to_string()))
}

/// Shared smoothing options of the estimation subcommands.
#[derive(Debug, Clone)]
pub struct PipelineArgs {
    pub gamma: f64,
    pub grid_count: usize,
    pub cv_count: usize,
    pub cv_subsample: usize,
    pub lag_cap: LagCap,
    pub seed: u64,
}

impl Default for PipelineArgs {
    fn default() -> Self {
        Self {
            gamma: 1.0 / 3.0,
            grid_count: 51,
            cv_count: 15,
            cv_subsample: 50,
            lag_cap: LagCap::Rule,
            seed: 0,
        }
    }
}

struct Pipeline {
    delta: f64,
    bandwidth: f64,
    cv: Vec<(f64, f64)>,
    h_grid: BandwidthGrid<f64>,
}

fn prepare(sample: &FunctionalSample64, args: &PipelineArgs) -> Result<Pipeline> {
    let lambda_hat = sample.lambda_hat();
    let domain = sample.domain();
    let delta = delta_window(lambda_hat, args.gamma)?;
    let cv_grid = BandwidthGrid::geometric(
        (domain.length() / lambda_hat).min(domain.length() / 10.0),
        0.2 * domain.length(),
        args.cv_count,
        &domain,
    )?;
    let (bandwidth, cv) = cv_scores(sample, &cv_grid, args.cv_subsample, args.seed)?;
    let h_grid =
        BandwidthGrid::default_for(sample.n_curves(), lambda_hat, &domain, args.grid_count)?;
    Ok(Pipeline {
        delta,
        bandwidth,
        cv,
        h_grid,
    })
}

fn dump_cv(path: &Path, cv: &[(f64, f64)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "b,cv_error")?;
    for (b, e) in cv {
        writeln!(w, "{b},{e}")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SimManifest {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    config: String,
}

/// `simulate`: generate a functional time series and write the observed
/// sample, the latent truth paths and a manifest.
pub fn cmd_simulate(config: &Path, seed: Option<u64>, out: &Path) -> Result<()> {
    let text = std::fs::read_to_string(config)?;
    let map = parse_kv(&text)?;
    let mut sim = parse_sim(&map)?;
    let design = parse_design(&map)?;
    if let Some(s) = seed {
        sim.seed = s;
    }
    let latent = far1_generate(&sim)?;
    let sigma = sim.sigma;
    let sample = observe(
        &latent,
        design,
        sim.lambda,
        &move |_| sigma,
        stream_seed(sim.seed, 0, SALT_OBS),
    )?;
    std::fs::create_dir_all(out)?;
    let mut w = BufWriter::new(File::create(out.join("sample.csv"))?);
    csvio::write_sample_long(&mut w, &sample)?;
    let mut w = BufWriter::new(File::create(out.join("truth.csv"))?);
    csvio::write_latent(&mut w, &latent)?;
    let manifest = SimManifest {
        tool: "ftsreg",
        version: env!("CARGO_PKG_VERSION"),
        seed: sim.seed,
        config: text,
    };
    let mut w = BufWriter::new(File::create(out.join("manifest.json"))?);
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    writeln!(w)?;
    Ok(())
}

/// `locreg`: local regularity with derivative-order search at each point.
pub fn cmd_locreg(
    sample_path: &Path,
    points: &[f64],
    max_order: usize,
    args: &PipelineArgs,
    out: &Path,
    cv_dump: Option<&PathBuf>,
) -> Result<()> {
    let sample = read_sample(sample_path)?;
    let domain = sample.domain();
    let cv_grid = BandwidthGrid::geometric(
        (domain.length() / sample.lambda_hat()).min(domain.length() / 10.0),
        0.2 * domain.length(),
        args.cv_count,
        &domain,
    )?;
    if let Some(path) = cv_dump {
        let (_, cv) = cv_scores(&sample, &cv_grid, args.cv_subsample, args.seed)?;
        dump_cv(path, &cv)?;
    }
    let opts = RegularityOptions {
        gamma: args.gamma,
        max_order,
        cv_candidates: Some(cv_grid),
        cv_subsample_derivative: args.cv_subsample.min(20),
        seed: args.seed,
    };
    let mut w = BufWriter::new(File::create(out)?);
    writeln!(w, "t,delta,order,H_hat,L2_hat,alpha_hat,raw_H,flags")?;
    for &t in points {
        let est = local_regularity(&sample, t, &opts)?;
        let mut flags = Vec::new();
        if est.shifted {
            flags.push("shifted");
        }
        if est.saturated {
            flags.push("saturated");
        }
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            t,
            est.delta,
            est.order,
            est.exponent,
            est.constant_sq,
            est.alpha,
            est.raw_exponent,
            flags.join(";")
        )?;
    }
    Ok(())
}

/// `mean`: adaptive mean estimates, optional undersmoothed components for
/// normality checks, optional risk-profile dump.
#[allow(clippy::too_many_arguments)]
pub fn cmd_mean(
    sample_path: &Path,
    points: &[f64],
    common_design: bool,
    ci_level: f64,
    qq: Option<f64>,
    args: &PipelineArgs,
    out: &Path,
    risk_out: Option<&PathBuf>,
    cv_dump: Option<&PathBuf>,
) -> Result<()> {
    let sample = read_sample(sample_path)?;
    if common_design && sample.design() != DesignKind::Common {
        return Err(HarnessError::Data(
            "--common-design requires identical design points on every curve".into(),
        ));
    }
    let pipe = prepare(&sample, args)?;
    if let Some(path) = cv_dump {
        dump_cv(path, &pipe.cv)?;
    }
    let pres = presmooth(&sample, pipe.bandwidth)?;
    let z = normal_quantile((1.0 + ci_level) / 2.0);
    let mut risk_writer = match risk_out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            writeln!(w, "t,h,bias,stochastic,penalty,total")?;
            Some(w)
        }
        None => None,
    };
    let noise_floor = global_noise_variance(&sample);
    let mut w = BufWriter::new(File::create(out)?);
    if qq.is_some() {
        writeln!(
            w,
            "t,value,h_star,p_n,ci_lo,ci_hi,regime,qq_h,qq_value,qq_p_n,qq_smoothing_var,qq_series_var"
        )?;
    } else {
        writeln!(w, "t,value,h_star,p_n,ci_lo,ci_hi,regime")?;
    }
    for &t in points {
        let reg = regularity_level_scaled(&sample, t, pipe.delta, noise_floor)?;
        let noise = noise_variance(&sample, t);
        let (profile, regime) = if sample.design() == DesignKind::Common {
            let (p, r) = common_design_profile(&sample, t, &pipe.h_grid, &reg, noise)?;
            (p, Some(r))
        } else {
            let dep = dependence_bound(&pres, t, args.lag_cap)?;
            (
                select_bandwidth(&sample, t, &pipe.h_grid, &reg, noise, dep)?,
                None,
            )
        };
        if let Some(rw) = risk_writer.as_mut() {
            for row in &profile.rows {
                writeln!(
                    rw,
                    "{},{},{},{},{},{}",
                    t, row.h, row.bias, row.stochastic, row.penalty, row.total
                )?;
            }
        }
        let (value, p_n) = mean_at(&sample, t, profile.h_star)?;
        let smoothing = smoothing_variance(&sample, t, profile.h_star, noise)?;
        let series = series_variance(&pres, t, profile.h_star, args.lag_cap)?;
        let half = z * ((smoothing + series) / p_n as f64).sqrt();
        let regime_str = match regime {
            Some(Regime::Interpolation) => "interpolation",
            Some(Regime::Smoothing) => "smoothing",
            None => "",
        };
        match qq {
            Some(exponent) => {
                let h_n = profile.h_star.powf(exponent);
                let c = clt_components(&sample, &pres, t, h_n, noise, args.lag_cap)?;
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{},{},{}",
                    t,
                    value,
                    profile.h_star,
                    p_n,
                    value - half,
                    value + half,
                    regime_str,
                    c.h,
                    c.value,
                    c.p_n,
                    c.smoothing_var,
                    c.series_var
                )?;
            }
            None => {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    t,
                    value,
                    profile.h_star,
                    p_n,
                    value - half,
                    value + half,
                    regime_str
                )?;
            }
        }
    }
    Ok(())
}

/// `autocov`: adaptive lag-ℓ cross-product and autocovariance per pair.
#[allow(clippy::too_many_arguments)]
pub fn cmd_autocov(
    sample_path: &Path,
    pairs: &[(f64, f64)],
    lag: usize,
    ci_level: f64,
    verbatim_variance: bool,
    centered_nu2: bool,
    args: &PipelineArgs,
    out: &Path,
) -> Result<()> {
    let sample = read_sample(sample_path)?;
    let pipe = prepare(&sample, args)?;
    let pres = presmooth(&sample, pipe.bandwidth)?;
    let opts = autocov::AutocovOptions {
        verbatim_variance_weights: verbatim_variance,
        centered_second_moment: centered_nu2,
        lag_cap: args.lag_cap,
        mean: ftsreg_core::mean::MeanOptions {
            ci_level,
            lag_cap: args.lag_cap,
        },
    };
    let noise_floor = global_noise_variance(&sample);
    let mut w = BufWriter::new(File::create(out)?);
    writeln!(w, "s,t,lag,gamma,Gamma,h_star,p_n_ell")?;
    for &(s, t) in pairs {
        let reg_s = regularity_level_scaled(&sample, s, pipe.delta, noise_floor)?;
        let reg_t = regularity_level_scaled(&sample, t, pipe.delta, noise_floor)?;
        let est = autocov::adaptive(
            &sample, &pres, s, t, lag, &pipe.h_grid, &reg_s, &reg_t, &opts,
        )?;
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            s, t, lag, est.gamma, est.cov, est.h_star, est.pairs
        )?;
    }
    Ok(())
}

/// `run`: the full Monte Carlo experiment.
pub fn cmd_run(config: &Path, seed: Option<u64>, out: &Path) -> Result<()> {
    let text = std::fs::read_to_string(config)?;
    let mut spec: ExperimentSpec = parse_experiment_text(&text)?;
    if let Some(s) = seed {
        spec.seed = s;
        spec.sim.seed = s;
    }
    let result = run_experiment(&spec)?;
    emit_reports(&spec, &result, out)?;
    result.check_failure_cap()?;
    log::info!("run complete; config:\n{}", to_config_text(&spec));
    Ok(())
}

/// `ingest`: normalize a common-design CSV into the long sample layout.
pub fn cmd_ingest(
    input: &Path,
    schema: IngestSchema,
    normalize_domain: bool,
    out: &Path,
) -> Result<()> {
    let sample = ingest_common_csv(input, schema, normalize_domain)?;
    let mut w = BufWriter::new(File::create(out)?);
    csvio::write_sample_long(&mut w, &sample)?;
    Ok(())
}
