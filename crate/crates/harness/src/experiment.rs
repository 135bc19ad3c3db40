//! Monte Carlo replication engine: simulate, estimate, aggregate.
//!
//! Replications run in parallel; every replication owns counter-derived RNG
//! streams, so the output is bit-identical whatever the thread count.

use crate::config::{ExperimentSpec, Task};
use crate::error::{HarnessError, Result};
use crate::report::{build_table, ReportTable};
use ftsreg_core::domain::BandwidthGrid;
use ftsreg_core::locreg::{delta_window, regularity_level_scaled};
use ftsreg_core::mean::{
    clt_components, common_design_profile, dependence_bound, mean_at, select_bandwidth,
    series_variance, smoothing_variance, MeanOptions, Regime,
};
use ftsreg_core::presmooth::{cv_bandwidth, global_noise_variance, noise_variance, presmooth};
use ftsreg_core::simulate::{observe, Far1Model};
use ftsreg_core::stats::{normal_cdf, normal_quantile};
use ftsreg_core::domain::DesignKind;
use ftsreg_core::{autocov, RegularityEstimate64};
use rayon::prelude::*;
use std::panic::{catch_unwind, AssertUnwindSafe};

const SALT_SIM: u64 = 0xA1;
const SALT_OBS: u64 = 0xB2;
const SALT_CV: u64 = 0xC3;
const SALT_TRUTH: u64 = 0xD4;

/// SplitMix64 avalanche step.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream seed for (seed, replication, purpose).
pub fn stream_seed(seed: u64, rep: u64, salt: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ rep) ^ salt)
}

/// Local regularity output of one replication at one point.
#[derive(Debug, Clone)]
pub struct LocRegRow {
    pub t: f64,
    pub est: RegularityEstimate64,
}

/// One risk-profile row kept for the averaged risk-curve dump.
#[derive(Debug, Clone, Copy)]
pub struct RiskRowLite {
    pub h: f64,
    pub bias: f64,
    pub stochastic: f64,
    pub penalty: f64,
    pub total: f64,
    pub feasible: bool,
}

/// Adaptive mean output of one replication at one point.
#[derive(Debug, Clone)]
pub struct MeanRow {
    pub t: f64,
    pub value: f64,
    pub h_star: f64,
    pub p_n: usize,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub regime: Option<Regime>,
    pub risk: Vec<RiskRowLite>,
}

/// Standardized residual for the normality check at one point.
#[derive(Debug, Clone, Copy)]
pub struct CltRow {
    pub t: f64,
    pub h_n: f64,
    pub residual: f64,
}

/// Adaptive cross-product output at one coordinate pair.
#[derive(Debug, Clone, Copy)]
pub struct AutocovRow {
    pub s: f64,
    pub t: f64,
    pub lag: usize,
    pub gamma: f64,
    pub cov: f64,
    pub h_star: f64,
    pub pairs: usize,
}

type Tagged<T> = std::result::Result<T, String>;

/// Everything one replication produced (entries aligned with the spec's
/// points/pairs; failed targets keep their failure tag).
#[derive(Debug, Clone)]
pub struct Replication {
    pub rep: usize,
    pub locreg: Vec<Tagged<LocRegRow>>,
    pub mean: Vec<Tagged<MeanRow>>,
    pub clt: Vec<Tagged<CltRow>>,
    pub autocov: Vec<Tagged<AutocovRow>>,
}

/// Long-run approximation of the lag-ℓ cross-product truth.
#[derive(Debug, Clone, Copy)]
pub struct GammaTruthRow {
    pub s: f64,
    pub t: f64,
    pub lag: usize,
    pub value: f64,
    pub sample_size: usize,
}

/// Full output of a Monte Carlo run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub table: ReportTable,
    pub replications: Vec<Replication>,
    pub gamma_truth: Vec<GammaTruthRow>,
}

impl RunOutput {
    /// More than 10% failures on any report row marks the run failed.
    pub fn check_failure_cap(&self) -> Result<()> {
        for row in &self.table.rows {
            let total = row.used + row.failures;
            if total > 0 && (row.failures as f64) > 0.1 * total as f64 {
                return Err(HarnessError::FailureCap(format!(
                    "{}/{} replications failed for task {} at {}",
                    row.failures, total, row.task, row.target
                )));
            }
        }
        Ok(())
    }
}

/// Kolmogorov-Smirnov distance of a sample against the standard normal.
pub fn ks_statistic_normal(values: &[f64]) -> f64 {
    let mut xs = values.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let cdf = normal_cdf(x);
        let hi = (i + 1) as f64 / n - cdf;
        let lo = cdf - i as f64 / n;
        d = d.max(hi.abs()).max(lo.abs());
    }
    d
}

/// Empirical lag-ℓ cross-product truth from long noiseless latent chains.
///
/// The chain layout (8 chains, each with its own burn-in and seed stream) is
/// fixed, so the oracle value does not depend on the thread count.
pub fn gamma_truth_oracle(
    spec: &ExperimentSpec,
    pairs: &[(f64, f64)],
    lag: usize,
    total: usize,
    seed: u64,
) -> Result<Vec<GammaTruthRow>> {
    const CHAINS: usize = 8;
    let chain_len = total.div_ceil(CHAINS).max(lag + 8);
    let mut cfg = spec.sim.clone();
    cfg.sigma = 0.0;
    cfg.n = chain_len;
    let model = Far1Model::new(&cfg)?;
    let per_chain: Vec<Vec<(f64, usize)>> = (0..CHAINS)
        .into_par_iter()
        .map(|chain| {
            let paths = model.generate_with(stream_seed(seed, chain as u64, SALT_TRUTH));
            pairs
                .iter()
                .map(|&(s, t)| {
                    let mut acc = 0.0;
                    for n in 0..chain_len - lag {
                        acc += paths.interp(n, s) * paths.interp(n + lag, t);
                    }
                    (acc, chain_len - lag)
                })
                .collect()
        })
        .collect();
    Ok(pairs
        .iter()
        .enumerate()
        .map(|(k, &(s, t))| {
            let mut acc = 0.0;
            let mut count = 0usize;
            for chain in &per_chain {
                acc += chain[k].0;
                count += chain[k].1;
            }
            GammaTruthRow {
                s,
                t,
                lag,
                value: acc / count as f64,
                sample_size: count,
            }
        })
        .collect())
}

fn tag_all<T>(len: usize, tag: &str) -> Vec<Tagged<T>> {
    (0..len).map(|_| Err(tag.to_string())).collect()
}

fn failed_replication(spec: &ExperimentSpec, rep: usize, tag: &str) -> Replication {
    Replication {
        rep,
        locreg: tag_all(spec.points.len(), tag),
        mean: tag_all(spec.points.len(), tag),
        clt: tag_all(spec.points.len(), tag),
        autocov: tag_all(spec.pairs.len(), tag),
    }
}

/// Run one replication: simulate, observe, presmooth, estimate all targets.
pub fn replicate(model: &Far1Model<f64>, spec: &ExperimentSpec, rep: usize) -> Replication {
    let guarded = catch_unwind(AssertUnwindSafe(|| replicate_inner(model, spec, rep)));
    match guarded {
        Ok(r) => r,
        Err(_) => failed_replication(spec, rep, "panic"),
    }
}

fn replicate_inner(model: &Far1Model<f64>, spec: &ExperimentSpec, rep: usize) -> Replication {
    let sim_seed = stream_seed(spec.seed, rep as u64, SALT_SIM);
    let obs_seed = stream_seed(spec.seed, rep as u64, SALT_OBS);
    let cv_seed = stream_seed(spec.seed, rep as u64, SALT_CV);

    let wants = |t: Task| spec.tasks.contains(&t);
    let sigma = spec.sim.sigma;

    // shared pipeline; any failure here fails every target of the replication
    let setup = (|| -> ftsreg_core::Result<_> {
        let latent = model.generate_with(sim_seed);
        let sample = observe(&latent, spec.design, spec.sim.lambda, &move |_| sigma, obs_seed)?;
        let lambda_hat = sample.lambda_hat();
        let delta = delta_window(lambda_hat, spec.gamma)?;
        let domain = sample.domain();
        let cv_grid = BandwidthGrid::geometric(
            (domain.length() / lambda_hat).min(domain.length() / 10.0),
            0.2 * domain.length(),
            spec.cv_count,
            &domain,
        )?;
        let b = cv_bandwidth(&sample, &cv_grid, spec.cv_subsample, cv_seed)?;
        let h_grid = BandwidthGrid::default_for(sample.n_curves(), lambda_hat, &domain, spec.grid_count)?;
        Ok((sample, delta, b, h_grid))
    })();
    let (sample, delta, b, h_grid) = match setup {
        Ok(x) => x,
        Err(e) => return failed_replication(spec, rep, &e.to_string()),
    };
    let pres = match presmooth(&sample, b) {
        Ok(p) => p,
        Err(e) => return failed_replication(spec, rep, &e.to_string()),
    };


    let mean_opts = MeanOptions {
        ci_level: spec.ci_level,
        lag_cap: spec.lag_cap,
    };
    let z = normal_quantile((1.0 + spec.ci_level) / 2.0);

    let noise_floor = global_noise_variance(&sample);
    let mut locreg_rows = Vec::new();
    let mut mean_rows = Vec::new();
    let mut clt_rows = Vec::new();
    for &t in &spec.points {
        let reg = regularity_level_scaled(&sample, t, delta, noise_floor)
            .map_err(|e| e.to_string());
        if wants(Task::LocReg) {
            locreg_rows.push(reg.clone().map(|est| LocRegRow { t, est }));
        }
        if wants(Task::Mean) || wants(Task::Clt) {
            let profile_res = reg.clone().and_then(|reg| {
                let noise = noise_variance(&sample, t);
                let profile = if sample.design() == DesignKind::Common {
                    common_design_profile(&sample, t, &h_grid, &reg, noise)
                        .map(|(p, r)| (p, Some(r)))
                } else {
                    dependence_bound(&pres, t, spec.lag_cap).and_then(|dep| {
                        select_bandwidth(&sample, t, &h_grid, &reg, noise, dep)
                            .map(|p| (p, None))
                    })
                };
                profile.map(|p| (p, noise)).map_err(|e| e.to_string())
            });
            if wants(Task::Mean) {
                mean_rows.push(profile_res.clone().and_then(|((profile, regime), noise)| {
                    (|| -> ftsreg_core::Result<MeanRow> {
                        let (value, p_n) = mean_at(&sample, t, profile.h_star)?;
                        let smoothing = smoothing_variance(&sample, t, profile.h_star, noise)?;
                        let series = series_variance(&pres, t, profile.h_star, spec.lag_cap)?;
                        let half = z * ((smoothing + series) / p_n as f64).sqrt();
                        Ok(MeanRow {
                            t,
                            value,
                            h_star: profile.h_star,
                            p_n,
                            ci_lo: value - half,
                            ci_hi: value + half,
                            regime,
                            risk: profile
                                .rows
                                .iter()
                                .map(|r| RiskRowLite {
                                    h: r.h,
                                    bias: r.bias,
                                    stochastic: r.stochastic,
                                    penalty: r.penalty,
                                    total: r.total,
                                    feasible: r.feasible,
                                })
                                .collect(),
                        })
                    })()
                    .map_err(|e| e.to_string())
                }));
            }
            if wants(Task::Clt) {
                clt_rows.push(profile_res.and_then(|((profile, _), noise)| {
                    (|| -> ftsreg_core::Result<CltRow> {
                        let h_n = profile.h_star.powf(spec.qq_exponent);
                        let c = clt_components(&sample, &pres, t, h_n, noise, spec.lag_cap)?;
                        let truth = spec.sim.mean.eval(t);
                        let scale = (c.smoothing_var + c.series_var).sqrt();
                        let residual = (c.p_n as f64).sqrt() * (c.value - truth) / scale;
                        Ok(CltRow { t, h_n, residual })
                    })()
                    .map_err(|e| e.to_string())
                }));
            }
        }
    }

    let mut autocov_rows = Vec::new();
    if wants(Task::Autocov) {
        let opts = autocov::AutocovOptions {
            lag_cap: spec.lag_cap,
            mean: mean_opts,
            ..autocov::AutocovOptions::default()
        };
        for &(s, t) in &spec.pairs {
            autocov_rows.push(
                (|| -> ftsreg_core::Result<AutocovRow> {
                    let reg_s = regularity_level_scaled(&sample, s, delta, noise_floor)?;
                    let reg_t = regularity_level_scaled(&sample, t, delta, noise_floor)?;
                    let est = autocov::adaptive(
                        &sample, &pres, s, t, spec.lag, &h_grid, &reg_s, &reg_t, &opts,
                    )?;
                    Ok(AutocovRow {
                        s,
                        t,
                        lag: spec.lag,
                        gamma: est.gamma,
                        cov: est.cov,
                        h_star: est.h_star,
                        pairs: est.pairs,
                    })
                })()
                .map_err(|e| e.to_string()),
            );
        }
    }

    Replication {
        rep,
        locreg: locreg_rows,
        mean: mean_rows,
        clt: clt_rows,
        autocov: autocov_rows,
    }
}

/// Run the full experiment: truth oracle (when needed), parallel
/// replications, deterministic aggregation.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunOutput> {
    spec.validate()?;
    let gamma_truth = if spec.tasks.contains(&Task::Autocov) {
        gamma_truth_oracle(spec, &spec.pairs, spec.lag, spec.truth_size, spec.seed)?
    } else {
        Vec::new()
    };
    let model = Far1Model::new(&spec.sim)?;
    let mut replications: Vec<Replication> = (0..spec.replications)
        .into_par_iter()
        .map(|rep| replicate(&model, spec, rep))
        .collect();
    replications.sort_by_key(|r| r.rep);
    let table = build_table(spec, &replications, &gamma_truth);
    Ok(RunOutput {
        table,
        replications,
        gamma_truth,
    })
}
