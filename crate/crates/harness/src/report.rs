//! Aggregation of replication outputs into bias/Sd tables and the report
//! files a run leaves behind.

use crate::config::{to_config_text, ExperimentSpec, Task};
use crate::error::Result;
use crate::experiment::{GammaTruthRow, Replication, RunOutput};
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// One aggregated row of the bias/Sd report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub n: usize,
    pub lambda: usize,
    pub task: String,
    pub target: String,
    pub bias: Option<f64>,
    pub sd: Option<f64>,
    pub rmse: Option<f64>,
    pub coverage: Option<f64>,
    pub median_h: Option<f64>,
    pub ks: Option<f64>,
    pub used: usize,
    pub failures: usize,
}

/// The aggregated report of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub rows: Vec<ReportRow>,
    pub replications: usize,
    pub seed: u64,
}

/// Mean and sample standard deviation (denominator R-1).
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// rmse² = bias² + sd²·(R-1)/R, the mean squared error identity.
pub fn rmse_from(bias: f64, sd: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    (bias * bias + sd * sd * (n - 1) as f64 / n as f64).sqrt()
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

struct Agg {
    estimates: Vec<f64>,
    bandwidths: Vec<f64>,
    covered: usize,
    with_ci: usize,
    failures: usize,
}

impl Agg {
    fn new() -> Self {
        Agg {
            estimates: Vec::new(),
            bandwidths: Vec::new(),
            covered: 0,
            with_ci: 0,
            failures: 0,
        }
    }
}

/// Aggregate replication outputs against the configured truths.
pub fn build_table(
    spec: &ExperimentSpec,
    reps: &[Replication],
    gamma_truth: &[GammaTruthRow],
) -> ReportTable {
    let mut rows = Vec::new();
    let wants = |t: Task| spec.tasks.contains(&t);

    if wants(Task::LocReg) {
        for (k, &t) in spec.points.iter().enumerate() {
            let mut h_agg = Agg::new();
            let mut l_agg = Agg::new();
            for rep in reps {
                match &rep.locreg[k] {
                    Ok(row) => {
                        h_agg.estimates.push(row.est.exponent);
                        l_agg.estimates.push(row.est.constant_sq);
                    }
                    Err(_) => {
                        h_agg.failures += 1;
                        l_agg.failures += 1;
                    }
                }
            }
            let truth_h = spec.sim.hurst.eval(t);
            let truth_l2 = spec.sim.l_scale * spec.sim.l_scale;
            rows.push(stat_row(spec, "locreg_h", format!("t={t}"), &h_agg, Some(truth_h), None));
            rows.push(stat_row(spec, "locreg_l2", format!("t={t}"), &l_agg, Some(truth_l2), None));
        }
    }

    if wants(Task::Mean) {
        for (k, &t) in spec.points.iter().enumerate() {
            let mut agg = Agg::new();
            let truth = spec.sim.mean.eval(t);
            for rep in reps {
                match &rep.mean[k] {
                    Ok(row) => {
                        agg.estimates.push(row.value);
                        agg.bandwidths.push(row.h_star);
                        agg.with_ci += 1;
                        if row.ci_lo <= truth && truth <= row.ci_hi {
                            agg.covered += 1;
                        }
                    }
                    Err(_) => agg.failures += 1,
                }
            }
            rows.push(stat_row(spec, "mean", format!("t={t}"), &agg, Some(truth), None));
        }
    }

    if wants(Task::Clt) {
        for (k, &t) in spec.points.iter().enumerate() {
            let mut agg = Agg::new();
            for rep in reps {
                match &rep.clt[k] {
                    Ok(row) => agg.estimates.push(row.residual),
                    Err(_) => agg.failures += 1,
                }
            }
            let ks = if agg.estimates.is_empty() {
                None
            } else {
                Some(crate::experiment::ks_statistic_normal(&agg.estimates))
            };
            rows.push(stat_row(spec, "clt", format!("t={t}"), &agg, Some(0.0), ks));
        }
    }

    if wants(Task::Autocov) {
        for (k, &(s, t)) in spec.pairs.iter().enumerate() {
            let mut agg = Agg::new();
            for rep in reps {
                match &rep.autocov[k] {
                    Ok(row) => {
                        agg.estimates.push(row.gamma);
                        agg.bandwidths.push(row.h_star);
                    }
                    Err(_) => agg.failures += 1,
                }
            }
            let truth = gamma_truth
                .iter()
                .find(|g| g.s == s && g.t == t && g.lag == spec.lag)
                .map(|g| g.value);
            rows.push(stat_row(
                spec,
                "autocov",
                format!("s={s},t={t},lag={}", spec.lag),
                &agg,
                truth,
                None,
            ));
        }
    }

    ReportTable {
        rows,
        replications: spec.replications,
        seed: spec.seed,
    }
}

fn stat_row(
    spec: &ExperimentSpec,
    task: &str,
    target: String,
    agg: &Agg,
    truth: Option<f64>,
    ks: Option<f64>,
) -> ReportRow {
    let used = agg.estimates.len();
    let (bias, sd, rmse) = if used == 0 {
        (None, None, None)
    } else {
        let (mean, sd) = mean_sd(&agg.estimates);
        match truth {
            Some(tr) => {
                let b = mean - tr;
                (Some(b), Some(sd), Some(rmse_from(b, sd, used)))
            }
            None => (Some(mean), Some(sd), None),
        }
    };
    let coverage = if agg.with_ci > 0 {
        Some(agg.covered as f64 / agg.with_ci as f64)
    } else {
        None
    };
    let median_h = if agg.bandwidths.is_empty() {
        None
    } else {
        Some(median(&agg.bandwidths))
    };
    ReportRow {
        n: spec.sim.n,
        lambda: spec.sim.lambda,
        task: task.to_string(),
        target,
        bias,
        sd,
        rmse,
        coverage,
        median_h,
        ks,
        used,
        failures: agg.failures,
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => String::new(),
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    seed: u64,
    replications: usize,
    config: String,
}

/// Write every report artifact of a run into `dir`.
pub fn emit_reports(spec: &ExperimentSpec, out: &RunOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_report_csv(&out.table, &dir.join("report.csv"))?;

    if spec.tasks.contains(&Task::LocReg) {
        let mut w = BufWriter::new(File::create(dir.join("regularity.csv"))?);
        writeln!(w, "rep,t,delta,order,H_hat,raw_H,L2_hat,alpha,shifted,saturated")?;
        for rep in &out.replications {
            for row in rep.locreg.iter().flatten() {
                let e = &row.est;
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{}",
                    rep.rep,
                    row.t,
                    e.delta,
                    e.order,
                    e.exponent,
                    e.raw_exponent,
                    e.constant_sq,
                    e.alpha,
                    e.shifted,
                    e.saturated
                )?;
            }
        }
    }

    if spec.tasks.contains(&Task::Mean) {
        let mut w = BufWriter::new(File::create(dir.join("mean.csv"))?);
        writeln!(w, "rep,t,value,h_star,p_n,ci_lo,ci_hi,regime")?;
        for rep in &out.replications {
            for row in rep.mean.iter().flatten() {
                let regime = match row.regime {
                    Some(ftsreg_core::mean::Regime::Interpolation) => "interpolation",
                    Some(ftsreg_core::mean::Regime::Smoothing) => "smoothing",
                    None => "",
                };
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    rep.rep, row.t, row.value, row.h_star, row.p_n, row.ci_lo, row.ci_hi, regime
                )?;
            }
        }
        write_risk_csv(spec, out, &dir.join("risk_mu.csv"))?;
    }

    if spec.tasks.contains(&Task::Clt) {
        let mut w = BufWriter::new(File::create(dir.join("qq.csv"))?);
        writeln!(w, "rep,t,h_n,residual")?;
        for rep in &out.replications {
            for row in rep.clt.iter().flatten() {
                writeln!(w, "{},{},{},{}", rep.rep, row.t, row.h_n, row.residual)?;
            }
        }
    }

    if spec.tasks.contains(&Task::Autocov) {
        let mut w = BufWriter::new(File::create(dir.join("autocov.csv"))?);
        writeln!(w, "rep,s,t,lag,gamma,Gamma,h_star,p_n_ell")?;
        for rep in &out.replications {
            for row in rep.autocov.iter().flatten() {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    rep.rep, row.s, row.t, row.lag, row.gamma, row.cov, row.h_star, row.pairs
                )?;
            }
        }
        if !out.gamma_truth.is_empty() {
            let mut w = BufWriter::new(File::create(dir.join("gamma_truth.csv"))?);
            writeln!(w, "s,t,lag,value,sample_size")?;
            for g in &out.gamma_truth {
                writeln!(w, "{},{},{},{},{}", g.s, g.t, g.lag, g.value, g.sample_size)?;
            }
        }
    }

    let manifest = Manifest {
        tool: "ftsreg",
        version: env!("CARGO_PKG_VERSION"),
        seed: spec.seed,
        replications: spec.replications,
        config: to_config_text(spec),
    };
    let mut w = BufWriter::new(File::create(dir.join("manifest.json"))?);
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    writeln!(w)?;
    Ok(())
}

/// The bias/Sd table as CSV.
pub fn write_report_csv(table: &ReportTable, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "n,lambda,task,target,bias,sd,rmse,coverage,median_h_star,ks,used,failures"
    )?;
    for r in &table.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.lambda,
            r.task,
            r.target,
            fmt_opt(r.bias),
            fmt_opt(r.sd),
            fmt_opt(r.rmse),
            fmt_opt(r.coverage),
            fmt_opt(r.median_h),
            fmt_opt(r.ks),
            r.used,
            r.failures
        )?;
    }
    Ok(())
}

// Averaged risk decomposition per (t, h) over the replications where the
// bandwidth was feasible.
fn write_risk_csv(spec: &ExperimentSpec, out: &RunOutput, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,h,bias,stochastic,penalty,total,feasible_reps")?;
    for (k, &t) in spec.points.iter().enumerate() {
        // gather the per-h grid from the first successful replication
        let template = out
            .replications
            .iter()
            .find_map(|rep| rep.mean.get(k).and_then(|r| r.as_ref().ok()));
        let Some(template) = template else { continue };
        for (hi, cell) in template.risk.iter().enumerate() {
            let mut acc = [0.0f64; 4];
            let mut count = 0usize;
            for rep in &out.replications {
                if let Some(Ok(row)) = rep.mean.get(k).map(|r| r.as_ref()) {
                    let c = &row.risk[hi];
                    if c.feasible {
                        acc[0] += c.bias;
                        acc[1] += c.stochastic;
                        acc[2] += c.penalty;
                        acc[3] += c.total;
                        count += 1;
                    }
                }
            }
            if count > 0 {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    t,
                    cell.h,
                    acc[0] / count as f64,
                    acc[1] / count as f64,
                    acc[2] / count as f64,
                    acc[3] / count as f64,
                    count
                )?;
            } else {
                writeln!(w, "{},{},,,,,0", t, cell.h)?;
            }
        }
    }
    Ok(())
}
