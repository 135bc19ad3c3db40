//! Flat `key = value` experiment configuration with `[sim]` and
//! `[experiment]` sections. The same representation is written into the run
//! manifest, so a manifest round-trips through this parser.

use crate::error::{HarnessError, Result};
use ftsreg_core::domain::DesignKind;
use ftsreg_core::mean::LagCap;
use ftsreg_core::simulate::{FtsModel, HurstFunction, MeanFunction, OperatorNorm};
use ftsreg_core::SimConfig64;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Estimation tasks a run can execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Task {
    LocReg,
    Mean,
    Autocov,
    Clt,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::LocReg => "locreg",
            Task::Mean => "mean",
            Task::Autocov => "autocov",
            Task::Clt => "clt",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "locreg" => Ok(Task::LocReg),
            "mean" => Ok(Task::Mean),
            "autocov" => Ok(Task::Autocov),
            "clt" => Ok(Task::Clt),
            other => Err(HarnessError::Config(format!("unknown task {other:?}"))),
        }
    }
}

/// Everything one Monte Carlo run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub sim: SimConfig64,
    pub design: DesignKind,
    pub replications: usize,
    pub tasks: Vec<Task>,
    pub points: Vec<f64>,
    pub pairs: Vec<(f64, f64)>,
    pub lag: usize,
    pub grid_count: usize,
    pub cv_count: usize,
    pub cv_subsample: usize,
    pub lag_cap: LagCap,
    pub ci_level: f64,
    pub qq_exponent: f64,
    /// Latent sample size of the cross-product truth approximation.
    pub truth_size: usize,
    /// Exponent of the regularity window rule.
    pub gamma: f64,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.sim
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.replications == 0 {
            return Err(HarnessError::Config("replications must be >= 1".into()));
        }
        if self.tasks.is_empty() {
            return Err(HarnessError::Config("tasks must not be empty".into()));
        }
        let needs_points = self
            .tasks
            .iter()
            .any(|t| matches!(t, Task::LocReg | Task::Mean | Task::Clt));
        if needs_points && self.points.is_empty() {
            return Err(HarnessError::Config(
                "points must be provided for locreg/mean/clt tasks".into(),
            ));
        }
        if self.tasks.contains(&Task::Autocov) && self.pairs.is_empty() {
            return Err(HarnessError::Config(
                "pairs must be provided for the autocov task".into(),
            ));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(HarnessError::Config("ci_level must lie in (0,1)".into()));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(HarnessError::Config("gamma must lie in (0,1)".into()));
        }
        if self.grid_count < 2 || self.cv_count < 2 {
            return Err(HarnessError::Config(
                "grid_count and cv_count must be >= 2".into(),
            ));
        }
        Ok(())
    }
}

fn default_spec() -> ExperimentSpec {
    ExperimentSpec {
        sim: SimConfig64::model2(150, 40),
        design: DesignKind::Independent,
        replications: 1,
        tasks: vec![Task::Mean],
        points: vec![],
        pairs: vec![],
        lag: 1,
        grid_count: 51,
        cv_count: 15,
        cv_subsample: 50,
        lag_cap: LagCap::Rule,
        ci_level: 0.95,
        qq_exponent: 1.1,
        truth_size: 20_000,
        gamma: 1.0 / 3.0,
        seed: 0,
    }
}

/// Parse `[section]` / `key = value` text into a map keyed by
/// `"section.key"`. `#` starts a comment.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| HarnessError::Config(format!("line {}: bad section", i + 1)))?;
            section = name.trim().to_string();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("line {}: expected key = value", i + 1)))?;
        let full = if section.is_empty() {
            key.trim().to_string()
        } else {
            format!("{section}.{}", key.trim())
        };
        if out.insert(full.clone(), value.trim().to_string()).is_some() {
            return Err(HarnessError::Config(format!("duplicate key {full:?}")));
        }
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<T>()
            .map(Some)
            .map_err(|e| HarnessError::Config(format!("bad value for {key}: {e}"))),
    }
}

/// Parse a lag-cap spelling: "rule", "full" or an integer.
pub fn parse_lag_cap(s: &str) -> Result<LagCap> {
    match s.trim() {
        "rule" => Ok(LagCap::Rule),
        "full" => Ok(LagCap::Full),
        other => other.parse::<usize>().map(LagCap::Fixed).map_err(|_| {
            HarnessError::Config(format!(
                "lag_cap must be rule, full or an integer, got {other:?}"
            ))
        }),
    }
}

/// Parse a comma-separated list of reals ("0.2, 0.4").
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| HarnessError::Config(format!("bad list entry {p:?}: {e}")))
        })
        .collect()
}

/// Parse a comma-separated list of colon pairs ("0.2:0.4, 0.7:0.8").
pub fn parse_pairs(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (a, b) = p
                .trim()
                .split_once(':')
                .ok_or_else(|| HarnessError::Config(format!("pair {p:?} must be s:t")))?;
            Ok((
                a.trim()
                    .parse::<f64>()
                    .map_err(|e| HarnessError::Config(format!("bad pair {p:?}: {e}")))?,
                b.trim()
                    .parse::<f64>()
                    .map_err(|e| HarnessError::Config(format!("bad pair {p:?}: {e}")))?,
            ))
        })
        .collect()
}

const KNOWN_SIM_KEYS: &[&str] = &[
    "model",
    "design",
    "n",
    "lambda",
    "psi_norm",
    "l_scale",
    "sigma",
    "burn_in",
    "grid_size",
    "operator_norm",
    "mean",
    "mean_value",
    "hurst",
    "hurst_value",
    "hurst_lo",
    "hurst_hi",
    "hurst_steepness",
    "hurst_midpoint",
    "seed",
];

const KNOWN_EXP_KEYS: &[&str] = &[
    "replications",
    "tasks",
    "points",
    "pairs",
    "lag",
    "grid_count",
    "cv_count",
    "cv_subsample",
    "lag_cap",
    "ci_level",
    "qq_exponent",
    "truth_size",
    "gamma",
];

/// Build a full experiment spec from config text.
pub fn parse_experiment(text: &str) -> Result<ExperimentSpec> {
    let map = parse_kv(text)?;
    for key in map.keys() {
        let ok = match key.split_once('.') {
            Some(("sim", k)) => KNOWN_SIM_KEYS.contains(&k),
            Some(("experiment", k)) => KNOWN_EXP_KEYS.contains(&k),
            _ => false,
        };
        if !ok {
            return Err(HarnessError::Config(format!("unknown key {key:?}")));
        }
    }
    let mut spec = default_spec();
    spec.sim = parse_sim(&map)?;

    if let Some(r) = parse_num::<usize>(&map, "experiment.replications")? {
        spec.replications = r;
    }
    if let Some(tasks) = map.get("experiment.tasks") {
        spec.tasks = tasks
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(Task::parse)
            .collect::<Result<Vec<_>>>()?;
        spec.tasks.sort();
        spec.tasks.dedup();
    }
    if let Some(p) = map.get("experiment.points") {
        spec.points = parse_list(p)?;
    }
    if let Some(p) = map.get("experiment.pairs") {
        spec.pairs = parse_pairs(p)?;
    }
    if let Some(v) = parse_num::<usize>(&map, "experiment.lag")? {
        spec.lag = v;
    }
    if let Some(v) = parse_num::<usize>(&map, "experiment.grid_count")? {
        spec.grid_count = v;
    }
    if let Some(v) = parse_num::<usize>(&map, "experiment.cv_count")? {
        spec.cv_count = v;
    }
    if let Some(v) = parse_num::<usize>(&map, "experiment.cv_subsample")? {
        spec.cv_subsample = v;
    }
    if let Some(v) = map.get("experiment.lag_cap") {
        spec.lag_cap = parse_lag_cap(v)?;
    }
    if let Some(v) = parse_num::<f64>(&map, "experiment.ci_level")? {
        spec.ci_level = v;
    }
    if let Some(v) = parse_num::<f64>(&map, "experiment.qq_exponent")? {
        spec.qq_exponent = v;
    }
    if let Some(v) = parse_num::<usize>(&map, "experiment.truth_size")? {
        spec.truth_size = v;
    }
    if let Some(v) = parse_num::<f64>(&map, "experiment.gamma")? {
        spec.gamma = v;
    }
    spec.seed = spec.sim.seed;
    spec.validate()?;
    Ok(spec)
}

/// Build only the simulation config (the `[sim]` section).
pub fn parse_sim(map: &BTreeMap<String, String>) -> Result<SimConfig64> {
    let model = match map.get("sim.model").map(String::as_str) {
        None | Some("far1_logistic") => FtsModel::Far1LogisticHurst,
        Some("far1_const") => FtsModel::Far1ConstHurst,
        Some(other) => {
            return Err(HarnessError::Config(format!("unknown model {other:?}")));
        }
    };
    let mut sim = match model {
        FtsModel::Far1LogisticHurst => SimConfig64::model2(150, 40),
        FtsModel::Far1ConstHurst => SimConfig64::model1(150, 40, 0.5)
            .map_err(|e| HarnessError::Config(e.to_string()))?,
    };
    if let Some(n) = parse_num::<usize>(map, "sim.n")? {
        sim.n = n;
    }
    if let Some(l) = parse_num::<usize>(map, "sim.lambda")? {
        sim.lambda = l;
    }
    if let Some(v) = parse_num::<f64>(map, "sim.psi_norm")? {
        sim.psi_norm = v;
    }
    if let Some(v) = parse_num::<f64>(map, "sim.l_scale")? {
        sim.l_scale = v;
    }
    if let Some(v) = parse_num::<f64>(map, "sim.sigma")? {
        sim.sigma = v;
    }
    if let Some(v) = parse_num::<usize>(map, "sim.burn_in")? {
        sim.burn_in = v;
    }
    if let Some(v) = parse_num::<usize>(map, "sim.grid_size")? {
        sim.eval_grid_size = v;
    }
    if let Some(v) = map.get("sim.operator_norm") {
        sim.operator_norm = match v.as_str() {
            "spectral" => OperatorNorm::Spectral,
            "max_row_sum" => OperatorNorm::MaxRowSum,
            other => {
                return Err(HarnessError::Config(format!(
                    "operator_norm must be spectral or max_row_sum, got {other:?}"
                )))
            }
        };
    }
    match map.get("sim.mean").map(String::as_str) {
        None | Some("sine") => sim.mean = MeanFunction::default_sine(),
        Some("zero") => sim.mean = MeanFunction::Zero,
        Some("constant") => {
            let v = parse_num::<f64>(map, "sim.mean_value")?.unwrap_or(0.0);
            sim.mean = MeanFunction::Constant(v);
        }
        Some(other) => {
            return Err(HarnessError::Config(format!(
                "mean must be sine, zero or constant, got {other:?}"
            )))
        }
    }
    let hurst_kind = map
        .get("sim.hurst")
        .map(String::as_str)
        .unwrap_or(match model {
            FtsModel::Far1LogisticHurst => "logistic",
            FtsModel::Far1ConstHurst => "constant",
        });
    sim.hurst = match hurst_kind {
        "logistic" => {
            let lo = parse_num::<f64>(map, "sim.hurst_lo")?.unwrap_or(0.2);
            let hi = parse_num::<f64>(map, "sim.hurst_hi")?.unwrap_or(0.8);
            let k = parse_num::<f64>(map, "sim.hurst_steepness")?.unwrap_or(15.0);
            let mid = parse_num::<f64>(map, "sim.hurst_midpoint")?.unwrap_or(0.5);
            HurstFunction::logistic(lo, hi, k, mid)
                .map_err(|e| HarnessError::Config(e.to_string()))?
        }
        "constant" => {
            let v = parse_num::<f64>(map, "sim.hurst_value")?.unwrap_or(0.5);
            HurstFunction::constant(v).map_err(|e| HarnessError::Config(e.to_string()))?
        }
        other => {
            return Err(HarnessError::Config(format!(
                "hurst must be logistic or constant, got {other:?}"
            )))
        }
    };
    if let Some(v) = parse_num::<u64>(map, "sim.seed")? {
        sim.seed = v;
    }
    sim.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(sim)
}

/// Design kind of the observation step ([sim] design = independent|common).
pub fn parse_design(map: &BTreeMap<String, String>) -> Result<DesignKind> {
    match map.get("sim.design").map(String::as_str) {
        None | Some("independent") => Ok(DesignKind::Independent),
        Some("common") => Ok(DesignKind::Common),
        Some(other) => Err(HarnessError::Config(format!(
            "design must be independent or common, got {other:?}"
        ))),
    }
}

/// Parse a full config file (experiment + design).
pub fn parse_experiment_text(text: &str) -> Result<ExperimentSpec> {
    let map = parse_kv(text)?;
    let mut spec = parse_experiment(text)?;
    spec.design = parse_design(&map)?;
    Ok(spec)
}

/// Serialize a spec back into config text (parse/serialize round-trips).
pub fn to_config_text(spec: &ExperimentSpec) -> String {
    let mut s = String::new();
    let sim = &spec.sim;
    writeln!(s, "[sim]").unwrap();
    let model = match sim.model {
        FtsModel::Far1LogisticHurst => "far1_logistic",
        FtsModel::Far1ConstHurst => "far1_const",
    };
    writeln!(s, "model = {model}").unwrap();
    let design = match spec.design {
        DesignKind::Independent => "independent",
        DesignKind::Common => "common",
    };
    writeln!(s, "design = {design}").unwrap();
    writeln!(s, "n = {}", sim.n).unwrap();
    writeln!(s, "lambda = {}", sim.lambda).unwrap();
    writeln!(s, "psi_norm = {}", sim.psi_norm).unwrap();
    writeln!(s, "l_scale = {}", sim.l_scale).unwrap();
    writeln!(s, "sigma = {}", sim.sigma).unwrap();
    writeln!(s, "burn_in = {}", sim.burn_in).unwrap();
    writeln!(s, "grid_size = {}", sim.eval_grid_size).unwrap();
    let norm = match sim.operator_norm {
        OperatorNorm::Spectral => "spectral",
        OperatorNorm::MaxRowSum => "max_row_sum",
    };
    writeln!(s, "operator_norm = {norm}").unwrap();
    match sim.mean {
        MeanFunction::Sine { .. } => writeln!(s, "mean = sine").unwrap(),
        MeanFunction::Zero => writeln!(s, "mean = zero").unwrap(),
        MeanFunction::Constant(v) => {
            writeln!(s, "mean = constant").unwrap();
            writeln!(s, "mean_value = {v}").unwrap();
        }
    }
    match sim.hurst {
        HurstFunction::Constant(v) => {
            writeln!(s, "hurst = constant").unwrap();
            writeln!(s, "hurst_value = {v}").unwrap();
        }
        HurstFunction::Logistic {
            lo,
            hi,
            steepness,
            midpoint,
        } => {
            writeln!(s, "hurst = logistic").unwrap();
            writeln!(s, "hurst_lo = {lo}").unwrap();
            writeln!(s, "hurst_hi = {hi}").unwrap();
            writeln!(s, "hurst_steepness = {steepness}").unwrap();
            writeln!(s, "hurst_midpoint = {midpoint}").unwrap();
        }
    }
    writeln!(s, "seed = {}", sim.seed).unwrap();

    writeln!(s, "\n[experiment]").unwrap();
    writeln!(s, "replications = {}", spec.replications).unwrap();
    let tasks: Vec<&str> = spec.tasks.iter().map(|t| t.name()).collect();
    writeln!(s, "tasks = {}", tasks.join(", ")).unwrap();
    if !spec.points.is_empty() {
        let pts: Vec<String> = spec.points.iter().map(|p| format!("{p}")).collect();
        writeln!(s, "points = {}", pts.join(", ")).unwrap();
    }
    if !spec.pairs.is_empty() {
        let prs: Vec<String> = spec.pairs.iter().map(|(a, b)| format!("{a}:{b}")).collect();
        writeln!(s, "pairs = {}", prs.join(", ")).unwrap();
    }
    writeln!(s, "lag = {}", spec.lag).unwrap();
    writeln!(s, "grid_count = {}", spec.grid_count).unwrap();
    writeln!(s, "cv_count = {}", spec.cv_count).unwrap();
    writeln!(s, "cv_subsample = {}", spec.cv_subsample).unwrap();
    let cap = match spec.lag_cap {
        LagCap::Rule => "rule".to_string(),
        LagCap::Full => "full".to_string(),
        LagCap::Fixed(k) => k.to_string(),
    };
    writeln!(s, "lag_cap = {cap}").unwrap();
    writeln!(s, "ci_level = {}", spec.ci_level).unwrap();
    writeln!(s, "qq_exponent = {}", spec.qq_exponent).unwrap();
    writeln!(s, "truth_size = {}", spec.truth_size).unwrap();
    writeln!(s, "gamma = {}", spec.gamma).unwrap();
    s
}
