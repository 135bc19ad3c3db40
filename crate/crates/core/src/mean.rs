//! Adaptive Nadaraya-Watson estimation of the mean function.
//!
//! The pointwise estimator averages per-curve NW smoother values over the
//! curves with at least one design point within the bandwidth. The bandwidth
//! is chosen by minimizing an explicit risk bound made of a bias term
//! L̂² h^{2Ĥ} 𝔹, a stochastic term σ̂² 𝕍 and a serial-dependence penalty
//! D̄/P_N. Under a common design the penalty is constant over admissible
//! bandwidths and is dropped, which lets the same rule switch between
//! interpolation and smoothing.

use crate::domain::{BandwidthGrid, DesignKind, FunctionalSample};
use crate::error::{FtsError, Result};
use crate::kernel::window_stats;
use crate::locreg::RegularityEstimate;
use crate::presmooth::{noise_variance, PresmoothedSample};
use crate::scalar::Real;
use crate::stats::normal_quantile;

/// Truncation rule for the serial-dependence lag sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagCap {
    /// min(N-1, ⌊10·log10 N⌋), the runtime default.
    Rule,
    /// All N-1 lags, as the penalty formula is printed.
    Full,
    /// Explicit cap (still bounded by N-1).
    Fixed(usize),
}

impl LagCap {
    pub fn resolve(self, n: usize) -> usize {
        let max = n.saturating_sub(1);
        match self {
            LagCap::Rule => max.min((10.0 * (n as f64).log10()).floor() as usize),
            LagCap::Full => max,
            LagCap::Fixed(k) => max.min(k),
        }
    }
}

/// Plug-in inputs a mean risk bound is evaluated with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskInputs<F> {
    /// Local Hölder exponent estimate Ĥ_t.
    pub exponent: F,
    /// Local Hölder constant estimate L̂²_t.
    pub constant_sq: F,
    /// Noise variance estimate σ̂²(t).
    pub noise_var: F,
    /// Empirical dependence bound D̄(t) (zero under a common design).
    pub dependence: F,
}

/// One bandwidth row of a risk profile. Infeasible bandwidths (no covered
/// curve) keep +∞ sentinels so the profile stays aligned with the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskRow<F> {
    pub h: F,
    pub bias: F,
    pub stochastic: F,
    pub penalty: F,
    pub total: F,
    /// Number of curves with a design point within h (P_N).
    pub covered: usize,
    pub feasible: bool,
}

/// Risk-bound decomposition over a bandwidth grid plus its argmin.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskProfile<F> {
    pub t: F,
    pub rows: Vec<RiskRow<F>>,
    pub argmin_index: usize,
    pub h_star: F,
    pub inputs: RiskInputs<F>,
}

/// Dense/sparse behaviour of the selected bandwidth under a common design.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// The selected window holds a single design point.
    Interpolation,
    /// The selected window holds several design points.
    Smoothing,
}

/// Pointwise mean estimate with its confidence-interval components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate<F> {
    pub t: F,
    pub value: F,
    pub h_star: F,
    pub p_n: usize,
    /// Σ̂(t): plug-in for the smoothing-noise variance component.
    pub smoothing_var: F,
    /// 𝕊̂(t): plug-in for the series variance component.
    pub series_var: F,
    pub ci_lo: F,
    pub ci_hi: F,
    pub regime: Option<Regime>,
}

/// Options of the adaptive mean estimator.
#[derive(Debug, Clone, Copy)]
pub struct MeanOptions<F> {
    /// Two-sided confidence level, default 0.95.
    pub ci_level: F,
    pub lag_cap: LagCap,
}

impl<F: Real> Default for MeanOptions<F> {
    fn default() -> Self {
        Self {
            ci_level: F::of(0.95),
            lag_cap: LagCap::Rule,
        }
    }
}

/// Mean estimate at (t, h): average of per-curve NW values over covered
/// curves. Errors when no curve is covered.
pub fn mean_at<F: Real>(sample: &FunctionalSample<F>, t: F, h: F) -> Result<(F, usize)> {
    if !(h > F::zero()) {
        return Err(FtsError::InvalidBandwidth(format!(
            "bandwidth must be positive, got {h}"
        )));
    }
    let mut p = 0usize;
    let mut acc = F::zero();
    for curve in sample.curves() {
        let st = window_stats(curve, t, h, F::zero());
        if st.covered() {
            p += 1;
            acc = acc + st.estimate;
        }
    }
    if p == 0 {
        return Err(FtsError::EmptyWindow(format!(
            "no curve has a design point within {h} of {t}"
        )));
    }
    Ok((acc / F::of(p as f64), p))
}

/// Dependence bound of a raw value series: empirical variance plus twice the
/// absolute lag sums, truncated by `cap`. The inner sum at lag ℓ runs over
/// the first N-ℓ-1 terms while the normalizer is 1/(N-ℓ).
pub fn dependence_bound_values<F: Real>(x: &[F], cap: LagCap) -> F {
    let n = x.len();
    let nf = F::of(n as f64);
    let mean = x.iter().copied().sum::<F>() / nf;
    let mut acc = x.iter().map(|&v| (v - mean) * (v - mean)).sum::<F>() / nf;
    for lag in 1..=cap.resolve(n) {
        let mut s = F::zero();
        for i in 0..n.saturating_sub(lag + 1) {
            s = s + (x[i] - mean) * (x[i + lag] - mean);
        }
        acc = acc + F::of(2.0) * s.abs() / F::of((n - lag) as f64);
    }
    acc
}

/// Empirical dependence bound: variance of the presmoothed values at t plus
/// twice the absolute lag sums, truncated by `cap`.
pub fn dependence_bound<F: Real>(
    pres: &PresmoothedSample<'_, F>,
    t: F,
    cap: LagCap,
) -> Result<F> {
    let n = pres.n_curves();
    let mut x = Vec::with_capacity(n);
    for i in 0..n {
        x.push(pres.eval(i, t)?);
    }
    Ok(dependence_bound_values(&x, cap))
}

/// Risk-bound row at one bandwidth.
pub fn risk_bound<F: Real>(
    sample: &FunctionalSample<F>,
    t: F,
    h: F,
    inputs: &RiskInputs<F>,
) -> RiskRow<F> {
    let alpha = F::of(2.0) * inputs.exponent;
    let mut p = 0usize;
    let mut bias_acc = F::zero();
    let mut var_acc = F::zero();
    for curve in sample.curves() {
        let st = window_stats(curve, t, h, alpha);
        if st.covered() {
            p += 1;
            bias_acc = bias_acc + st.weight_abs_sum * st.moment;
            var_acc = var_acc + st.weight_abs_sum * st.max_weight;
        }
    }
    if p == 0 {
        let inf = F::infinity();
        return RiskRow {
            h,
            bias: inf,
            stochastic: inf,
            penalty: inf,
            total: inf,
            covered: 0,
            feasible: false,
        };
    }
    let pf = F::of(p as f64);
    let bias = inputs.constant_sq * h.powf(alpha) * (bias_acc / pf);
    let stochastic = inputs.noise_var * (var_acc / (pf * pf));
    let penalty = inputs.dependence / pf;
    RiskRow {
        h,
        bias,
        stochastic,
        penalty,
        total: bias + stochastic + penalty,
        covered: p,
        feasible: true,
    }
}

/// Scan the grid and take the risk-bound argmin, ties to the smaller h.
pub fn select_bandwidth<F: Real>(
    sample: &FunctionalSample<F>,
    t: F,
    grid: &BandwidthGrid<F>,
    reg: &RegularityEstimate<F>,
    noise_var: F,
    dependence: F,
) -> Result<RiskProfile<F>> {
    let inputs = RiskInputs {
        exponent: reg.exponent,
        constant_sq: reg.constant_sq,
        noise_var,
        dependence,
    };
    build_profile(sample, t, grid, inputs)
}

fn build_profile<F: Real>(
    sample: &FunctionalSample<F>,
    t: F,
    grid: &BandwidthGrid<F>,
    inputs: RiskInputs<F>,
) -> Result<RiskProfile<F>> {
    let mut rows = Vec::with_capacity(grid.len());
    let mut best: Option<(usize, F)> = None;
    for (i, &h) in grid.values().iter().enumerate() {
        let row = risk_bound(sample, t, h, &inputs);
        if row.feasible {
            match best {
                Some((_, cur)) if row.total >= cur => {}
                _ => best = Some((i, row.total)),
            }
        }
        rows.push(row);
    }
    let (argmin_index, _) = best.ok_or_else(|| {
        FtsError::NoFeasibleBandwidth(format!(
            "no bandwidth in the grid covers any curve at t={t}"
        ))
    })?;
    Ok(RiskProfile {
        t,
        rows,
        argmin_index,
        h_star: grid.values()[argmin_index],
        inputs,
    })
}

/// Common-design selection: admissible bandwidths are those whose window
/// around t holds a design point (then every curve is covered), the penalty
/// is dropped, and the selected window is classified as interpolation or
/// smoothing.
pub fn common_design_profile<F: Real>(
    sample: &FunctionalSample<F>,
    t: F,
    grid: &BandwidthGrid<F>,
    reg: &RegularityEstimate<F>,
    noise_var: F,
) -> Result<(RiskProfile<F>, Regime)> {
    if sample.design() != DesignKind::Common {
        return Err(FtsError::InvalidConfig(
            "common-design selection requires a common-design sample".into(),
        ));
    }
    let profile = select_bandwidth(sample, t, grid, reg, noise_var, F::zero())?;
    let points = sample.curve(0).window(t, profile.h_star).len();
    let regime = if points <= 1 {
        Regime::Interpolation
    } else {
        Regime::Smoothing
    };
    Ok((profile, regime))
}

/// Σ̂(t; h): plug-in for the noise part of the asymptotic variance,
/// σ̂²(t) · P_N⁻¹ Σ_n π_n Σ_i W²_{n,i}.
pub fn smoothing_variance<F: Real>(
    sample: &FunctionalSample<F>,
    t: F,
    h: F,
    noise_var: F,
) -> Result<F> {
    let mut p = 0usize;
    let mut acc = F::zero();
    for curve in sample.curves() {
        let st = window_stats(curve, t, h, F::zero());
        if st.covered() {
            p += 1;
            acc = acc + st.sum_sq_weight;
        }
    }
    if p == 0 {
        return Err(FtsError::EmptyWindow(format!(
            "no curve covered at t={t}, h={h}"
        )));
    }
    Ok(noise_var * acc / F::of(p as f64))
}

/// 𝕊̂(t; h): plug-in for the series part of the asymptotic variance, built
/// from signed empirical autocovariances of the presmoothed values weighted
/// by the pair fractions p_ℓ = Σ_i π_i π_{i+ℓ} / P_N, floored at zero.
pub fn series_variance<F: Real>(
    pres: &PresmoothedSample<'_, F>,
    t: F,
    h: F,
    cap: LagCap,
) -> Result<F> {
    let sample = pres.sample();
    let n = sample.n_curves();
    let mut x = Vec::with_capacity(n);
    for i in 0..n {
        x.push(pres.eval(i, t)?);
    }
    let pis: Vec<bool> = sample.curves().iter().map(|c| c.covers(t, h)).collect();
    let p: usize = pis.iter().filter(|&&b| b).count();
    if p == 0 {
        return Err(FtsError::EmptyWindow(format!(
            "no curve covered at t={t}, h={h}"
        )));
    }
    let nf = F::of(n as f64);
    let mean = x.iter().copied().sum::<F>() / nf;
    let gamma0 = x.iter().map(|&v| (v - mean) * (v - mean)).sum::<F>() / nf;
    let mut acc = gamma0;
    for lag in 1..=cap.resolve(n) {
        let mut pairs = 0usize;
        let mut s = F::zero();
        for i in 0..n - lag {
            if pis[i] && pis[i + lag] {
                pairs += 1;
            }
            s = s + (x[i] - mean) * (x[i + lag] - mean);
        }
        let p_l = F::of(pairs as f64) / F::of(p as f64);
        let gamma_l = s / F::of((n - lag) as f64);
        acc = acc + F::of(2.0) * p_l * gamma_l;
    }
    Ok(acc.max(F::zero()))
}

/// Components needed to standardize a mean estimate at an externally chosen
/// bandwidth (undersmoothed CLT checks use h = (h*)^1.1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CltComponents<F> {
    pub value: F,
    pub h: F,
    pub p_n: usize,
    pub smoothing_var: F,
    pub series_var: F,
}

pub fn clt_components<F: Real>(
    sample: &FunctionalSample<F>,
    pres: &PresmoothedSample<'_, F>,
    t: F,
    h: F,
    noise_var: F,
    cap: LagCap,
) -> Result<CltComponents<F>> {
    let (value, p_n) = mean_at(sample, t, h)?;
    Ok(CltComponents {
        value,
        h,
        p_n,
        smoothing_var: smoothing_variance(sample, t, h, noise_var)?,
        series_var: series_variance(pres, t, h, cap)?,
    })
}

/// Full adaptive mean estimate at t: noise variance, dependence bound (or
/// common-design restriction), risk-bound bandwidth, point estimate and a
/// normal confidence interval from the variance plug-ins.
pub fn adaptive_mean<F: Real>(
    sample: &FunctionalSample<F>,
    pres: &PresmoothedSample<'_, F>,
    t: F,
    reg: &RegularityEstimate<F>,
    grid: &BandwidthGrid<F>,
    opts: &MeanOptions<F>,
) -> Result<MeanEstimate<F>> {
    let noise_var = noise_variance(sample, t);
    let (profile, regime) = match sample.design() {
        DesignKind::Common => {
            let (p, r) = common_design_profile(sample, t, grid, reg, noise_var)?;
            (p, Some(r))
        }
        DesignKind::Independent => {
            let dep = dependence_bound(pres, t, opts.lag_cap)?;
            (
                select_bandwidth(sample, t, grid, reg, noise_var, dep)?,
                None,
            )
        }
    };
    let (value, p_n) = mean_at(sample, t, profile.h_star)?;
    let smoothing_var = smoothing_variance(sample, t, profile.h_star, noise_var)?;
    let series_var = series_variance(pres, t, profile.h_star, opts.lag_cap)?;
    let z = normal_quantile((F::one() + opts.ci_level) / F::of(2.0));
    let half = z * ((smoothing_var + series_var) / F::of(p_n as f64)).sqrt();
    Ok(MeanEstimate {
        t,
        value,
        h_star: profile.h_star,
        p_n,
        smoothing_var,
        series_var,
        ci_lo: value - half,
        ci_hi: value + half,
        regime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{DomainInterval, ObservedCurve};
    use crate::presmooth::presmooth;

    fn unit() -> DomainInterval<f64> {
        DomainInterval::unit()
    }

    fn indep(curves: Vec<ObservedCurve<f64>>) -> FunctionalSample<f64> {
        FunctionalSample::new(curves, DesignKind::Independent, unit()).unwrap()
    }

    fn reg_with(h: f64, l2: f64) -> RegularityEstimate<f64> {
        RegularityEstimate {
            t: 0.5,
            delta: 0.2,
            exponent: h,
            raw_exponent: h,
            constant_sq: l2,
            order: 0,
            alpha: h,
            shifted: false,
            saturated: false,
        }
    }

    #[test]
    fn lag_cap_rule() {
        assert_eq!(LagCap::Rule.resolve(1000), 30);
        assert_eq!(LagCap::Rule.resolve(2), 1);
        assert_eq!(LagCap::Full.resolve(100), 99);
        assert_eq!(LagCap::Fixed(5).resolve(100), 5);
        assert_eq!(LagCap::Fixed(500).resolve(100), 99);
    }

    #[test]
    fn constant_curves_give_constant_mean() {
        let mk = || {
            ObservedCurve::new(vec![0.2, 0.5, 0.8], vec![3.0, 3.0, 3.0]).unwrap()
        };
        let s = indep(vec![mk(), mk()]);
        for &h in &[0.05, 0.2, 0.9] {
            let (v, p) = mean_at(&s, 0.5, h).unwrap();
            assert!((v - 3.0).abs() < 1e-15, "h={h}");
            assert!(p >= 1);
        }
    }

    #[test]
    fn single_contributing_curve() {
        let a = ObservedCurve::new(vec![0.49, 0.51], vec![5.0, 5.0]).unwrap();
        let b = ObservedCurve::new(vec![0.05, 0.95], vec![100.0, 100.0]).unwrap();
        let s = indep(vec![a, b]);
        let (v, p) = mean_at(&s, 0.5, 0.05).unwrap();
        assert_eq!(p, 1);
        assert_eq!(v, 5.0);
    }

    #[test]
    fn empty_window_is_an_error() {
        let a = ObservedCurve::new(vec![0.05, 0.95], vec![1.0, 1.0]).unwrap();
        let s = indep(vec![a.clone(), a]);
        assert!(matches!(
            mean_at(&s, 0.5, 0.01),
            Err(FtsError::EmptyWindow(_))
        ));
    }

    #[test]
    fn mean_is_shift_equivariant() {
        let times1 = vec![0.1, 0.42, 0.55, 0.8];
        let times2 = vec![0.3, 0.47, 0.6, 0.97];
        let y1 = vec![1.0, 2.0, -0.5, 0.7];
        let y2 = vec![0.3, -1.2, 2.2, 0.0];
        let c = 4.2;
        let mk = |times: &[f64], y: &[f64], shift: f64| {
            ObservedCurve::new(times.to_vec(), y.iter().map(|v| v + shift).collect()).unwrap()
        };
        let s0 = indep(vec![mk(&times1, &y1, 0.0), mk(&times2, &y2, 0.0)]);
        let s1 = indep(vec![mk(&times1, &y1, c), mk(&times2, &y2, c)]);
        let (v0, _) = mean_at(&s0, 0.5, 0.1).unwrap();
        let (v1, _) = mean_at(&s1, 0.5, 0.1).unwrap();
        assert!((v1 - (v0 + c)).abs() < 1e-12);
    }

    #[test]
    fn risk_hand_instance_two_curves_one_point_each() {
        // one in-window point per curve at distance h/2
        let h = 0.1;
        let t = 0.5;
        let a = ObservedCurve::new(vec![t - h / 2.0, 0.95], vec![1.0, 0.0]).unwrap();
        let b = ObservedCurve::new(vec![t + h / 2.0, 0.99], vec![2.0, 0.0]).unwrap();
        let s = indep(vec![a, b]);
        let (hh, l2, sig, dep) = (0.4, 2.0, 0.3, 1.5);
        let row = risk_bound(
            &s,
            t,
            h,
            &RiskInputs {
                exponent: hh,
                constant_sq: l2,
                noise_var: sig,
                dependence: dep,
            },
        );
        assert!(row.feasible);
        assert_eq!(row.covered, 2);
        let expect_bias = l2 * h.powf(2.0 * hh) * 0.5f64.powf(2.0 * hh);
        assert!((row.bias - expect_bias).abs() < 1e-15);
        assert!((row.stochastic - sig * 0.5).abs() < 1e-15);
        assert!((row.penalty - dep / 2.0).abs() < 1e-15);
        assert_eq!(row.total, row.bias + row.stochastic + row.penalty);
    }

    #[test]
    fn risk_bias_moment_is_bounded_by_one_for_huge_h() {
        let times: Vec<f64> = (1..=30).map(|i| i as f64 / 30.0).collect();
        let vals: Vec<f64> = times.iter().map(|t| t.sin()).collect();
        let c = ObservedCurve::new(times, vals).unwrap();
        let s = indep(vec![c.clone(), c]);
        let (hh, l2) = (0.35, 1.7);
        let h = 0.99;
        let row = risk_bound(
            &s,
            0.5,
            h,
            &RiskInputs {
                exponent: hh,
                constant_sq: l2,
                noise_var: 0.0,
                dependence: 0.0,
            },
        );
        assert!(row.bias <= l2 * h.powf(2.0 * hh) + 1e-12);
    }

    #[test]
    fn single_curve_single_point_unit_variance_factor() {
        let a = ObservedCurve::new(vec![0.5, 0.95], vec![1.0, 0.0]).unwrap();
        let b = ObservedCurve::new(vec![0.05, 0.9], vec![0.0, 0.0]).unwrap();
        let s = indep(vec![a, b]);
        let row = risk_bound(
            &s,
            0.5,
            0.02,
            &RiskInputs {
                exponent: 0.5,
                constant_sq: 1.0,
                noise_var: 1.0,
                dependence: 0.0,
            },
        );
        // only curve 0 covered, weight 1 on one point: V = 1/P² · 1 = 1
        assert_eq!(row.covered, 1);
        assert!((row.stochastic - 1.0).abs() < 1e-15);
    }

    #[test]
    fn select_single_feasible_candidate() {
        let a = ObservedCurve::new(vec![0.45, 0.55], vec![1.0, 2.0]).unwrap();
        let s = indep(vec![a.clone(), a]);
        let grid = BandwidthGrid::new(vec![0.2], &unit()).unwrap();
        let p = select_bandwidth(&s, 0.5, &grid, &reg_with(0.5, 1.0), 0.1, 0.5).unwrap();
        assert_eq!(p.h_star, 0.2);
        assert_eq!(p.argmin_index, 0);
        let row = &p.rows[0];
        assert_eq!(row.total, row.bias + row.stochastic + row.penalty);
    }

    #[test]
    fn no_feasible_bandwidth_errors() {
        let a = ObservedCurve::new(vec![0.05, 0.95], vec![1.0, 2.0]).unwrap();
        let s = indep(vec![a.clone(), a]);
        let grid = BandwidthGrid::new(vec![0.001, 0.002], &unit()).unwrap();
        assert!(matches!(
            select_bandwidth(&s, 0.5, &grid, &reg_with(0.5, 1.0), 0.1, 0.5),
            Err(FtsError::NoFeasibleBandwidth(_))
        ));
    }

    #[test]
    fn infeasible_rows_keep_infinite_sentinels() {
        let a = ObservedCurve::new(vec![0.48, 0.52], vec![1.0, 2.0]).unwrap();
        let s = indep(vec![a.clone(), a]);
        let grid = BandwidthGrid::new(vec![0.001, 0.1], &unit()).unwrap();
        let p = select_bandwidth(&s, 0.5, &grid, &reg_with(0.5, 1.0), 0.1, 0.5).unwrap();
        assert!(!p.rows[0].feasible);
        assert!(p.rows[0].total.is_infinite());
        assert_eq!(p.argmin_index, 1);
    }

    #[test]
    fn dependence_bound_hand_cases() {
        // constant presmoothed values -> 0 (binary-exact design points)
        let mk = |v: f64| ObservedCurve::new(vec![0.25, 0.75], vec![v, v]).unwrap();
        let s = indep(vec![mk(2.0), mk(2.0)]);
        let p = presmooth(&s, 0.5).unwrap();
        assert_eq!(dependence_bound(&p, 0.5, LagCap::Full).unwrap(), 0.0);

        // N=2: variance term plus one lag term whose printed inner sum is empty
        let s2 = indep(vec![mk(1.0), mk(3.0)]);
        let p2 = presmooth(&s2, 0.5).unwrap();
        let d = dependence_bound(&p2, 0.5, LagCap::Full).unwrap();
        // values are (1, 3): mean 2, variance (1+1)/2 = 1; lag-1 inner sum empty
        assert_eq!(d, 1.0);
    }

    #[test]
    fn zero_noise_constant_curves_degenerate_ci() {
        let mk = || ObservedCurve::new(vec![0.2, 0.5, 0.8], vec![1.5, 1.5, 1.5]).unwrap();
        let s = indep(vec![mk(), mk(), mk()]);
        let pres = presmooth(&s, 0.3).unwrap();
        let grid = BandwidthGrid::new(vec![0.1, 0.3], &unit()).unwrap();
        let est = adaptive_mean(
            &s,
            &pres,
            0.5,
            &reg_with(0.5, 0.0),
            &grid,
            &MeanOptions::default(),
        )
        .unwrap();
        assert_eq!(est.value, 1.5);
        assert_eq!(est.smoothing_var, 0.0);
        assert_eq!(est.series_var, 0.0);
        assert_eq!(est.ci_lo, est.value);
        assert_eq!(est.ci_hi, est.value);
    }

    #[test]
    fn common_design_regimes() {
        // equidistant grid of 10 points; t on a grid point
        let times: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        let mk = |scale: f64| {
            ObservedCurve::new(
                times.clone(),
                times.iter().map(|t| scale * t).collect(),
            )
            .unwrap()
        };
        let s = FunctionalSample::new(
            vec![mk(1.0), mk(2.0), mk(3.0)],
            DesignKind::Common,
            unit(),
        )
        .unwrap();
        // h below the gap: window holds exactly the grid point at t
        let grid = BandwidthGrid::new(vec![0.05], &unit()).unwrap();
        let (p, regime) = common_design_profile(&s, 0.5, &grid, &reg_with(0.3, 1.0), 0.2).unwrap();
        assert_eq!(regime, Regime::Interpolation);
        assert_eq!(p.rows[0].penalty, 0.0);
        // big bandwidth: several grid points
        let grid2 = BandwidthGrid::new(vec![0.25], &unit()).unwrap();
        let (_, regime2) =
            common_design_profile(&s, 0.5, &grid2, &reg_with(0.3, 1.0), 0.2).unwrap();
        assert_eq!(regime2, Regime::Smoothing);
    }

    #[test]
    fn argmin_invariant_under_power_of_two_scaling() {
        // scaling every input of the total by 4 (exact in floating point)
        // leaves the argmin index unchanged
        let times: Vec<f64> = (1..=25).map(|i| i as f64 / 25.0).collect();
        let vals: Vec<f64> = times.iter().map(|t| (3.0 * t).sin()).collect();
        let c = ObservedCurve::new(times, vals).unwrap();
        let s = indep(vec![c.clone(), c.clone(), c]);
        let grid = BandwidthGrid::default_for(3, 25.0, &unit(), 21).unwrap();
        let reg = reg_with(0.45, 1.3);
        let p1 = select_bandwidth(&s, 0.5, &grid, &reg, 0.25, 0.8).unwrap();
        let reg4 = reg_with(0.45, 1.3 * 4.0);
        let p4 = select_bandwidth(&s, 0.5, &grid, &reg4, 0.25 * 4.0, 0.8 * 4.0).unwrap();
        assert_eq!(p1.argmin_index, p4.argmin_index);
        for (r1, r4) in p1.rows.iter().zip(&p4.rows) {
            if r1.feasible {
                assert_eq!(r4.total, r1.total * 4.0);
            }
        }
    }
}
