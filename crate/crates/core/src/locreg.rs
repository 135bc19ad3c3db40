//! Local regularity estimation.
//!
//! The local Hölder exponent H_t and constant L²_t of the process generating
//! the sample are read off mean squared increments of the presmoothed curves
//! at two nested spacings (Δ/2 and Δ). The estimator centers the increments
//! across curves, so only the stochastic part of the process drives the
//! exponent. For smoother processes the same statistics are applied to
//! derivative presmoothers of increasing order until the exponent estimate
//! drops away from 1, which yields the integer order δ̂ and the full
//! regularity α̂ = δ̂ + Ĥ.

use crate::domain::{BandwidthGrid, FunctionalSample};
use crate::error::{FtsError, Result};
use crate::presmooth::{cv_derivative_bandwidth, presmooth_derivative, PresmoothedSample};
use crate::scalar::Real;

/// Lower clamp for the exponent estimate; keeps downstream h^{2Ĥ} usable.
pub const EXPONENT_FLOOR: f64 = 0.01;

/// Local regularity at one domain point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityEstimate<F> {
    /// Evaluation point.
    pub t: F,
    /// Increment window width Δ used for the estimate.
    pub delta: F,
    /// Hölder exponent estimate, clamped to [0.01, 1].
    pub exponent: F,
    /// The unclamped log-ratio, kept for diagnostics.
    pub raw_exponent: F,
    /// Hölder constant estimate L̂² at the detected order.
    pub constant_sq: F,
    /// Detected derivative order δ̂.
    pub order: usize,
    /// α̂ = δ̂ + Ĥ at order δ̂.
    pub alpha: F,
    /// The increment window had to be shifted inward to fit the domain.
    pub shifted: bool,
    /// The order search hit `max_order` with the exponent still near 1.
    pub saturated: bool,
}

/// The two nested increment statistics around t: t3 - t1 = Δ, t2 = (t1+t3)/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncrementTriple<F> {
    pub t1: F,
    pub t2: F,
    pub t3: F,
    /// θ̂(t1, t3), the full-width mean squared increment.
    pub theta_full: F,
    /// θ̂(t1, t2), the half-width mean squared increment.
    pub theta_half: F,
    /// Whether t2 was moved away from the requested t to fit the domain.
    pub shifted: bool,
}

/// Mean squared increment of the presmoothed curves between u and v.
pub fn mean_squared_increment<F: Real>(
    pres: &PresmoothedSample<'_, F>,
    u: F,
    v: F,
) -> Result<F> {
    let n = pres.n_curves();
    let mut acc = F::zero();
    for i in 0..n {
        let d = pres.eval(i, v)? - pres.eval(i, u)?;
        acc = acc + d * d;
    }
    Ok(acc / F::of(n as f64))
}

/// Increment window width rule Δ = exp(-(log λ̂)^γ).
///
/// Requires λ̂ > e (so log λ̂ > 1) and 0 < γ < 1.
pub fn delta_window<F: Real>(lambda_hat: F, gamma: F) -> Result<F> {
    if !(lambda_hat > F::of(std::f64::consts::E)) {
        return Err(FtsError::InvalidDomain(format!(
            "window rule needs mean sampling rate greater than e, got {lambda_hat}"
        )));
    }
    if !(gamma > F::zero() && gamma < F::one()) {
        return Err(FtsError::InvalidConfig(format!(
            "gamma must lie in (0, 1), got {gamma}"
        )));
    }
    Ok((-(lambda_hat.ln().powf(gamma))).exp())
}

/// Build the increment triple at t, shifting it inward when [t-Δ/2, t+Δ/2]
/// leaves the domain.
pub fn increment_triple<F: Real>(
    pres: &PresmoothedSample<'_, F>,
    t: F,
    delta: F,
) -> Result<IncrementTriple<F>> {
    increment_triple_impl(pres, t, delta, None)
}

/// Like [`increment_triple`], with the expected measurement-noise
/// contribution of the presmoother subtracted from both squared increments.
///
/// `noise_var` should be a domain-wide noise level (see
/// [`crate::presmooth::global_noise_variance`]); the subtraction uses the
/// exact per-curve weight factors at the presmoothing bandwidth and is
/// floored at 1% of the raw statistic. Only level presmoothing (order 0)
/// carries the correction.
pub fn increment_triple_denoised<F: Real>(
    pres: &PresmoothedSample<'_, F>,
    t: F,
    delta: F,
    noise_var: F,
) -> Result<IncrementTriple<F>> {
    if pres.order() != 0 {
        return Err(FtsError::InvalidConfig(
            "the noise correction applies to level presmoothing only".into(),
        ));
    }
    increment_triple_impl(pres, t, delta, Some(noise_var))
}

fn increment_triple_impl<F: Real>(
    pres: &PresmoothedSample<'_, F>,
    t: F,
    delta: F,
    denoise: Option<F>,
) -> Result<IncrementTriple<F>> {
    let domain = pres.sample().domain();
    if !(delta > F::zero()) || delta >= domain.length() {
        return Err(FtsError::InvalidConfig(format!(
            "increment window {delta} does not fit the domain"
        )));
    }
    let half = delta / F::of(2.0);
    let lo = domain.lo() + half;
    let hi = domain.hi() - half;
    let t2 = if t < lo {
        lo
    } else if t > hi {
        hi
    } else {
        t
    };
    let shifted = t2 != t;
    let (t1, t3) = (t2 - half, t2 + half);
    let n = pres.n_curves();
    let nf = F::of(n as f64);
    // Increments are centered across curves: a non-constant mean function
    // has smooth increments that would otherwise swamp the rough part at
    // practical window widths and masquerade as extra smoothness.
    let mut d_full = Vec::with_capacity(n);
    let mut d_half = Vec::with_capacity(n);
    let mut scale = F::zero();
    for i in 0..n {
        let v1 = pres.eval(i, t1)?;
        let v2 = pres.eval(i, t2)?;
        let v3 = pres.eval(i, t3)?;
        d_full.push(v3 - v1);
        d_half.push(v2 - v1);
        scale = scale.max(v1.abs()).max(v2.abs()).max(v3.abs());
    }
    let mean_full = d_full.iter().copied().sum::<F>() / nf;
    let mean_half = d_half.iter().copied().sum::<F>() / nf;
    let theta_full = d_full
        .iter()
        .map(|&d| (d - mean_full) * (d - mean_full))
        .sum::<F>()
        / nf;
    let theta_half = d_half
        .iter()
        .map(|&d| (d - mean_half) * (d - mean_half))
        .sum::<F>()
        / nf;
    // increments below the evaluation rounding scale are treated as zero
    let floor = F::of(1e-12) * scale;
    let floor_sq = floor * floor;
    if !(theta_full > floor_sq) || !(theta_half > floor_sq) {
        return Err(FtsError::DegenerateIncrements(format!(
            "squared increments vanish near t={t} (constant sample paths?)"
        )));
    }
    let (theta_full, theta_half) = match denoise {
        Some(nv) => {
            let sample = pres.sample();
            let b = pres.bandwidth();
            let corr_full = nv * crate::presmooth::increment_noise_factor(sample, t1, t3, b);
            let corr_half = nv * crate::presmooth::increment_noise_factor(sample, t1, t2, b);
            let guard = F::of(0.01);
            (
                (theta_full - corr_full).max(theta_full * guard),
                (theta_half - corr_half).max(theta_half * guard),
            )
        }
        None => (theta_full, theta_half),
    };
    Ok(IncrementTriple {
        t1,
        t2,
        t3,
        theta_full,
        theta_half,
        shifted,
    })
}

/// Hölder exponent estimate from one increment triple:
/// (log θ̂(t1,t3) - log θ̂(t1,t2)) / (2 log 2), clamped to [0.01, 1].
/// Returns (clamped, raw).
pub fn holder_exponent_from<F: Real>(triple: &IncrementTriple<F>) -> (F, F) {
    let raw =
        (triple.theta_full.ln() - triple.theta_half.ln()) / (F::of(2.0) * F::of(2.0f64.ln()));
    let clamped = raw.max(F::of(EXPONENT_FLOOR)).min(F::one());
    (clamped, raw)
}

/// Hölder exponent at t from the presmoothed sample.
pub fn holder_exponent<F: Real>(
    pres: &PresmoothedSample<'_, F>,
    t: F,
    delta: F,
) -> Result<(F, F)> {
    Ok(holder_exponent_from(&increment_triple(pres, t, delta)?))
}

/// Hölder constant estimate L̂² = θ̂(t1,t3) · Δ^{-2Ĥ}.
pub fn holder_constant_from<F: Real>(triple: &IncrementTriple<F>, exponent: F) -> F {
    let delta = triple.t3 - triple.t1;
    triple.theta_full * delta.powf(-(F::of(2.0) * exponent))
}

/// Hölder constant at t (recomputes the triple).
pub fn holder_constant<F: Real>(
    pres: &PresmoothedSample<'_, F>,
    t: F,
    delta: F,
    exponent: F,
) -> Result<F> {
    Ok(holder_constant_from(&increment_triple(pres, t, delta)?, exponent))
}

/// Bandwidth-to-span fraction of the scale-matched increment statistics.
pub const SCALE_FRACTION: f64 = 0.125;

/// Order-0 regularity estimate with scale-matched presmoothing.
///
/// The full-span statistic θ̂(t1, t3) is computed from curves smoothed at
/// b = Δ·frac and the half-span statistic θ̂(t1, t2) at b = Δ·frac/2, with
/// frac = [`SCALE_FRACTION`]. Smoothing attenuates a rough path's mean
/// squared increment over a span d by a factor that depends on b/d only, so
/// matching b to the span cancels the attenuation in the log-ratio that
/// estimates the exponent. Both statistics subtract the expected
/// measurement-noise contribution at the level `noise_var`.
pub fn regularity_level_scaled<F: Real>(
    sample: &FunctionalSample<F>,
    t: F,
    delta: F,
    noise_var: F,
) -> Result<RegularityEstimate<F>> {
    let frac = F::of(SCALE_FRACTION);
    // sparse designs cannot support windows below the design gap: floor the
    // half-span bandwidth at 1.5 mean gaps, and keep the full-span bandwidth
    // at exactly twice the half-span one so the attenuation still cancels
    let gap_floor = F::of(1.5) * sample.domain().length() / sample.lambda_hat();
    let b_half = (delta * frac / F::of(2.0)).max(gap_floor);
    let b_full = b_half + b_half;
    let pres_full = crate::presmooth::presmooth(sample, b_full)?;
    let pres_half = crate::presmooth::presmooth(sample, b_half)?;
    let full = increment_triple_impl(&pres_full, t, delta, Some(noise_var))?;
    let half = increment_triple_impl(&pres_half, t, delta, Some(noise_var))?;
    let triple = IncrementTriple {
        theta_half: half.theta_half,
        ..full
    };
    estimate_from_triple(t, delta, triple)
}

/// Order-0 regularity estimate (non-differentiable paths) at t.
pub fn regularity_level<F: Real>(
    pres: &PresmoothedSample<'_, F>,
    t: F,
    delta: F,
) -> Result<RegularityEstimate<F>> {
    estimate_from_triple(t, delta, increment_triple(pres, t, delta)?)
}

/// Order-0 regularity estimate with the measurement-noise correction.
pub fn regularity_level_denoised<F: Real>(
    pres: &PresmoothedSample<'_, F>,
    t: F,
    delta: F,
    noise_var: F,
) -> Result<RegularityEstimate<F>> {
    estimate_from_triple(t, delta, increment_triple_denoised(pres, t, delta, noise_var)?)
}

fn estimate_from_triple<F: Real>(
    t: F,
    delta: F,
    triple: IncrementTriple<F>,
) -> Result<RegularityEstimate<F>> {
    let (exponent, raw) = holder_exponent_from(&triple);
    let constant_sq = holder_constant_from(&triple, exponent);
    Ok(RegularityEstimate {
        t,
        delta,
        exponent,
        raw_exponent: raw,
        constant_sq,
        order: 0,
        alpha: exponent,
        shifted: triple.shifted,
        saturated: false,
    })
}

/// Options for the full order-searching regularity estimator.
#[derive(Debug, Clone)]
pub struct RegularityOptions<F> {
    /// Exponent of the window rule Δ = exp(-(log λ̂)^γ).
    pub gamma: F,
    /// Largest derivative order probed.
    pub max_order: usize,
    /// Candidate grid for the derivative-presmoothing cross-validation;
    /// `None` uses a geometric default grid derived from the sample.
    pub cv_candidates: Option<BandwidthGrid<F>>,
    /// Curves used in the derivative cross-validation (heavier fits).
    pub cv_subsample_derivative: usize,
    /// Seed of the cross-validation subsampling.
    pub seed: u64,
}

impl<F: Real> Default for RegularityOptions<F> {
    fn default() -> Self {
        Self {
            gamma: F::of(1.0 / 3.0),
            max_order: 3,
            cv_candidates: None,
            cv_subsample_derivative: 20,
            seed: 0,
        }
    }
}

/// Default cross-validation candidate grid: 15 geometric points from one
/// mean design gap up to a fifth of the domain.
pub fn default_cv_grid<F: Real>(sample: &FunctionalSample<F>) -> Result<BandwidthGrid<F>> {
    let domain = sample.domain();
    let min = (domain.length() / sample.lambda_hat()).min(domain.length() / F::of(10.0));
    let max = F::of(0.2) * domain.length();
    BandwidthGrid::geometric(min, max, 15, &domain)
}

/// Full local regularity estimation with derivative-order search.
///
/// Starts from level presmoothing; while the exponent estimate stays above
/// 1 - (log λ̂)^{-2} and the order budget allows, moves to the next
/// derivative presmoother. Returns the estimate at the stopping order.
pub fn local_regularity<F: Real>(
    sample: &FunctionalSample<F>,
    t: F,
    opts: &RegularityOptions<F>,
) -> Result<RegularityEstimate<F>> {
    let lambda_hat = sample.lambda_hat();
    let delta = delta_window(lambda_hat, opts.gamma)?;
    let threshold = F::one() - F::one() / lambda_hat.ln().powi(2);
    let grid = match &opts.cv_candidates {
        Some(g) => g.clone(),
        None => default_cv_grid(sample)?,
    };

    let noise = crate::presmooth::global_noise_variance(sample);
    let mut est = regularity_level_scaled(sample, t, delta, noise)?;

    while est.exponent >= threshold && est.order < opts.max_order {
        let d = est.order + 1;
        let bd = cv_derivative_bandwidth(
            sample,
            d,
            &grid,
            opts.cv_subsample_derivative,
            opts.seed.wrapping_add(d as u64),
        )?;
        let deriv = presmooth_derivative(sample, d, bd)?;
        let triple = increment_triple(&deriv, t, delta)?;
        let (exponent, raw) = holder_exponent_from(&triple);
        est = RegularityEstimate {
            t,
            delta,
            exponent,
            raw_exponent: raw,
            constant_sq: holder_constant_from(&triple, exponent),
            order: d,
            alpha: F::of(d as f64) + exponent,
            shifted: triple.shifted,
            saturated: false,
        };
    }
    est.saturated = est.exponent >= threshold;
    est.alpha = F::of(est.order as f64) + est.exponent;
    Ok(est)
}
