//! Curve presmoothing with one shared bandwidth.
//!
//! Every curve of a sample is smoothed by the same linear smoother so the
//! reconstructed curves keep the stationarity of the underlying series:
//! a Nadaraya-Watson smoother for levels, a local polynomial fit of degree
//! d+1 for d-th derivatives. A leave-one-observation-out cross-validation
//! picks the shared bandwidth, and `noise_variance` estimates the error
//! variance from neighbouring-observation differences.

use crate::domain::{BandwidthGrid, FunctionalSample, ObservedCurve};
use crate::error::{FtsError, Result};
use crate::kernel::epanechnikov;
use crate::scalar::Real;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A sample smoothed curve-by-curve with one shared bandwidth.
///
/// `order = 0` evaluates smoothed levels; `order = d >= 1` evaluates d-th
/// derivative estimates obtained from local polynomial fits of degree d+1.
#[derive(Debug, Clone, Copy)]
pub struct PresmoothedSample<'a, F: Real> {
    sample: &'a FunctionalSample<F>,
    bandwidth: F,
    order: usize,
}

impl<'a, F: Real> PresmoothedSample<'a, F> {
    pub fn sample(&self) -> &'a FunctionalSample<F> {
        self.sample
    }

    pub fn bandwidth(&self) -> F {
        self.bandwidth
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_curves(&self) -> usize {
        self.sample.n_curves()
    }

    /// Evaluate curve `n` at `u`.
    ///
    /// Level smoothing is total: an empty (or kernel-degenerate) window falls
    /// back to the value at the nearest design point. Derivative smoothing
    /// enlarges the window locally (doubling, at most three times) and errors
    /// out if the fit stays singular.
    pub fn eval(&self, n: usize, u: F) -> Result<F> {
        let curve = self.sample.curve(n);
        if self.order == 0 {
            Ok(nw_or_nearest(curve, u, self.bandwidth))
        } else {
            local_poly_derivative(curve, u, self.bandwidth, self.order)
        }
    }
}

fn nw_or_nearest<F: Real>(curve: &ObservedCurve<F>, u: F, b: F) -> F {
    let range = curve.window(u, b);
    let times = curve.times();
    let values = curve.values();
    let mut denom = F::zero();
    for i in range.clone() {
        denom = denom + epanechnikov((times[i] - u) / b);
    }
    if denom > F::zero() {
        let mut acc = F::zero();
        for i in range {
            acc = acc + epanechnikov((times[i] - u) / b) / denom * values[i];
        }
        acc
    } else {
        values[curve.nearest_index(u)]
    }
}

/// Weighted least-squares local polynomial of degree `d + 1`; returns the
/// d-th derivative estimate d!·β_d.
fn local_poly_derivative<F: Real>(curve: &ObservedCurve<F>, u: F, b: F, d: usize) -> Result<F> {
    let mut bw = b;
    for _ in 0..4 {
        let range = curve.window(u, bw);
        if range.len() >= d + 2 {
            if let Some(beta_d) = fit_poly_coeff(curve, range, u, bw, d) {
                return Ok(beta_d);
            }
        }
        bw = bw + bw;
    }
    Err(FtsError::SingularFit(format!(
        "local polynomial fit of degree {} stayed singular at u={u} after window enlargement",
        d + 1
    )))
}

/// Solve the weighted normal equations in the scaled basis z = (T-u)/bw and
/// return d!·(coefficient of (T-u)^d). `None` signals a singular system.
fn fit_poly_coeff<F: Real>(
    curve: &ObservedCurve<F>,
    range: std::ops::Range<usize>,
    u: F,
    bw: F,
    d: usize,
) -> Option<F> {
    let degree = d + 1;
    let dim = degree + 1;
    let times = curve.times();
    let values = curve.values();
    let mut gram = vec![F::zero(); dim * dim];
    let mut rhs = vec![F::zero(); dim];
    let mut live = 0usize;
    for i in range {
        let z = (times[i] - u) / bw;
        let w = epanechnikov(z);
        if !(w > F::zero()) {
            continue;
        }
        live += 1;
        let mut pow_j = F::one();
        let mut powers = Vec::with_capacity(dim);
        for _ in 0..dim {
            powers.push(pow_j);
            pow_j = pow_j * z;
        }
        for j in 0..dim {
            for k in j..dim {
                gram[j * dim + k] = gram[j * dim + k] + w * powers[j] * powers[k];
            }
            rhs[j] = rhs[j] + w * powers[j] * values[i];
        }
    }
    if live < dim {
        return None;
    }
    for j in 0..dim {
        for k in 0..j {
            gram[j * dim + k] = gram[k * dim + j];
        }
    }
    let beta = solve_symmetric(&mut gram, &mut rhs, dim)?;
    // back to the unscaled basis, then d-th derivative = d! * coefficient
    let mut factorial = F::one();
    for k in 2..=d {
        factorial = factorial * F::of(k as f64);
    }
    Some(factorial * beta[d] / bw.powi(d as i32))
}

/// Gaussian elimination with partial pivoting; `None` on a vanishing pivot.
fn solve_symmetric<F: Real>(a: &mut [F], b: &mut [F], n: usize) -> Option<Vec<F>> {
    let scale = (0..n)
        .map(|j| a[j * n + j].abs())
        .fold(F::zero(), |m, v| if v > m { v } else { m });
    let tiny = F::of(1e-12) * if scale > F::zero() { scale } else { F::one() };
    for col in 0..n {
        let mut pivot = col;
        for r in col + 1..n {
            if a[r * n + col].abs() > a[pivot * n + col].abs() {
                pivot = r;
            }
        }
        if a[pivot * n + col].abs() <= tiny {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let inv = F::one() / a[col * n + col];
        for r in col + 1..n {
            let factor = a[r * n + col] * inv;
            if factor == F::zero() {
                continue;
            }
            for k in col..n {
                a[r * n + k] = a[r * n + k] - factor * a[col * n + k];
            }
            b[r] = b[r] - factor * b[col];
        }
    }
    let mut x = vec![F::zero(); n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc = acc - a[col * n + k] * x[k];
        }
        x[col] = acc / a[col * n + col];
    }
    Some(x)
}

/// Presmooth every curve with the shared bandwidth `b` (levels).
pub fn presmooth<F: Real>(sample: &FunctionalSample<F>, b: F) -> Result<PresmoothedSample<'_, F>> {
    check_bandwidth(b)?;
    Ok(PresmoothedSample {
        sample,
        bandwidth: b,
        order: 0,
    })
}

/// Presmooth d-th derivatives (1 <= d <= 3) with the shared bandwidth `b`.
pub fn presmooth_derivative<F: Real>(
    sample: &FunctionalSample<F>,
    d: usize,
    b: F,
) -> Result<PresmoothedSample<'_, F>> {
    check_bandwidth(b)?;
    if d == 0 || d > 3 {
        return Err(FtsError::InvalidConfig(format!(
            "derivative order must be in 1..=3, got {d}"
        )));
    }
    Ok(PresmoothedSample {
        sample,
        bandwidth: b,
        order: d,
    })
}

fn check_bandwidth<F: Real>(b: F) -> Result<()> {
    if b > F::zero() {
        Ok(())
    } else {
        Err(FtsError::InvalidBandwidth(format!(
            "presmoothing bandwidth must be positive, got {b}"
        )))
    }
}

/// Leave-one-observation-out cross-validation score per candidate bandwidth,
/// averaged over a seeded random subsample of curves. Returns the winning
/// bandwidth (ties to the smaller one) together with all (b, score) pairs.
pub fn cv_scores<F: Real>(
    sample: &FunctionalSample<F>,
    candidates: &BandwidthGrid<F>,
    subsample: usize,
    seed: u64,
) -> Result<(F, Vec<(F, F)>)> {
    cv_scores_impl(sample, candidates, subsample, seed, 0)
}

/// Like [`cv_scores`] but returns the selected bandwidth only.
pub fn cv_bandwidth<F: Real>(
    sample: &FunctionalSample<F>,
    candidates: &BandwidthGrid<F>,
    subsample: usize,
    seed: u64,
) -> Result<F> {
    Ok(cv_scores(sample, candidates, subsample, seed)?.0)
}

/// Cross-validated bandwidth for the degree-(d+1) local polynomial used by
/// the d-th derivative presmoother. Scores leave-one-out level predictions
/// of the same fit.
pub fn cv_derivative_bandwidth<F: Real>(
    sample: &FunctionalSample<F>,
    d: usize,
    candidates: &BandwidthGrid<F>,
    subsample: usize,
    seed: u64,
) -> Result<F> {
    if d == 0 || d > 3 {
        return Err(FtsError::InvalidConfig(format!(
            "derivative order must be in 1..=3, got {d}"
        )));
    }
    Ok(cv_scores_impl(sample, candidates, subsample, seed, d)?.0)
}

fn cv_scores_impl<F: Real>(
    sample: &FunctionalSample<F>,
    candidates: &BandwidthGrid<F>,
    subsample: usize,
    seed: u64,
    order: usize,
) -> Result<(F, Vec<(F, F)>)> {
    let n = sample.n_curves();
    let take = subsample.clamp(1, n);
    let mut indices: Vec<usize> = if take == n {
        (0..n).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rand::seq::index::sample(&mut rng, n, take).into_vec()
    };
    indices.sort_unstable();

    let mut scores = Vec::with_capacity(candidates.len());
    let mut best: Option<(F, F)> = None;
    let mut any_genuine = false;
    for &b in candidates.values() {
        let mut err = F::zero();
        let mut count = 0usize;
        let mut genuine = 0usize;
        for &ci in &indices {
            let curve = sample.curve(ci);
            for i in 0..curve.len() {
                let (pred, is_genuine) = if order == 0 {
                    loo_nw_prediction(curve, i, b)
                } else {
                    loo_poly_prediction(curve, i, b, order)
                };
                if is_genuine {
                    genuine += 1;
                }
                let e = curve.values()[i] - pred;
                err = err + e * e;
                count += 1;
            }
        }
        let score = err / F::of(count as f64);
        scores.push((b, score));
        if genuine > 0 {
            any_genuine = true;
        }
        match best {
            Some((_, s)) if score >= s => {}
            _ => best = Some((b, score)),
        }
    }
    if !any_genuine {
        return Err(FtsError::NoValidBandwidth(
            "every candidate bandwidth produced empty leave-one-out windows".into(),
        ));
    }
    Ok((best.unwrap().0, scores))
}

/// Leave-one-out NW prediction of observation `i`; falls back to the nearest
/// other design point when the reduced window is degenerate. The boolean
/// reports whether a genuine kernel window was used.
fn loo_nw_prediction<F: Real>(curve: &ObservedCurve<F>, i: usize, b: F) -> (F, bool) {
    let times = curve.times();
    let values = curve.values();
    let t = times[i];
    let range = curve.window(t, b);
    let mut denom = F::zero();
    let mut num = F::zero();
    for k in range {
        if k == i {
            continue;
        }
        let w = epanechnikov((times[k] - t) / b);
        denom = denom + w;
        num = num + w * values[k];
    }
    if denom > F::zero() {
        (num / denom, true)
    } else {
        (values[nearest_other(curve, i)], false)
    }
}

fn loo_poly_prediction<F: Real>(curve: &ObservedCurve<F>, i: usize, b: F, d: usize) -> (F, bool) {
    let degree = d + 1;
    let dim = degree + 1;
    let times = curve.times();
    let values = curve.values();
    let t = times[i];
    let range = curve.window(t, b);
    let mut gram = vec![F::zero(); dim * dim];
    let mut rhs = vec![F::zero(); dim];
    let mut live = 0usize;
    for k in range {
        if k == i {
            continue;
        }
        let z = (times[k] - t) / b;
        let w = epanechnikov(z);
        if !(w > F::zero()) {
            continue;
        }
        live += 1;
        let mut powers = Vec::with_capacity(dim);
        let mut p = F::one();
        for _ in 0..dim {
            powers.push(p);
            p = p * z;
        }
        for j in 0..dim {
            for l in j..dim {
                gram[j * dim + l] = gram[j * dim + l] + w * powers[j] * powers[l];
            }
            rhs[j] = rhs[j] + w * powers[j] * values[k];
        }
    }
    if live >= dim {
        for j in 0..dim {
            for l in 0..j {
                gram[j * dim + l] = gram[l * dim + j];
            }
        }
        if let Some(beta) = solve_symmetric(&mut gram, &mut rhs, dim) {
            // prediction at z = 0 is the intercept
            return (beta[0], true);
        }
    }
    (values[nearest_other(curve, i)], false)
}

fn nearest_other<F: Real>(curve: &ObservedCurve<F>, i: usize) -> usize {
    let times = curve.times();
    let m = times.len();
    if i == 0 {
        1
    } else if i == m - 1 {
        m - 2
    } else if (times[i] - times[i - 1]) <= (times[i + 1] - times[i]) {
        i - 1
    } else {
        i + 1
    }
}

/// Pointwise noise-variance estimator: mean over curves of half the squared
/// difference of the two design-point observations closest to `t`.
pub fn noise_variance<F: Real>(sample: &FunctionalSample<F>, t: F) -> F {
    let mut acc = F::zero();
    for curve in sample.curves() {
        let i = curve.closest_pair_index(t);
        let d = curve.values()[i] - curve.values()[i + 1];
        acc = acc + F::of(0.5) * d * d;
    }
    acc / F::of(sample.n_curves() as f64)
}

/// Second-difference noise-variance estimator at `t`: pseudo-residuals over
/// the three design points nearest `t`, weighted so any locally linear path
/// component (in particular a steep mean function over a sparse design)
/// cancels exactly.
pub fn noise_variance_second_diff<F: Real>(sample: &FunctionalSample<F>, t: F) -> F {
    let mut acc = F::zero();
    for curve in sample.curves() {
        let m = curve.len();
        let k = curve.nearest_index(t).clamp(1, m - 2);
        let times = curve.times();
        let values = curve.values();
        let span = times[k + 1] - times[k - 1];
        let w = (times[k + 1] - times[k]) / span;
        let r = w * values[k - 1] + (F::one() - w) * values[k + 1] - values[k];
        let denom = w * w + (F::one() - w) * (F::one() - w) + F::one();
        acc = acc + r * r / denom;
    }
    acc / F::of(sample.n_curves() as f64)
}

/// Domain-wide noise level: the lower quartile of the second-difference
/// estimator over a coarse interior grid. Second differences remove the
/// local mean slope, and the remaining path contribution vanishes where the
/// paths are smoothest, so a low quantile tracks the pure noise variance;
/// the quartile (rather than the minimum) avoids the downward
/// order-statistic bias of a minimum over noisy values.
pub fn global_noise_variance<F: Real>(sample: &FunctionalSample<F>) -> F {
    let domain = sample.domain();
    let k = 21;
    let mut values: Vec<F> = (1..=k)
        .map(|i| {
            let t = domain.lo() + domain.length() * F::of(i as f64) / F::of((k + 1) as f64);
            noise_variance_second_diff(sample, t)
        })
        .collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[k / 4]
}

/// Mean over curves of the noise-variance factor of a presmoothed increment,
/// Σ_i (W_i(v) - W_i(u))², including the centering correction (1 - 1/N).
///
/// Multiplied by the noise variance this is exactly the expected noise
/// contribution to the centered mean squared increment at bandwidth `b`.
pub fn increment_noise_factor<F: Real>(
    sample: &FunctionalSample<F>,
    u: F,
    v: F,
    b: F,
) -> F {
    let n = sample.n_curves();
    let mut acc = F::zero();
    for curve in sample.curves() {
        acc = acc + curve_increment_factor(curve, u, v, b);
    }
    (F::one() - F::one() / F::of(n as f64)) * acc / F::of(n as f64)
}

fn curve_increment_factor<F: Real>(curve: &ObservedCurve<F>, u: F, v: F, b: F) -> F {
    let times = curve.times();
    let ru = curve.window(u, b);
    let rv = curve.window(v, b);
    let mut denom_u = F::zero();
    for i in ru.clone() {
        denom_u = denom_u + epanechnikov((times[i] - u) / b);
    }
    let mut denom_v = F::zero();
    for i in rv.clone() {
        denom_v = denom_v + epanechnikov((times[i] - v) / b);
    }
    // degenerate windows fall back to the nearest design point: weight 1
    let (nu, nv) = (curve.nearest_index(u), curve.nearest_index(v));
    let w_u = |i: usize| -> F {
        if denom_u > F::zero() {
            if ru.contains(&i) {
                epanechnikov((times[i] - u) / b) / denom_u
            } else {
                F::zero()
            }
        } else if i == nu {
            F::one()
        } else {
            F::zero()
        }
    };
    let w_v = |i: usize| -> F {
        if denom_v > F::zero() {
            if rv.contains(&i) {
                epanechnikov((times[i] - v) / b) / denom_v
            } else {
                F::zero()
            }
        } else if i == nv {
            F::one()
        } else {
            F::zero()
        }
    };
    let mut indices: Vec<usize> = ru.clone().chain(rv.clone()).chain([nu, nv]).collect();
    indices.sort_unstable();
    indices.dedup();
    let mut acc = F::zero();
    for i in indices {
        let d = w_v(i) - w_u(i);
        acc = acc + d * d;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{DesignKind, DomainInterval};

    fn sample_from(curves: Vec<ObservedCurve<f64>>) -> FunctionalSample<f64> {
        FunctionalSample::new(curves, DesignKind::Independent, DomainInterval::unit()).unwrap()
    }

    fn equidistant_curve(m: usize, f: impl Fn(f64) -> f64) -> ObservedCurve<f64> {
        let times: Vec<f64> = (1..=m).map(|i| i as f64 / m as f64).collect();
        let values: Vec<f64> = times.iter().map(|&t| f(t)).collect();
        ObservedCurve::new(times, values).unwrap()
    }

    #[test]
    fn constant_curves_stay_constant() {
        let s = sample_from(vec![
            equidistant_curve(20, |_| 3.5),
            equidistant_curve(20, |_| 3.5),
        ]);
        for &b in &[0.01, 0.1, 2.0] {
            let p = presmooth(&s, b).unwrap();
            for &u in &[0.05, 0.3, 0.77, 1.0] {
                assert!((p.eval(0, u).unwrap() - 3.5).abs() < 1e-12, "b={b} u={u}");
            }
        }
    }

    #[test]
    fn huge_bandwidth_gives_kernel_weighted_mean_of_everything() {
        let c = equidistant_curve(10, |t| t * t);
        let s = sample_from(vec![c.clone(), c.clone()]);
        let b = 2.0; // larger than the domain
        let p = presmooth(&s, b).unwrap();
        let u = 0.4;
        let mut denom = 0.0;
        let mut num = 0.0;
        for (&t, &y) in c.times().iter().zip(c.values()) {
            let w = epanechnikov((t - u) / b);
            denom += w;
            num += w * y;
        }
        assert!((p.eval(0, u).unwrap() - num / denom).abs() < 1e-14);
    }

    #[test]
    fn tiny_bandwidth_interpolates_design_points() {
        let c = equidistant_curve(25, |t| (7.3 * t).sin());
        let s = sample_from(vec![c.clone(), c.clone()]);
        let p = presmooth(&s, 0.01).unwrap(); // below the minimal gap 0.04
        for (i, &t) in c.times().iter().enumerate() {
            assert_eq!(p.eval(0, t).unwrap(), c.values()[i]);
        }
    }

    #[test]
    fn empty_window_falls_back_to_nearest_point() {
        let c = ObservedCurve::new(vec![0.1, 0.9], vec![5.0, -2.0]).unwrap();
        let s = sample_from(vec![c.clone(), c]);
        let p = presmooth(&s, 0.05).unwrap();
        assert_eq!(p.eval(0, 0.3).unwrap(), 5.0);
        assert_eq!(p.eval(0, 0.7).unwrap(), -2.0);
    }

    #[test]
    fn presmooth_is_linear_in_values() {
        let times: Vec<f64> = vec![0.05, 0.2, 0.33, 0.5, 0.61, 0.8, 0.97];
        let y1 = vec![1.0, -0.4, 2.2, 0.1, 0.9, -1.5, 0.3];
        let y2 = vec![0.2, 1.4, -0.7, 2.0, -0.3, 0.8, 1.1];
        let (a, b2) = (1.7, -0.6);
        let combo: Vec<f64> = y1
            .iter()
            .zip(&y2)
            .map(|(u, v)| a * u + b2 * v)
            .collect();
        let mk = |vals: Vec<f64>| {
            sample_from(vec![
                ObservedCurve::new(times.clone(), vals.clone()).unwrap(),
                ObservedCurve::new(times.clone(), vals).unwrap(),
            ])
        };
        let (s1, s2, sc) = (mk(y1), mk(y2), mk(combo));
        for &bw in &[0.07, 0.2, 0.5] {
            let (p1, p2, pc) = (
                presmooth(&s1, bw).unwrap(),
                presmooth(&s2, bw).unwrap(),
                presmooth(&sc, bw).unwrap(),
            );
            for &u in &[0.1, 0.4, 0.65, 0.9] {
                let lhs = pc.eval(0, u).unwrap();
                let rhs = a * p1.eval(0, u).unwrap() + b2 * p2.eval(0, u).unwrap();
                assert!((lhs - rhs).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn derivative_of_quadratic_is_exact() {
        let c = equidistant_curve(200, |t| t * t);
        let s = sample_from(vec![c.clone(), c]);
        let p = presmooth_derivative(&s, 1, 0.05).unwrap();
        for &u in &[0.2, 0.5, 0.8] {
            let d = p.eval(0, u).unwrap();
            assert!((d - 2.0 * u).abs() < 1e-2, "u={u}, d={d}");
        }
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let c = equidistant_curve(50, |_| 4.0);
        let s = sample_from(vec![c.clone(), c]);
        let p = presmooth_derivative(&s, 1, 0.1).unwrap();
        assert!(p.eval(0, 0.5).unwrap().abs() < 1e-10);
    }

    #[test]
    fn derivative_enlarges_sparse_windows() {
        // Only 5 points: a bandwidth below the gap forces enlargement.
        let c = equidistant_curve(5, |t| t);
        let s = sample_from(vec![c.clone(), c]);
        let p = presmooth_derivative(&s, 1, 0.05).unwrap();
        let d = p.eval(0, 0.5).unwrap();
        assert!((d - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bad_bandwidths_are_rejected() {
        let c = equidistant_curve(5, |t| t);
        let s = sample_from(vec![c.clone(), c]);
        assert!(presmooth(&s, 0.0).is_err());
        assert!(presmooth_derivative(&s, 0, 0.1).is_err());
        assert!(presmooth_derivative(&s, 4, 0.1).is_err());
    }

    #[test]
    fn cv_single_candidate_is_returned() {
        let c = equidistant_curve(30, |t| t.sin());
        let s = sample_from(vec![c.clone(), c]);
        let grid = BandwidthGrid::new(vec![0.15], &DomainInterval::unit()).unwrap();
        assert_eq!(cv_bandwidth(&s, &grid, 50, 1).unwrap(), 0.15);
    }

    #[test]
    fn cv_noiseless_linear_picks_smallest_usable_candidate() {
        // Equidistant design, exactly linear values: interior LOO predictions
        // are exact for any usable window, so smaller bandwidths only reduce
        // the boundary error and the smallest non-degenerate candidate wins.
        let s = sample_from(vec![
            equidistant_curve(40, |t| 2.0 * t + 1.0),
            equidistant_curve(40, |t| 2.0 * t + 1.0),
        ]);
        let grid = BandwidthGrid::new(vec![0.03, 0.06, 0.12, 0.24], &DomainInterval::unit())
            .unwrap();
        let b = cv_bandwidth(&s, &grid, 50, 3).unwrap();
        assert_eq!(b, 0.03);
    }

    #[test]
    fn second_difference_kills_linear_trends() {
        // steep linear curves, no noise: the pairwise estimator sees the
        // slope, the second-difference one does not
        let slope = 20.0;
        let s = sample_from(vec![
            equidistant_curve(12, |t| slope * t),
            equidistant_curve(12, |t| slope * t + 1.0),
        ]);
        let pairwise = noise_variance(&s, 0.5);
        assert!(pairwise > 1.0, "pairwise picks up the slope: {pairwise}");
        assert!(noise_variance_second_diff(&s, 0.5).abs() < 1e-20);
        assert!(global_noise_variance(&s).abs() < 1e-20);
    }

    #[test]
    fn global_floor_tracks_noise_level_on_noisy_curves() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let sigma = 0.5;
        let times: Vec<f64> = (1..=60).map(|i| i as f64 / 60.0).collect();
        let curves: Vec<ObservedCurve<f64>> = (0..200)
            .map(|_| {
                let vals: Vec<f64> = times
                    .iter()
                    .map(|&t| {
                        3.0 * (2.0 * t).sin()
                            + sigma * <f64 as crate::scalar::Real>::standard_normal(&mut rng)
                    })
                    .collect();
                ObservedCurve::new(times.clone(), vals).unwrap()
            })
            .collect();
        let s = sample_from(curves);
        let floor = global_noise_variance(&s);
        assert!(
            (floor - sigma * sigma).abs() < 0.1 * sigma * sigma,
            "floor {floor} vs {}",
            sigma * sigma
        );
    }

    #[test]
    fn increment_noise_factor_matches_weight_algebra() {
        use crate::kernel::nw_weights;
        let times = vec![0.1, 0.3, 0.42, 0.55, 0.7, 0.9];
        let c = ObservedCurve::new(times.clone(), vec![0.0; 6]).unwrap();
        let s = sample_from(vec![c.clone(), c]);
        let (u, v, b) = (0.35, 0.6, 0.12);
        let wu = nw_weights(u, b, &times).unwrap();
        let wv = nw_weights(v, b, &times).unwrap();
        let per_curve: f64 = wu
            .iter()
            .zip(&wv)
            .map(|(a, d)| (d - a) * (d - a))
            .sum();
        let expect = (1.0 - 0.5) * per_curve; // (1 - 1/N) with N = 2
        let got = increment_noise_factor(&s, u, v, b);
        assert!((got - expect).abs() < 1e-14, "{got} vs {expect}");
        // disjoint, degenerate windows fall back to single points: factor 2
        let got_far: f64 = increment_noise_factor(&s, 0.2, 0.8, 0.01);
        assert!((got_far - 0.5 * 2.0).abs() < 1e-14);
    }

    #[test]
    fn noise_variance_examples() {
        let s = sample_from(vec![
            equidistant_curve(10, |_| 2.0),
            equidistant_curve(10, |_| 2.0),
        ]);
        assert_eq!(noise_variance(&s, 0.5), 0.0);

        // increments of ±c across the pair nearest t give c²/2
        let c = 0.8;
        let times: Vec<f64> = (1..=4).map(|i| i as f64 / 4.0).collect();
        let mk = |sign: f64| {
            ObservedCurve::new(times.clone(), vec![0.0, 0.0, sign * c, 0.0]).unwrap()
        };
        let s2 = sample_from(vec![mk(1.0), mk(-1.0)]);
        // at t=0.6 the nearest pair is (0.5, 0.75): differences ∓c
        let est = noise_variance(&s2, 0.6);
        assert!((est - c * c / 2.0).abs() < 1e-15);
    }
}
