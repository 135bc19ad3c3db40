//! Epanechnikov kernel, Nadaraya-Watson weights, and the per-curve window
//! statistics every risk bound is assembled from.

use crate::domain::ObservedCurve;
use crate::error::{FtsError, Result};
use crate::scalar::Real;

/// Epanechnikov kernel K(u) = (3/4)(1 - u²) on [-1, 1], zero outside.
///
/// NaN input propagates as NaN.
pub fn epanechnikov<F: Real>(u: F) -> F {
    if u.is_nan() {
        return u;
    }
    if u.abs() <= F::one() {
        F::of(0.75) * (F::one() - u * u)
    } else {
        F::zero()
    }
}

/// Nadaraya-Watson weights W_i = K((T_i - t)/h) / Σ_k K((T_k - t)/h) with the
/// 0/0 = 0 convention: if every kernel value vanishes, all weights are zero.
pub fn nw_weights<F: Real>(t: F, h: F, times: &[F]) -> Result<Vec<F>> {
    if !(h > F::zero()) {
        return Err(FtsError::InvalidBandwidth(format!(
            "bandwidth must be positive, got {h}"
        )));
    }
    let mut weights: Vec<F> = times.iter().map(|&x| epanechnikov((x - t) / h)).collect();
    let denom: F = weights.iter().copied().sum();
    if denom > F::zero() {
        for w in &mut weights {
            *w = *w / denom;
        }
    } else {
        for w in &mut weights {
            *w = F::zero();
        }
    }
    Ok(weights)
}

/// One-pass summary of a curve's Nadaraya-Watson weights at (t, h).
///
/// All quantities refer to the window {i : |T_i - t| <= h}; points outside
/// carry zero weight and are skipped.
#[derive(Debug, Clone, Copy)]
pub struct WindowStats<F> {
    /// Number of design points in the closed window.
    pub count: usize,
    /// Curve estimate Σ W_i Y_i (zero when the kernel mass is degenerate).
    pub estimate: F,
    /// Σ |W_i| (1 for a live window, 0 for a degenerate one).
    pub weight_abs_sum: F,
    /// max_i W_i.
    pub max_weight: F,
    /// Σ W_i².
    pub sum_sq_weight: F,
    /// b(t; h, α) = Σ |(T_i - t)/h|^α |W_i| for the α passed in.
    pub moment: F,
}

impl<F: Real> WindowStats<F> {
    /// Whether the curve contributes (π = 1): at least one point in window.
    pub fn covered(&self) -> bool {
        self.count > 0
    }
}

/// Compute [`WindowStats`] for one curve at (t, h); `alpha` is the exponent
/// of the bias moment `b(t; h, alpha)` (pass 0 to skip, the moment is then
/// Σ|W| again and unused by callers).
pub fn window_stats<F: Real>(curve: &ObservedCurve<F>, t: F, h: F, alpha: F) -> WindowStats<F> {
    let range = curve.window(t, h);
    let times = curve.times();
    let values = curve.values();
    let count = range.len();
    let mut denom = F::zero();
    for i in range.clone() {
        denom = denom + epanechnikov((times[i] - t) / h);
    }
    let mut stats = WindowStats {
        count,
        estimate: F::zero(),
        weight_abs_sum: F::zero(),
        max_weight: F::zero(),
        sum_sq_weight: F::zero(),
        moment: F::zero(),
    };
    if denom > F::zero() {
        for i in range {
            let z = (times[i] - t) / h;
            let w = epanechnikov(z) / denom;
            stats.estimate = stats.estimate + w * values[i];
            stats.weight_abs_sum = stats.weight_abs_sum + w.abs();
            if w > stats.max_weight {
                stats.max_weight = w;
            }
            stats.sum_sq_weight = stats.sum_sq_weight + w * w;
            stats.moment = stats.moment + z.abs().powf(alpha) * w.abs();
        }
    }
    stats
}
