//! Core data containers: observation domain, discretely observed curves,
//! samples of curves, and bandwidth grids.

use crate::error::{FtsError, Result};
use crate::scalar::Real;

/// The interval the curves live on. All design points must fall in `(lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainInterval<F> {
    lo: F,
    hi: F,
}

impl<F: Real> DomainInterval<F> {
    pub fn new(lo: F, hi: F) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(FtsError::InvalidDomain(format!(
                "interval bounds must satisfy lo < hi, got ({lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// The unit interval (0, 1] used by the simulators.
    pub fn unit() -> Self {
        Self {
            lo: F::zero(),
            hi: F::one(),
        }
    }

    pub fn lo(&self) -> F {
        self.lo
    }

    pub fn hi(&self) -> F {
        self.hi
    }

    pub fn length(&self) -> F {
        self.hi - self.lo
    }

    /// Membership in the half-open interval (lo, hi].
    pub fn contains(&self, t: F) -> bool {
        t > self.lo && t <= self.hi
    }
}

/// One curve observed with noise at a sorted set of design points.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedCurve<F> {
    times: Vec<F>,
    values: Vec<F>,
}

impl<F: Real> ObservedCurve<F> {
    /// Build a curve; `times` must be strictly increasing and finite, with at
    /// least two points, and `values` must match in length.
    pub fn new(times: Vec<F>, values: Vec<F>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(FtsError::ShapeMismatch(format!(
                "{} times vs {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(FtsError::InvalidDomain(
                "a curve needs at least two observations".into(),
            ));
        }
        if times.iter().any(|t| !t.is_finite()) || values.iter().any(|v| !v.is_finite()) {
            return Err(FtsError::InvalidDomain(
                "non-finite observation encountered".into(),
            ));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FtsError::InvalidDomain(
                "design points must be strictly increasing".into(),
            ));
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[F] {
        &self.times
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    /// Number of observations M.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: len >= 2
    }

    /// Index range of design points with |T_i - t| <= h (closed window).
    pub fn window(&self, t: F, h: F) -> std::ops::Range<usize> {
        let lo = t - h;
        let hi = t + h;
        let start = self.times.partition_point(|&x| x < lo);
        let end = self.times.partition_point(|&x| x <= hi);
        start..end.max(start)
    }

    /// Whether the curve has at least one design point within `h` of `t`.
    pub fn covers(&self, t: F, h: F) -> bool {
        !self.window(t, h).is_empty()
    }

    /// Index of the design point closest to `t` (smaller index on ties).
    pub fn nearest_index(&self, t: F) -> usize {
        let r = self.times.partition_point(|&x| x < t);
        if r == 0 {
            return 0;
        }
        if r == self.times.len() {
            return r - 1;
        }
        let left = t - self.times[r - 1];
        let right = self.times[r] - t;
        if left <= right {
            r - 1
        } else {
            r
        }
    }

    /// Left index `i` of the consecutive pair (i, i+1) of design points
    /// closest to `t`. When `t` coincides with a design point and both
    /// neighbours are equally near, the left gap is taken.
    pub fn closest_pair_index(&self, t: F) -> usize {
        let m = self.times.len();
        let r = self.times.partition_point(|&x| x < t);
        if r == 0 {
            return 0;
        }
        if r >= m {
            return m - 2;
        }
        if self.times[r] == t {
            // Exact hit: pick the nearer neighbour, left gap on ties.
            let left_ok = r >= 1;
            let right_ok = r + 1 < m;
            return match (left_ok, right_ok) {
                (true, true) => {
                    if (self.times[r + 1] - t) < (t - self.times[r - 1]) {
                        r
                    } else {
                        r - 1
                    }
                }
                (true, false) => r - 1,
                (false, true) => r,
                (false, false) => unreachable!("curves have at least two points"),
            };
        }
        r - 1
    }
}

/// Sampling design of a functional sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignKind {
    /// Design points drawn independently per curve.
    Independent,
    /// One shared grid of design points for every curve.
    Common,
}

/// An ordered collection of observed curves (index = time order) over a
/// common domain.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSample<F> {
    curves: Vec<ObservedCurve<F>>,
    design: DesignKind,
    domain: DomainInterval<F>,
}

impl<F: Real> FunctionalSample<F> {
    pub fn new(
        curves: Vec<ObservedCurve<F>>,
        design: DesignKind,
        domain: DomainInterval<F>,
    ) -> Result<Self> {
        if curves.len() < 2 {
            return Err(FtsError::InvalidConfig(
                "a functional sample needs at least two curves".into(),
            ));
        }
        for (n, c) in curves.iter().enumerate() {
            if let Some(&bad) = c.times().iter().find(|&&t| !domain.contains(t)) {
                return Err(FtsError::InvalidDomain(format!(
                    "curve {n} has design point {bad} outside ({}, {}]",
                    domain.lo(),
                    domain.hi()
                )));
            }
        }
        if design == DesignKind::Common {
            let first = curves[0].times();
            if curves.iter().any(|c| c.times() != first) {
                return Err(FtsError::InvalidConfig(
                    "common design requires identical design points on every curve".into(),
                ));
            }
        }
        Ok(Self {
            curves,
            design,
            domain,
        })
    }

    pub fn curves(&self) -> &[ObservedCurve<F>] {
        &self.curves
    }

    pub fn curve(&self, n: usize) -> &ObservedCurve<F> {
        &self.curves[n]
    }

    pub fn n_curves(&self) -> usize {
        self.curves.len()
    }

    pub fn design(&self) -> DesignKind {
        self.design
    }

    pub fn domain(&self) -> DomainInterval<F> {
        self.domain
    }

    /// Empirical mean number of observations per curve.
    pub fn lambda_hat(&self) -> F {
        let total: usize = self.curves.iter().map(|c| c.len()).sum();
        F::of(total as f64) / F::of(self.curves.len() as f64)
    }
}

/// A sorted grid of candidate bandwidths.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthGrid<F> {
    values: Vec<F>,
}

impl<F: Real> BandwidthGrid<F> {
    /// Validate an explicit grid: strictly increasing, positive, and smaller
    /// than the domain length.
    pub fn new(values: Vec<F>, domain: &DomainInterval<F>) -> Result<Self> {
        if values.is_empty() {
            return Err(FtsError::InvalidConfig("empty bandwidth grid".into()));
        }
        if values[0] <= F::zero() {
            return Err(FtsError::InvalidBandwidth(
                "bandwidths must be positive".into(),
            ));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FtsError::InvalidConfig(
                "bandwidth grid must be strictly increasing".into(),
            ));
        }
        if *values.last().unwrap() >= domain.length() {
            return Err(FtsError::InvalidBandwidth(
                "largest bandwidth must be smaller than the domain length".into(),
            ));
        }
        Ok(Self { values })
    }

    /// Geometric grid with `count` points between `min` and `max` inclusive.
    pub fn geometric(min: F, max: F, count: usize, domain: &DomainInterval<F>) -> Result<Self> {
        if count < 2 {
            return Err(FtsError::InvalidConfig(
                "a bandwidth grid needs at least two points".into(),
            ));
        }
        if !(min > F::zero() && max > min) {
            return Err(FtsError::InvalidBandwidth(format!(
                "need 0 < min < max, got min={min}, max={max}"
            )));
        }
        let ratio = (max / min).ln();
        let mut values = Vec::with_capacity(count);
        for i in 0..count {
            let frac = F::of(i as f64) / F::of((count - 1) as f64);
            values.push(min * (ratio * frac).exp());
        }
        values[0] = min;
        *values.last_mut().unwrap() = max;
        Self::new(values, domain)
    }

    /// Default bandwidth grid for a sample of `n` curves with `lambda_hat`
    /// mean observations per curve: geometric from
    /// `log(n·λ̂)/(n·λ̂)` (clipped below half the maximum) up to a quarter of
    /// the domain length.
    pub fn default_for(
        n: usize,
        lambda_hat: F,
        domain: &DomainInterval<F>,
        count: usize,
    ) -> Result<Self> {
        if count < 2 {
            return Err(FtsError::InvalidConfig(
                "a bandwidth grid needs at least two points".into(),
            ));
        }
        let nl = F::of(n as f64) * lambda_hat;
        let h_max = F::of(0.25) * domain.length();
        let mut h_min = nl.ln() / nl;
        if h_min >= h_max / F::of(2.0) {
            h_min = h_max / F::of(2.0);
        }
        Self::geometric(h_min, h_max, count, domain)
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> DomainInterval<f64> {
        DomainInterval::unit()
    }

    #[test]
    fn interval_rejects_bad_bounds() {
        assert!(DomainInterval::new(1.0, 1.0).is_err());
        assert!(DomainInterval::new(2.0, 1.0).is_err());
        assert!(DomainInterval::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn interval_is_half_open() {
        let d = unit();
        assert!(!d.contains(0.0));
        assert!(d.contains(1.0));
        assert!(d.contains(1e-12));
        assert!(!d.contains(1.0 + 1e-12));
    }

    #[test]
    fn curve_validation() {
        assert!(ObservedCurve::new(vec![0.1], vec![1.0]).is_err());
        assert!(ObservedCurve::new(vec![0.1, 0.1], vec![1.0, 2.0]).is_err());
        assert!(ObservedCurve::new(vec![0.2, 0.1], vec![1.0, 2.0]).is_err());
        assert!(ObservedCurve::new(vec![0.1, 0.2], vec![1.0]).is_err());
        assert!(ObservedCurve::new(vec![0.1, 0.2], vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn window_is_closed_on_both_ends() {
        let c = ObservedCurve::new(vec![0.1, 0.45, 0.55, 0.9], vec![0.0; 4]).unwrap();
        assert_eq!(c.window(0.5, 0.05), 1..3);
        assert_eq!(c.window(0.5, 0.04), 2..2);
        assert_eq!(c.window(0.5, 0.4), 0..4);
        assert!(c.covers(0.5, 0.05));
        assert!(!c.covers(0.5, 0.01));
    }

    #[test]
    fn closest_pair_takes_left_gap_on_exact_hit_tie() {
        // equidistant grid: t exactly on an interior point
        let c = ObservedCurve::new(vec![0.25, 0.5, 0.75, 1.0], vec![0.0; 4]).unwrap();
        assert_eq!(c.closest_pair_index(0.5), 0); // tie -> left gap (0.25, 0.5)
        assert_eq!(c.closest_pair_index(0.6), 1); // strictly inside (0.5, 0.75)
        assert_eq!(c.closest_pair_index(0.99), 2);
        assert_eq!(c.closest_pair_index(0.1), 0);
        // exact hit with strictly closer right neighbour
        let c2 = ObservedCurve::new(vec![0.1, 0.5, 0.6], vec![0.0; 3]).unwrap();
        assert_eq!(c2.closest_pair_index(0.5), 1); // pair (0.5, 0.6)
    }

    #[test]
    fn common_design_requires_identical_times() {
        let a = ObservedCurve::new(vec![0.25, 0.5], vec![1.0, 2.0]).unwrap();
        let b = ObservedCurve::new(vec![0.25, 0.75], vec![1.0, 2.0]).unwrap();
        assert!(FunctionalSample::new(vec![a.clone(), b], DesignKind::Common, unit()).is_err());
        let b2 = ObservedCurve::new(vec![0.25, 0.5], vec![3.0, 4.0]).unwrap();
        let s = FunctionalSample::new(vec![a, b2], DesignKind::Common, unit()).unwrap();
        assert_eq!(s.n_curves(), 2);
        assert_eq!(s.lambda_hat(), 2.0);
    }

    #[test]
    fn default_grid_matches_stated_rule() {
        // n=1000, λ̂=40: h_min = ln(40000)/40000, h_max = 0.25, 51 points
        let g = BandwidthGrid::default_for(1000, 40.0, &unit(), 51).unwrap();
        assert_eq!(g.len(), 51);
        let expect_min = (40_000.0f64).ln() / 40_000.0;
        assert!((g.values()[0] - expect_min).abs() < 1e-18);
        assert!((expect_min - 2.6492e-4).abs() < 1e-7);
        assert_eq!(*g.values().last().unwrap(), 0.25);
    }

    #[test]
    fn default_grid_clips_degenerate_minimum() {
        // n=2, λ̂=2: formula gives ln(4)/4 ≈ 0.3466 > h_max/2, clipped to 0.125
        let g = BandwidthGrid::default_for(2, 2.0, &unit(), 51).unwrap();
        assert_eq!(g.len(), 51);
        assert_eq!(g.values()[0], 0.125);
        assert!(g.values().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn default_grid_two_points() {
        let g = BandwidthGrid::default_for(1000, 40.0, &unit(), 2).unwrap();
        let expect_min = (40_000.0f64).ln() / 40_000.0;
        assert_eq!(g.values(), &[expect_min, 0.25]);
    }
}
