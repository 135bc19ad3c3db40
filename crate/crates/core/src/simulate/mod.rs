//! Generators for the simulation study: functional autoregressions driven by
//! multifractional Brownian innovations, a functional ARCH variant, and the
//! noisy discrete observation step.

mod far;
mod gp;

pub use far::{far1_generate, farch1_generate, product_paths, Far1Model};
pub use gp::{
    mfbm_cov, sample_gaussian_paths, symmetric_min_eigenvalue, GaussianSampler, MAX_DENSE_GRID,
};

use crate::domain::{DesignKind, DomainInterval, FunctionalSample, ObservedCurve};
use crate::error::{FtsError, Result};
use crate::scalar::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Hurst exponent as a function of location, kept inside (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub enum HurstFunction<F> {
    Constant(F),
    /// lo + (hi - lo) / (1 + exp(-steepness (t - midpoint)))
    Logistic {
        lo: F,
        hi: F,
        steepness: F,
        midpoint: F,
    },
}

impl<F: Real> HurstFunction<F> {
    pub fn constant(h: F) -> Result<Self> {
        if h > F::zero() && h < F::one() {
            Ok(Self::Constant(h))
        } else {
            Err(FtsError::InvalidDomain(format!(
                "constant Hurst exponent must lie in (0, 1), got {h}"
            )))
        }
    }

    pub fn logistic(lo: F, hi: F, steepness: F, midpoint: F) -> Result<Self> {
        let ok = lo > F::zero() && lo < hi && hi < F::one() && steepness.is_finite();
        if ok {
            Ok(Self::Logistic {
                lo,
                hi,
                steepness,
                midpoint,
            })
        } else {
            Err(FtsError::InvalidDomain(format!(
                "logistic Hurst preset needs 0 < lo < hi < 1, got lo={lo}, hi={hi}"
            )))
        }
    }

    /// The logistic preset rising from 0.2 to 0.8 around the domain midpoint.
    pub fn logistic_default() -> Self {
        Self::Logistic {
            lo: F::of(0.2),
            hi: F::of(0.8),
            steepness: F::of(15.0),
            midpoint: F::of(0.5),
        }
    }

    pub fn eval(&self, t: F) -> F {
        match *self {
            Self::Constant(h) => h,
            Self::Logistic {
                lo,
                hi,
                steepness,
                midpoint,
            } => lo + (hi - lo) / (F::one() + (-(steepness * (t - midpoint))).exp()),
        }
    }
}

/// Mean function presets used by the generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanFunction<F> {
    Zero,
    Constant(F),
    /// amplitude · sin(angular · t)
    Sine { amplitude: F, angular: F },
}

impl<F: Real> MeanFunction<F> {
    /// The default 4 sin(3πt/2) mean.
    pub fn default_sine() -> Self {
        Self::Sine {
            amplitude: F::of(4.0),
            angular: F::of(1.5 * std::f64::consts::PI),
        }
    }

    pub fn eval(&self, t: F) -> F {
        match *self {
            Self::Zero => F::zero(),
            Self::Constant(c) => c,
            Self::Sine { amplitude, angular } => amplitude * (angular * t).sin(),
        }
    }
}

/// Norm used to calibrate the autoregression kernel scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorNorm {
    /// Spectral norm of the trapezoid-discretized kernel matrix (default).
    Spectral,
    /// Maximum row sum, the discretization of sup_u ∫ |ψ(u, s)| ds.
    MaxRowSum,
}

/// Which functional time-series preset a configuration describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FtsModel {
    /// FAR(1) with constant-Hurst innovations.
    Far1ConstHurst,
    /// FAR(1) with logistic-Hurst innovations.
    Far1LogisticHurst,
}

/// Configuration of one simulated functional time series.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig<F> {
    /// Number of observed curves.
    pub n: usize,
    /// Target mean number of observations per curve.
    pub lambda: usize,
    pub model: FtsModel,
    pub mean: MeanFunction<F>,
    pub hurst: HurstFunction<F>,
    /// Operator norm of the autoregression kernel (0 switches it off).
    pub psi_norm: F,
    /// Scale multiplying the innovation paths.
    pub l_scale: F,
    /// Observation noise standard deviation.
    pub sigma: F,
    pub burn_in: usize,
    /// Size of the latent evaluation grid.
    pub eval_grid_size: usize,
    pub operator_norm: OperatorNorm,
    pub seed: u64,
}

impl<F: Real> SimConfig<F> {
    /// FAR(1) with a constant Hurst exponent.
    pub fn model1(n: usize, lambda: usize, h: F) -> Result<Self> {
        Ok(Self {
            n,
            lambda,
            model: FtsModel::Far1ConstHurst,
            mean: MeanFunction::default_sine(),
            hurst: HurstFunction::constant(h)?,
            psi_norm: F::of(0.5),
            l_scale: F::of(2.0),
            sigma: F::of(0.25),
            burn_in: 100,
            eval_grid_size: 1024,
            operator_norm: OperatorNorm::Spectral,
            seed: 0,
        })
    }

    /// FAR(1) with the logistic Hurst preset.
    pub fn model2(n: usize, lambda: usize) -> Self {
        Self {
            n,
            lambda,
            model: FtsModel::Far1LogisticHurst,
            mean: MeanFunction::default_sine(),
            hurst: HurstFunction::logistic_default(),
            psi_norm: F::of(0.5),
            l_scale: F::of(2.0),
            sigma: F::of(0.25),
            burn_in: 100,
            eval_grid_size: 1024,
            operator_norm: OperatorNorm::Spectral,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(FtsError::InvalidConfig("need at least two curves".into()));
        }
        if self.lambda < 2 {
            return Err(FtsError::InvalidConfig(
                "need at least two observations per curve".into(),
            ));
        }
        if !(self.psi_norm >= F::zero() && self.psi_norm < F::one()) {
            return Err(FtsError::InvalidConfig(format!(
                "autoregression norm must lie in [0, 1), got {}",
                self.psi_norm
            )));
        }
        if self.eval_grid_size < 2 || self.eval_grid_size > MAX_DENSE_GRID {
            return Err(FtsError::InvalidConfig(format!(
                "latent grid size must lie in 2..={MAX_DENSE_GRID}"
            )));
        }
        Ok(())
    }
}

/// Latent sample paths on an equispaced grid over (0, 1]; the ground truth
/// the observation step and the bias tables work from.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentPaths<F> {
    grid: Vec<F>,
    values: Vec<F>, // row-major count x grid.len()
    count: usize,
}

impl<F: Real> LatentPaths<F> {
    pub fn new(grid: Vec<F>, values: Vec<F>, count: usize) -> Result<Self> {
        if grid.len() * count != values.len() {
            return Err(FtsError::ShapeMismatch(format!(
                "{} values for {} paths on a {}-point grid",
                values.len(),
                count,
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FtsError::Numerical("non-finite latent path value".into()));
        }
        Ok(Self {
            grid,
            values,
            count,
        })
    }

    /// The equispaced grid (1/size, 2/size, ..., 1).
    pub fn equispaced_grid(size: usize) -> Vec<F> {
        (1..=size)
            .map(|i| F::of(i as f64) / F::of(size as f64))
            .collect()
    }

    pub fn grid(&self) -> &[F] {
        &self.grid
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn path(&self, i: usize) -> &[F] {
        let g = self.grid.len();
        &self.values[i * g..(i + 1) * g]
    }

    /// Linear interpolation of path `i` at `t`, clamped to the grid range.
    pub fn interp(&self, i: usize, t: F) -> F {
        let path = self.path(i);
        let g = self.grid.len();
        if g == 1 {
            return path[0];
        }
        let g0 = self.grid[0];
        let step = self.grid[1] - self.grid[0];
        let pos = (t - g0) / step;
        if pos <= F::zero() {
            return path[0];
        }
        let max_idx = F::of((g - 1) as f64);
        if pos >= max_idx {
            return path[g - 1];
        }
        let idx = pos.floor().to_usize().unwrap_or(0).min(g - 2);
        let frac = pos - F::of(idx as f64);
        path[idx] + frac * (path[idx + 1] - path[idx])
    }
}

/// Observe latent paths discretely with noise.
///
/// Independent design draws M_n uniformly from {⌈0.8λ⌉, ..., ⌊1.2λ⌋} and the
/// design points i.i.d. uniform on (0, 1]; common design uses the equidistant
/// grid T_i = i/λ shared by all curves. Latent values are linearly
/// interpolated and `sigma_at(T)`-scaled standard normal noise is added.
pub fn observe<F: Real>(
    paths: &LatentPaths<F>,
    design: DesignKind,
    lambda: usize,
    sigma_at: &(dyn Fn(F) -> F + Sync),
    seed: u64,
) -> Result<FunctionalSample<F>> {
    if lambda < 2 {
        return Err(FtsError::InvalidConfig(
            "need at least two observations per curve".into(),
        ));
    }
    if paths.count() < 2 {
        return Err(FtsError::InvalidConfig(
            "need at least two latent paths to observe".into(),
        ));
    }
    if lambda > 4 * paths.grid().len() {
        log::warn!(
            "sampling rate {lambda} exceeds 4x the latent grid resolution {}; interpolation error will dominate",
            paths.grid().len()
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut curves = Vec::with_capacity(paths.count());
    match design {
        DesignKind::Independent => {
            let lo = (0.8 * lambda as f64).ceil() as usize;
            let hi = (1.2 * lambda as f64).floor() as usize;
            for n in 0..paths.count() {
                let m = rng.random_range(lo..=hi).max(2);
                let times = draw_sorted_uniforms::<F, _>(&mut rng, m)?;
                let values = times
                    .iter()
                    .map(|&t| paths.interp(n, t) + sigma_at(t) * F::standard_normal(&mut rng))
                    .collect();
                curves.push(ObservedCurve::new(times, values)?);
            }
        }
        DesignKind::Common => {
            let times: Vec<F> = (1..=lambda)
                .map(|i| F::of(i as f64) / F::of(lambda as f64))
                .collect();
            for n in 0..paths.count() {
                let values = times
                    .iter()
                    .map(|&t| paths.interp(n, t) + sigma_at(t) * F::standard_normal(&mut rng))
                    .collect();
                curves.push(ObservedCurve::new(times.clone(), values)?);
            }
        }
    }
    FunctionalSample::new(curves, design, DomainInterval::unit())
}

fn draw_sorted_uniforms<F: Real, R: Rng + ?Sized>(rng: &mut R, m: usize) -> Result<Vec<F>> {
    for _ in 0..100 {
        let mut times: Vec<F> = (0..m).map(|_| F::uniform_open01(rng)).collect();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if times.windows(2).all(|w| w[0] < w[1]) {
            return Ok(times);
        }
        // ties have probability zero; redraw on the astronomically unlikely hit
    }
    Err(FtsError::Numerical(
        "could not draw distinct design points".into(),
    ))
}
