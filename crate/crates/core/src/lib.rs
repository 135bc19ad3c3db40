//! Adaptive nonparametric estimation for functional time series observed
//! discretely with noise.
//!
//! The crate estimates the local regularity (Hölder exponent and constant)
//! of the process generating a weakly dependent sequence of curves, and uses
//! those estimates to drive bandwidth selection for pointwise mean and
//! lag-ℓ autocovariance estimators. Simulators for functional
//! autoregressions with multifractional Brownian innovations are included
//! for calibration studies.
//!
//! All numeric code is generic over the scalar type through [`Real`]
//! (`f32` or `f64`); the `*64` aliases below cover the common case.

pub mod autocov;
pub mod csvio;
pub mod domain;
pub mod error;
pub mod kernel;
pub mod locreg;
pub mod mean;
pub mod presmooth;
pub mod scalar;
pub mod simulate;
pub mod stats;

pub use error::{FtsError, Result};
pub use scalar::Real;

pub type DomainInterval64 = domain::DomainInterval<f64>;
pub type ObservedCurve64 = domain::ObservedCurve<f64>;
pub type FunctionalSample64 = domain::FunctionalSample<f64>;
pub type BandwidthGrid64 = domain::BandwidthGrid<f64>;
pub type RegularityEstimate64 = locreg::RegularityEstimate<f64>;
pub type RiskProfile64 = mean::RiskProfile<f64>;
pub type MeanEstimate64 = mean::MeanEstimate<f64>;
pub type AutocovEstimate64 = autocov::AutocovEstimate<f64>;
pub type AutocovRiskProfile64 = autocov::AutocovRiskProfile<f64>;
pub type SimConfig64 = simulate::SimConfig<f64>;
pub type LatentPaths64 = simulate::LatentPaths<f64>;
