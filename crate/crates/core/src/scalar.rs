//! Scalar abstraction: every estimator in this crate is generic over the
//! floating-point type through the [`Real`] trait.

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::Rng;
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar the library is generic over (`f32` or `f64`).
///
/// Besides the numeric traits, the trait carries the two primitive random
/// draws the simulators need, so call sites do not have to thread
/// distribution bounds around.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Convert an `f64` constant. Panics only on non-finite input, which the
    /// crate never passes.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite constant")
    }

    /// One standard normal draw.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One uniform draw on the half-open interval (0, 1].
    fn uniform_open01<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Real for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(rand_distr::StandardNormal)
    }
    fn uniform_open01<R: Rng + ?Sized>(rng: &mut R) -> Self {
        1.0 - rng.random::<f32>()
    }
}

/// Dot product with four independent accumulators; the split breaks the
/// serial floating-point dependency chain so the loop pipelines.
pub(crate) fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    let n = a.len().min(b.len());
    let mut acc = [F::zero(); 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] = acc[0] + a[i] * b[i];
        acc[1] = acc[1] + a[i + 1] * b[i + 1];
        acc[2] = acc[2] + a[i + 2] * b[i + 2];
        acc[3] = acc[3] + a[i + 3] * b[i + 3];
    }
    let mut tail = F::zero();
    for i in 4 * chunks..n {
        tail = tail + a[i] * b[i];
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + tail
}

impl Real for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(rand_distr::StandardNormal)
    }
    fn uniform_open01<R: Rng + ?Sized>(rng: &mut R) -> Self {
        1.0 - rng.random::<f64>()
    }
}
