//! Dense Gaussian-process sampling: multifractional Brownian covariance,
//! Cholesky factorization with jitter escalation, and draw machinery.

use crate::error::{FtsError, Result};
use crate::scalar::Real;
use crate::simulate::{HurstFunction, LatentPaths};
use crate::stats::ln_gamma;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest grid accepted by the dense factorization path.
pub const MAX_DENSE_GRID: usize = 4096;

/// Multifractional Brownian motion covariance
/// D(H(u), H(v)) · [u^{H(u)+H(v)} + v^{H(u)+H(v)} - |v-u|^{H(u)+H(v)}]
/// with the normalizing factor
/// D(x, y) = sqrt(Γ(2x+1)Γ(2y+1) sin(πx) sin(πy)) / (2 Γ(x+y+1) sin(π(x+y)/2)),
/// which reduces to D(x, x) = 1/2 so a constant Hurst function recovers the
/// fractional Brownian motion covariance.
pub fn mfbm_cov<F: Real>(u: F, v: F, hurst: &HurstFunction<F>) -> Result<F> {
    if u < F::zero() || v < F::zero() {
        return Err(FtsError::InvalidDomain(format!(
            "covariance arguments must be non-negative, got ({u}, {v})"
        )));
    }
    let hu = checked_hurst(hurst, u)?;
    let hv = checked_hurst(hurst, v)?;
    let hsum = hu + hv;
    let d = normalizer(hu, hv);
    Ok(d * (u.powf(hsum) + v.powf(hsum) - (v - u).abs().powf(hsum)))
}

fn checked_hurst<F: Real>(hurst: &HurstFunction<F>, t: F) -> Result<F> {
    let h = hurst.eval(t);
    if h > F::zero() && h < F::one() {
        Ok(h)
    } else {
        Err(FtsError::InvalidDomain(format!(
            "Hurst value {h} at t={t} is outside (0, 1)"
        )))
    }
}

fn normalizer<F: Real>(x: F, y: F) -> F {
    if x == y {
        return F::of(0.5);
    }
    // canonical argument order keeps the covariance bitwise symmetric
    let (x, y) = if x <= y { (x, y) } else { (y, x) };
    let pi = F::of(std::f64::consts::PI);
    let two = F::of(2.0);
    let log_num = F::of(0.5)
        * (ln_gamma(two * x + F::one())
            + ln_gamma(two * y + F::one())
            + (pi * x).sin().ln()
            + (pi * y).sin().ln());
    let log_den = two.ln() + ln_gamma(x + y + F::one()) + (pi * (x + y) / two).sin().ln();
    (log_num - log_den).exp()
}

/// Packed lower-triangular Cholesky factor of a covariance matrix, ready to
/// generate i.i.d. zero-mean Gaussian vectors.
#[derive(Debug, Clone)]
pub struct GaussianSampler<F> {
    dim: usize,
    chol: Vec<F>, // row-major dense, lower triangle populated
    jitter: f64,
}

impl<F: Real> GaussianSampler<F> {
    /// Factor a dense symmetric covariance matrix (row-major, `dim` x `dim`).
    ///
    /// On failure the diagonal is jittered (relative 1e-12 up to 1e-8); if the
    /// matrix still is not positive definite the smallest eigenvalue is
    /// estimated and reported in the error.
    pub fn from_matrix(cov: Vec<F>, dim: usize) -> Result<Self> {
        if cov.len() != dim * dim {
            return Err(FtsError::ShapeMismatch(format!(
                "covariance buffer has {} entries, expected {}",
                cov.len(),
                dim * dim
            )));
        }
        let scale = (0..dim)
            .map(|j| cov[j * dim + j].abs())
            .fold(F::zero(), |m, v| if v > m { v } else { m });
        let scale = if scale > F::zero() { scale } else { F::one() };
        for &jitter in &[0.0, 1e-12, 1e-10, 1e-8] {
            let mut work = cov.clone();
            if jitter > 0.0 {
                let bump = F::of(jitter) * scale;
                for j in 0..dim {
                    work[j * dim + j] = work[j * dim + j] + bump;
                }
            }
            if cholesky_in_place(&mut work, dim) {
                return Ok(Self {
                    dim,
                    chol: work,
                    jitter,
                });
            }
        }
        let min_eigenvalue = symmetric_min_eigenvalue(&cov, dim)
            .to_f64()
            .unwrap_or(f64::NAN);
        Err(FtsError::NotPositiveDefinite { min_eigenvalue })
    }

    /// Factor the covariance produced by `cov` on a grid.
    pub fn from_fn(
        cov: impl Fn(F, F) -> Result<F>,
        grid: &[F],
    ) -> Result<Self> {
        let dim = grid.len();
        if dim == 0 {
            return Err(FtsError::InvalidConfig("empty grid".into()));
        }
        if dim > MAX_DENSE_GRID {
            return Err(FtsError::InvalidConfig(format!(
                "grid of {dim} points exceeds the dense factorization cap {MAX_DENSE_GRID}"
            )));
        }
        let mut mat = vec![F::zero(); dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                let v = cov(grid[i], grid[j])?;
                mat[i * dim + j] = v;
                mat[j * dim + i] = v;
            }
        }
        Self::from_matrix(mat, dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Diagonal jitter that was needed, 0.0 when the plain factorization
    /// succeeded.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Draw one zero-mean Gaussian vector into `out` (length `dim`).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, scratch: &mut Vec<F>, out: &mut [F]) {
        debug_assert_eq!(out.len(), self.dim);
        scratch.clear();
        scratch.extend((0..self.dim).map(|_| F::standard_normal(rng)));
        for (j, slot) in out.iter_mut().enumerate() {
            let row = &self.chol[j * self.dim..j * self.dim + j + 1];
            *slot = crate::scalar::dot(row, &scratch[..j + 1]);
        }
    }

    /// Draw `count` rows (row-major `count` x `dim`).
    pub fn sample_rows<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<F> {
        let mut out = vec![F::zero(); count * self.dim];
        let mut scratch = Vec::with_capacity(self.dim);
        for r in 0..count {
            let row = &mut out[r * self.dim..(r + 1) * self.dim];
            self.sample_into(rng, &mut scratch, row);
        }
        out
    }
}

fn cholesky_in_place<F: Real>(a: &mut [F], n: usize) -> bool {
    let mut row_j = vec![F::zero(); n];
    for j in 0..n {
        row_j[..j].copy_from_slice(&a[j * n..j * n + j]);
        let d = a[j * n + j] - crate::scalar::dot(&row_j[..j], &row_j[..j]);
        if !(d > F::zero()) {
            return false;
        }
        let root = d.sqrt();
        a[j * n + j] = root;
        for i in j + 1..n {
            let v = a[i * n + j] - crate::scalar::dot(&a[i * n..i * n + j], &row_j[..j]);
            a[i * n + j] = v / root;
        }
    }
    true
}

/// Smallest eigenvalue of a symmetric matrix via power iteration on the
/// Gershgorin-shifted matrix c·I - A.
pub fn symmetric_min_eigenvalue<F: Real>(a: &[F], n: usize) -> F {
    assert_eq!(a.len(), n * n);
    let shift = (0..n)
        .map(|i| (0..n).map(|j| a[i * n + j].abs()).sum::<F>())
        .fold(F::zero(), |m, v| if v > m { v } else { m });
    // deterministic quasi-random start vector
    let mut v: Vec<F> = (0..n)
        .map(|i| F::of(((i * 2654435761usize) % 1000) as f64 / 1000.0 - 0.5) + F::of(1e-3))
        .collect();
    normalize(&mut v);
    let mut w = vec![F::zero(); n];
    let mut lambda = F::zero();
    for _ in 0..300 {
        // w = (shift I - A) v
        for i in 0..n {
            w[i] = shift * v[i] - crate::scalar::dot(&a[i * n..(i + 1) * n], &v);
        }
        let new_lambda = dot(&w, &v);
        let done = (new_lambda - lambda).abs() <= F::of(1e-13) * new_lambda.abs().max(F::one());
        lambda = new_lambda;
        let norm = dot(&w, &w).sqrt();
        if norm == F::zero() {
            break;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = *wi / norm;
        }
        if done {
            break;
        }
    }
    shift - lambda
}

fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

fn normalize<F: Real>(v: &mut [F]) {
    let n = dot(v, v).sqrt();
    if n > F::zero() {
        for x in v.iter_mut() {
            *x = *x / n;
        }
    }
}

/// Exact rows of a zero-mean Gaussian process on a grid.
///
/// `count = 0` yields an empty path set; a fixed seed gives bit-identical
/// output across runs.
pub fn sample_gaussian_paths<F: Real>(
    cov: impl Fn(F, F) -> Result<F>,
    grid: &[F],
    count: usize,
    seed: u64,
) -> Result<LatentPaths<F>> {
    let sampler = GaussianSampler::from_fn(cov, grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = sampler.sample_rows(count, &mut rng);
    LatentPaths::new(grid.to_vec(), values, count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn const_hurst(h: f64) -> HurstFunction<f64> {
        HurstFunction::constant(h).unwrap()
    }

    #[test]
    fn brownian_reduction() {
        let h = const_hurst(0.5);
        for &(u, v) in &[(0.2, 0.7), (0.4, 0.4), (0.9, 0.1), (0.0, 0.3)] {
            let c = mfbm_cov(u, v, &h).unwrap();
            assert!((c - u.min(v)).abs() < 1e-14, "({u},{v}) -> {c}");
        }
    }

    #[test]
    fn variance_at_diagonal_is_t_pow_2h() {
        let h = const_hurst(0.3);
        for &u in &[0.1, 0.5, 1.0] {
            let c = mfbm_cov(u, u, &h).unwrap();
            assert!((c - u.powf(0.6)).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_hurst_matches_closed_form() {
        let hval = 0.7;
        let h = const_hurst(hval);
        let closed = |u: f64, v: f64| {
            0.5 * (u.powf(2.0 * hval) + v.powf(2.0 * hval) - (u - v).abs().powf(2.0 * hval))
        };
        for &(u, v) in &[(0.3, 0.6), (0.05, 0.95), (0.5, 0.5)] {
            let c = mfbm_cov(u, v, &h).unwrap();
            assert!((c - closed(u, v)).abs() < 1e-10);
        }
    }

    #[test]
    fn logistic_hurst_matrix_is_symmetric_psd() {
        let h = HurstFunction::logistic_default();
        let grid = LatentPaths::<f64>::equispaced_grid(128);
        let n = grid.len();
        let mut mat = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                mat[i * n + j] = mfbm_cov(grid[i], grid[j], &h).unwrap();
            }
        }
        for i in 0..n {
            for j in 0..n {
                assert_eq!(mat[i * n + j], mat[j * n + i]);
            }
        }
        let min_eig = symmetric_min_eigenvalue(&mat, n);
        assert!(min_eig > -1e-8, "min eigenvalue {min_eig}");
        assert!(GaussianSampler::from_matrix(mat, n).is_ok());
    }

    #[test]
    fn rejects_out_of_range_hurst_argument() {
        let h = const_hurst(0.4);
        assert!(mfbm_cov(-0.1, 0.5, &h).is_err());
    }

    #[test]
    fn identity_covariance_monte_carlo() {
        let grid = vec![1.0, 2.0, 3.0];
        let eye = |u: f64, v: f64| Ok(if u == v { 1.0 } else { 0.0 });
        let count = 100_000;
        let paths = sample_gaussian_paths(eye, &grid, count, 99).unwrap();
        let mut cov = [[0.0f64; 3]; 3];
        for r in 0..count {
            let row = paths.path(r);
            for i in 0..3 {
                for j in 0..3 {
                    cov[i][j] += row[i] * row[j];
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let emp = cov[i][j] / count as f64;
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((emp - target).abs() < 0.02, "cov[{i}][{j}] = {emp}");
            }
        }
    }

    #[test]
    fn zero_count_gives_empty_paths() {
        let grid = vec![0.5, 1.0];
        let eye = |u: f64, v: f64| Ok(if u == v { 1.0 } else { 0.0 });
        let paths = sample_gaussian_paths(eye, &grid, 0, 1).unwrap();
        assert_eq!(paths.count(), 0);
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let h = const_hurst(0.6);
        let grid = LatentPaths::<f64>::equispaced_grid(32);
        let a = sample_gaussian_paths(|u, v| mfbm_cov(u, v, &h), &grid, 5, 123).unwrap();
        let b = sample_gaussian_paths(|u, v| mfbm_cov(u, v, &h), &grid, 5, 123).unwrap();
        assert_eq!(a.path(3), b.path(3));
    }

    #[test]
    fn non_psd_matrix_reports_min_eigenvalue() {
        // symmetric with eigenvalues {3, -1}
        let mat: Vec<f64> = vec![1.0, 2.0, 2.0, 1.0];
        let err = GaussianSampler::from_matrix(mat.clone(), 2).unwrap_err();
        match err {
            FtsError::NotPositiveDefinite { min_eigenvalue } => {
                assert!((min_eigenvalue + 1.0).abs() < 1e-6, "{min_eigenvalue}");
            }
            other => panic!("unexpected error {other:?}"),
        }
        let eig = symmetric_min_eigenvalue(&mat, 2);
        assert!((eig + 1.0).abs() < 1e-9);
    }
}
