//! Functional autoregression and ARCH generators on the latent grid.

use crate::error::{FtsError, Result};
use crate::scalar::Real;
use crate::simulate::gp::{mfbm_cov, GaussianSampler};
use crate::simulate::{LatentPaths, OperatorNorm, SimConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A FAR(1) generator with everything seed-independent precomputed: the
/// innovation covariance factor, the calibrated autoregression matrix and
/// the mean vector. Build once, then generate any number of replications.
#[derive(Debug, Clone)]
pub struct Far1Model<F> {
    grid: Vec<F>,
    mean: Vec<F>,
    /// κ-scaled trapezoid discretization of the kernel; `None` when ψ ≡ 0.
    operator: Option<Vec<F>>,
    innovations: GaussianSampler<F>,
    l_scale: F,
    burn_in: usize,
    count: usize,
}

impl<F: Real> Far1Model<F> {
    pub fn new(cfg: &SimConfig<F>) -> Result<Self> {
        cfg.validate()?;
        let g = cfg.eval_grid_size;
        let grid = LatentPaths::<F>::equispaced_grid(g);
        let innovations =
            GaussianSampler::from_fn(|u, v| mfbm_cov(u, v, &cfg.hurst), &grid)?;
        let mean: Vec<F> = grid.iter().map(|&u| cfg.mean.eval(u)).collect();
        let operator = if cfg.psi_norm > F::zero() {
            let mut base = kernel_matrix(&grid);
            let norm = match cfg.operator_norm {
                OperatorNorm::Spectral => spectral_norm(&base, g),
                OperatorNorm::MaxRowSum => max_row_sum(&base, g),
            };
            if !(norm > F::zero()) {
                return Err(FtsError::Numerical(
                    "autoregression kernel norm vanished".into(),
                ));
            }
            let kappa = cfg.psi_norm / norm;
            for v in &mut base {
                *v = *v * kappa;
            }
            Some(base)
        } else {
            None
        };
        Ok(Self {
            grid,
            mean,
            operator,
            innovations,
            l_scale: cfg.l_scale,
            burn_in: cfg.burn_in,
            count: cfg.n,
        })
    }

    pub fn grid(&self) -> &[F] {
        &self.grid
    }

    /// Mean function evaluated on the latent grid.
    pub fn mean_on_grid(&self) -> &[F] {
        &self.mean
    }

    /// Run the recursion from X_0 = μ, dropping the burn-in iterates.
    pub fn generate_with(&self, seed: u64) -> LatentPaths<F> {
        let g = self.grid.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state: Vec<F> = self.mean.clone();
        let mut innovation = vec![F::zero(); g];
        let mut centered = vec![F::zero(); g];
        let mut scratch = Vec::with_capacity(g);
        let mut out = Vec::with_capacity(self.count * g);
        for step in 0..self.burn_in + self.count {
            self.innovations
                .sample_into(&mut rng, &mut scratch, &mut innovation);
            for j in 0..g {
                centered[j] = state[j] - self.mean[j];
            }
            match &self.operator {
                Some(a) => {
                    for j in 0..g {
                        let row = &a[j * g..(j + 1) * g];
                        let acc = crate::scalar::dot(row, &centered);
                        state[j] = self.mean[j] + acc + self.l_scale * innovation[j];
                    }
                }
                None => {
                    for j in 0..g {
                        state[j] = self.mean[j] + self.l_scale * innovation[j];
                    }
                }
            }
            if step >= self.burn_in {
                out.extend_from_slice(&state);
            }
        }
        LatentPaths::new(self.grid.clone(), out, self.count)
            .expect("generator output is rectangular and finite")
    }
}

/// One-shot FAR(1) generation as configured.
pub fn far1_generate<F: Real>(cfg: &SimConfig<F>) -> Result<LatentPaths<F>> {
    Ok(Far1Model::new(cfg)?.generate_with(cfg.seed))
}

// Trapezoid discretization of ψ(u, s) = exp(-(u + 2s)²) on the grid:
// entry (j, k) = exp(-(u_j + 2 s_k)²) · w_k.
fn kernel_matrix<F: Real>(grid: &[F]) -> Vec<F> {
    let g = grid.len();
    let step = grid[1] - grid[0];
    let mut mat = vec![F::zero(); g * g];
    for j in 0..g {
        for k in 0..g {
            let z = grid[j] + F::of(2.0) * grid[k];
            let w = if k == 0 || k == g - 1 {
                step / F::of(2.0)
            } else {
                step
            };
            mat[j * g + k] = (-(z * z)).exp() * w;
        }
    }
    mat
}

fn max_row_sum<F: Real>(a: &[F], n: usize) -> F {
    (0..n)
        .map(|j| (0..n).map(|k| a[j * n + k].abs()).sum::<F>())
        .fold(F::zero(), |m, v| if v > m { v } else { m })
}

// Largest singular value by power iteration on AᵀA.
fn spectral_norm<F: Real>(a: &[F], n: usize) -> F {
    let mut v = vec![F::one() / F::of((n as f64).sqrt()); n];
    let mut av = vec![F::zero(); n];
    let mut atav = vec![F::zero(); n];
    let mut sigma = F::zero();
    for _ in 0..200 {
        matvec(a, &v, &mut av, n, false);
        matvec(a, &av, &mut atav, n, true);
        let norm = atav.iter().map(|x| *x * *x).sum::<F>().sqrt();
        if !(norm > F::zero()) {
            return F::zero();
        }
        for (vi, yi) in v.iter_mut().zip(&atav) {
            *vi = *yi / norm;
        }
        let new_sigma = {
            matvec(a, &v, &mut av, n, false);
            av.iter().map(|x| *x * *x).sum::<F>().sqrt()
        };
        if (new_sigma - sigma).abs() <= F::of(1e-12) * new_sigma.max(F::one()) {
            return new_sigma;
        }
        sigma = new_sigma;
    }
    sigma
}

fn matvec<F: Real>(a: &[F], x: &[F], y: &mut [F], n: usize, transpose: bool) {
    if transpose {
        for (j, slot) in y.iter_mut().enumerate() {
            let mut acc = F::zero();
            for i in 0..n {
                acc = acc + a[i * n + j] * x[i];
            }
            *slot = acc;
        }
    } else {
        for (i, slot) in y.iter_mut().enumerate() {
            *slot = crate::scalar::dot(&a[i * n..(i + 1) * n], x);
        }
    }
}

/// Functional ARCH(1): Y_n(t) = ξ_n(t) σ_n(t) with
/// σ_n²(t) = c(t) + ∫ β(s, t) Y_{n-1}²(s) ds, trapezoid-discretized.
/// The recursion starts from Y_0 ≡ 0 and drops `burn_in` iterates.
pub fn farch1_generate<F: Real>(
    count: usize,
    grid: &[F],
    c: &dyn Fn(F) -> F,
    beta: &dyn Fn(F, F) -> F,
    innovations: &GaussianSampler<F>,
    burn_in: usize,
    seed: u64,
) -> Result<LatentPaths<F>> {
    let g = grid.len();
    if innovations.dim() != g {
        return Err(FtsError::ShapeMismatch(format!(
            "innovation sampler dimension {} does not match grid {}",
            innovations.dim(),
            g
        )));
    }
    let c_on_grid: Vec<F> = grid.iter().map(|&t| c(t)).collect();
    if c_on_grid.iter().any(|&v| !(v > F::zero())) {
        return Err(FtsError::InvalidConfig(
            "the ARCH level function c(·) must be strictly positive".into(),
        ));
    }
    let step = if g > 1 { grid[1] - grid[0] } else { F::one() };
    let mut beta_mat = vec![F::zero(); g * g];
    for j in 0..g {
        for k in 0..g {
            let b = beta(grid[k], grid[j]);
            if b < F::zero() {
                return Err(FtsError::InvalidConfig(
                    "the ARCH kernel β(·,·) must be non-negative".into(),
                ));
            }
            let w = if k == 0 || k == g - 1 {
                step / F::of(2.0)
            } else {
                step
            };
            beta_mat[j * g + k] = b * w;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut prev_sq = vec![F::zero(); g];
    let mut innovation = vec![F::zero(); g];
    let mut scratch = Vec::with_capacity(g);
    let mut state = vec![F::zero(); g];
    let mut out = Vec::with_capacity(count * g);
    for stepi in 0..burn_in + count {
        innovations.sample_into(&mut rng, &mut scratch, &mut innovation);
        for j in 0..g {
            let row = &beta_mat[j * g..(j + 1) * g];
            let sigma_sq = c_on_grid[j] + crate::scalar::dot(row, &prev_sq);
            state[j] = innovation[j] * sigma_sq.sqrt();
        }
        for j in 0..g {
            prev_sq[j] = state[j] * state[j];
        }
        if stepi >= burn_in {
            out.extend_from_slice(&state);
        }
    }
    LatentPaths::new(grid.to_vec(), out, count)
}

/// Elementwise product of a scalar series with latent paths:
/// X_n(t) = U_n · Y_n(t).
pub fn product_paths<F: Real>(u_series: &[F], paths: &LatentPaths<F>) -> Result<LatentPaths<F>> {
    if u_series.len() != paths.count() {
        return Err(FtsError::ShapeMismatch(format!(
            "{} multipliers for {} paths",
            u_series.len(),
            paths.count()
        )));
    }
    let g = paths.grid().len();
    let mut values = Vec::with_capacity(paths.count() * g);
    for (i, &u) in u_series.iter().enumerate() {
        values.extend(paths.path(i).iter().map(|&x| u * x));
    }
    LatentPaths::new(paths.grid().to_vec(), values, paths.count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{HurstFunction, MeanFunction};

    fn tiny_config(psi_norm: f64) -> SimConfig<f64> {
        let mut cfg = SimConfig::model2(8, 4);
        cfg.psi_norm = psi_norm;
        cfg.eval_grid_size = 64;
        cfg.burn_in = 5;
        cfg
    }

    #[test]
    fn kappa_zero_reproduces_mean_plus_scaled_innovations() {
        let mut cfg = tiny_config(0.0);
        cfg.seed = 31;
        let model = Far1Model::new(&cfg).unwrap();
        let paths = model.generate_with(cfg.seed);

        // replay the innovation stream: burn_in + n draws in order
        let grid = LatentPaths::<f64>::equispaced_grid(cfg.eval_grid_size);
        let sampler =
            GaussianSampler::from_fn(|u, v| mfbm_cov(u, v, &cfg.hurst), &grid).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let all = sampler.sample_rows(cfg.burn_in + cfg.n, &mut rng);
        for n in 0..cfg.n {
            let xi = &all[(cfg.burn_in + n) * grid.len()..(cfg.burn_in + n + 1) * grid.len()];
            let path = paths.path(n);
            for j in 0..grid.len() {
                let expect = cfg.mean.eval(grid[j]) + cfg.l_scale * xi[j];
                assert_eq!(path[j], expect);
            }
        }
    }

    #[test]
    fn kappa_zero_sigma_zero_constant_mean_is_exact() {
        let mut cfg = tiny_config(0.0);
        cfg.mean = MeanFunction::Constant(2.5);
        cfg.l_scale = 0.0;
        let paths = far1_generate(&cfg).unwrap();
        for n in 0..cfg.n {
            assert!(paths.path(n).iter().all(|&v| v == 2.5));
        }
    }

    #[test]
    fn operator_calibration_hits_requested_norm() {
        let grid = LatentPaths::<f64>::equispaced_grid(128);
        let base = kernel_matrix(&grid);
        let s = spectral_norm(&base, 128);
        let scaled: Vec<f64> = base.iter().map(|v| v * (0.5 / s)).collect();
        let s2 = spectral_norm(&scaled, 128);
        assert!((s2 - 0.5).abs() < 1e-9, "rescaled spectral norm {s2}");
        let rs = max_row_sum(&base, 128);
        assert!(rs > s, "row-sum norm should dominate the spectral norm here");
    }

    #[test]
    fn psi_norm_half_is_stationary_under_both_norms() {
        for norm in [OperatorNorm::Spectral, OperatorNorm::MaxRowSum] {
            let mut cfg = tiny_config(0.5);
            cfg.operator_norm = norm;
            cfg.n = 16;
            let paths = far1_generate(&cfg).unwrap();
            assert_eq!(paths.count(), 16);
            assert!(paths.path(7).iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn far1_long_run_grid_mean_approaches_mean_function() {
        let mut cfg: SimConfig<f64> = SimConfig::model2(4000, 4);
        cfg.eval_grid_size = 64;
        cfg.seed = 17;
        let model = Far1Model::new(&cfg).unwrap();
        let paths = model.generate_with(cfg.seed);
        let g = cfg.eval_grid_size;
        let grid = paths.grid().to_vec();
        for (j, &u) in grid.iter().enumerate().step_by(16) {
            let mean_j: f64 = (0..cfg.n).map(|n| paths.path(n)[j]).sum::<f64>() / cfg.n as f64;
            let truth = cfg.mean.eval(u);
            // sd of the mean over 4000 dependent draws with Var ≈ L²·u^{2H}/(1-ψ²)
            assert!(
                (mean_j - truth).abs() < 0.25,
                "grid point {j}/{g}: {mean_j} vs {truth}"
            );
        }
    }

    #[test]
    fn farch_with_zero_kernel_is_scaled_noise() {
        let grid = LatentPaths::<f64>::equispaced_grid(32);
        let h = HurstFunction::constant(0.5).unwrap();
        let sampler = GaussianSampler::from_fn(|u, v| mfbm_cov(u, v, &h), &grid).unwrap();
        let c = |_t: f64| 4.0;
        let beta = |_s: f64, _t: f64| 0.0;
        let paths = farch1_generate(6, &grid, &c, &beta, &sampler, 3, 77).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let all = sampler.sample_rows(3 + 6, &mut rng);
        for n in 0..6 {
            let xi = &all[(3 + n) * 32..(3 + n + 1) * 32];
            for j in 0..32 {
                assert_eq!(paths.path(n)[j], xi[j] * 2.0);
            }
        }
    }

    #[test]
    fn farch_variance_fixed_point() {
        // small constant β: Var(Y(t)) solves v = Var(ξ(t))·(c + ∫β v)
        let g = 24;
        let grid = LatentPaths::<f64>::equispaced_grid(g);
        let h = HurstFunction::constant(0.5).unwrap();
        let sampler = GaussianSampler::from_fn(|u, v| mfbm_cov(u, v, &h), &grid).unwrap();
        let c = |_t: f64| 1.0;
        let beta_val = 0.2;
        let beta = move |_s: f64, _t: f64| beta_val;
        let count = 30_000;
        let paths = farch1_generate(count, &grid, &c, &beta, &sampler, 50, 3).unwrap();
        // fixed point: v(t) = var_xi(t)·(1 + β ∫ v(s) ds); with var_xi(t) = t,
        // integrate: let A = ∫ v = ∫ t (1 + βA) dt = (1 + βA)/2 → A = 1/(2-β)
        let a = 1.0 / (2.0 - beta_val);
        let j = g / 2;
        let t = grid[j];
        let expect = t * (1.0 + beta_val * a);
        let emp: f64 =
            (0..count).map(|n| paths.path(n)[j].powi(2)).sum::<f64>() / count as f64;
        assert!(
            (emp - expect).abs() < 0.05 * expect.max(0.1),
            "t={t}: empirical {emp} vs fixed point {expect}"
        );
    }

    #[test]
    fn farch_rejects_bad_inputs() {
        let grid = LatentPaths::<f64>::equispaced_grid(8);
        let h = HurstFunction::constant(0.5).unwrap();
        let sampler = GaussianSampler::from_fn(|u, v| mfbm_cov(u, v, &h), &grid).unwrap();
        assert!(farch1_generate(3, &grid, &|_| 0.0, &|_, _| 0.0, &sampler, 0, 1).is_err());
        assert!(farch1_generate(3, &grid, &|_| 1.0, &|_, _| -1.0, &sampler, 0, 1).is_err());
    }

    #[test]
    fn product_paths_examples() {
        let grid = LatentPaths::<f64>::equispaced_grid(4);
        let paths =
            LatentPaths::new(grid, vec![1.0, 2.0, 3.0, 4.0, -1.0, 0.5, 2.0, 8.0], 2).unwrap();
        let ones = product_paths(&[1.0, 1.0], &paths).unwrap();
        assert_eq!(ones, paths);
        let zeros = product_paths(&[0.0, 0.0], &paths).unwrap();
        assert!(zeros.path(0).iter().all(|&v| v == 0.0));
        let alt = product_paths(&[1.0, -1.0], &paths).unwrap();
        assert_eq!(alt.path(1), &[1.0, -0.5, -2.0, -8.0]);
        assert!(product_paths(&[1.0], &paths).is_err());
    }
}
