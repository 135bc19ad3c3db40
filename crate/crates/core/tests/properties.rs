//! Property suites for the kernel/statistics invariants.

use ftsreg_core::domain::{BandwidthGrid, DesignKind, DomainInterval, FunctionalSample, ObservedCurve};
use ftsreg_core::kernel::{epanechnikov, nw_weights};
use ftsreg_core::locreg::{holder_exponent_from, increment_triple};
use ftsreg_core::mean::{risk_bound, select_bandwidth, RiskInputs};
use ftsreg_core::presmooth::presmooth;
use proptest::prelude::*;

fn curve_strategy() -> impl Strategy<Value = ObservedCurve<f64>> {
    // 3..12 strictly increasing times in (0,1] with bounded values
    (3usize..12)
        .prop_flat_map(|m| {
            (
                proptest::collection::vec(0.01f64..0.99, m),
                proptest::collection::vec(-5.0f64..5.0, m),
            )
        })
        .prop_filter_map("distinct sorted times", |(mut ts, vs)| {
            ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ts.dedup();
            if ts.len() < 2 {
                return None;
            }
            let vs = vs[..ts.len()].to_vec();
            ObservedCurve::new(ts, vs).ok()
        })
}

proptest! {
    #[test]
    fn epanechnikov_shape(u in -3.0f64..3.0) {
        let k = epanechnikov(u);
        prop_assert!(k >= 0.0 && k <= 0.75);
        prop_assert_eq!(epanechnikov(-u), k);
        if u.abs() > 1.0 {
            prop_assert_eq!(k, 0.0);
        }
    }

    #[test]
    fn weights_normalize_or_vanish(curve in curve_strategy(), t in 0.0f64..1.0, h in 0.001f64..0.5) {
        let w = nw_weights(t, h, curve.times()).unwrap();
        prop_assert!(w.iter().all(|&x| x >= 0.0));
        let sum: f64 = w.iter().sum();
        // a strictly interior point forces normalization to 1
        let interior = curve.times().iter().any(|&x| (x - t).abs() < h);
        if interior {
            prop_assert!((sum - 1.0).abs() < 1e-12, "sum = {}", sum);
        } else {
            // either a boundary-only window (all kernel mass zero) or empty
            prop_assert_eq!(sum, 0.0);
        }
    }

    #[test]
    fn weights_translation_equivariant(curve in curve_strategy(), t in 0.2f64..0.8, h in 0.01f64..0.3, c in -0.5f64..0.5) {
        let w0 = nw_weights(t, h, curve.times()).unwrap();
        let shifted: Vec<f64> = curve.times().iter().map(|&x| x + c).collect();
        let w1 = nw_weights(t + c, h, &shifted).unwrap();
        for (a, b) in w0.iter().zip(&w1) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn coverage_monotone_in_h(curve in curve_strategy(), t in 0.0f64..1.0, h1 in 0.001f64..0.5, h2 in 0.001f64..0.5) {
        let (lo, hi) = if h1 <= h2 { (h1, h2) } else { (h2, h1) };
        prop_assert!(!curve.covers(t, lo) || curve.covers(t, hi));
    }

    #[test]
    fn risk_row_sum_identity(
        curves in proptest::collection::vec(curve_strategy(), 2..6),
        t in 0.1f64..0.9,
        h in 0.02f64..0.4,
        exponent in 0.05f64..1.0,
        l2 in 0.0f64..4.0,
        noise in 0.0f64..2.0,
        dep in 0.0f64..3.0,
    ) {
        let sample = FunctionalSample::new(curves, DesignKind::Independent, DomainInterval::unit()).unwrap();
        let row = risk_bound(&sample, t, h, &RiskInputs {
            exponent, constant_sq: l2, noise_var: noise, dependence: dep,
        });
        if row.feasible {
            prop_assert!(row.bias >= 0.0 && row.stochastic >= 0.0 && row.penalty >= 0.0);
            prop_assert_eq!(row.total, row.bias + row.stochastic + row.penalty);
        } else {
            prop_assert!(row.total.is_infinite());
        }
    }

    #[test]
    fn argmin_invariant_under_positive_scaling(
        curves in proptest::collection::vec(curve_strategy(), 3..6),
        t in 0.2f64..0.8,
        exp2 in -3i32..4,
    ) {
        let sample = FunctionalSample::new(curves, DesignKind::Independent, DomainInterval::unit()).unwrap();
        let grid = BandwidthGrid::default_for(sample.n_curves(), sample.lambda_hat(), &DomainInterval::unit(), 15).unwrap();
        let reg = ftsreg_core::locreg::RegularityEstimate {
            t, delta: 0.2, exponent: 0.4, raw_exponent: 0.4, constant_sq: 1.0,
            order: 0, alpha: 0.4, shifted: false, saturated: false,
        };
        let c = 2.0f64.powi(exp2); // exact scaling
        let p1 = select_bandwidth(&sample, t, &grid, &reg, 0.3, 0.7);
        let reg_c = ftsreg_core::locreg::RegularityEstimate { constant_sq: c, ..reg };
        let p2 = select_bandwidth(&sample, t, &grid, &reg_c, 0.3 * c, 0.7 * c);
        match (p1, p2) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.argmin_index, b.argmin_index),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "feasibility must not depend on scaling"),
        }
    }

    #[test]
    fn increment_stats_symmetric_nonnegative(
        curves in proptest::collection::vec(curve_strategy(), 2..5),
        u in 0.1f64..0.9,
        v in 0.1f64..0.9,
        b in 0.05f64..0.3,
    ) {
        let sample = FunctionalSample::new(curves, DesignKind::Independent, DomainInterval::unit()).unwrap();
        let pres = presmooth(&sample, b).unwrap();
        let a = ftsreg_core::locreg::mean_squared_increment(&pres, u, v).unwrap();
        let bb = ftsreg_core::locreg::mean_squared_increment(&pres, v, u).unwrap();
        prop_assert_eq!(a, bb);
        prop_assert!(a >= 0.0);
    }
}

#[test]
fn exponent_is_scale_and_shift_invariant_on_noisy_data() {
    // multiplicative and additive transforms of the observations leave the
    // raw exponent unchanged up to floating-point noise
    let times: Vec<f64> = (1..=80).map(|i| i as f64 / 80.0).collect();
    let mk = |a: f64, b: f64| -> FunctionalSample<f64> {
        let curves = (0..6)
            .map(|n| {
                let vals: Vec<f64> = times
                    .iter()
                    .enumerate()
                    .map(|(i, &t)| {
                        let rough = ((i * 37 + n * 101) % 61) as f64 / 61.0 - 0.5;
                        a * ((9.0 * t + n as f64).sin() + 0.3 * rough) + b
                    })
                    .collect();
                ObservedCurve::new(times.clone(), vals).unwrap()
            })
            .collect();
        FunctionalSample::new(curves, DesignKind::Common, DomainInterval::unit()).unwrap()
    };
    let base = mk(1.0, 0.0);
    let scaled = mk(-2.5, 7.0);
    let pb = presmooth(&base, 0.04).unwrap();
    let ps = presmooth(&scaled, 0.04).unwrap();
    let tb = increment_triple(&pb, 0.5, 0.25).unwrap();
    let ts = increment_triple(&ps, 0.5, 0.25).unwrap();
    let (hb, raw_b) = holder_exponent_from(&tb);
    let (hs, raw_s) = holder_exponent_from(&ts);
    assert!((raw_b - raw_s).abs() < 1e-10);
    assert!((hb - hs).abs() < 1e-10);
    // the constant scales by a² = 6.25
    let lb = ftsreg_core::locreg::holder_constant_from(&tb, hb);
    let ls = ftsreg_core::locreg::holder_constant_from(&ts, hb);
    assert!((ls / lb - 6.25).abs() < 1e-8);
}
