//! Randomized property tests for the structural invariants of the library.

use proptest::prelude::*;

use gradfree::auc::{auc_risk, Dataset};
use gradfree::kernel::{
    grad_log_partition, inv_grad_log_partition, log_partition, sample_from_uniforms, KernelFamily,
    KernelSpec, KernelState, MeanParam, NaturalParam,
};
use gradfree::linalg::pairwise_sum;
use gradfree::objectives::catalog;
use gradfree::optimizer::adapt_lambda;
use gradfree::qmc::{generate, QmcMode};
use gradfree::smoothing::{estimate_h, weigh};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pairwise_sum_matches_naive_summation(values in prop::collection::vec(-1e6f64..1e6, 0..200)) {
        let naive: f64 = values.iter().sum();
        let pairwise = pairwise_sum(&values);
        let scale = values.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        prop_assert!((pairwise - naive).abs() <= 1e-9 * scale);
    }

    #[test]
    fn gaussian_duality_roundtrip(theta in prop::collection::vec(-50.0f64..50.0, 1..5)) {
        let spec = KernelSpec::new(KernelFamily::GaussianIso, theta.len()).unwrap();
        let mu = grad_log_partition(&spec, &NaturalParam(theta.clone())).unwrap();
        let back = inv_grad_log_partition(&spec, &MeanParam(mu.0)).unwrap();
        for (a, b) in back.0.iter().zip(&theta) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn gamma_duality_roundtrip(theta in prop::collection::vec(0.05f64..50.0, 1..4)) {
        let spec = KernelSpec::new(KernelFamily::GammaProduct, theta.len()).unwrap();
        let mu = grad_log_partition(&spec, &NaturalParam(theta.clone())).unwrap();
        let back = inv_grad_log_partition(&spec, &MeanParam(mu.0)).unwrap();
        for (a, b) in back.0.iter().zip(&theta) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn log_partition_is_convex_along_segments(
        a in prop::collection::vec(0.1f64..20.0, 2),
        b in prop::collection::vec(0.1f64..20.0, 2),
        t in 0.0f64..1.0,
    ) {
        for family in [KernelFamily::GaussianIso, KernelFamily::GammaProduct] {
            let spec = KernelSpec::new(family, 2).unwrap();
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| t * x + (1.0 - t) * y).collect();
            let fa = log_partition(&spec, &NaturalParam(a.clone())).unwrap();
            let fb = log_partition(&spec, &NaturalParam(b.clone())).unwrap();
            let fm = log_partition(&spec, &NaturalParam(mid)).unwrap();
            prop_assert!(fm <= t * fa + (1.0 - t) * fb + 1e-9);
        }
    }

    #[test]
    fn qmc_points_stay_strictly_inside_unit_cube(
        n in 1usize..512,
        d in 1usize..8,
        seed in any::<u64>(),
        index in 0u64..1000,
    ) {
        for mode in [QmcMode::Sobol, QmcMode::Pseudo] {
            let batch = generate(mode, n, d, seed, index).unwrap();
            for i in 0..n {
                for &u in batch.points.row(i) {
                    prop_assert!(u > 0.0 && u < 1.0);
                }
            }
        }
    }

    #[test]
    fn adapt_lambda_is_inverse_homogeneous(
        values in prop::collection::vec(-100.0f64..100.0, 2..50),
        scale in 0.01f64..100.0,
    ) {
        let (l1, _) = adapt_lambda(&values, 1.0, 1.0);
        let scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
        let (l2, _) = adapt_lambda(&scaled, 1.0, 1.0);
        // Rescaling the objective rescales lambda inversely, keeping the
        // log-weight spread invariant (up to fp error in the variance).
        prop_assert!((l1 - l2 * scale).abs() <= 1e-6 * l1.abs().max(1e-12));
    }

    #[test]
    fn h_estimates_are_finite_and_above_the_bound(
        theta in -3.0f64..3.0,
        gamma in 0.05f64..2.0,
        seed in any::<u64>(),
    ) {
        let obj = catalog("quadratic", 1).unwrap();
        let spec = KernelSpec::new(KernelFamily::GaussianIso, 1).unwrap();
        let state = KernelState::new(NaturalParam(vec![theta]), gamma, 1.0).unwrap();
        let batch = generate(QmcMode::Sobol, 256, 1, seed, 0).unwrap();
        let points = sample_from_uniforms(&spec, &state, &batch).unwrap();
        let cloud = weigh(points, &obj, &spec, &state, None).unwrap();
        let h = estimate_h(&cloud).unwrap();
        // h is a -log-mean-exp of non-positive exponents of -l >= 0.
        prop_assert!(h.is_finite() && h >= 0.0);
    }

    #[test]
    fn auc_risk_is_invariant_under_positive_scaling(
        rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 6..20),
        theta in prop::collection::vec(-2.0f64..2.0, 2),
        scale_exp in -10i32..10,
    ) {
        // Powers of two keep the score scaling exact in floating point, so
        // the comparison outcomes are provably identical.
        let scale = 2f64.powi(scale_exp);
        let labels: Vec<u8> = (0..rows.len()).map(|i| u8::from(i % 2 == 0)).collect();
        // Skip degenerate feature configurations (zero-variance columns may
        // reduce the dimension).
        let ds = match Dataset::from_rows("prop", &rows, &labels) {
            Ok(ds) if ds.dim() == 2 => ds,
            _ => return Ok(()),
        };
        let scaled: Vec<f64> = theta.iter().map(|t| t * scale).collect();
        prop_assert_eq!(auc_risk(&ds, &theta), auc_risk(&ds, &scaled));
    }
}
