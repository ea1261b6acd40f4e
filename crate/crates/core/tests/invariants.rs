//! Property tests for the transform identities and the bound-distance
//! filter chain.

mod common;

use proptest::prelude::*;
use specsim::metrics::{
    baseline_bound_distance, lower_bound_distance, make_region, true_distance, RegionPolicy,
};
use specsim::signal::{dft, energy, extract_features, normalize, TimeSequence};

fn finite_values(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, len)
}

fn seq(values: Vec<f64>) -> TimeSequence {
    TimeSequence::new("p", values).unwrap()
}

proptest! {
    #[test]
    fn parseval_holds(values in finite_values(16..512)) {
        let e_time = energy(&values);
        let e_freq = dft(&seq(values)).energy();
        prop_assert!((e_time - e_freq).abs() <= 1e-9 * e_time + 1e-12);
    }

    #[test]
    fn spectrum_is_conjugate_symmetric(values in finite_values(8..256)) {
        let n = values.len();
        let x = dft(&seq(values));
        for f in 1..n {
            let diff = (x.coeffs[n - f] - x.coeffs[f].conj()).norm();
            prop_assert!(diff <= 1e-9);
        }
    }

    #[test]
    fn amplitudes_mirror_around_the_middle(values in finite_values(8..128)) {
        let n = values.len();
        let x = dft(&seq(values));
        for f in 1..n {
            prop_assert!((x.coeffs[n - f].norm() - x.coeffs[f].norm()).abs() <= 1e-9);
        }
    }

    #[test]
    fn transform_is_linear(
        x in finite_values(16..17).prop_map(|v| v),
        y in finite_values(16..17),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
    ) {
        let mixed: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let lhs = dft(&seq(mixed));
        let fx = dft(&seq(x));
        let fy = dft(&seq(y));
        for f in 0..16 {
            let rhs = a * fx.coeffs[f] + b * fy.coeffs[f];
            prop_assert!((lhs.coeffs[f] - rhs).norm() <= 1e-9);
        }
    }

    #[test]
    fn features_ignore_offset_and_scale(
        values in finite_values(12..64),
        scale in 0.5f64..5.0,
        offset in -50.0f64..50.0,
    ) {
        let base = seq(values.clone());
        prop_assume!(normalize(&base).is_ok());
        let mapped = seq(values.iter().map(|v| scale * v + offset).collect());
        let fa = extract_features(&base, 2);
        prop_assume!(fa.is_ok());
        let fa = fa.unwrap();
        let fb = extract_features(&mapped, 2).unwrap();
        for (p, q) in fa.coords.iter().zip(&fb.coords) {
            prop_assert!((p - q).abs() <= 1e-9);
        }
    }

    #[test]
    fn bound_chain_filters_without_dismissal(
        x in finite_values(32..33),
        y in finite_values(32..33),
        k in 1usize..=4,
    ) {
        let sx = seq(x);
        let sy = seq(y);
        let (nx, _) = normalize(&sx).unwrap();
        let (ny, _) = normalize(&sy).unwrap();
        let fx = extract_features(&sx, k).unwrap();
        let fy = extract_features(&sy, k).unwrap();
        let base = baseline_bound_distance(&fx, &fy).unwrap();
        let lower = lower_bound_distance(&fx, &fy).unwrap();
        let truth = true_distance(&nx, &ny).unwrap();
        prop_assert!(base <= lower);
        prop_assert!(lower <= truth + 1e-12);

        // anything within eps in the time domain sits inside both regions
        let eps = truth + 1e-9;
        for policy in [RegionPolicy::Baseline, RegionPolicy::Symmetric] {
            let region = make_region(&fx, eps, policy).unwrap();
            prop_assert!(region.contains(&fy.coords));
        }
    }

    #[test]
    fn frequency_distance_equals_time_distance(
        x in finite_values(64..65),
        y in finite_values(64..65),
    ) {
        let sx = seq(x);
        let sy = seq(y);
        let truth = true_distance(&sx, &sy).unwrap();
        let fx = dft(&sx);
        let fy = dft(&sy);
        let freq: f64 = fx
            .coeffs
            .iter()
            .zip(&fy.coeffs)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        prop_assert!((truth - freq).abs() <= 1e-9 * (1.0 + truth));
    }
}
