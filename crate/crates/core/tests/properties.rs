//! Property tests for hypervolume and estimator invariants.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use offmoo::estimators::{confidence_width, ips, ips_raw, pessimistic, snips};
use offmoo::hypervolume::{hv_exact_2d, hv_inclusion_exclusion, FrontPoints};
use offmoo::optimize::gaussian_parameters;
use offmoo::{ActionProbs, ConfidenceConfig, LoggedDataset, LoggingPolicy, OffPolicyData, ProblemSpec, SoftmaxPolicy};

fn unit_points(m: usize, max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0..=1.0f64, m), 0..=max)
}

fn exact(points: &[Vec<f64>]) -> f64 {
    hv_exact_2d(&FrontPoints::new(points.to_vec())).unwrap()
}

fn incl_excl(points: &[Vec<f64>]) -> f64 {
    hv_inclusion_exclusion(&FrontPoints::new(points.to_vec())).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn hypervolume_is_monotone(points in unit_points(2, 10), extra in prop::collection::vec(0.0..=1.0f64, 2)) {
        let before = exact(&points);
        let mut more = points.clone();
        more.push(extra);
        prop_assert!(exact(&more) >= before - 1e-15);
    }

    #[test]
    fn hypervolume_is_submodular(
        small in unit_points(3, 4),
        added in unit_points(3, 4),
        z in prop::collection::vec(0.0..=1.0f64, 3),
    ) {
        let mut large = small.clone();
        large.extend(added);
        let gain = |set: &[Vec<f64>]| {
            let mut with = set.to_vec();
            with.push(z.clone());
            incl_excl(&with) - incl_excl(set)
        };
        prop_assert!(gain(&small) >= gain(&large) - 1e-12);
    }

    #[test]
    fn hypervolume_ignores_order_and_stays_in_unit_box(mut points in unit_points(2, 12)) {
        let a = exact(&points);
        points.reverse();
        prop_assert!((a - exact(&points)).abs() <= 1e-15);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!((a - incl_excl(&points)).abs() <= 1e-12);
    }
}

fn dataset(n: usize, epsilon: f64, seed: u64) -> OffPolicyData {
    let spec = ProblemSpec::new("DTLZ2", 6, 2);
    let logging = LoggingPolicy::new(spec.build().unwrap(), epsilon).unwrap();
    let ds = LoggedDataset::generate(&spec, &logging, n, 1.0, seed).unwrap();
    OffPolicyData::new(&logging, &ds).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn estimator_invariants(
        seed in 0u64..1000,
        epsilon in 0.05..1.0f64,
        scale in 0.0..2.0f64,
        beta in 0.0..3.0f64,
        extra_beta in 0.0..2.0f64,
    ) {
        let data = dataset(60, epsilon, seed);
        let theta = gaussian_parameters(16, scale, &mut ChaCha8Rng::seed_from_u64(seed));
        let probs = ActionProbs::softmax(&SoftmaxPolicy::new(theta), &data.features).unwrap();
        let cfg = ConfidenceConfig::new(beta, 1.0).unwrap();

        let clamped = ips(&data, &probs, f64::INFINITY).unwrap();
        let lower = pessimistic(&data, &probs, &cfg).unwrap();
        for (l, v) in lower.iter().zip(&clamped) {
            prop_assert!(l <= v);
            prop_assert!((0.0..=1.0).contains(l));
        }

        // SNIPS is a convex combination of the observed rewards
        let est = snips(&data, &probs).unwrap();
        for (i, v) in est.iter().enumerate() {
            let ys = (0..data.n()).map(|t| data.reward(t)[i]);
            let (lo, hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
            prop_assert!(*v >= lo - 1e-12 && *v <= hi + 1e-12);
        }

        let wider = ConfidenceConfig::new(beta + extra_beta, 1.0 + extra_beta).unwrap();
        let c = confidence_width(&data, &probs, &cfg).unwrap();
        let c_wide = confidence_width(&data, &probs, &wider).unwrap();
        prop_assert!(c.iter().zip(&c_wide).all(|(a, b)| a <= b));

        // clipping only shrinks the weights, so it moves each estimate toward zero
        let raw = ips_raw(&data, &probs, f64::INFINITY).unwrap();
        let clipped = ips_raw(&data, &probs, 2.0).unwrap();
        let unclipped_abs: Vec<f64> = (0..data.m)
            .map(|i| {
                let w = data.importance_ratios(&probs).unwrap();
                w.iter().enumerate().map(|(t, w)| (w * data.reward(t)[i]).abs()).sum::<f64>() / data.n() as f64
            })
            .collect();
        for i in 0..data.m {
            prop_assert!(clipped[i].abs() <= unclipped_abs[i] + 1e-12);
            prop_assert!(raw[i].abs() <= unclipped_abs[i] + 1e-12);
        }
    }
}
