//! Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.
//!
//! Lines go straight to stdout so they appear even when the harness captures output.
//! Run with `cargo test -p offmoo --test acceptance`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use offmoo::estimators::{true_value, ConfidenceConfig, OffPolicyData};
use offmoo::experiment::{mean_stderr, run_sweep, ResultRow};
use offmoo::hypervolume::{hv_exact_2d, hv_inclusion_exclusion, hv_monte_carlo, FrontPoints};
use offmoo::optimize::{
    build_value_model, finite_difference_gradient, gaussian_parameters, greedy_select, hv_gradient,
};
use offmoo::policy::sample_unit_ball;
use offmoo::verification::{adversarial_suite, coverage_suite, greedy_suite, hv_error_suite, selection_bound_suites};
use offmoo::{
    ExperimentConfig, HvObjective, Hypervolume, HypervolumeMethod, LoggedDataset, LoggingPolicy, Method, ObjectiveKind,
    PolicySet, ProblemSpec, SoftmaxPolicy,
};

fn report(id: u32, name: &str, passed: bool, detail: &str) {
    let status = if passed { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[acceptance {id}] {status}  {name}: {detail}");
    let _ = out.flush();
}

/// Uniform points, or a mutually non-dominated set on a random monotone curve.
fn random_front(rng: &mut ChaCha8Rng, k: usize) -> Vec<Vec<f64>> {
    if rng.random_bool(0.5) {
        (0..k).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect()
    } else {
        let p: f64 = rng.random_range(0.3..3.0);
        (0..k)
            .map(|_| {
                let u: f64 = rng.random();
                vec![u, (1.0 - u.powf(p)).max(0.0).powf(1.0 / p)]
            })
            .collect()
    }
}

#[test]
fn criterion_1_hypervolume_methods_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let k = rng.random_range(1..=12);
        let pts = FrontPoints::new(random_front(&mut rng, k));
        let a = hv_exact_2d(&pts).unwrap();
        let b = hv_inclusion_exclusion(&pts).unwrap();
        worst = worst.max((a - b).abs());
    }
    let exact_ok = worst <= 1e-12;

    let mut worst_z = 0.0f64;
    for _ in 0..20 {
        let k = rng.random_range(1..=12);
        let pts = FrontPoints::new(random_front(&mut rng, k));
        let exact = hv_exact_2d(&pts).unwrap();
        let samples = 1_000_000;
        let mc = hv_monte_carlo(&pts, samples, &mut rng).unwrap();
        let stderr = (exact * (1.0 - exact) / samples as f64).sqrt();
        let z = if stderr > 0.0 {
            (mc - exact).abs() / stderr
        } else if mc == exact {
            0.0
        } else {
            f64::INFINITY
        };
        worst_z = worst_z.max(z);
    }
    let mc_ok = worst_z <= 3.0;
    let passed = exact_ok && mc_ok;
    report(
        1,
        "exact2d vs inclusion-exclusion, Monte Carlo vs exact",
        passed,
        &format!("max |exact2d - incl-excl| = {worst:.3e} over 1000 fronts; max MC deviation {worst_z:.2} stderr over 20 fronts"),
    );
    assert!(passed);
}

#[test]
fn criterion_2_hypervolume_error_bound() {
    let out = hv_error_suite(1000, 202).unwrap();
    report(2, "hypervolume error bound, m in {2,3}", out.passed, &out.detail);
    assert!(out.passed, "{}", out.detail);
}

#[test]
fn criterion_3_confidence_interval_coverage() {
    let (out, rep) = coverage_suite(5, 200, 5000, 303).unwrap();
    // per (policy, objective): rate <= nominal + 3 binomial stderr of the nominal rate
    let nominal = rep.nominal_rate();
    let limit = nominal + 3.0 * (nominal * (1.0 - nominal) / rep.trials as f64).sqrt();
    let cells = rep.failure_rates.iter().flatten().count();
    let passed = out.passed && rep.failure_rates.iter().flatten().all(|&r| r <= limit) && cells == 10;
    report(
        3,
        "beta = 3 coverage over 5000 datasets",
        passed,
        &format!(
            "max rate {:.4} over {cells} (policy, objective) pairs, limit {limit:.4}",
            rep.max_rate()
        ),
    );
    assert!(passed, "{:?}", rep.failure_rates);
}

#[test]
fn criterion_4_selection_bounds_and_adversarial_instance() {
    let [mean, pess] = selection_bound_suites(500, 404).unwrap();
    let adversarial = adversarial_suite(405).unwrap();
    let passed = mean.passed && pess.passed && adversarial.passed;
    report(
        4,
        "mean and pessimistic selection bounds, adversarial construction",
        passed,
        &format!(
            "mean: {}; pessimistic: {}; adversarial: {}",
            mean.detail, pess.detail, adversarial.detail
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_5_greedy_guarantee() {
    let out = greedy_suite(200, 505).unwrap();
    report(5, "greedy (1 - 1/e) guarantee vs brute force", out.passed, &out.detail);
    assert!(out.passed, "{}", out.detail);
}

#[test]
fn criterion_6_gradients_match_finite_differences() {
    let spec = ProblemSpec::new("DTLZ2", 6, 2);
    let problem = spec.build().unwrap();
    let logging = LoggingPolicy::new(problem.clone(), 0.1).unwrap();
    let ds = LoggedDataset::generate(&spec, &logging, 300, 1.0, 606).unwrap();
    let data = OffPolicyData::new(&logging, &ds).unwrap();
    let confidence = ConfidenceConfig::new(0.2, 1.0).unwrap();
    let hv = || Hypervolume::new(HypervolumeMethod::Exact2d, 2, 0).unwrap();
    let k = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(607);
    let mut details = Vec::new();
    let mut passed = true;
    for kind in [
        ObjectiveKind::Mean,
        ObjectiveKind::Pessimistic,
        ObjectiveKind::Ehvi { resamples: 4 },
    ] {
        let model = build_value_model(kind, &problem, &data, confidence, 608).unwrap();
        let objective = HvObjective::new(model.as_ref(), hv(), k).unwrap();
        let (mut checked, mut attempts, mut worst) = (0, 0, 0.0f64);
        while checked < 50 && attempts < 5000 {
            attempts += 1;
            let flat = gaussian_parameters(k * objective.dim(), 0.3, &mut rng);
            // non-degenerate: away from clamps, argmax ties and coordinate ties
            if objective.kink_margin(&flat).unwrap() < 1e-4 {
                continue;
            }
            let set = PolicySet::from_flat(&flat, k).unwrap();
            let g = hv_gradient(&set, &objective).unwrap();
            let fd = finite_difference_gradient(&objective, &flat, 1e-5).unwrap();
            let scale = g.iter().chain(&fd).fold(0.0f64, |a, v| a.max(v.abs()));
            if scale == 0.0 {
                continue;
            }
            let rel = g.iter().zip(&fd).fold(0.0f64, |a, (x, y)| a.max((x - y).abs())) / scale;
            worst = worst.max(rel);
            checked += 1;
        }
        let ok = checked == 50 && worst <= 1e-4;
        passed &= ok;
        details.push(format!("{kind}: {checked} points, max rel err {worst:.2e}"));
    }
    report(
        6,
        "hypervolume gradient vs central differences",
        passed,
        &details.join("; "),
    );
    assert!(passed, "{details:?}");
}

fn sweep(problem: &str, n: usize, epsilons: &[f64], methods: &[Method], runs: usize) -> Vec<ResultRow> {
    let cfg = ExperimentConfig {
        problem: ProblemSpec::new(problem, 6, 2),
        n_values: vec![n],
        k_values: vec![10],
        epsilons: epsilons.to_vec(),
        sigma: 1.0,
        methods: methods.to_vec(),
        runs,
        timing: false,
        ..ExperimentConfig::default()
    };
    let rows = run_sweep(&cfg, None).unwrap();
    assert!(rows.iter().all(ResultRow::is_ok), "failed cells in {problem} sweep");
    rows
}

fn stats(rows: &[ResultRow], method: Method, epsilon: f64) -> (f64, f64) {
    let name = method.to_string();
    let xs: Vec<f64> = rows
        .iter()
        .filter(|r| r.method == name && r.epsilon == epsilon)
        .map(|r| r.recovered_hv)
        .collect();
    mean_stderr(&xs)
}

/// Standard error of a difference of two independent means.
fn pooled(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.1 * a.1 + b.1 * b.1).sqrt()
}

#[test]
fn criterion_7_pessimism_beats_mean_and_random() {
    let methods = [Method::Random, Method::MeanHvi, Method::PessHvi];
    let mut passed = true;
    let mut details = Vec::new();
    for problem in ["ZDT1", "DTLZ2"] {
        let rows = sweep(problem, 500, &[0.1], &methods, 10);
        let random = stats(&rows, Method::Random, 0.1);
        let mean = stats(&rows, Method::MeanHvi, 0.1);
        let pess = stats(&rows, Method::PessHvi, 0.1);
        let over_mean = pess.0 - mean.0 >= pooled(pess, mean);
        let over_random = pess.0 - random.0 >= pooled(pess, random);
        passed &= over_mean && over_random;
        details.push(format!(
            "{problem}: pessHVI {:.4}±{:.4}, meanHVI {:.4}±{:.4}, random {:.4}±{:.4}",
            pess.0, pess.1, mean.0, mean.1, random.0, random.1
        ));
    }
    report(
        7,
        "recovered hypervolume ordering at n = 500, K = 10",
        passed,
        &details.join("; "),
    );
    assert!(passed, "{details:?}");
}

#[test]
fn criterion_8_pessimism_gap_shrinks_with_uniform_logging() {
    let rows = sweep("DTLZ2", 2000, &[0.1, 1.0], &[Method::MeanHvi, Method::PessHvi], 10);
    let gap = |eps: f64| stats(&rows, Method::PessHvi, eps).0 - stats(&rows, Method::MeanHvi, eps).0;
    let (near_greedy, uniform) = (gap(0.1), gap(1.0));
    let passed = near_greedy > uniform;
    report(
        8,
        "pessimism gap at epsilon 0.1 exceeds gap at epsilon 1.0",
        passed,
        &format!("gap(0.1) = {near_greedy:.4}, gap(1.0) = {uniform:.4}"),
    );
    assert!(passed);
}

#[test]
fn criterion_9_single_objective_greedy_picks_best_policy() {
    let problem = ProblemSpec::new("DTLZ2", 6, 2).build().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let contexts = problem.sample_contexts(200, &mut rng);
    let pool = PolicySet::new(
        (0..50)
            .map(|_| {
                SoftmaxPolicy::new(
                    sample_unit_ball(problem.feature_dim(), &mut rng)
                        .iter()
                        .map(|v| 3.0 * v)
                        .collect(),
                )
            })
            .collect(),
    )
    .unwrap();
    let first = |p: &SoftmaxPolicy| true_value(&problem, p, &contexts).map(|v| vec![v[0]]);
    let values: Vec<f64> = pool.iter().map(|p| first(p).unwrap()[0]).collect();
    let best = values
        .iter()
        .enumerate()
        .fold(0, |b, (i, &v)| if v > values[b] { i } else { b });
    let hv = Hypervolume::new(HypervolumeMethod::default_for(1), 1, 0).unwrap();
    let (chosen, value) = greedy_select(&pool, 1, first, &hv).unwrap();
    let passed = chosen.policies()[0] == pool.policies()[best] && value == values[best];
    report(
        9,
        "m = 1, K = 1 greedy returns the highest-value policy",
        passed,
        &format!("chose value {value:.6}, best {:.6} (policy {best})", values[best]),
    );
    assert!(passed);
}
