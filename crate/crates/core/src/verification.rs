//! Brute-force oracles and randomized checks of the estimation and selection guarantees.
//!
//! Discrete instances stand in for policies: each pool member has true values `V`, estimates
//! `Ṽ` and widths `c` with `|V_i − Ṽ_i| ≤ c_i` by construction. The checks compare what a
//! subset selected under `Ṽ` (or under `clamp(Ṽ − c)`) achieves under `V` with the best subset.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::benchmarks::{seeded_stream, ProblemSpec};
use crate::error::{Error, Result};
use crate::estimators::{max_ratio_norm_sq, ActionProbs, OffPolicyData, RewardTable};
use crate::hypervolume::{Hypervolume, HypervolumeMethod};
use crate::logged_data::{sample_index, LoggedDataset};
use crate::optimize::greedy_select_indices;
use crate::policy::{sample_unit_ball, LoggingPolicy, SoftmaxPolicy};

/// Largest number of subsets [`brute_force_best_subset`] will enumerate.
pub const MAX_SUBSETS: u128 = 1_000_000;

/// Slack for floating-point error in bound comparisons.
const BOUND_TOLERANCE: f64 = 1e-12;

/// Largest width drawn by [`DiscreteInstance::random`].
pub const MAX_RANDOM_WIDTH: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteInstance {
    pub values: Vec<Vec<f64>>,
    pub estimates: Vec<Vec<f64>>,
    pub widths: Vec<Vec<f64>>,
    pub k: usize,
}

impl DiscreteInstance {
    /// `V ~ U[0,1]^m`, `c ~ U[0, 0.3]^m`, `Ṽ = clamp(V + U(−c, c), 0, 1)`.
    pub fn random<R: Rng + ?Sized>(pool: usize, m: usize, k: usize, rng: &mut R) -> Self {
        let mut values = Vec::with_capacity(pool);
        let mut estimates = Vec::with_capacity(pool);
        let mut widths = Vec::with_capacity(pool);
        for _ in 0..pool {
            let v: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
            let c: Vec<f64> = (0..m).map(|_| MAX_RANDOM_WIDTH * rng.random::<f64>()).collect();
            let e = v
                .iter()
                .zip(&c)
                .map(|(vi, ci)| (vi + ci * (2.0 * rng.random::<f64>() - 1.0)).clamp(0.0, 1.0))
                .collect();
            values.push(v);
            estimates.push(e);
            widths.push(c);
        }
        DiscreteInstance {
            values,
            estimates,
            widths,
            k,
        }
    }

    pub fn pool_size(&self) -> usize {
        self.values.len()
    }

    pub fn m(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// `clamp(Ṽ − c, 0, 1)` for every pool member.
    pub fn lower_bounds(&self) -> Vec<Vec<f64>> {
        self.estimates
            .iter()
            .zip(&self.widths)
            .map(|(e, c)| e.iter().zip(c).map(|(ei, ci)| (ei - ci).clamp(0.0, 1.0)).collect())
            .collect()
    }

    /// `c(S) = Σ_{π∈S} Σ_i c_i(π)`.
    pub fn width_sum(&self, subset: &[usize]) -> f64 {
        subset.iter().map(|&j| self.widths[j].iter().sum::<f64>()).sum()
    }

    /// Whether `|V_i − Ṽ_i| ≤ c_i` everywhere.
    pub fn good_event(&self) -> bool {
        self.values
            .iter()
            .zip(&self.estimates)
            .zip(&self.widths)
            .all(|((v, e), c)| {
                v.iter()
                    .zip(e)
                    .zip(c)
                    .all(|((vi, ei), ci)| (vi - ei).abs() <= ci + BOUND_TOLERANCE)
            })
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// The `k`-subset with the largest hypervolume under `values`, with its hypervolume.
/// Ties go to the lexicographically first subset.
pub fn brute_force_best_subset(values: &[Vec<f64>], k: usize, hv: &Hypervolume) -> Result<(Vec<usize>, f64)> {
    let pool = values.len();
    if k == 0 || k > pool {
        return Err(Error::config(format!("cannot choose {k} of {pool} candidates")));
    }
    let count = binomial(pool, k);
    if count > MAX_SUBSETS {
        return Err(Error::config(format!(
            "C({pool}, {k}) = {count} subsets exceeds the brute-force limit of {MAX_SUBSETS}"
        )));
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut best = (idx.clone(), f64::NEG_INFINITY);
    let mut points = Vec::with_capacity(k);
    loop {
        points.clear();
        points.extend(idx.iter().map(|&j| values[j].clone()));
        let v = hv.value(&points)?;
        if v > best.1 {
            best = (idx.clone(), v);
        }
        // next combination in lexicographic order
        let Some(pos) = (0..k).rev().find(|&p| idx[p] < pool - k + p) else {
            break;
        };
        idx[pos] += 1;
        for p in pos + 1..k {
            idx[p] = idx[p - 1] + 1;
        }
    }
    Ok(best)
}

/// Outcome of one bound check: what the selected set achieves under the true values against
/// the guaranteed floor.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub holds: bool,
    pub selected: Vec<usize>,
    pub optimal: Vec<usize>,
    /// `vol(Ŝ, V)`.
    pub achieved: f64,
    /// `vol(S*, V)`.
    pub optimum: f64,
    /// The floor `achieved` must reach.
    pub bound: f64,
}

fn subset_hv(values: &[Vec<f64>], subset: &[usize], hv: &Hypervolume) -> Result<f64> {
    let points: Vec<Vec<f64>> = subset.iter().map(|&j| values[j].clone()).collect();
    hv.value(&points)
}

/// Selection under the point estimates: `vol(Ŝ,V) ≥ vol(S*,V) − c(S*) − c(Ŝ)`.
pub fn check_mean_bound(inst: &DiscreteInstance, hv: &Hypervolume) -> Result<BoundCheck> {
    let (optimal, optimum) = brute_force_best_subset(&inst.values, inst.k, hv)?;
    let (selected, _) = brute_force_best_subset(&inst.estimates, inst.k, hv)?;
    let achieved = subset_hv(&inst.values, &selected, hv)?;
    let bound = optimum - inst.width_sum(&optimal) - inst.width_sum(&selected);
    Ok(BoundCheck {
        holds: achieved >= bound - BOUND_TOLERANCE,
        selected,
        optimal,
        achieved,
        optimum,
        bound,
    })
}

/// Selection under the lower bounds: `vol(Ŝ,V) ≥ vol(S*,V) − 2c(S*)`.
pub fn check_pessimism_bound(inst: &DiscreteInstance, hv: &Hypervolume) -> Result<BoundCheck> {
    let (optimal, optimum) = brute_force_best_subset(&inst.values, inst.k, hv)?;
    let (selected, _) = brute_force_best_subset(&inst.lower_bounds(), inst.k, hv)?;
    let achieved = subset_hv(&inst.values, &selected, hv)?;
    let bound = optimum - 2.0 * inst.width_sum(&optimal);
    Ok(BoundCheck {
        holds: achieved >= bound - BOUND_TOLERANCE,
        selected,
        optimal,
        achieved,
        optimum,
        bound,
    })
}

/// `|vol(S,V) − vol(S,Ṽ)| ≤ Σ_{π∈S} Σ_i c_i(π)`; returns the difference and the bound.
pub fn check_hv_error_bound(
    values: &[Vec<f64>],
    estimates: &[Vec<f64>],
    widths: &[Vec<f64>],
    hv: &Hypervolume,
) -> Result<(bool, f64, f64)> {
    if values.len() != estimates.len() || values.len() != widths.len() {
        return Err(Error::config("values, estimates and widths must cover the same set"));
    }
    let diff = (hv.value(values)? - hv.value(estimates)?).abs();
    let bound: f64 = widths.iter().flatten().sum();
    Ok((diff <= bound + BOUND_TOLERANCE, diff, bound))
}

/// Greedy selection under the true values against the `(1 − 1/e)` fraction of the best subset.
pub fn check_greedy_guarantee(values: &[Vec<f64>], k: usize, hv: &Hypervolume) -> Result<BoundCheck> {
    let (optimal, optimum) = brute_force_best_subset(values, k, hv)?;
    let (selected, achieved) = greedy_select_indices(values, k, hv)?;
    let bound = (1.0 - (-1.0f64).exp()) * optimum;
    Ok(BoundCheck {
        holds: achieved >= bound - BOUND_TOLERANCE,
        selected,
        optimal,
        achieved,
        optimum,
        bound,
    })
}

/// A pool where one policy looks perfect but is worthless and all others are estimated exactly.
///
/// Point-estimate selection falls for the impostor, and the mean bound survives only through
/// the impostor's own width. The lower bounds zero the impostor out.
pub fn overestimated_instance() -> DiscreteInstance {
    let honest = vec![vec![0.8, 0.3], vec![0.3, 0.8], vec![0.6, 0.6], vec![0.2, 0.2]];
    let mut values = honest.clone();
    let mut estimates = honest;
    let mut widths = vec![vec![0.0, 0.0]; values.len()];
    values.push(vec![0.0, 0.0]);
    estimates.push(vec![1.0, 1.0]);
    widths.push(vec![1.0, 1.0]);
    DiscreteInstance {
        values,
        estimates,
        widths,
        k: 2,
    }
}

/// Exact estimates on the optimal members, garbage with unit width everywhere else.
///
/// The pool is built so that the exactly estimated members form the true optimum; selection
/// under the lower bounds must recover it with zero loss.
pub fn separation_instance<R: Rng + ?Sized>(k: usize, distractors: usize, rng: &mut R) -> DiscreteInstance {
    let mut values = Vec::new();
    let mut estimates = Vec::new();
    let mut widths = Vec::new();
    for j in 0..k {
        // evenly spread points on the line v1 + v2 = 1.2
        let s = (j as f64 + 1.0) / (k as f64 + 1.0);
        let v = vec![0.2 + s, 1.0 - s];
        values.push(v.clone());
        estimates.push(v);
        widths.push(vec![0.0, 0.0]);
    }
    for _ in 0..distractors {
        values.push(vec![0.1 * rng.random::<f64>(), 0.1 * rng.random::<f64>()]);
        estimates.push(vec![rng.random::<f64>(), rng.random::<f64>()]);
        widths.push(vec![1.0, 1.0]);
    }
    DiscreteInstance {
        values,
        estimates,
        widths,
        k,
    }
}

/// Per-(policy, objective) statistics of repeated IPS estimation on fixed contexts.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub trials: usize,
    pub beta: f64,
    /// `true_values[p][i]` on the fixed contexts.
    pub true_values: Vec<Vec<f64>>,
    /// One width per policy; it is the same for every objective.
    pub widths: Vec<f64>,
    /// Fraction of trials with `|V̂_i − V_i| > c_i`.
    pub failure_rates: Vec<Vec<f64>>,
    /// Mean and standard error of the unclamped IPS estimate over trials.
    pub mean_estimates: Vec<Vec<f64>>,
    pub estimate_stderr: Vec<Vec<f64>>,
}

impl CoverageReport {
    /// `2 exp(−β²/2)`.
    pub fn nominal_rate(&self) -> f64 {
        2.0 * (-self.beta * self.beta / 2.0).exp()
    }

    /// Whether every failure rate is at most the nominal rate plus `k` binomial standard errors.
    pub fn within_nominal(&self, k: f64) -> bool {
        let p = self.nominal_rate().min(1.0);
        let limit = p + k * (p * (1.0 - p) / self.trials as f64).sqrt();
        self.failure_rates.iter().flatten().all(|&r| r <= limit)
    }

    pub fn max_rate(&self) -> f64 {
        self.failure_rates.iter().flatten().copied().fold(0.0, f64::max)
    }
}

/// Regenerates logged data on fixed `contexts` `trials` times and records how often the unclamped
/// IPS estimate of each policy leaves its confidence interval.
pub fn coverage_simulation(
    logging: &LoggingPolicy,
    contexts: &[Vec<f64>],
    policies: &[ActionProbs],
    sigma: f64,
    beta: f64,
    trials: usize,
    seed: u64,
) -> Result<CoverageReport> {
    if trials == 0 || contexts.is_empty() || policies.is_empty() {
        return Err(Error::config("coverage needs trials, contexts and policies"));
    }
    let problem = logging.problem();
    let n = contexts.len();
    let m = problem.num_objectives();
    let rewards = RewardTable::from_problem(problem, contexts);
    let logging_rows: Vec<Vec<f64>> = contexts.iter().map(|x| logging.probabilities(x)).collect();
    let logging_probs = ActionProbs::from_rows(&logging_rows)?;
    let mut widths = Vec::with_capacity(policies.len());
    for probs in policies {
        if probs.rows != n || probs.num_actions != problem.num_actions() {
            return Err(Error::config(
                "policy probabilities must cover every context and action",
            ));
        }
        let mut total = 0.0;
        for t in 0..n {
            let best = probs
                .row(t)
                .iter()
                .zip(logging_probs.row(t))
                .map(|(p, q)| p / q)
                .fold(0.0, f64::max);
            total += best * best;
        }
        widths.push(beta * sigma * total.sqrt() / n as f64);
    }
    let true_values: Vec<Vec<f64>> = policies.iter().map(|p| rewards.expected(p)).collect();

    let estimates: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = seeded_stream(seed, trial as u64);
            let mut sums = vec![0.0; policies.len() * m];
            let mut y = vec![0.0; m];
            for t in 0..n {
                let a = sample_index(logging_probs.row(t), &mut rng);
                for (yi, r) in y.iter_mut().zip(rewards.get(t, a)) {
                    *yi = r + sigma * rng.sample::<f64, _>(StandardNormal);
                }
                let p0 = logging_probs.row(t)[a];
                for (p, probs) in policies.iter().enumerate() {
                    let w = probs.row(t)[a] / p0;
                    for (s, yi) in sums[p * m..(p + 1) * m].iter_mut().zip(&y) {
                        *s += w * yi;
                    }
                }
            }
            sums.iter_mut().for_each(|s| *s /= n as f64);
            sums
        })
        .collect();

    let pcount = policies.len();
    let mut failure_rates = vec![vec![0.0; m]; pcount];
    let mut mean_estimates = vec![vec![0.0; m]; pcount];
    let mut estimate_stderr = vec![vec![0.0; m]; pcount];
    for p in 0..pcount {
        for i in 0..m {
            let xs: Vec<f64> = estimates.iter().map(|e| e[p * m + i]).collect();
            let fails = xs
                .iter()
                .filter(|&&x| (x - true_values[p][i]).abs() > widths[p] + BOUND_TOLERANCE)
                .count();
            let mean = xs.iter().sum::<f64>() / trials as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials.max(2) - 1) as f64;
            failure_rates[p][i] = fails as f64 / trials as f64;
            mean_estimates[p][i] = mean;
            estimate_stderr[p][i] = (var / trials as f64).sqrt();
        }
    }
    Ok(CoverageReport {
        trials,
        beta,
        true_values,
        widths,
        failure_rates,
        mean_estimates,
        estimate_stderr,
    })
}

/// Largest relative deviation of `measured` from proportionality to `predicted`, after fitting
/// the single scale factor on the first grid point.
pub fn proportionality_error(measured: &[f64], predicted: &[f64]) -> f64 {
    let scale = measured[0] / predicted[0];
    measured
        .iter()
        .zip(predicted)
        .map(|(m, p)| (m / (scale * p) - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Measured `c(S)` of `k` small-norm softmax policies (ratios near a constant) on freshly
/// logged data.
pub fn measured_width_sum(spec: &ProblemSpec, n: usize, k: usize, sigma: f64, beta: f64, seed: u64) -> Result<f64> {
    let problem = spec.build()?;
    let logging = LoggingPolicy::new(problem.clone(), 0.1)?;
    let ds = LoggedDataset::generate(spec, &logging, n, sigma, seed)?;
    let data = OffPolicyData::new(&logging, &ds)?;
    let mut rng = seeded_stream(seed, 7);
    let mut total = 0.0;
    for _ in 0..k {
        let theta: Vec<f64> = sample_unit_ball(problem.feature_dim(), &mut rng)
            .iter()
            .map(|v| v * 0.01)
            .collect();
        let probs = data.softmax_probs(&SoftmaxPolicy::new(theta))?;
        let c = beta * sigma * max_ratio_norm_sq(&data, &probs)?.sqrt() / n as f64;
        total += c * problem.num_objectives() as f64;
    }
    Ok(total)
}

/// Sizes of the randomized suites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub hv_error_instances: usize,
    pub bound_instances: usize,
    pub greedy_instances: usize,
    pub coverage_trials: usize,
    pub coverage_policies: usize,
    pub coverage_n: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            hv_error_instances: 1000,
            bound_instances: 500,
            greedy_instances: 200,
            coverage_trials: 5000,
            coverage_policies: 5,
            coverage_n: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &str, failures: Vec<String>, total: usize) -> CheckOutcome {
    let detail = match failures.first() {
        None => format!("{total}/{total} passed"),
        Some(first) => format!("{}/{total} failed; first: {first}", failures.len()),
    };
    CheckOutcome {
        name: name.to_string(),
        passed: failures.is_empty(),
        detail,
    }
}

fn engine(m: usize) -> Hypervolume {
    Hypervolume::new(HypervolumeMethod::InclusionExclusion, m, 0).expect("inclusion-exclusion accepts any m")
}

/// Runs `check` on `count` seeded random instances in parallel and collects failure reports.
fn run_instances(
    count: usize,
    seed: u64,
    check: impl Fn(&mut rand_chacha::ChaCha8Rng) -> Result<Option<String>> + Sync,
) -> Result<Vec<String>> {
    let results = (0..count)
        .into_par_iter()
        .map(|i| check(&mut seeded_stream(seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(results.into_iter().flatten().collect())
}

/// Hypervolume error bound on random sets, `m ∈ {2, 3}`.
pub fn hv_error_suite(instances: usize, seed: u64) -> Result<CheckOutcome> {
    let failures = run_instances(instances, seed, |rng| {
        let m = 2 + rng.random_range(0..2);
        let size = rng.random_range(1..=6);
        let inst = DiscreteInstance::random(size, m, size, rng);
        let (ok, diff, bound) = check_hv_error_bound(&inst.values, &inst.estimates, &inst.widths, &engine(m))?;
        Ok((!ok).then(|| format!("diff {diff} > bound {bound} on {inst:?}")))
    })?;
    Ok(outcome("hypervolume error bound", failures, instances))
}

/// Mean and pessimistic selection bounds on random pools (pool ≤ 8, K ≤ 3, m = 2).
pub fn selection_bound_suites(instances: usize, seed: u64) -> Result<[CheckOutcome; 2]> {
    let hv = engine(2);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
        let pool = rng.random_range(2..=8);
        let k = rng.random_range(1..=3.min(pool));
        DiscreteInstance::random(pool, 2, k, rng)
    };
    let mean = run_instances(instances, seed, |rng| {
        let inst = draw(rng);
        let c = check_mean_bound(&inst, &hv)?;
        Ok((!c.holds).then(|| format!("{c:?} on {inst:?}")))
    })?;
    let pess = run_instances(instances, seed.wrapping_add(1), |rng| {
        let inst = draw(rng);
        let c = check_pessimism_bound(&inst, &hv)?;
        Ok((!c.holds).then(|| format!("{c:?} on {inst:?}")))
    })?;
    Ok([
        outcome("mean selection bound", mean, instances),
        outcome("pessimistic selection bound", pess, instances),
    ])
}

/// The two constructed instances: an overestimated impostor and exact-optimum separation.
pub fn adversarial_suite(seed: u64) -> Result<CheckOutcome> {
    let hv = engine(2);
    let mut failures = Vec::new();
    let inst = overestimated_instance();
    let mean = check_mean_bound(&inst, &hv)?;
    let pess = check_pessimism_bound(&inst, &hv)?;
    if !mean.holds {
        failures.push(format!("mean bound violated: {mean:?}"));
    }
    if inst.width_sum(&mean.selected) < 1.0 {
        failures.push(format!("impostor was not selected: {mean:?}"));
    }
    if !pess.holds || pess.optimum - pess.achieved > BOUND_TOLERANCE {
        failures.push(format!("pessimism lost value: {pess:?}"));
    }
    let mut rng = seeded_stream(seed, 0);
    for k in 1..=3 {
        let inst = separation_instance(k, 5, &mut rng);
        let pess = check_pessimism_bound(&inst, &hv)?;
        if pess.optimum - pess.achieved > BOUND_TOLERANCE || inst.width_sum(&pess.optimal) != 0.0 {
            failures.push(format!("separation with K={k}: {pess:?}"));
        }
    }
    Ok(outcome("adversarial constructions", failures, 4))
}

/// Greedy `(1 − 1/e)` guarantee on random pools (pool ≤ 12, K ≤ 4, m = 2).
pub fn greedy_suite(instances: usize, seed: u64) -> Result<CheckOutcome> {
    let hv = engine(2);
    let failures = run_instances(instances, seed, |rng| {
        let pool = rng.random_range(2..=12);
        let k = rng.random_range(1..=4.min(pool));
        let values = DiscreteInstance::random(pool, 2, k, rng).values;
        let c = check_greedy_guarantee(&values, k, &hv)?;
        Ok((!c.holds).then(|| format!("{c:?} on {values:?}")))
    })?;
    Ok(outcome("greedy guarantee", failures, instances))
}

/// Coverage of the `β = 3` interval for random unit-ball policies on DTLZ2.
pub fn coverage_suite(policies: usize, n: usize, trials: usize, seed: u64) -> Result<(CheckOutcome, CoverageReport)> {
    let spec = ProblemSpec {
        seed,
        ..ProblemSpec::new("DTLZ2", 6, 2)
    };
    let problem = spec.build()?;
    let logging = LoggingPolicy::new(problem.clone(), 0.1)?;
    let mut rng = seeded_stream(seed, 3);
    let contexts = problem.sample_contexts(n, &mut rng);
    let table = problem.feature_table(&contexts);
    let probs = (0..policies)
        .map(|_| {
            ActionProbs::softmax(
                &SoftmaxPolicy::new(sample_unit_ball(problem.feature_dim(), &mut rng)),
                &table,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let report = coverage_simulation(&logging, &contexts, &probs, 1.0, 3.0, trials, seed)?;
    let passed = report.within_nominal(3.0);
    let detail = format!(
        "max failure rate {:.4} vs nominal {:.4} over {} trials",
        report.max_rate(),
        report.nominal_rate(),
        trials
    );
    Ok((
        CheckOutcome {
            name: "confidence interval coverage".into(),
            passed,
            detail,
        },
        report,
    ))
}

/// `c(S)` proportional to K, m and 1/√n for near-uniform policies.
pub fn width_scaling_suite(seed: u64) -> Result<CheckOutcome> {
    let base = ProblemSpec {
        seed,
        ..ProblemSpec::new("DTLZ2", 8, 2)
    };
    let mut failures = Vec::new();
    let ks = [2usize, 4, 8];
    let by_k = ks
        .iter()
        .map(|&k| measured_width_sum(&base, 500, k, 1.0, 0.2, seed))
        .collect::<Result<Vec<_>>>()?;
    let ms = [2usize, 3, 4];
    let by_m = ms
        .iter()
        .map(|&m| {
            let spec = ProblemSpec { m, ..base.clone() };
            measured_width_sum(&spec, 500, 4, 1.0, 0.2, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    let ns = [250usize, 1000, 4000];
    let by_n = ns
        .iter()
        .map(|&n| measured_width_sum(&base, n, 4, 1.0, 0.2, seed))
        .collect::<Result<Vec<_>>>()?;
    let grids = [
        ("K", by_k, ks.map(|k| k as f64).to_vec()),
        ("m", by_m, ms.map(|m| m as f64).to_vec()),
        ("1/sqrt(n)", by_n, ns.map(|n| 1.0 / (n as f64).sqrt()).to_vec()),
    ];
    for (name, measured, predicted) in &grids {
        let err = proportionality_error(measured, predicted);
        if err > 0.1 {
            failures.push(format!("{name}: {measured:?} deviates {err:.3} from proportionality"));
        }
    }
    Ok(outcome("width scaling", failures, 3))
}

/// Every check with the configured sizes.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<CheckOutcome>> {
    let mut out = vec![hv_error_suite(cfg.hv_error_instances, cfg.seed)?];
    out.extend(selection_bound_suites(cfg.bound_instances, cfg.seed.wrapping_add(10))?);
    out.push(adversarial_suite(cfg.seed)?);
    out.push(greedy_suite(cfg.greedy_instances, cfg.seed.wrapping_add(20))?);
    out.push(
        coverage_suite(
            cfg.coverage_policies,
            cfg.coverage_n,
            cfg.coverage_trials,
            cfg.seed.wrapping_add(30),
        )?
        .0,
    );
    out.push(width_scaling_suite(cfg.seed.wrapping_add(40))?);
    Ok(out)
}

/// Plain-text pass/fail table.
pub fn format_table(outcomes: &[CheckOutcome]) -> String {
    let width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for o in outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "{status}  {:width$}  {}", o.name, o.detail);
    }
    s
}
