//! Hypervolume maximizers: greedy subset selection over a candidate pool, joint policy gradient
//! ascent with Adam, bootstrap expected-hypervolume, and a random baseline.
//!
//! Gradients are exact for the composite `θ → per-objective value estimate → hypervolume`.
//! Each [`ValueModel`] returns its values together with their Jacobian in θ; the
//! [`HvObjective`] chains those with the hypervolume subgradient.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::benchmarks::{seeded_stream, BenchmarkProblem, FeatureTable};
use crate::error::{Error, Result};
use crate::estimators::{ConfidenceConfig, OffPolicyData, RewardTable};
use crate::hypervolume::Hypervolume;
use crate::policy::{sample_unit_ball, PolicySet, SoftmaxPolicy};

/// Greedy marginal-gain selection of `k` of the candidate value vectors.
///
/// Returns the chosen indices in selection order and the hypervolume of the chosen set.
/// Ties go to the lowest candidate index.
pub fn greedy_select_indices(values: &[Vec<f64>], k: usize, hv: &Hypervolume) -> Result<(Vec<usize>, f64)> {
    if k == 0 || k > values.len() {
        return Err(Error::config(format!(
            "cannot select {k} of {} candidates",
            values.len()
        )));
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut taken = vec![false; values.len()];
    let mut current = 0.0;
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for (j, v) in values.iter().enumerate() {
            if taken[j] {
                continue;
            }
            points.push(v.clone());
            let value = hv.value(&points)?;
            points.pop();
            if best.is_none_or(|(_, b)| value > b) {
                best = Some((j, value));
            }
        }
        let (j, value) = best.expect("a candidate remains");
        taken[j] = true;
        chosen.push(j);
        points.push(values[j].clone());
        current = value;
    }
    Ok((chosen, current))
}

/// Greedy selection from a policy pool under `value_fn`.
pub fn greedy_select(
    pool: &PolicySet,
    k: usize,
    mut value_fn: impl FnMut(&SoftmaxPolicy) -> Result<Vec<f64>>,
    hv: &Hypervolume,
) -> Result<(PolicySet, f64)> {
    if k > pool.len() {
        return Err(Error::config(format!(
            "pool of {} policies is smaller than K = {k}",
            pool.len()
        )));
    }
    let values = pool.iter().map(&mut value_fn).collect::<Result<Vec<_>>>()?;
    let (idx, value) = greedy_select_indices(&values, k, hv)?;
    let chosen = idx.into_iter().map(|i| pool.policies()[i].clone()).collect();
    Ok((PolicySet::new(chosen)?, value))
}

/// Values of one policy, possibly in several replicas (bootstrap resamples), with their
/// Jacobian in θ.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueJacobian {
    /// Row-major `replicas × m`.
    pub values: Vec<f64>,
    /// Row-major `replicas × m × dim`; empty when not requested.
    pub jacobian: Vec<f64>,
}

/// A differentiable map from policy parameters to per-objective values.
pub trait ValueModel: Send + Sync {
    fn m(&self) -> usize;
    fn dim(&self) -> usize;
    fn replicas(&self) -> usize {
        1
    }
    fn evaluate(&self, theta: &[f64], want_jacobian: bool) -> Result<ValueJacobian>;
    /// Distance of `theta` from the model's non-smooth set (clamp boundaries, argmax ties).
    fn kink_margin(&self, _theta: &[f64]) -> Result<f64> {
        Ok(f64::INFINITY)
    }
}

fn check_dim(theta: &[f64], dim: usize) -> Result<()> {
    if theta.len() != dim {
        return Err(Error::config(format!(
            "policy has {} parameters, features have {dim}",
            theta.len()
        )));
    }
    Ok(())
}

/// Softmax probabilities and the probability-weighted feature mean at one context.
fn softmax_row(theta: &[f64], feats: &[f64], probs: &mut [f64], mean: &mut [f64]) -> Result<()> {
    SoftmaxPolicy::new(theta.to_vec()).probabilities_from_features(feats, probs)?;
    let dim = theta.len();
    mean.iter_mut().for_each(|v| *v = 0.0);
    for (p, phi) in probs.iter().zip(feats.chunks_exact(dim)) {
        for (mv, f) in mean.iter_mut().zip(phi) {
            *mv += p * f;
        }
    }
    Ok(())
}

fn axpy(out: &mut [f64], scale: f64, x: &[f64]) {
    for (o, v) in out.iter_mut().zip(x) {
        *o += scale * v;
    }
}

/// Exact expected reward over a fixed context set.
#[derive(Debug, Clone)]
pub struct TrueValueModel {
    features: FeatureTable,
    rewards: RewardTable,
}

impl TrueValueModel {
    pub fn new(problem: &BenchmarkProblem, contexts: &[Vec<f64>]) -> Result<Self> {
        if contexts.is_empty() {
            return Err(Error::config("the true value needs at least one context"));
        }
        Ok(TrueValueModel {
            features: problem.feature_table(contexts),
            rewards: RewardTable::from_problem(problem, contexts),
        })
    }
}

impl ValueModel for TrueValueModel {
    fn m(&self) -> usize {
        self.rewards.m
    }

    fn dim(&self) -> usize {
        self.features.dim
    }

    fn evaluate(&self, theta: &[f64], want_jacobian: bool) -> Result<ValueJacobian> {
        check_dim(theta, self.dim())?;
        let (dim, m, na) = (self.dim(), self.m(), self.features.num_actions);
        let mut values = vec![0.0; m];
        let mut jacobian = if want_jacobian { vec![0.0; m * dim] } else { Vec::new() };
        let mut probs = vec![0.0; na];
        let mut mean = vec![0.0; dim];
        let mut centered = vec![0.0; dim];
        for t in 0..self.features.rows {
            softmax_row(theta, self.features.row(t), &mut probs, &mut mean)?;
            for (a, &p) in probs.iter().enumerate() {
                let r = self.rewards.get(t, a);
                axpy(&mut values, p, r);
                if want_jacobian {
                    for ((c, f), mv) in centered.iter_mut().zip(self.features.get(t, a)).zip(&mean) {
                        *c = p * (f - mv);
                    }
                    for (i, &ri) in r.iter().enumerate() {
                        axpy(&mut jacobian[i * dim..(i + 1) * dim], ri, &centered);
                    }
                }
            }
        }
        let scale = 1.0 / self.features.rows as f64;
        values.iter_mut().for_each(|v| *v *= scale);
        jacobian.iter_mut().for_each(|v| *v *= scale);
        Ok(ValueJacobian { values, jacobian })
    }
}

/// Clamped IPS with `M = ∞`, optionally minus the confidence width, over one or more
/// record weightings.
///
/// Replica `r` weights record `t` by `weights[r][t]` (bootstrap counts); the estimate is still
/// normalized by `n`.
#[derive(Debug, Clone)]
pub struct IpsValueModel {
    data: OffPolicyData,
    pessimism: Option<ConfidenceConfig>,
    weights: Vec<Vec<f64>>,
}

impl IpsValueModel {
    pub fn mean(data: OffPolicyData) -> Self {
        let n = data.n();
        IpsValueModel {
            data,
            pessimism: None,
            weights: vec![vec![1.0; n]],
        }
    }

    pub fn pessimistic(data: OffPolicyData, confidence: ConfidenceConfig) -> Self {
        IpsValueModel {
            pessimism: Some(confidence),
            ..IpsValueModel::mean(data)
        }
    }

    /// One replica per weight vector; each must have one weight per record.
    pub fn resampled(data: OffPolicyData, weights: Vec<Vec<f64>>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| w.len() != data.n()) {
            return Err(Error::config("every resample needs one weight per logged record"));
        }
        Ok(IpsValueModel {
            data,
            pessimism: None,
            weights,
        })
    }

    pub fn data(&self) -> &OffPolicyData {
        &self.data
    }

    /// Unclamped estimates (`replicas × m`) and their Jacobian.
    fn raw(&self, theta: &[f64], want_jacobian: bool) -> Result<(ValueJacobian, Vec<f64>)> {
        check_dim(theta, self.dim())?;
        let data = &self.data;
        let (dim, m, na, n) = (self.dim(), data.m, data.num_actions(), data.n());
        let reps = self.weights.len();
        let mut values = vec![0.0; reps * m];
        let mut jacobian = if want_jacobian {
            vec![0.0; reps * m * dim]
        } else {
            Vec::new()
        };
        let mut width_sq = 0.0;
        let mut width_grad = vec![0.0; dim];
        let mut probs = vec![0.0; na];
        let mut mean = vec![0.0; dim];
        let mut g = vec![0.0; dim];
        let mut ties = f64::INFINITY;
        for t in 0..n {
            softmax_row(theta, data.features.row(t), &mut probs, &mut mean)?;
            let (a_t, p0) = (data.actions[t], data.propensities[t]);
            if p0 <= 0.0 {
                return Err(Error::Data(format!("record {t} has zero propensity")));
            }
            let w = probs[a_t] / p0;
            let y = data.reward(t);
            if want_jacobian {
                for ((gv, f), mv) in g.iter_mut().zip(data.features.get(t, a_t)).zip(&mean) {
                    *gv = w * (f - mv);
                }
            }
            for (r, weights) in self.weights.iter().enumerate() {
                let c = weights[t];
                if c == 0.0 {
                    continue;
                }
                for (i, &yi) in y.iter().enumerate() {
                    values[r * m + i] += c * w * yi;
                    if want_jacobian {
                        let off = (r * m + i) * dim;
                        axpy(&mut jacobian[off..off + dim], c * yi, &g);
                    }
                }
            }
            if self.pessimism.is_some() {
                let logging = data.logging.row(t);
                let (mut best, mut second, mut arg) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0);
                for (a, (&p, &q)) in probs.iter().zip(logging).enumerate() {
                    if q <= 0.0 {
                        return Err(Error::Data(format!("logging policy has zero mass at record {t}")));
                    }
                    let ratio = p / q;
                    if ratio > best {
                        second = best;
                        best = ratio;
                        arg = a;
                    } else if ratio > second {
                        second = ratio;
                    }
                }
                ties = ties.min((best - second) / best);
                width_sq += best * best;
                if want_jacobian {
                    for ((wg, f), mv) in width_grad.iter_mut().zip(data.features.get(t, arg)).zip(&mean) {
                        *wg += best * best * (f - mv);
                    }
                }
            }
        }
        let scale = 1.0 / n as f64;
        values.iter_mut().for_each(|v| *v *= scale);
        jacobian.iter_mut().for_each(|v| *v *= scale);
        if let Some(cfg) = self.pessimism {
            let norm = width_sq.sqrt();
            let width = cfg.beta * cfg.sigma * norm * scale;
            values.iter_mut().for_each(|v| *v -= width);
            if want_jacobian && norm > 0.0 {
                let k = cfg.beta * cfg.sigma * scale / norm;
                for row in jacobian.chunks_exact_mut(dim) {
                    axpy(row, -k, &width_grad);
                }
            }
        }
        Ok((ValueJacobian { values, jacobian }, vec![ties]))
    }
}

impl ValueModel for IpsValueModel {
    fn m(&self) -> usize {
        self.data.m
    }

    fn dim(&self) -> usize {
        self.data.features.dim
    }

    fn replicas(&self) -> usize {
        self.weights.len()
    }

    fn evaluate(&self, theta: &[f64], want_jacobian: bool) -> Result<ValueJacobian> {
        let (mut vj, _) = self.raw(theta, want_jacobian)?;
        let dim = self.dim();
        for (j, v) in vj.values.iter_mut().enumerate() {
            if !(*v > 0.0 && *v < 1.0) && want_jacobian {
                vj.jacobian[j * dim..(j + 1) * dim].iter_mut().for_each(|g| *g = 0.0);
            }
            *v = v.clamp(0.0, 1.0);
        }
        Ok(vj)
    }

    fn kink_margin(&self, theta: &[f64]) -> Result<f64> {
        let (vj, ties) = self.raw(theta, false)?;
        let clamps = vj
            .values
            .iter()
            .map(|v| v.abs().min((v - 1.0).abs()))
            .fold(f64::INFINITY, f64::min);
        Ok(clamps.min(ties[0]))
    }
}

/// Hypervolume of the values of `k` jointly optimized policies, averaged over the model's replicas.
pub struct HvObjective<'a> {
    model: &'a dyn ValueModel,
    hv: Hypervolume,
    k: usize,
}

impl<'a> HvObjective<'a> {
    pub fn new(model: &'a dyn ValueModel, hv: Hypervolume, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::config("K must be >= 1"));
        }
        if hv.m() != model.m() {
            return Err(Error::config(format!(
                "hypervolume is {}-dimensional, the value model has {} objectives",
                hv.m(),
                model.m()
            )));
        }
        Ok(HvObjective { model, hv, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    fn split<'t>(&self, flat: &'t [f64]) -> Result<std::slice::ChunksExact<'t, f64>> {
        if flat.len() != self.k * self.dim() {
            return Err(Error::config(format!(
                "expected {} parameters for K = {}, got {}",
                self.k * self.dim(),
                self.k,
                flat.len()
            )));
        }
        Ok(flat.chunks_exact(self.dim()))
    }

    /// Per-policy values, `k × replicas × m`.
    pub fn policy_values(&self, flat: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.split(flat)?
            .map(|theta| Ok(self.model.evaluate(theta, false)?.values))
            .collect()
    }

    pub fn value(&self, flat: &[f64]) -> Result<f64> {
        Ok(self.evaluate(flat, false)?.0)
    }

    pub fn value_and_grad(&self, flat: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.evaluate(flat, true)
    }

    fn evaluate(&self, flat: &[f64], want_grad: bool) -> Result<(f64, Vec<f64>)> {
        let evals = self
            .split(flat)?
            .map(|theta| self.model.evaluate(theta, want_grad))
            .collect::<Result<Vec<_>>>()?;
        let (m, dim, reps) = (self.model.m(), self.dim(), self.model.replicas());
        let mut total = 0.0;
        let mut grad = if want_grad { vec![0.0; flat.len()] } else { Vec::new() };
        for r in 0..reps {
            let points: Vec<Vec<f64>> = evals.iter().map(|e| e.values[r * m..(r + 1) * m].to_vec()).collect();
            if want_grad {
                let (v, g) = self.hv.value_and_grad(&points)?;
                total += v;
                for (k, (gk, e)) in g.iter().zip(&evals).enumerate() {
                    for (i, &gi) in gk.iter().enumerate() {
                        if gi != 0.0 {
                            let off = (r * m + i) * dim;
                            axpy(
                                &mut grad[k * dim..(k + 1) * dim],
                                gi / reps as f64,
                                &e.jacobian[off..off + dim],
                            );
                        }
                    }
                }
            } else {
                total += self.hv.value(&points)?;
            }
        }
        Ok((total / reps as f64, grad))
    }

    /// Distance of `flat` from the objective's non-smooth set: the value model's own kinks plus
    /// coordinate ties between different policies' values.
    pub fn kink_margin(&self, flat: &[f64]) -> Result<f64> {
        let mut margin = f64::INFINITY;
        for theta in self.split(flat)? {
            margin = margin.min(self.model.kink_margin(theta)?);
        }
        let values = self.policy_values(flat)?;
        for a in 0..values.len() {
            for b in a + 1..values.len() {
                for (x, y) in values[a].iter().zip(&values[b]) {
                    // both on the same clamp: flat, not a kink
                    if x == y && (*x == 0.0 || *x == 1.0) {
                        continue;
                    }
                    margin = margin.min((x - y).abs());
                }
            }
        }
        Ok(margin)
    }
}

/// Gradient of the objective at a policy set.
pub fn hv_gradient(policies: &PolicySet, objective: &HvObjective<'_>) -> Result<Vec<f64>> {
    Ok(objective.value_and_grad(&policies.flatten())?.1)
}

/// Central finite differences of the objective, one coordinate at a time.
pub fn finite_difference_gradient(objective: &HvObjective<'_>, flat: &[f64], step: f64) -> Result<Vec<f64>> {
    let mut probe = flat.to_vec();
    let mut grad = Vec::with_capacity(flat.len());
    for j in 0..flat.len() {
        probe[j] = flat[j] + step;
        let up = objective.value(&probe)?;
        probe[j] = flat[j] - step;
        let down = objective.value(&probe)?;
        probe[j] = flat[j];
        grad.push((up - down) / (2.0 * step));
    }
    Ok(grad)
}

/// Adam ascent on a parameter vector.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(dim: usize, learning_rate: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Adam {
            learning_rate,
            beta1,
            beta2,
            eps,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
        }
    }

    /// Moves `params` along the bias-corrected moment ratio of `grad`.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grad)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *p += self.learning_rate * (*m / c1) / ((*v / c2).sqrt() + self.eps);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub restarts: usize,
    /// Radius of the random initial parameters; small values start near the uniform policy.
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for GradientConfig {
    fn default() -> Self {
        GradientConfig {
            iterations: 500,
            learning_rate: 0.05,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            restarts: 3,
            init_scale: 0.01,
            seed: 0,
        }
    }
}

impl GradientConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::config("iterations must be >= 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config(format!(
                "learning rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !(self.eps > 0.0) {
            return Err(Error::config("Adam needs beta1, beta2 in [0,1) and eps > 0"));
        }
        if self.restarts == 0 {
            return Err(Error::config("restarts must be >= 1"));
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return Err(Error::config("init_scale must be finite and >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AscentResult {
    pub policies: PolicySet,
    pub value: f64,
    /// Best objective value seen after each iteration of the winning restart.
    pub trace: Vec<f64>,
    pub restart: usize,
}

/// Adam ascent on the objective from `init` (or random small parameters), keeping the best
/// iterate. Restart 0 starts from `init` when given; the others start from random draws.
pub fn policy_gradient_ascent(
    objective: &HvObjective<'_>,
    init: Option<&PolicySet>,
    config: &GradientConfig,
) -> Result<AscentResult> {
    config.validate()?;
    let (k, dim) = (objective.k(), objective.dim());
    if let Some(p) = init {
        if p.len() != k || p.dim() != dim {
            return Err(Error::config(format!(
                "initial set is {}x{}, objective expects {k}x{dim}",
                p.len(),
                p.dim()
            )));
        }
    }
    let starts: Vec<Vec<f64>> = (0..config.restarts)
        .map(|r| match (r, init) {
            (0, Some(p)) => p.flatten(),
            _ => {
                let mut rng = seeded_stream(config.seed, r as u64);
                (0..k)
                    .flat_map(|_| sample_unit_ball(dim, &mut rng))
                    .map(|v| v * config.init_scale)
                    .collect()
            }
        })
        .collect();
    let runs = starts
        .into_par_iter()
        .enumerate()
        .map(|(r, start)| ascend(objective, start, config).map(|(theta, value, trace)| (r, theta, value, trace)))
        .collect::<Vec<_>>();
    let mut best: Option<(usize, Vec<f64>, f64, Vec<f64>)> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().is_none_or(|b| run.2 > b.2) {
            best = Some(run);
        }
    }
    let (restart, theta, value, trace) = best.expect("at least one restart");
    Ok(AscentResult {
        policies: PolicySet::from_flat(&theta, k)?,
        value,
        trace,
        restart,
    })
}

fn ascend(objective: &HvObjective<'_>, start: Vec<f64>, config: &GradientConfig) -> Result<(Vec<f64>, f64, Vec<f64>)> {
    let mut theta = start;
    let mut adam = Adam::new(
        theta.len(),
        config.learning_rate,
        config.beta1,
        config.beta2,
        config.eps,
    );
    let mut best = (theta.clone(), f64::NEG_INFINITY);
    let mut trace = Vec::with_capacity(config.iterations);
    for it in 0..config.iterations {
        let (value, grad) = objective
            .value_and_grad(&theta)
            .map_err(|e| Error::Numeric(format!("iteration {it}: {e}")))?;
        if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite objective or gradient at iteration {it}"
            )));
        }
        if value > best.1 {
            best = (theta.clone(), value);
        }
        trace.push(best.1);
        adam.step(&mut theta, &grad);
    }
    let last = objective.value(&theta)?;
    if last.is_finite() && last > best.1 {
        best = (theta, last);
        if let Some(t) = trace.last_mut() {
            *t = last;
        }
    }
    Ok((best.0, best.1, trace))
}

/// Which value estimate the hypervolume is taken of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    True,
    Mean,
    Pessimistic,
    Ehvi { resamples: usize },
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectiveKind::True => f.write_str("true"),
            ObjectiveKind::Mean => f.write_str("mean"),
            ObjectiveKind::Pessimistic => f.write_str("pess"),
            ObjectiveKind::Ehvi { resamples } => write!(f, "ehvi:{resamples}"),
        }
    }
}

impl FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "true" => Ok(ObjectiveKind::True),
            "mean" => Ok(ObjectiveKind::Mean),
            "pess" => Ok(ObjectiveKind::Pessimistic),
            other => match other.strip_prefix("ehvi:").map(str::parse::<usize>) {
                Some(Ok(n)) if n >= 1 => Ok(ObjectiveKind::Ehvi { resamples: n }),
                Some(_) => Err(Error::config(format!("`{other}`: ehvi needs at least one resample"))),
                None => Err(Error::config(format!(
                    "unknown objective `{other}` (true, mean, pess, ehvi:<N>)"
                ))),
            },
        }
    }
}

/// Bootstrap resample counts: `resamples` rows of `n` multiplicities summing to `n`.
pub fn bootstrap_counts<R: Rng + ?Sized>(n: usize, resamples: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..resamples)
        .map(|_| {
            let mut counts = vec![0.0; n];
            for _ in 0..n {
                counts[rng.random_range(0..n)] += 1.0;
            }
            counts
        })
        .collect()
}

/// `(1/N) Σ_j vol(S, V̂_j)` with `V̂_j` the clamped IPS estimate on resample `j`.
pub fn ehvi_objective(
    policies: &PolicySet,
    data: &OffPolicyData,
    counts: &[Vec<f64>],
    hv: &Hypervolume,
) -> Result<f64> {
    if counts.is_empty() {
        return Err(Error::config("ehvi needs at least one resample"));
    }
    let model = IpsValueModel::resampled(data.clone(), counts.to_vec())?;
    HvObjective::new(&model, hv.clone(), policies.len())?.value(&policies.flatten())
}

/// `k` independent parameter vectors uniform in the unit ball.
pub fn random_policy_baseline<R: Rng + ?Sized>(k: usize, dim: usize, rng: &mut R) -> Result<PolicySet> {
    if k == 0 {
        return Err(Error::config("K must be >= 1"));
    }
    PolicySet::new((0..k).map(|_| SoftmaxPolicy::new(sample_unit_ball(dim, rng))).collect())
}

/// Builds the value model of an objective over logged data. `true` uses the problem's exact
/// rewards at the logged contexts.
pub fn build_value_model(
    kind: ObjectiveKind,
    problem: &BenchmarkProblem,
    data: &OffPolicyData,
    confidence: ConfidenceConfig,
    seed: u64,
) -> Result<Box<dyn ValueModel>> {
    Ok(match kind {
        ObjectiveKind::True => {
            let contexts: Vec<Vec<f64>> = (0..data.n())
                .map(|t| data.features.get(t, 0)[..problem.context_dim()].to_vec())
                .collect();
            Box::new(TrueValueModel::new(problem, &contexts)?)
        }
        ObjectiveKind::Mean => Box::new(IpsValueModel::mean(data.clone())),
        ObjectiveKind::Pessimistic => Box::new(IpsValueModel::pessimistic(data.clone(), confidence)),
        ObjectiveKind::Ehvi { resamples } => {
            let counts = bootstrap_counts(data.n(), resamples, &mut ChaCha8Rng::seed_from_u64(seed));
            Box::new(IpsValueModel::resampled(data.clone(), counts)?)
        }
    })
}

/// Standard normal parameters scaled by `scale`, for test points and perturbations.
pub fn gaussian_parameters<R: Rng + ?Sized>(len: usize, scale: f64, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{MultiObjective, ProblemSpec};
    use crate::estimators::{ips, pessimistic, ActionProbs};
    use crate::hypervolume::HypervolumeMethod;
    use crate::logged_data::LoggedDataset;
    use crate::policy::LoggingPolicy;
    use std::sync::Arc;

    fn exact() -> Hypervolume {
        Hypervolume::new(HypervolumeMethod::Exact2d, 2, 0).unwrap()
    }

    #[test]
    fn greedy_pool_example() {
        let pool = vec![vec![0.9, 0.1], vec![0.1, 0.9], vec![0.6, 0.6]];
        let (idx, v) = greedy_select_indices(&pool, 1, &exact()).unwrap();
        assert_eq!(idx, vec![2]);
        assert!((v - 0.36).abs() < 1e-12);
        let (idx, v) = greedy_select_indices(&pool, 2, &exact()).unwrap();
        assert_eq!(idx, vec![2, 0]);
        assert!((v - 0.39).abs() < 1e-12);
        let (_, v) = greedy_select_indices(&pool, 3, &exact()).unwrap();
        assert!((v - exact().value(&pool).unwrap()).abs() < 1e-15);
        assert!(greedy_select_indices(&pool, 4, &exact()).is_err());
    }

    /// One context, two actions whose rewards are (1,1) and (0,0).
    struct TwoActions;

    impl MultiObjective for TwoActions {
        fn name(&self) -> &str {
            "two-actions"
        }
        fn input_dim(&self) -> usize {
            2
        }
        fn num_objectives(&self) -> usize {
            2
        }
        fn eval_into(&self, z: &[f64], out: &mut [f64]) {
            // minimization: action coordinate 1.0 is the good one
            out.iter_mut().for_each(|o| *o = 1.0 - z[1]);
        }
    }

    fn two_action_problem() -> BenchmarkProblem {
        BenchmarkProblem::new(
            Arc::new(TwoActions),
            vec![vec![1.0], vec![0.0]],
            vec![(0.0, 1.0), (0.0, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn two_action_true_objective_reaches_optimum() {
        let problem = two_action_problem();
        let model = TrueValueModel::new(&problem, &[vec![0.5]]).unwrap();
        let obj = HvObjective::new(&model, exact(), 1).unwrap();
        let cfg = GradientConfig {
            restarts: 1,
            ..GradientConfig::default()
        };
        let res = policy_gradient_ascent(&obj, None, &cfg).unwrap();
        assert!(res.value >= 0.95, "{}", res.value);
        assert!(res.trace.windows(2).all(|w| w[1] >= w[0]));
        let p = res.policies.policies()[0]
            .action_probabilities(&[0.5], problem.actions())
            .unwrap();
        assert!(p[0] > 0.97);
    }

    #[test]
    fn zero_gradient_keeps_parameters() {
        let mut adam = Adam::new(3, 0.05, 0.9, 0.999, 1e-8);
        let mut p = vec![0.1, -0.2, 0.3];
        adam.step(&mut p, &[0.0; 3]);
        assert_eq!(p, vec![0.1, -0.2, 0.3]);
    }

    fn small_data(n: usize, seed: u64) -> (BenchmarkProblem, OffPolicyData) {
        let spec = ProblemSpec::new("DTLZ2", 6, 2);
        let problem = spec.build().unwrap();
        let logging = LoggingPolicy::new(problem.clone(), 0.1).unwrap();
        let ds = LoggedDataset::generate(&spec, &logging, n, 1.0, seed).unwrap();
        let data = OffPolicyData::new(&logging, &ds).unwrap();
        (problem, data)
    }

    #[test]
    fn ips_model_matches_estimators() {
        let (_, data) = small_data(80, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let theta = gaussian_parameters(16, 0.3, &mut rng);
        let probs = ActionProbs::softmax(&SoftmaxPolicy::new(theta.clone()), &data.features).unwrap();
        let mean = IpsValueModel::mean(data.clone()).evaluate(&theta, false).unwrap();
        let expected = ips(&data, &probs, f64::INFINITY).unwrap();
        assert!(mean.values.iter().zip(&expected).all(|(a, b)| (a - b).abs() < 1e-12));
        let cfg = ConfidenceConfig::new(0.2, 1.0).unwrap();
        let pess = IpsValueModel::pessimistic(data.clone(), cfg)
            .evaluate(&theta, false)
            .unwrap();
        let expected = pessimistic(&data, &probs, &cfg).unwrap();
        assert!(pess.values.iter().zip(&expected).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn pessimistic_with_zero_beta_is_mean() {
        let (_, data) = small_data(60, 4);
        let mean = IpsValueModel::mean(data.clone());
        let pess = IpsValueModel::pessimistic(data, ConfidenceConfig::new(0.0, 1.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let flat = gaussian_parameters(32, 0.3, &mut rng);
        let a = HvObjective::new(&mean, exact(), 2)
            .unwrap()
            .value_and_grad(&flat)
            .unwrap();
        let b = HvObjective::new(&pess, exact(), 2)
            .unwrap()
            .value_and_grad(&flat)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let (problem, data) = small_data(120, 5);
        // small enough that the lower bound stays off its clamp at random test points
        let cfg = ConfidenceConfig::new(0.05, 1.0).unwrap();
        let models: Vec<Box<dyn ValueModel>> = vec![
            Box::new(
                TrueValueModel::new(
                    &problem,
                    &problem.sample_contexts(30, &mut ChaCha8Rng::seed_from_u64(1)),
                )
                .unwrap(),
            ),
            Box::new(IpsValueModel::mean(data.clone())),
            Box::new(IpsValueModel::pessimistic(data.clone(), cfg)),
            build_value_model(ObjectiveKind::Ehvi { resamples: 4 }, &problem, &data, cfg, 2).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (which, model) in models.iter().enumerate() {
            let obj = HvObjective::new(model.as_ref(), exact(), 3).unwrap();
            let mut checked = 0;
            let mut attempts = 0;
            while checked < 3 {
                attempts += 1;
                let flat = gaussian_parameters(48, 0.3, &mut rng);
                assert!(
                    attempts < 200,
                    "model {which}: no smooth test point, last {:?} margin {}",
                    obj.policy_values(&flat).unwrap(),
                    obj.kink_margin(&flat).unwrap()
                );
                if obj.kink_margin(&flat).unwrap() < 1e-4 {
                    continue;
                }
                let (_, g) = obj.value_and_grad(&flat).unwrap();
                let fd = finite_difference_gradient(&obj, &flat, 1e-5).unwrap();
                let scale = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                for (a, b) in g.iter().zip(&fd) {
                    assert!((a - b).abs() <= 1e-4 * scale + 1e-10, "{a} vs {b}");
                }
                checked += 1;
            }
        }
    }

    #[test]
    fn dominated_policy_gets_no_gradient() {
        let problem = two_action_problem();
        let model = TrueValueModel::new(&problem, &[vec![0.5]]).unwrap();
        let obj = HvObjective::new(&model, exact(), 2).unwrap();
        // policy 0 prefers the good action strongly; policy 1 is near uniform
        let mut flat = vec![0.0; 2 * model.dim()];
        flat[1] = 3.0;
        flat[model.dim() + 1] = 0.1;
        let (_, g) = obj.value_and_grad(&flat).unwrap();
        assert!(g[model.dim()..].iter().all(|&v| v == 0.0));
        assert!(g[..model.dim()].iter().any(|&v| v != 0.0));
    }

    #[test]
    fn ehvi_cases() {
        let (_, data) = small_data(50, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let set = PolicySet::from_flat(&gaussian_parameters(32, 0.3, &mut rng), 2).unwrap();
        let ones = vec![vec![1.0; data.n()]];
        let mean_obj = HvObjective::new(&IpsValueModel::mean(data.clone()), exact(), 2)
            .unwrap()
            .value(&set.flatten())
            .unwrap();
        assert_eq!(ehvi_objective(&set, &data, &ones, &exact()).unwrap(), mean_obj);
        let counts = bootstrap_counts(data.n(), 1, &mut rng);
        let single = ehvi_objective(&set, &data, &counts, &exact()).unwrap();
        let repeated = ehvi_objective(&set, &data, &vec![counts[0].clone(); 3], &exact()).unwrap();
        assert!((single - repeated).abs() < 1e-15);
        let many = bootstrap_counts(data.n(), 32, &mut rng);
        assert!(many.iter().all(|c| c.iter().sum::<f64>() == data.n() as f64));
        let each: Vec<f64> = many
            .iter()
            .map(|c| ehvi_objective(&set, &data, std::slice::from_ref(c), &exact()).unwrap())
            .collect();
        let v = ehvi_objective(&set, &data, &many, &exact()).unwrap();
        let (lo, hi) = each
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
        assert!(v >= lo - 1e-15 && v <= hi + 1e-15);
    }

    #[test]
    fn random_baseline_unit_ball() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let draws = 20_000;
        let set = random_policy_baseline(draws, 16, &mut rng).unwrap();
        let norms: Vec<f64> = set
            .iter()
            .map(|p| p.theta.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        assert!(norms.iter().all(|&r| r <= 1.0));
        let mean = norms.iter().sum::<f64>() / draws as f64;
        // E‖θ‖ = d/(d+1), Var = d/(d+2) − (d/(d+1))² for the uniform 16-ball
        let stderr = (0.003075740099961477f64 / draws as f64).sqrt();
        assert!((mean - 16.0 / 17.0).abs() < 3.0 * stderr, "{mean}");
        let a = random_policy_baseline(3, 16, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = random_policy_baseline(3, 16, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ascent_is_deterministic_and_validates() {
        let (_, data) = small_data(60, 7);
        let model = IpsValueModel::mean(data);
        let obj = HvObjective::new(&model, exact(), 2).unwrap();
        let cfg = GradientConfig {
            iterations: 30,
            restarts: 2,
            seed: 5,
            ..GradientConfig::default()
        };
        let a = policy_gradient_ascent(&obj, None, &cfg).unwrap();
        let b = policy_gradient_ascent(&obj, None, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.trace.windows(2).all(|w| w[1] >= w[0]));
        let bad = GradientConfig {
            learning_rate: 0.0,
            ..cfg
        };
        assert!(policy_gradient_ascent(&obj, None, &bad).is_err());
    }

    #[test]
    fn objective_kind_parse() {
        for s in ["true", "mean", "pess", "ehvi:8"] {
            assert_eq!(s.parse::<ObjectiveKind>().unwrap().to_string(), s);
        }
        assert!("ehvi:0".parse::<ObjectiveKind>().is_err());
        assert!("best".parse::<ObjectiveKind>().is_err());
    }
}
