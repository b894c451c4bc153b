//! Per-objective off-policy value estimators.
//!
//! Every estimator treats the `m` objectives independently. Policies enter as an
//! [`ActionProbs`] matrix (the target policy's distribution over all actions at every logged
//! context), so the same code serves softmax policies, the logging policy itself, or
//! hand-built distributions.

use std::fmt;
use std::str::FromStr;

use crate::benchmarks::{BenchmarkProblem, FeatureTable};
use crate::error::{Error, Result};
use crate::logged_data::LoggedDataset;
use crate::policy::{LoggingPolicy, SoftmaxPolicy};

/// Relative tolerance when checking logged propensities against the rebuilt logging policy.
const PROPENSITY_TOLERANCE: f64 = 1e-9;

/// Action distributions of one policy at `rows` contexts, row-major `rows × num_actions`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionProbs {
    pub rows: usize,
    pub num_actions: usize,
    pub data: Vec<f64>,
}

impl ActionProbs {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let num_actions = rows.first().map_or(0, Vec::len);
        if num_actions == 0 || rows.iter().any(|r| r.len() != num_actions) {
            return Err(Error::config("probability rows must be non-empty and equally long"));
        }
        Ok(ActionProbs {
            rows: rows.len(),
            num_actions,
            data: rows.concat(),
        })
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.num_actions..(t + 1) * self.num_actions]
    }

    /// Softmax probabilities for every row of a feature table.
    pub fn softmax(policy: &SoftmaxPolicy, table: &FeatureTable) -> Result<Self> {
        if policy.dim() != table.dim {
            return Err(Error::config(format!(
                "policy dimension {} does not match feature dimension {}",
                policy.dim(),
                table.dim
            )));
        }
        let mut data = vec![0.0; table.rows * table.num_actions];
        for (t, out) in data.chunks_exact_mut(table.num_actions).enumerate() {
            policy.probabilities_from_features(table.row(t), out)?;
        }
        Ok(ActionProbs {
            rows: table.rows,
            num_actions: table.num_actions,
            data,
        })
    }
}

/// A logged dataset prepared for estimation: features of every (context, action) pair and
/// the logging distribution over all actions at every logged context.
#[derive(Debug, Clone)]
pub struct OffPolicyData {
    pub features: FeatureTable,
    pub logging: ActionProbs,
    pub actions: Vec<usize>,
    pub propensities: Vec<f64>,
    /// Row-major `n × m` observed rewards.
    pub rewards: Vec<f64>,
    pub m: usize,
    pub sigma: f64,
}

impl OffPolicyData {
    /// Validates the dataset against the logging policy it claims to come from.
    pub fn new(logging: &LoggingPolicy, ds: &LoggedDataset) -> Result<Self> {
        let problem = logging.problem();
        ds.validate(None)?;
        if ds.meta.problem.m != problem.num_objectives()
            || ds.meta.problem.num_actions != problem.num_actions()
            || ds.meta.problem.d / 2 != problem.context_dim()
        {
            return Err(Error::Validation("dataset metadata does not match the problem".into()));
        }
        if (ds.meta.epsilon - logging.epsilon()).abs() > 0.0 {
            return Err(Error::Validation(format!(
                "dataset was logged with epsilon={} but the logging policy has epsilon={}",
                ds.meta.epsilon,
                logging.epsilon()
            )));
        }
        let contexts = ds.contexts();
        let mut logging_rows = Vec::with_capacity(ds.len());
        for (t, r) in ds.records.iter().enumerate() {
            let probs = logging.probabilities(&r.x);
            let expected = probs[r.a_index];
            if (expected - r.propensity).abs() > PROPENSITY_TOLERANCE * expected.max(1.0) {
                return Err(Error::Validation(format!(
                    "record {t}: logged propensity {} differs from the logging policy's {expected}",
                    r.propensity
                )));
            }
            logging_rows.push(probs);
        }
        Ok(OffPolicyData {
            features: problem.feature_table(&contexts),
            logging: ActionProbs::from_rows(&logging_rows)?,
            actions: ds.records.iter().map(|r| r.a_index).collect(),
            propensities: ds.records.iter().map(|r| r.propensity).collect(),
            rewards: ds.records.iter().flat_map(|r| r.y.iter().copied()).collect(),
            m: problem.num_objectives(),
            sigma: ds.meta.sigma,
        })
    }

    /// Rebuilds the problem and logging policy recorded in the dataset header.
    pub fn from_dataset(ds: &LoggedDataset) -> Result<(Self, LoggingPolicy)> {
        let problem = ds.meta.problem.build()?;
        let logging = LoggingPolicy::new(problem, ds.meta.epsilon)?;
        Ok((OffPolicyData::new(&logging, ds)?, logging))
    }

    /// Assembles data directly; propensities are read off `logging` at the logged actions.
    pub fn from_parts(
        features: FeatureTable,
        logging: ActionProbs,
        actions: Vec<usize>,
        rewards: &[Vec<f64>],
        sigma: f64,
    ) -> Result<Self> {
        let n = actions.len();
        if n == 0 || features.rows != n || logging.rows != n || rewards.len() != n {
            return Err(Error::config("inconsistent record counts"));
        }
        let m = rewards[0].len();
        if rewards.iter().any(|r| r.len() != m) {
            return Err(Error::config("inconsistent reward dimensions"));
        }
        if actions.iter().any(|&a| a >= logging.num_actions) {
            return Err(Error::config("logged action out of range"));
        }
        let propensities = actions.iter().enumerate().map(|(t, &a)| logging.row(t)[a]).collect();
        Ok(OffPolicyData {
            features,
            logging,
            actions,
            propensities,
            rewards: rewards.concat(),
            m,
            sigma,
        })
    }

    pub fn n(&self) -> usize {
        self.actions.len()
    }

    pub fn num_actions(&self) -> usize {
        self.logging.num_actions
    }

    pub fn reward(&self, t: usize) -> &[f64] {
        &self.rewards[t * self.m..(t + 1) * self.m]
    }

    pub fn softmax_probs(&self, policy: &SoftmaxPolicy) -> Result<ActionProbs> {
        ActionProbs::softmax(policy, &self.features)
    }

    fn check_shape(&self, probs: &ActionProbs) -> Result<()> {
        if probs.rows != self.n() || probs.num_actions != self.num_actions() {
            return Err(Error::config(format!(
                "policy probabilities are {}x{}, data is {}x{}",
                probs.rows,
                probs.num_actions,
                self.n(),
                self.num_actions()
            )));
        }
        Ok(())
    }

    /// Importance ratio `π(A_t|x_t) / π₀(A_t|x_t)` of every record.
    pub fn importance_ratios(&self, probs: &ActionProbs) -> Result<Vec<f64>> {
        self.check_shape(probs)?;
        self.actions
            .iter()
            .zip(&self.propensities)
            .enumerate()
            .map(|(t, (&a, &p0))| {
                if p0 <= 0.0 {
                    Err(Error::Data(format!("record {t} has zero propensity")))
                } else {
                    Ok(probs.row(t)[a] / p0)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceConfig {
    pub beta: f64,
    /// Sub-Gaussian noise scale of the logged rewards.
    pub sigma: f64,
}

impl ConfidenceConfig {
    pub fn new(beta: f64, sigma: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) || !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::config(format!(
                "confidence parameters must be finite and non-negative (beta={beta}, sigma={sigma})"
            )));
        }
        Ok(ConfidenceConfig { beta, sigma })
    }

    /// `β = √(2 log(2/δ))`: the bound then holds with probability `1 − δ` per objective and policy.
    pub fn beta_for_delta(delta: f64) -> f64 {
        (2.0 * (2.0 / delta).ln()).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    True,
    Ips,
    ClippedIps,
    Pessimistic,
    Dm,
    Dr,
    Snips,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorKind::True => "true",
            EstimatorKind::Ips => "ips",
            EstimatorKind::ClippedIps => "clipped",
            EstimatorKind::Pessimistic => "pess",
            EstimatorKind::Dm => "dm",
            EstimatorKind::Dr => "dr",
            EstimatorKind::Snips => "snips",
        })
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "true" => EstimatorKind::True,
            "ips" => EstimatorKind::Ips,
            "clipped" | "clipped_ips" => EstimatorKind::ClippedIps,
            "pess" | "pessimistic" => EstimatorKind::Pessimistic,
            "dm" => EstimatorKind::Dm,
            "dr" => EstimatorKind::Dr,
            "snips" => EstimatorKind::Snips,
            other => return Err(Error::config(format!("unknown estimator `{other}`"))),
        })
    }
}

/// Estimated per-objective values and confidence widths of one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueEstimate {
    pub values: Vec<f64>,
    pub widths: Vec<f64>,
    pub kind: EstimatorKind,
}

fn clamp_unit(v: Vec<f64>) -> Vec<f64> {
    v.into_iter().map(|x| x.clamp(0.0, 1.0)).collect()
}

/// `V_i(π) = (1/n) Σ_t Σ_a π(a|x_t) r_i(x_t, a)` under the problem's exact mean rewards.
pub fn true_value(problem: &BenchmarkProblem, policy: &SoftmaxPolicy, contexts: &[Vec<f64>]) -> Result<Vec<f64>> {
    if contexts.is_empty() {
        return Err(Error::config("true value needs at least one context"));
    }
    let table = problem.feature_table(contexts);
    let probs = ActionProbs::softmax(policy, &table)?;
    let rewards = RewardTable::from_problem(problem, contexts);
    Ok(rewards.expected(&probs))
}

/// Exact mean rewards `r(x_t, a)` on a fixed list of contexts, row-major `n × A × m`.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardTable {
    pub rows: usize,
    pub num_actions: usize,
    pub m: usize,
    pub data: Vec<f64>,
}

impl RewardTable {
    pub fn from_problem(problem: &BenchmarkProblem, contexts: &[Vec<f64>]) -> Self {
        let m = problem.num_objectives();
        let mut data = Vec::with_capacity(contexts.len() * problem.num_actions() * m);
        for x in contexts {
            for r in problem.action_rewards(x) {
                data.extend_from_slice(&r);
            }
        }
        RewardTable {
            rows: contexts.len(),
            num_actions: problem.num_actions(),
            m,
            data,
        }
    }

    pub fn get(&self, t: usize, a: usize) -> &[f64] {
        let start = (t * self.num_actions + a) * self.m;
        &self.data[start..start + self.m]
    }

    /// `(1/n) Σ_t Σ_a π(a|x_t) r(x_t, a)`.
    pub fn expected(&self, probs: &ActionProbs) -> Vec<f64> {
        let mut v = vec![0.0; self.m];
        for t in 0..self.rows {
            for (a, &p) in probs.row(t).iter().enumerate() {
                for (vi, r) in v.iter_mut().zip(self.get(t, a)) {
                    *vi += p * r;
                }
            }
        }
        v.iter_mut().for_each(|x| *x /= self.rows as f64);
        v
    }
}

/// Clipped IPS sum `(1/n) Σ_t min{π/π₀, M} Y_{t,i}` before clamping to `[0,1]`.
pub fn ips_raw(data: &OffPolicyData, probs: &ActionProbs, clip: f64) -> Result<Vec<f64>> {
    if clip.is_nan() || clip < 0.0 {
        return Err(Error::config(format!("clipping level must be >= 0, got {clip}")));
    }
    let ratios = data.importance_ratios(probs)?;
    let mut v = vec![0.0; data.m];
    for (t, w) in ratios.into_iter().enumerate() {
        let w = w.min(clip);
        for (vi, y) in v.iter_mut().zip(data.reward(t)) {
            *vi += w * y;
        }
    }
    let n = data.n() as f64;
    v.iter_mut().for_each(|x| *x /= n);
    Ok(v)
}

/// Clipped IPS clamped to `[0,1]`. `clip = f64::INFINITY` gives plain IPS.
pub fn ips(data: &OffPolicyData, probs: &ActionProbs, clip: f64) -> Result<Vec<f64>> {
    Ok(clamp_unit(ips_raw(data, probs, clip)?))
}

/// `M_π² = Σ_t max_a (π(a|x_t) / π₀(a|x_t))²`, the max running over the full action set.
pub fn max_ratio_norm_sq(data: &OffPolicyData, probs: &ActionProbs) -> Result<f64> {
    data.check_shape(probs)?;
    let mut total = 0.0;
    for t in 0..data.n() {
        let mut best = 0.0f64;
        for (&p, &p0) in probs.row(t).iter().zip(data.logging.row(t)) {
            if p0 <= 0.0 {
                return Err(Error::Data(format!("logging policy has zero mass at record {t}")));
            }
            best = best.max(p / p0);
        }
        total += best * best;
    }
    Ok(total)
}

/// `c_i(π) = β σ M_π / n`, the same for every objective.
pub fn confidence_width(data: &OffPolicyData, probs: &ActionProbs, cfg: &ConfidenceConfig) -> Result<Vec<f64>> {
    let c = cfg.beta * cfg.sigma * max_ratio_norm_sq(data, probs)?.sqrt() / data.n() as f64;
    Ok(vec![c; data.m])
}

/// `L_i = clamp(V̂_i − c_i, 0, 1)` with `V̂` the unclipped, unclamped IPS sum.
pub fn pessimistic(data: &OffPolicyData, probs: &ActionProbs, cfg: &ConfidenceConfig) -> Result<Vec<f64>> {
    let raw = ips_raw(data, probs, f64::INFINITY)?;
    let widths = confidence_width(data, probs, cfg)?;
    Ok(raw.iter().zip(&widths).map(|(v, c)| (v - c).clamp(0.0, 1.0)).collect())
}

/// Predicted mean reward `r̂_i(x_t, a)` at logged context `t`.
pub trait RewardModel {
    fn predict(&self, t: usize, a: usize, objective: usize) -> f64;
}

/// Context-free reward model: empirical mean per (action, objective), pooled over all contexts.
/// Actions that were never logged fall back to the overall mean of the objective.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalRewardModel {
    m: usize,
    means: Vec<f64>,
}

impl EmpiricalRewardModel {
    pub fn fit(data: &OffPolicyData) -> Self {
        let (a_count, m) = (data.num_actions(), data.m);
        let mut sums = vec![0.0; a_count * m];
        let mut counts = vec![0usize; a_count];
        let mut overall = vec![0.0; m];
        for (t, &a) in data.actions.iter().enumerate() {
            counts[a] += 1;
            for (i, &y) in data.reward(t).iter().enumerate() {
                sums[a * m + i] += y;
                overall[i] += y;
            }
        }
        overall.iter_mut().for_each(|v| *v /= data.n() as f64);
        let means = (0..a_count * m)
            .map(|k| {
                let (a, i) = (k / m, k % m);
                if counts[a] == 0 {
                    overall[i]
                } else {
                    sums[k] / counts[a] as f64
                }
            })
            .collect();
        EmpiricalRewardModel { m, means }
    }
}

impl RewardModel for EmpiricalRewardModel {
    fn predict(&self, _t: usize, a: usize, objective: usize) -> f64 {
        self.means[a * self.m + objective]
    }
}

impl RewardModel for RewardTable {
    fn predict(&self, t: usize, a: usize, objective: usize) -> f64 {
        self.get(t, a)[objective]
    }
}

/// Any reward model that returns one constant per objective.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantRewardModel(pub Vec<f64>);

impl RewardModel for ConstantRewardModel {
    fn predict(&self, _t: usize, _a: usize, objective: usize) -> f64 {
        self.0[objective]
    }
}

fn dm_raw(data: &OffPolicyData, probs: &ActionProbs, model: &dyn RewardModel) -> Result<Vec<f64>> {
    data.check_shape(probs)?;
    let mut v = vec![0.0; data.m];
    for t in 0..data.n() {
        for (a, &p) in probs.row(t).iter().enumerate() {
            for (i, vi) in v.iter_mut().enumerate() {
                *vi += p * model.predict(t, a, i);
            }
        }
    }
    v.iter_mut().for_each(|x| *x /= data.n() as f64);
    Ok(v)
}

/// Direct method: `(1/n) Σ_t Σ_a π(a|x_t) r̂_i(x_t, a)`, clamped to `[0,1]`.
pub fn dm(data: &OffPolicyData, probs: &ActionProbs, model: &dyn RewardModel) -> Result<Vec<f64>> {
    Ok(clamp_unit(dm_raw(data, probs, model)?))
}

/// Doubly robust: importance-weighted residuals plus the direct-method term, clamped to `[0,1]`.
pub fn dr(data: &OffPolicyData, probs: &ActionProbs, model: &dyn RewardModel) -> Result<Vec<f64>> {
    let ratios = data.importance_ratios(probs)?;
    let mut v = dm_raw(data, probs, model)?;
    let n = data.n() as f64;
    for (t, w) in ratios.into_iter().enumerate() {
        let a = data.actions[t];
        for (i, (vi, y)) in v.iter_mut().zip(data.reward(t)).enumerate() {
            *vi += w * (y - model.predict(t, a, i)) / n;
        }
    }
    Ok(clamp_unit(v))
}

/// Self-normalized IPS: `Σ_t w_t Y_{t,i} / Σ_t w_t`.
pub fn snips(data: &OffPolicyData, probs: &ActionProbs) -> Result<Vec<f64>> {
    let ratios = data.importance_ratios(probs)?;
    let total: f64 = ratios.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Data("all importance ratios are zero; SNIPS is undefined".into()));
    }
    let mut v = vec![0.0; data.m];
    for (t, w) in ratios.into_iter().enumerate() {
        for (vi, y) in v.iter_mut().zip(data.reward(t)) {
            *vi += w * y;
        }
    }
    v.iter_mut().for_each(|x| *x /= total);
    Ok(v)
}

/// Options for [`estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions {
    pub confidence: ConfidenceConfig,
    pub clip: f64,
}

/// Runs one estimator and reports its values with the policy's confidence widths.
///
/// `EstimatorKind::True` needs exact rewards and is served by [`true_value`] instead.
pub fn estimate(
    kind: EstimatorKind,
    data: &OffPolicyData,
    probs: &ActionProbs,
    opts: &EstimateOptions,
) -> Result<ValueEstimate> {
    let widths = confidence_width(data, probs, &opts.confidence)?;
    let values = match kind {
        EstimatorKind::True => {
            return Err(Error::config("the true value needs the problem, not logged data"));
        }
        EstimatorKind::Ips => ips(data, probs, f64::INFINITY)?,
        EstimatorKind::ClippedIps => ips(data, probs, opts.clip)?,
        EstimatorKind::Pessimistic => pessimistic(data, probs, &opts.confidence)?,
        EstimatorKind::Dm => dm(data, probs, &EmpiricalRewardModel::fit(data))?,
        EstimatorKind::Dr => dr(data, probs, &EmpiricalRewardModel::fit(data))?,
        EstimatorKind::Snips => snips(data, probs)?,
    };
    Ok(ValueEstimate { values, widths, kind })
}
