//! Softmax policies over linear features, the ε-greedy Pareto logging policy, and policy sets.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::benchmarks::{features_into, BenchmarkProblem};
use crate::error::{Error, Result};

/// `π(a|x; θ) ∝ exp(φ(x,a)ᵀθ)` over a finite action list.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxPolicy {
    pub theta: Vec<f64>,
}

impl SoftmaxPolicy {
    pub fn new(theta: Vec<f64>) -> Self {
        SoftmaxPolicy { theta }
    }

    pub fn zeros(dim: usize) -> Self {
        SoftmaxPolicy { theta: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    /// Action probabilities in context `x`.
    pub fn action_probabilities(&self, x: &[f64], actions: &[Vec<f64>]) -> Result<Vec<f64>> {
        if actions.is_empty() {
            return Err(Error::config("empty action list"));
        }
        let table = feature_rows(x, actions);
        let mut probs = vec![0.0; actions.len()];
        self.probabilities_from_features(&table, &mut probs)?;
        Ok(probs)
    }

    /// Probabilities from a contiguous `num_actions × dim` feature block.
    pub fn probabilities_from_features(&self, feats: &[f64], out: &mut [f64]) -> Result<()> {
        let dim = self.theta.len();
        debug_assert_eq!(feats.len(), out.len() * dim);
        for (logit, phi) in out.iter_mut().zip(feats.chunks_exact(dim)) {
            *logit = dot(phi, &self.theta);
        }
        softmax_in_place(out)
    }

    /// `∂ log π(a|x;θ) / ∂θ = φ(x,a) − Σ_b π(b|x) φ(x,b)`.
    pub fn log_prob_gradient(&self, x: &[f64], actions: &[Vec<f64>], a_index: usize) -> Result<Vec<f64>> {
        if a_index >= actions.len() {
            return Err(Error::config(format!(
                "action index {a_index} out of range for {} actions",
                actions.len()
            )));
        }
        let dim = self.theta.len();
        let table = feature_rows(x, actions);
        let mut probs = vec![0.0; actions.len()];
        self.probabilities_from_features(&table, &mut probs)?;
        let mut grad = table[a_index * dim..(a_index + 1) * dim].to_vec();
        for (p, phi) in probs.iter().zip(table.chunks_exact(dim)) {
            for (g, f) in grad.iter_mut().zip(phi) {
                *g -= p * f;
            }
        }
        Ok(grad)
    }
}

fn feature_rows(x: &[f64], actions: &[Vec<f64>]) -> Vec<f64> {
    let mut table = Vec::new();
    let mut buf = Vec::new();
    for a in actions {
        features_into(x, a, &mut buf);
        table.extend_from_slice(&buf);
    }
    table
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Max-shifted softmax. Fails on non-finite logits.
pub fn softmax_in_place(logits: &mut [f64]) -> Result<()> {
    let mut max = f64::NEG_INFINITY;
    for &l in logits.iter() {
        if !l.is_finite() {
            return Err(Error::Numeric(format!("non-finite logit {l}")));
        }
        max = max.max(l);
    }
    let mut total = 0.0;
    for l in logits.iter_mut() {
        *l = (*l - max).exp();
        total += *l;
    }
    for l in logits.iter_mut() {
        *l /= total;
    }
    Ok(())
}

/// Marks the members of the Pareto front of `rewards` (maximization).
///
/// A vector is flagged unless some other vector is at least as good in every coordinate
/// and strictly better in one. Exact duplicates therefore share the same flag.
pub fn pareto_flags(rewards: &[Vec<f64>]) -> Vec<bool> {
    rewards
        .iter()
        .map(|r| !rewards.iter().any(|other| dominates(other, r)))
        .collect()
}

pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        if x > y {
            strict = true;
        }
    }
    strict
}

/// `normalize(ε/|A| + (1−ε) F_a / Σ_b F_b)`.
pub fn mix_with_front(flags: &[bool], epsilon: f64) -> Vec<f64> {
    let n = flags.len() as f64;
    let front = flags.iter().filter(|&&f| f).count() as f64;
    debug_assert!(front > 0.0, "a finite reward set has a non-empty front");
    let mut probs: Vec<f64> = flags
        .iter()
        .map(|&f| epsilon / n + if f { (1.0 - epsilon) / front } else { 0.0 })
        .collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    probs
}

/// Uniform with probability ε, uniform over the per-context Pareto-optimal actions otherwise.
#[derive(Debug, Clone)]
pub struct LoggingPolicy {
    epsilon: f64,
    problem: BenchmarkProblem,
}

impl LoggingPolicy {
    pub fn new(problem: BenchmarkProblem, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::config(format!("epsilon must lie in [0,1], got {epsilon}")));
        }
        Ok(LoggingPolicy { epsilon, problem })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn problem(&self) -> &BenchmarkProblem {
        &self.problem
    }

    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        let rewards = self.problem.action_rewards(x);
        mix_with_front(&pareto_flags(&rewards), self.epsilon)
    }
}

/// `K` softmax policies sharing one parameter dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySet {
    policies: Vec<SoftmaxPolicy>,
}

impl PolicySet {
    pub fn new(policies: Vec<SoftmaxPolicy>) -> Result<Self> {
        let Some(first) = policies.first() else {
            return Err(Error::config("a policy set needs at least one policy"));
        };
        let dim = first.dim();
        if policies.iter().any(|p| p.dim() != dim) {
            return Err(Error::config("policies in a set must share one dimension"));
        }
        Ok(PolicySet { policies })
    }

    pub fn from_flat(flat: &[f64], k: usize) -> Result<Self> {
        if k == 0 || !flat.len().is_multiple_of(k) {
            return Err(Error::config(format!(
                "cannot split {} parameters into {k} policies",
                flat.len()
            )));
        }
        let dim = flat.len() / k;
        PolicySet::new(flat.chunks_exact(dim).map(|c| SoftmaxPolicy::new(c.to_vec())).collect())
    }

    pub fn len(&self) -> usize {
        self.policies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.policies.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.policies[0].dim()
    }

    pub fn policies(&self) -> &[SoftmaxPolicy] {
        &self.policies
    }

    pub fn iter(&self) -> impl Iterator<Item = &SoftmaxPolicy> {
        self.policies.iter()
    }

    /// Concatenated parameters `θ_1 ⊕ … ⊕ θ_K`.
    pub fn flatten(&self) -> Vec<f64> {
        self.policies.iter().flat_map(|p| p.theta.iter().copied()).collect()
    }

    /// Text form: `# softmax dim=<n>` followed by one comma-separated θ per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("# softmax dim={}\n", self.dim());
        for p in &self.policies {
            let row: Vec<String> = p.theta.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }

    pub fn from_text(text: &str, path: &Path) -> Result<Self> {
        let parse_err = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut lines = text.lines().enumerate();
        let dim = loop {
            let Some((i, line)) = lines.next() else {
                return Err(parse_err(1, "missing `# softmax dim=<n>` header".into()));
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let dim = line
                .strip_prefix("# softmax dim=")
                .ok_or_else(|| parse_err(i + 1, format!("expected `# softmax dim=<n>`, found `{line}`")))?;
            break dim
                .trim()
                .parse::<usize>()
                .map_err(|e| parse_err(i + 1, format!("bad dimension: {e}")))?;
        };
        let mut policies = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let theta = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| parse_err(i + 1, format!("bad parameter: {e}")))?;
            if theta.len() != dim {
                return Err(parse_err(
                    i + 1,
                    format!("expected {dim} parameters, found {}", theta.len()),
                ));
            }
            policies.push(SoftmaxPolicy::new(theta));
        }
        if policies.is_empty() {
            return Err(Error::Validation(format!("{}: no policies", path.display())));
        }
        PolicySet::new(policies)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PolicySet::from_text(&text, path)
    }
}

/// Uniform draw from the unit ball: a normalized Gaussian direction scaled by `U^{1/dim}`.
pub fn sample_unit_ball<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            let radius = rng.random::<f64>().powf(1.0 / dim as f64);
            return g.into_iter().map(|v| v / norm * radius).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{seeded_stream, ProblemSpec};

    fn actions2() -> Vec<Vec<f64>> {
        vec![vec![0.2, 0.9], vec![0.7, 0.1]]
    }

    #[test]
    fn zero_theta_is_uniform() {
        let p = SoftmaxPolicy::zeros(9);
        let probs = p.action_probabilities(&[0.3, 0.4], &actions2()).unwrap();
        assert_eq!(probs, vec![0.5, 0.5]);
    }

    #[test]
    fn softmax_arithmetic() {
        let mut l = vec![0.0, 3f64.ln()];
        softmax_in_place(&mut l).unwrap();
        assert!((l[0] - 0.25).abs() < 1e-15 && (l[1] - 0.75).abs() < 1e-15);

        let mut shifted = vec![1000.0, 1000.0 + 3f64.ln()];
        softmax_in_place(&mut shifted).unwrap();
        assert!((shifted[0] - 0.25).abs() < 1e-12);

        assert!(softmax_in_place(&mut [0.0, f64::NAN]).is_err());
        assert!(softmax_in_place(&mut [0.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn probabilities_sum_to_one_with_large_theta() {
        let mut rng = seeded_stream(1, 0);
        let actions: Vec<Vec<f64>> = (0..20)
            .map(|_| vec![rng.random(), rng.random(), rng.random()])
            .collect();
        for scale in [0.1, 10.0, 500.0] {
            let theta: Vec<f64> = (0..16).map(|_| scale * (rng.random::<f64>() - 0.5)).collect();
            let p = SoftmaxPolicy::new(theta);
            let probs = p.action_probabilities(&[0.1, 0.5, 0.9], &actions).unwrap();
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(probs.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn gradient_uniform_case() {
        let x = [0.3, 0.6];
        let acts = actions2();
        let g = SoftmaxPolicy::zeros(9).log_prob_gradient(&x, &acts, 0).unwrap();
        let f0 = crate::benchmarks::features(&x, &acts[0]);
        let f1 = crate::benchmarks::features(&x, &acts[1]);
        for i in 0..9 {
            assert!((g[i] - (f0[i] - 0.5 * (f0[i] + f1[i]))).abs() < 1e-15);
        }
        let single = SoftmaxPolicy::new(vec![0.3; 9])
            .log_prob_gradient(&x, &acts[..1], 0)
            .unwrap();
        assert!(single.iter().all(|&v| v.abs() < 1e-15));
        assert!(SoftmaxPolicy::zeros(9).log_prob_gradient(&x, &acts, 2).is_err());
    }

    #[test]
    fn pareto_flag_cases() {
        assert_eq!(pareto_flags(&[vec![0.9, 0.1], vec![0.5, 0.05]]), vec![true, false]);
        assert_eq!(pareto_flags(&[vec![0.9, 0.1], vec![0.1, 0.9]]), vec![true, true]);
        assert_eq!(pareto_flags(&[vec![0.4, 0.4], vec![0.4, 0.4]]), vec![true, true]);
        // weakly dominated: equal in one coordinate, worse in another
        assert_eq!(pareto_flags(&[vec![0.4, 0.5], vec![0.4, 0.4]]), vec![true, false]);
    }

    #[test]
    fn logging_mixture() {
        let p = mix_with_front(&[true, false], 0.1);
        assert!((p[0] - 0.95).abs() < 1e-15 && (p[1] - 0.05).abs() < 1e-15);
        assert_eq!(mix_with_front(&[true, false, false, true], 1.0), vec![0.25; 4]);
        for eps in [0.0, 0.3, 0.9] {
            assert_eq!(mix_with_front(&[true; 5], eps), vec![0.2; 5]);
        }
    }

    #[test]
    fn logging_policy_lower_bound() {
        let problem = ProblemSpec {
            seed: 2,
            ..ProblemSpec::new("ZDT2", 6, 2)
        }
        .build()
        .unwrap();
        let eps = 0.1;
        let lp = LoggingPolicy::new(problem.clone(), eps).unwrap();
        let mut rng = seeded_stream(5, 0);
        for _ in 0..200 {
            let x = problem.sample_context(&mut rng);
            let probs = lp.probabilities(&x);
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(probs.iter().all(|&p| p >= eps / 20.0 - 1e-15));
        }
        assert!(LoggingPolicy::new(problem, 1.5).is_err());
    }

    #[test]
    fn policy_set_text_round_trip() {
        let set = PolicySet::new(vec![
            SoftmaxPolicy::new(vec![0.1, -2.5e-17, 3.0]),
            SoftmaxPolicy::new(vec![1.0 / 3.0, 0.0, -7.25]),
        ])
        .unwrap();
        let text = set.to_text();
        assert!(text.starts_with("# softmax dim=3\n"));
        assert_eq!(PolicySet::from_text(&text, Path::new("p")).unwrap(), set);

        let err = PolicySet::from_text("# softmax dim=3\n1,2\n", Path::new("p")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(PolicySet::from_text("1,2,3\n", Path::new("p")).is_err());
        assert!(PolicySet::new(vec![SoftmaxPolicy::zeros(2), SoftmaxPolicy::zeros(3)]).is_err());
    }

    #[test]
    fn unit_ball_samples() {
        let mut rng = seeded_stream(8, 0);
        for _ in 0..1000 {
            let v = sample_unit_ball(16, &mut rng);
            assert!(v.iter().map(|x| x * x).sum::<f64>() <= 1.0 + 1e-12);
        }
    }
}
