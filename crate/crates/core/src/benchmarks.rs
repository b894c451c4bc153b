//! Multi-objective test functions (ZDT, DTLZ) and their contextual-bandit adaptation.
//!
//! A test function `f: [0,1]^d -> R^m` (minimization) becomes a bandit by splitting its
//! input into a context half and an action half. Mean rewards are an affine, clamped,
//! order-reversing map of the objectives into `[0,1]^m`, so that higher is better.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Number of uniform probes used to estimate objective bounds for `Normalization::Auto`.
pub const AUTO_NORMALIZATION_SAMPLES: usize = 100_000;

/// A deterministic map from the unit cube `[0,1]^d` to `R^m`, minimization convention.
///
/// Implement this to plug functions that are not shipped (e.g. WFG) into a [`BenchmarkProblem`].
pub trait MultiObjective: Send + Sync {
    fn name(&self) -> &str;
    fn input_dim(&self) -> usize;
    fn num_objectives(&self) -> usize;
    /// Writes `m` objective values for `z` into `out`.
    fn eval_into(&self, z: &[f64], out: &mut [f64]);

    fn eval(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_objectives()];
        self.eval_into(z, &mut out);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestFunctionKind {
    Zdt1,
    Zdt2,
    Zdt3,
    Zdt4,
    Zdt6,
    Dtlz1,
    Dtlz2,
    Dtlz3,
    Dtlz4,
    Dtlz5,
    Dtlz6,
    Dtlz7,
}

impl TestFunctionKind {
    pub const ALL: [TestFunctionKind; 12] = [
        TestFunctionKind::Zdt1,
        TestFunctionKind::Zdt2,
        TestFunctionKind::Zdt3,
        TestFunctionKind::Zdt4,
        TestFunctionKind::Zdt6,
        TestFunctionKind::Dtlz1,
        TestFunctionKind::Dtlz2,
        TestFunctionKind::Dtlz3,
        TestFunctionKind::Dtlz4,
        TestFunctionKind::Dtlz5,
        TestFunctionKind::Dtlz6,
        TestFunctionKind::Dtlz7,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestFunctionKind::Zdt1 => "ZDT1",
            TestFunctionKind::Zdt2 => "ZDT2",
            TestFunctionKind::Zdt3 => "ZDT3",
            TestFunctionKind::Zdt4 => "ZDT4",
            TestFunctionKind::Zdt6 => "ZDT6",
            TestFunctionKind::Dtlz1 => "DTLZ1",
            TestFunctionKind::Dtlz2 => "DTLZ2",
            TestFunctionKind::Dtlz3 => "DTLZ3",
            TestFunctionKind::Dtlz4 => "DTLZ4",
            TestFunctionKind::Dtlz5 => "DTLZ5",
            TestFunctionKind::Dtlz6 => "DTLZ6",
            TestFunctionKind::Dtlz7 => "DTLZ7",
        }
    }

    pub fn is_zdt(self) -> bool {
        matches!(
            self,
            TestFunctionKind::Zdt1
                | TestFunctionKind::Zdt2
                | TestFunctionKind::Zdt3
                | TestFunctionKind::Zdt4
                | TestFunctionKind::Zdt6
        )
    }
}

impl fmt::Display for TestFunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestFunctionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        TestFunctionKind::ALL
            .into_iter()
            .find(|k| k.name() == upper)
            .ok_or_else(|| Error::config(format!("unknown test function `{s}`")))
    }
}

/// One of the shipped ZDT/DTLZ functions with its dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    kind: TestFunctionKind,
    d: usize,
    m: usize,
}

impl TestFunction {
    pub fn new(kind: TestFunctionKind, d: usize, m: usize) -> Result<Self> {
        if d < 2 || !d.is_multiple_of(2) {
            return Err(Error::config(format!(
                "{kind}: input dimension must be even and >= 2, got {d}"
            )));
        }
        if kind.is_zdt() {
            if m != 2 {
                return Err(Error::config(format!("{kind} has exactly 2 objectives, got m={m}")));
            }
        } else {
            if m < 2 {
                return Err(Error::config(format!("{kind} needs m >= 2, got m={m}")));
            }
            if d < m {
                return Err(Error::config(format!(
                    "{kind} needs d >= m (d={d}, m={m}) for at least one distance variable"
                )));
            }
        }
        Ok(TestFunction { kind, d, m })
    }

    pub fn by_name(name: &str, d: usize, m: usize) -> Result<Self> {
        TestFunction::new(name.parse()?, d, m)
    }

    pub fn kind(&self) -> TestFunctionKind {
        self.kind
    }
}

impl MultiObjective for TestFunction {
    fn name(&self) -> &str {
        self.kind.name()
    }

    fn input_dim(&self) -> usize {
        self.d
    }

    fn num_objectives(&self) -> usize {
        self.m
    }

    fn eval_into(&self, z: &[f64], out: &mut [f64]) {
        debug_assert_eq!(z.len(), self.d);
        debug_assert_eq!(out.len(), self.m);
        match self.kind {
            TestFunctionKind::Zdt1 => zdt(z, out, |f1, g| g * (1.0 - (f1 / g).sqrt())),
            TestFunctionKind::Zdt2 => zdt(z, out, |f1, g| g * (1.0 - (f1 / g).powi(2))),
            TestFunctionKind::Zdt3 => zdt(z, out, |f1, g| {
                g * (1.0 - (f1 / g).sqrt() - (f1 / g) * (10.0 * PI * f1).sin())
            }),
            TestFunctionKind::Zdt4 => zdt4(z, out),
            TestFunctionKind::Zdt6 => zdt6(z, out),
            TestFunctionKind::Dtlz1 => dtlz1(z, out),
            TestFunctionKind::Dtlz2 => {
                let g = dtlz_sphere_g(&z[self.m - 1..]);
                dtlz_spherical(z, out, g, 1.0);
            }
            TestFunctionKind::Dtlz3 => {
                let g = dtlz_rastrigin_g(&z[self.m - 1..]);
                dtlz_spherical(z, out, g, 1.0);
            }
            TestFunctionKind::Dtlz4 => {
                let g = dtlz_sphere_g(&z[self.m - 1..]);
                dtlz_spherical(z, out, g, 100.0);
            }
            TestFunctionKind::Dtlz5 => {
                let g = dtlz_sphere_g(&z[self.m - 1..]);
                dtlz_degenerate(z, out, g);
            }
            TestFunctionKind::Dtlz6 => {
                let g: f64 = z[self.m - 1..].iter().map(|v| v.powf(0.1)).sum();
                dtlz_degenerate(z, out, g);
            }
            TestFunctionKind::Dtlz7 => dtlz7(z, out),
        }
    }
}

fn zdt(z: &[f64], out: &mut [f64], h: impl Fn(f64, f64) -> f64) {
    let tail = &z[1..];
    let g = 1.0 + 9.0 * tail.iter().sum::<f64>() / tail.len() as f64;
    out[0] = z[0];
    out[1] = h(z[0], g);
}

// The remaining coordinates of ZDT4 live on [-5, 5]; the unit cube is mapped onto that box.
fn zdt4(z: &[f64], out: &mut [f64]) {
    let tail = &z[1..];
    let g = 1.0
        + 10.0 * tail.len() as f64
        + tail
            .iter()
            .map(|&u| {
                let v = -5.0 + 10.0 * u;
                v * v - 10.0 * (4.0 * PI * v).cos()
            })
            .sum::<f64>();
    out[0] = z[0];
    out[1] = g * (1.0 - (z[0] / g).sqrt());
}

fn zdt6(z: &[f64], out: &mut [f64]) {
    let tail = &z[1..];
    let f1 = 1.0 - (-4.0 * z[0]).exp() * (6.0 * PI * z[0]).sin().powi(6);
    let g = 1.0 + 9.0 * (tail.iter().sum::<f64>() / tail.len() as f64).powf(0.25);
    out[0] = f1;
    out[1] = g * (1.0 - (f1 / g).powi(2));
}

fn dtlz_sphere_g(distance: &[f64]) -> f64 {
    distance.iter().map(|v| (v - 0.5).powi(2)).sum()
}

fn dtlz_rastrigin_g(distance: &[f64]) -> f64 {
    100.0
        * (distance.len() as f64
            + distance
                .iter()
                .map(|v| (v - 0.5).powi(2) - (20.0 * PI * (v - 0.5)).cos())
                .sum::<f64>())
}

fn dtlz1(z: &[f64], out: &mut [f64]) {
    let m = out.len();
    let g = dtlz_rastrigin_g(&z[m - 1..]);
    for i in 0..m {
        let mut f = 0.5 * (1.0 + g);
        for &x in &z[..m - 1 - i] {
            f *= x;
        }
        if i > 0 {
            f *= 1.0 - z[m - 1 - i];
        }
        out[i] = f;
    }
}

/// DTLZ2-style spherical front over angles `x_j^alpha * pi / 2`.
fn dtlz_spherical(z: &[f64], out: &mut [f64], g: f64, alpha: f64) {
    let m = out.len();
    let angles: Vec<f64> = z[..m - 1].iter().map(|x| x.powf(alpha) * PI / 2.0).collect();
    spherical_front(&angles, g, out);
}

fn dtlz_degenerate(z: &[f64], out: &mut [f64], g: f64) {
    let m = out.len();
    let mut angles = Vec::with_capacity(m - 1);
    for (j, &x) in z[..m - 1].iter().enumerate() {
        if j == 0 {
            angles.push(x * PI / 2.0);
        } else {
            angles.push(PI / (4.0 * (1.0 + g)) * (1.0 + 2.0 * g * x));
        }
    }
    spherical_front(&angles, g, out);
}

fn spherical_front(angles: &[f64], g: f64, out: &mut [f64]) {
    let m = out.len();
    for i in 0..m {
        let mut f = 1.0 + g;
        for &t in &angles[..m - 1 - i] {
            f *= t.cos();
        }
        if i > 0 {
            f *= angles[m - 1 - i].sin();
        }
        out[i] = f;
    }
}

fn dtlz7(z: &[f64], out: &mut [f64]) {
    let m = out.len();
    let distance = &z[m - 1..];
    let g = 1.0 + 9.0 * distance.iter().sum::<f64>() / distance.len() as f64;
    let mut h = m as f64;
    for i in 0..m - 1 {
        out[i] = z[i];
        h -= z[i] / (1.0 + g) * (1.0 + (3.0 * PI * z[i]).sin());
    }
    out[m - 1] = (1.0 + g) * h;
}

/// How objective values are mapped into rewards.
#[derive(Debug, Clone, PartialEq)]
pub enum Normalization {
    /// Bounds taken as the per-objective min/max over uniform probes of the unit cube.
    Auto,
    /// Per-objective `(lo, hi)` bounds.
    Explicit(Vec<(f64, f64)>),
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Normalization::Auto => f.write_str("auto"),
            Normalization::Explicit(bounds) => {
                let parts: Vec<String> = bounds.iter().map(|(lo, hi)| format!("{lo}:{hi}")).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl FromStr for Normalization {
    type Err = Error;

    /// `auto` or `lo:hi,lo:hi,...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Normalization::Auto);
        }
        let mut bounds = Vec::new();
        for part in s.split(',') {
            let (lo, hi) = part
                .split_once(':')
                .ok_or_else(|| Error::config(format!("bad normalization bound `{part}`, want lo:hi")))?;
            let lo: f64 = lo
                .trim()
                .parse()
                .map_err(|_| Error::config(format!("bad lower bound `{lo}`")))?;
            let hi: f64 = hi
                .trim()
                .parse()
                .map_err(|_| Error::config(format!("bad upper bound `{hi}`")))?;
            bounds.push((lo, hi));
        }
        Ok(Normalization::Explicit(bounds))
    }
}

/// Everything needed to rebuild a [`BenchmarkProblem`] bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    pub d: usize,
    pub m: usize,
    pub num_actions: usize,
    pub seed: u64,
    pub normalization: Normalization,
}

impl ProblemSpec {
    pub fn new(name: &str, d: usize, m: usize) -> Self {
        ProblemSpec {
            name: name.to_ascii_uppercase(),
            d,
            m,
            num_actions: 20,
            seed: 0,
            normalization: Normalization::Auto,
        }
    }

    pub fn build(&self) -> Result<BenchmarkProblem> {
        BenchmarkProblem::from_spec(self)
    }
}

/// A test function turned into a contextual bandit with a finite action set.
#[derive(Clone)]
pub struct BenchmarkProblem {
    func: Arc<dyn MultiObjective>,
    actions: Vec<Vec<f64>>,
    bounds: Vec<(f64, f64)>,
}

impl fmt::Debug for BenchmarkProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BenchmarkProblem")
            .field("function", &self.func.name())
            .field("d", &self.func.input_dim())
            .field("m", &self.func.num_objectives())
            .field("num_actions", &self.actions.len())
            .field("bounds", &self.bounds)
            .finish()
    }
}

// Independent ChaCha streams for the pieces of a problem derived from one seed.
const ACTION_STREAM: u64 = 1;
const NORMALIZATION_STREAM: u64 = 2;

pub(crate) fn seeded_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl BenchmarkProblem {
    pub fn from_spec(spec: &ProblemSpec) -> Result<Self> {
        let func = Arc::new(TestFunction::by_name(&spec.name, spec.d, spec.m)?);
        let actions = discretize_actions(
            spec.d / 2,
            spec.num_actions,
            &mut seeded_stream(spec.seed, ACTION_STREAM),
        )?;
        let bounds = match &spec.normalization {
            Normalization::Auto => auto_bounds(
                func.as_ref(),
                AUTO_NORMALIZATION_SAMPLES,
                &mut seeded_stream(spec.seed, NORMALIZATION_STREAM),
            ),
            Normalization::Explicit(b) => b.clone(),
        };
        BenchmarkProblem::new(func, actions, bounds)
    }

    /// Builds a problem from any objective function, an explicit action list, and reward bounds.
    pub fn new(func: Arc<dyn MultiObjective>, actions: Vec<Vec<f64>>, bounds: Vec<(f64, f64)>) -> Result<Self> {
        let d = func.input_dim();
        if d < 2 || !d.is_multiple_of(2) {
            return Err(Error::config(format!("input dimension must be even, got {d}")));
        }
        if actions.len() < 2 {
            return Err(Error::config("need at least 2 actions"));
        }
        if let Some(a) = actions.iter().find(|a| a.len() != d / 2) {
            return Err(Error::config(format!(
                "action has dimension {}, expected {}",
                a.len(),
                d / 2
            )));
        }
        if bounds.len() != func.num_objectives() {
            return Err(Error::config(format!(
                "{} normalization bounds for {} objectives",
                bounds.len(),
                func.num_objectives()
            )));
        }
        if let Some((lo, hi)) = bounds
            .iter()
            .find(|(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite())
        {
            return Err(Error::config(format!("degenerate normalization bounds ({lo}, {hi})")));
        }
        Ok(BenchmarkProblem { func, actions, bounds })
    }

    pub fn function(&self) -> &dyn MultiObjective {
        self.func.as_ref()
    }

    pub fn name(&self) -> &str {
        self.func.name()
    }

    pub fn num_objectives(&self) -> usize {
        self.func.num_objectives()
    }

    pub fn context_dim(&self) -> usize {
        self.func.input_dim() / 2
    }

    pub fn action_dim(&self) -> usize {
        self.func.input_dim() / 2
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn actions(&self) -> &[Vec<f64>] {
        &self.actions
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn feature_dim(&self) -> usize {
        feature_dim(self.context_dim(), self.action_dim())
    }

    /// Mean reward of action vector `a` in context `x`, in `[0,1]^m`.
    pub fn mean_reward(&self, x: &[f64], a: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_objectives()];
        self.mean_reward_into(x, a, &mut out);
        out
    }

    pub fn mean_reward_into(&self, x: &[f64], a: &[f64], out: &mut [f64]) {
        let mut z = Vec::with_capacity(x.len() + a.len());
        z.extend_from_slice(x);
        z.extend_from_slice(a);
        self.func.eval_into(&z, out);
        for (r, &(lo, hi)) in out.iter_mut().zip(&self.bounds) {
            *r = normalize_objective(*r, lo, hi);
        }
    }

    /// Mean rewards of every action in context `x`, one m-vector per action.
    pub fn action_rewards(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.actions.iter().map(|a| self.mean_reward(x, a)).collect()
    }

    pub fn sample_context<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.context_dim()).map(|_| rng.random::<f64>()).collect()
    }

    pub fn sample_contexts<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
        (0..n).map(|_| self.sample_context(rng)).collect()
    }

    /// Features of every (context, action) pair.
    pub fn feature_table(&self, contexts: &[Vec<f64>]) -> FeatureTable {
        let dim = self.feature_dim();
        let mut data = Vec::with_capacity(contexts.len() * self.num_actions() * dim);
        let mut buf = Vec::with_capacity(dim);
        for x in contexts {
            for a in &self.actions {
                features_into(x, a, &mut buf);
                data.extend_from_slice(&buf);
            }
        }
        FeatureTable {
            rows: contexts.len(),
            num_actions: self.num_actions(),
            dim,
            data,
        }
    }
}

/// `clamp((hi - f) / (hi - lo), 0, 1)`.
pub fn normalize_objective(f: f64, lo: f64, hi: f64) -> f64 {
    ((hi - f) / (hi - lo)).clamp(0.0, 1.0)
}

fn auto_bounds<R: Rng + ?Sized>(func: &dyn MultiObjective, samples: usize, rng: &mut R) -> Vec<(f64, f64)> {
    let m = func.num_objectives();
    let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); m];
    let mut z = vec![0.0; func.input_dim()];
    let mut out = vec![0.0; m];
    for _ in 0..samples {
        z.iter_mut().for_each(|v| *v = rng.random());
        func.eval_into(&z, &mut out);
        for (b, &v) in bounds.iter_mut().zip(&out) {
            b.0 = b.0.min(v);
            b.1 = b.1.max(v);
        }
    }
    bounds
}

/// `count` i.i.d. uniform points of `[0,1]^action_dim`.
pub fn discretize_actions<R: Rng + ?Sized>(action_dim: usize, count: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    if count < 2 {
        return Err(Error::config(format!("need at least 2 actions, got {count}")));
    }
    Ok((0..count)
        .map(|_| (0..action_dim).map(|_| rng.random::<f64>()).collect())
        .collect())
}

pub fn feature_dim(context_dim: usize, action_dim: usize) -> usize {
    context_dim + action_dim + context_dim * action_dim + 1
}

/// `x ⊕ a ⊕ vec(x aᵀ) ⊕ (1)`, with the outer product flattened row-major.
pub fn features(x: &[f64], a: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(feature_dim(x.len(), a.len()));
    features_into(x, a, &mut out);
    out
}

pub fn features_into(x: &[f64], a: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.extend_from_slice(x);
    out.extend_from_slice(a);
    for &xi in x {
        out.extend(a.iter().map(|&aj| xi * aj));
    }
    out.push(1.0);
}

/// Row-major `rows × num_actions × dim` feature tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub rows: usize,
    pub num_actions: usize,
    pub dim: usize,
    pub data: Vec<f64>,
}

impl FeatureTable {
    pub fn row(&self, t: usize) -> &[f64] {
        let stride = self.num_actions * self.dim;
        &self.data[t * stride..(t + 1) * stride]
    }

    pub fn get(&self, t: usize, a: usize) -> &[f64] {
        let start = (t * self.num_actions + a) * self.dim;
        &self.data[start..start + self.dim]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn zdt1_reference_points() {
        let f = TestFunction::by_name("ZDT1", 6, 2).unwrap();
        assert_eq!(f.eval(&[0.0; 6]), vec![0.0, 1.0]);
        assert_eq!(f.eval(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]), vec![1.0, 0.0]);
        let ones = f.eval(&[1.0; 6]);
        assert_eq!(ones[0], 1.0);
        // Independently evaluated: g = 10, f2 = 10 (1 - sqrt(1/10)).
        assert!(close(ones[1], 6.83772233983162));
    }

    #[test]
    fn dtlz2_corner() {
        let f = TestFunction::by_name("DTLZ2", 6, 2).unwrap();
        let v = f.eval(&[0.0, 0.5, 0.5, 0.5, 0.5, 0.5]);
        assert!(close(v[0], 1.0));
        assert!(v[1].abs() < 1e-15);
    }

    #[test]
    fn dtlz_fronts_on_optimal_distance() {
        // With all distance variables at 0.5, DTLZ2 lies on the unit sphere and DTLZ1 on the simplex sum 0.5.
        let z = [0.3, 0.7, 0.5, 0.5, 0.5, 0.5];
        let f2 = TestFunction::by_name("DTLZ2", 6, 3).unwrap().eval(&z);
        assert!(close(f2.iter().map(|v| v * v).sum::<f64>(), 1.0));
        let f1 = TestFunction::by_name("DTLZ1", 6, 3).unwrap().eval(&z);
        assert!(close(f1.iter().sum::<f64>(), 0.5));
    }

    #[test]
    fn dtlz7_on_front() {
        let f = TestFunction::by_name("DTLZ7", 4, 2).unwrap();
        let v = f.eval(&[0.0, 0.0, 0.0, 0.0]);
        // g = 1, h = 2 - 0 = 2, f2 = 2 * 2
        assert_eq!(v, vec![0.0, 4.0]);
    }

    #[test]
    fn all_functions_finite_on_cube() {
        let mut rng = seeded_stream(3, 0);
        for kind in TestFunctionKind::ALL {
            let m = if kind.is_zdt() { 2 } else { 3 };
            let f = TestFunction::new(kind, 6, m).unwrap();
            for _ in 0..500 {
                let z: Vec<f64> = (0..6).map(|_| rng.random()).collect();
                assert!(f.eval(&z).iter().all(|v| v.is_finite()), "{kind} non-finite at {z:?}");
            }
            for corner in [[0.0; 6], [1.0; 6]] {
                assert!(f.eval(&corner).iter().all(|v| v.is_finite()), "{kind} at corner");
            }
        }
    }

    #[test]
    fn configuration_errors() {
        assert!(TestFunction::by_name("ZDT5", 6, 2).is_err());
        assert!(TestFunction::by_name("WFG1", 6, 2).is_err());
        assert!(TestFunction::by_name("ZDT1", 6, 3).is_err());
        assert!(TestFunction::by_name("ZDT1", 5, 2).is_err());
        assert!(TestFunction::by_name("DTLZ2", 6, 1).is_err());
        assert!(TestFunction::by_name("dtlz2", 6, 2).is_ok());
    }

    #[test]
    fn reward_transform() {
        assert!(close(normalize_objective(0.0, 0.0, 1.0), 1.0));
        assert!(close(normalize_objective(1.0, 0.0, 10.0), 0.9));
        assert_eq!(normalize_objective(10.0, 0.0, 10.0), 0.0);
        assert_eq!(normalize_objective(-3.0, 0.0, 10.0), 1.0);
        assert_eq!(normalize_objective(12.0, 0.0, 10.0), 0.0);

        let spec = ProblemSpec {
            normalization: Normalization::Explicit(vec![(0.0, 1.0), (0.0, 10.0)]),
            ..ProblemSpec::new("ZDT1", 6, 2)
        };
        let p = spec.build().unwrap();
        // f(0,...,0) = (0, 1)
        let r = p.mean_reward(&[0.0; 3], &[0.0; 3]);
        assert!(close(r[0], 1.0) && close(r[1], 0.9));
    }

    #[test]
    fn feature_layout() {
        assert_eq!(
            features(&[1.0, 0.0], &[0.0, 1.0]),
            vec![1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0]
        );
        let zero = features(&[0.0; 3], &[0.0; 3]);
        assert_eq!(zero.len(), 16);
        assert!(zero[..15].iter().all(|&v| v == 0.0));
        assert_eq!(zero[15], 1.0);
        assert_eq!(feature_dim(3, 3), 16);
    }

    #[test]
    fn action_discretization() {
        let a = discretize_actions(3, 20, &mut seeded_stream(9, 1)).unwrap();
        assert_eq!(a.len(), 20);
        assert!(a.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(a, discretize_actions(3, 20, &mut seeded_stream(9, 1)).unwrap());
        let two = discretize_actions(1, 2, &mut seeded_stream(1, 1)).unwrap();
        assert_eq!(two.len(), 2);
        assert!(two.iter().all(|v| v.len() == 1));
        assert!(discretize_actions(3, 1, &mut seeded_stream(1, 1)).is_err());
    }

    #[test]
    fn rewards_bounded_under_probes() {
        let mut rng = seeded_stream(11, 5);
        for name in ["ZDT1", "ZDT3", "ZDT4", "ZDT6", "DTLZ1", "DTLZ2", "DTLZ7"] {
            let spec = ProblemSpec {
                seed: 4,
                ..ProblemSpec::new(name, 6, 2)
            };
            let p = spec.build().unwrap();
            for _ in 0..10_000 {
                let x = p.sample_context(&mut rng);
                let a = &p.actions()[rng.random_range(0..p.num_actions())];
                let r = p.mean_reward(&x, a);
                assert!(r.iter().all(|v| (0.0..=1.0).contains(v)), "{name}: {r:?}");
            }
        }
    }

    #[test]
    fn problem_is_deterministic_in_seed() {
        let spec = ProblemSpec {
            seed: 17,
            ..ProblemSpec::new("DTLZ2", 6, 2)
        };
        let a = spec.build().unwrap();
        let b = spec.build().unwrap();
        assert_eq!(a.actions(), b.actions());
        assert_eq!(a.bounds(), b.bounds());
        let other = ProblemSpec { seed: 18, ..spec }.build().unwrap();
        assert_ne!(a.actions(), other.actions());
    }

    #[test]
    fn normalization_parse() {
        assert_eq!("auto".parse::<Normalization>().unwrap(), Normalization::Auto);
        let n: Normalization = "0:1, -2:10".parse().unwrap();
        assert_eq!(n, Normalization::Explicit(vec![(0.0, 1.0), (-2.0, 10.0)]));
        assert_eq!(n.to_string().parse::<Normalization>().unwrap(), n);
        assert!("0-1".parse::<Normalization>().is_err());
    }
}
