//! Experiment configuration: `[section]` headers, `key = value` lines, `#` comments.
//!
//! Every key can also be set as `section.key=value`, which is how command-line overrides are
//! applied. [`ExperimentConfig::to_ini`] writes back a file that parses to the same config.

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::benchmarks::{Normalization, ProblemSpec};
use crate::error::{Error, Result};
use crate::hypervolume::HypervolumeMethod;
use crate::optimize::GradientConfig;

/// A solution strategy compared in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Random unit-ball policies, no data.
    Random,
    /// Gradient ascent on the hypervolume of clamped IPS estimates.
    MeanHvi,
    /// Gradient ascent on the hypervolume of lower confidence bounds.
    PessHvi,
    /// Gradient ascent on the bootstrap expected hypervolume.
    Ehvi { resamples: usize },
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Random => f.write_str("random"),
            Method::MeanHvi => f.write_str("meanHVI"),
            Method::PessHvi => f.write_str("pessHVI"),
            Method::Ehvi { resamples } => write!(f, "ehvi:{resamples}"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "random" => Ok(Method::Random),
            "meanhvi" => Ok(Method::MeanHvi),
            "pesshvi" => Ok(Method::PessHvi),
            _ => match lower.strip_prefix("ehvi:").map(str::parse::<usize>) {
                Some(Ok(n)) if n >= 1 => Ok(Method::Ehvi { resamples: n }),
                _ => Err(Error::config(format!(
                    "unknown method `{s}` (random, meanHVI, pessHVI, ehvi:<N>)"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub n_values: Vec<usize>,
    pub k_values: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub sigma: f64,
    pub beta: f64,
    pub methods: Vec<Method>,
    pub runs: usize,
    pub seed: u64,
    pub hv_method: HypervolumeMethod,
    /// Random policies whose true hypervolume normalizes recovered hypervolume.
    pub reference_policies: usize,
    /// Fixed contexts on which true values are computed.
    pub eval_contexts: usize,
    pub optimizer: GradientConfig,
    /// When false, the `seconds` column is written as 0 so reruns are byte-identical.
    pub timing: bool,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            problem: ProblemSpec::new("DTLZ2", 6, 2),
            n_values: vec![100, 500, 2000],
            k_values: vec![2, 5, 10],
            epsilons: vec![0.1],
            sigma: 1.0,
            beta: 0.2,
            methods: vec![Method::Random, Method::MeanHvi, Method::PessHvi],
            runs: 10,
            seed: 0,
            hv_method: HypervolumeMethod::Exact2d,
            reference_policies: 2000,
            eval_contexts: 1000,
            optimizer: GradientConfig::default(),
            timing: true,
            output: PathBuf::from("results"),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::config(format!("bad value `{v}` for `{key}`")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    let items = v.split(',').map(|s| parse_value(key, s)).collect::<Result<Vec<T>>>()?;
    if items.is_empty() {
        return Err(Error::config(format!("`{key}` needs at least one value")));
    }
    Ok(items)
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_ini(&text, path)
    }

    /// Parses a config file on top of the defaults. `path` is only used in error messages.
    pub fn from_ini(text: &str, path: &Path) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |msg: String| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                msg,
            };
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| parse_err(format!("unterminated section header `{line}`")))?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected `key = value`, got `{line}`")))?;
            if section.is_empty() {
                return Err(parse_err(format!("`{}` appears before any [section]", key.trim())));
            }
            cfg.set(&format!("{section}.{}", key.trim()), value.trim())
                .map_err(|e| parse_err(e.to_string()))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one `section.key` to a textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let opt = &mut self.optimizer;
        match key {
            "problem.name" => self.problem.name = value.trim().to_ascii_uppercase(),
            "problem.d" => self.problem.d = parse_value(key, value)?,
            "problem.m" => self.problem.m = parse_value(key, value)?,
            "problem.num_actions" => self.problem.num_actions = parse_value(key, value)?,
            "problem.seed" => self.problem.seed = parse_value(key, value)?,
            "problem.normalization" => self.problem.normalization = value.parse::<Normalization>()?,
            "data.n" => self.n_values = parse_list(key, value)?,
            "data.epsilon" => self.epsilons = parse_list(key, value)?,
            "data.sigma" => self.sigma = parse_value(key, value)?,
            "estimator.beta" => self.beta = parse_value(key, value)?,
            "sweep.methods" => self.methods = parse_list(key, value)?,
            "sweep.K" | "sweep.k" => self.k_values = parse_list(key, value)?,
            "sweep.runs" => self.runs = parse_value(key, value)?,
            "sweep.seed" => self.seed = parse_value(key, value)?,
            "sweep.hv_method" => self.hv_method = value.parse()?,
            "sweep.reference_policies" => self.reference_policies = parse_value(key, value)?,
            "sweep.eval_contexts" => self.eval_contexts = parse_value(key, value)?,
            "sweep.timing" => self.timing = parse_value(key, value)?,
            "sweep.output" => self.output = PathBuf::from(value.trim()),
            "optimizer.iterations" => opt.iterations = parse_value(key, value)?,
            "optimizer.learning_rate" => opt.learning_rate = parse_value(key, value)?,
            "optimizer.beta1" => opt.beta1 = parse_value(key, value)?,
            "optimizer.beta2" => opt.beta2 = parse_value(key, value)?,
            "optimizer.eps" => opt.eps = parse_value(key, value)?,
            "optimizer.restarts" => opt.restarts = parse_value(key, value)?,
            "optimizer.init_scale" => opt.init_scale = parse_value(key, value)?,
            _ => return Err(Error::config(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Applies `section.key=value` overrides in order.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<()> {
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::config(format!("override `{o}` is not section.key=value")))?;
            self.set(k.trim(), v)?;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.build()?;
        self.optimizer.validate()?;
        if self.runs == 0 {
            return Err(Error::config("runs must be >= 1"));
        }
        if self.n_values.contains(&0) || self.k_values.contains(&0) {
            return Err(Error::config("n and K values must be >= 1"));
        }
        if self.epsilons.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(Error::config("epsilon values must lie in [0, 1]"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) || !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::config("sigma and beta must be finite and >= 0"));
        }
        if self.methods.is_empty() {
            return Err(Error::config("at least one method is required"));
        }
        if self.reference_policies == 0 || self.eval_contexts == 0 {
            return Err(Error::config("reference_policies and eval_contexts must be >= 1"));
        }
        if self.hv_method == HypervolumeMethod::Exact2d && self.problem.m != 2 {
            return Err(Error::config(format!(
                "hv_method exact2d needs m = 2, problem has m = {}",
                self.problem.m
            )));
        }
        Ok(())
    }

    /// The effective configuration in the file format.
    pub fn to_ini(&self) -> String {
        let p = &self.problem;
        let o = &self.optimizer;
        let mut s = String::new();
        let _ = writeln!(s, "[problem]");
        let _ = writeln!(s, "name = {}", p.name);
        let _ = writeln!(s, "d = {}", p.d);
        let _ = writeln!(s, "m = {}", p.m);
        let _ = writeln!(s, "num_actions = {}", p.num_actions);
        let _ = writeln!(s, "seed = {}", p.seed);
        let _ = writeln!(s, "normalization = {}", p.normalization);
        let _ = writeln!(s, "\n[data]");
        let _ = writeln!(s, "n = {}", join(&self.n_values));
        let _ = writeln!(s, "epsilon = {}", join(&self.epsilons));
        let _ = writeln!(s, "sigma = {}", self.sigma);
        let _ = writeln!(s, "\n[estimator]");
        let _ = writeln!(s, "beta = {}", self.beta);
        let _ = writeln!(s, "\n[sweep]");
        let _ = writeln!(s, "methods = {}", join(&self.methods));
        let _ = writeln!(s, "K = {}", join(&self.k_values));
        let _ = writeln!(s, "runs = {}", self.runs);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "hv_method = {}", self.hv_method);
        let _ = writeln!(s, "reference_policies = {}", self.reference_policies);
        let _ = writeln!(s, "eval_contexts = {}", self.eval_contexts);
        let _ = writeln!(s, "timing = {}", self.timing);
        let _ = writeln!(s, "output = {}", self.output.display());
        let _ = writeln!(s, "\n[optimizer]");
        let _ = writeln!(s, "iterations = {}", o.iterations);
        let _ = writeln!(s, "learning_rate = {}", o.learning_rate);
        let _ = writeln!(s, "beta1 = {}", o.beta1);
        let _ = writeln!(s, "beta2 = {}", o.beta2);
        let _ = writeln!(s, "eps = {}", o.eps);
        let _ = writeln!(s, "restarts = {}", o.restarts);
        let _ = writeln!(s, "init_scale = {}", o.init_scale);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_desk_scale() {
        let c = ExperimentConfig::default();
        assert_eq!(c.n_values, vec![100, 500, 2000]);
        assert_eq!(c.k_values, vec![2, 5, 10]);
        assert_eq!(c.runs, 10);
        assert_eq!(c.reference_policies, 2000);
        c.validate().unwrap();
    }

    #[test]
    fn parse_and_round_trip() {
        let text = "# demo\n[problem]\nname = zdt1\n\n[data]\nn = 50, 100  # two sizes\nepsilon = 0.1, 1.0\n\
                    [sweep]\nmethods = random, pessHVI, ehvi:4\nK = 3\nruns = 2\ntiming = false\n\
                    [optimizer]\niterations = 20\n";
        let c = ExperimentConfig::from_ini(text, Path::new("demo.ini")).unwrap();
        assert_eq!(c.problem.name, "ZDT1");
        assert_eq!(c.n_values, vec![50, 100]);
        assert_eq!(c.epsilons, vec![0.1, 1.0]);
        assert_eq!(
            c.methods,
            vec![Method::Random, Method::PessHvi, Method::Ehvi { resamples: 4 }]
        );
        assert_eq!(c.optimizer.iterations, 20);
        assert!(!c.timing);
        let again = ExperimentConfig::from_ini(&c.to_ini(), Path::new("echo.ini")).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = ExperimentConfig::from_ini("[sweep]\nruns = 2\nbogus = 1\n", Path::new("x.ini")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = ExperimentConfig::from_ini("runs = 2\n", Path::new("x.ini")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = ExperimentConfig::from_ini("[sweep\n", Path::new("x.ini")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(ExperimentConfig::from_ini("[sweep]\nruns = 0\n", Path::new("x.ini")).is_err());
        assert!(ExperimentConfig::from_ini("[problem]\nm = 3\n", Path::new("x.ini")).is_err());
    }

    #[test]
    fn overrides() {
        let mut c = ExperimentConfig::default();
        c.apply_overrides(&["sweep.runs=3".into(), "data.n = 7".into()])
            .unwrap();
        assert_eq!((c.runs, c.n_values.clone()), (3, vec![7]));
        assert!(c.apply_overrides(&["sweep.runs".into()]).is_err());
        assert!(c.apply_overrides(&["nope.key=1".into()]).is_err());
    }

    #[test]
    fn method_names() {
        for s in ["random", "meanHVI", "pessHVI", "ehvi:16"] {
            assert_eq!(s.parse::<Method>().unwrap().to_string(), s);
        }
        assert_eq!("PESSHVI".parse::<Method>().unwrap(), Method::PessHvi);
        assert!("ehvi:0".parse::<Method>().is_err());
    }
}
