//! Logged bandit feedback `D = {(x_t, A_t, Y_t)}` collected by the logging policy.
//!
//! File format: one metadata line
//!
//! ```text
//! # offmoo-dataset problem=DTLZ2 d=6 m=2 num_actions=20 problem_seed=0 normalization=auto n=500 sigma=1 epsilon=0.1 seed=7
//! ```
//!
//! followed by one CSV row per record: context entries, action index, propensity, reward entries.
//! Floats are written in shortest round-trip form, so `load(save(ds)) == ds` exactly.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::benchmarks::{Normalization, ProblemSpec};
use crate::error::{Error, Result};
use crate::policy::LoggingPolicy;

const MAGIC: &str = "# offmoo-dataset";

#[derive(Debug, Clone, PartialEq)]
pub struct LoggedRecord {
    pub x: Vec<f64>,
    pub a_index: usize,
    pub y: Vec<f64>,
    /// `π₀(A_t | x_t)`.
    pub propensity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    pub problem: ProblemSpec,
    pub sigma: f64,
    pub epsilon: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoggedDataset {
    pub meta: DatasetMeta,
    pub records: Vec<LoggedRecord>,
}

/// Draws an index from a probability vector by inverse CDF.
pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding gap above the cumulative sum
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// Logs one interaction: samples `A ~ π₀(·|x)` and `Y = r(x, A) + σ·N(0, I)`.
pub(crate) fn log_interaction<R: Rng + ?Sized>(
    x: Vec<f64>,
    logging_probs: &[f64],
    rewards: &[Vec<f64>],
    sigma: f64,
    rng: &mut R,
) -> LoggedRecord {
    let a_index = sample_index(logging_probs, rng);
    let y = rewards[a_index]
        .iter()
        .map(|&r| {
            let z: f64 = rng.sample(StandardNormal);
            r + sigma * z
        })
        .collect();
    LoggedRecord {
        x,
        a_index,
        y,
        propensity: logging_probs[a_index],
    }
}

impl LoggedDataset {
    /// `n` interactions with uniform contexts, deterministic in `seed`.
    ///
    /// `problem` must describe the problem the logging policy was built on.
    pub fn generate(problem: &ProblemSpec, logging: &LoggingPolicy, n: usize, sigma: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("a logged dataset needs n >= 1"));
        }
        check_sigma(sigma)?;
        let bandit = logging.problem();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let records = (0..n)
            .map(|_| {
                let x = bandit.sample_context(&mut rng);
                let rewards = bandit.action_rewards(&x);
                let probs = logging.probabilities(&x);
                log_interaction(x, &probs, &rewards, sigma, &mut rng)
            })
            .collect();
        Ok(LoggedDataset {
            meta: DatasetMeta {
                problem: problem.clone(),
                sigma,
                epsilon: logging.epsilon(),
                seed,
            },
            records,
        })
    }

    /// Logs one interaction per given context; used when the contexts are held fixed.
    pub fn generate_with_contexts<R: Rng + ?Sized>(
        problem: &ProblemSpec,
        logging: &LoggingPolicy,
        contexts: &[Vec<f64>],
        sigma: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if contexts.is_empty() {
            return Err(Error::config("a logged dataset needs n >= 1"));
        }
        check_sigma(sigma)?;
        let bandit = logging.problem();
        let records = contexts
            .iter()
            .map(|x| {
                let rewards = bandit.action_rewards(x);
                let probs = logging.probabilities(x);
                log_interaction(x.clone(), &probs, &rewards, sigma, rng)
            })
            .collect();
        Ok(LoggedDataset {
            meta: DatasetMeta {
                problem: problem.clone(),
                sigma,
                epsilon: logging.epsilon(),
                seed: 0,
            },
            records,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn contexts(&self) -> Vec<Vec<f64>> {
        self.records.iter().map(|r| r.x.clone()).collect()
    }

    pub fn to_text(&self) -> String {
        let p = &self.meta.problem;
        let mut s = format!(
            "{MAGIC} problem={} d={} m={} num_actions={} problem_seed={} normalization={} n={} sigma={:?} epsilon={:?} seed={}\n",
            p.name,
            p.d,
            p.m,
            p.num_actions,
            p.seed,
            p.normalization,
            self.records.len(),
            self.meta.sigma,
            self.meta.epsilon,
            self.meta.seed,
        );
        for r in &self.records {
            let mut fields: Vec<String> = r.x.iter().map(|v| format!("{v:?}")).collect();
            fields.push(r.a_index.to_string());
            fields.push(format!("{:?}", r.propensity));
            fields.extend(r.y.iter().map(|v| format!("{v:?}")));
            let _ = writeln!(s, "{}", fields.join(","));
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        LoggedDataset::from_text(&text, path)
    }

    pub fn from_text(text: &str, path: &Path) -> Result<Self> {
        let parse_err = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let Some((_, header)) = lines.next() else {
            return Err(Error::Validation(format!(
                "{}: empty dataset file, need at least one record",
                path.display()
            )));
        };
        let header_line = 1;
        let fields = header
            .strip_prefix(MAGIC)
            .ok_or_else(|| parse_err(header_line, format!("expected `{MAGIC}` header")))?;
        let mut kv = HashMap::new();
        for tok in fields.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| parse_err(header_line, format!("bad header field `{tok}`")))?;
            kv.insert(k, v);
        }
        let get = |key: &str| -> Result<&str> {
            kv.get(key)
                .copied()
                .ok_or_else(|| parse_err(header_line, format!("header is missing `{key}`")))
        };
        let num = |key: &str| -> Result<usize> {
            get(key)?
                .parse()
                .map_err(|e| parse_err(header_line, format!("bad `{key}`: {e}")))
        };
        let real = |key: &str| -> Result<f64> {
            get(key)?
                .parse()
                .map_err(|e| parse_err(header_line, format!("bad `{key}`: {e}")))
        };
        let normalization: Normalization = get("normalization")?
            .parse()
            .map_err(|e: Error| parse_err(header_line, e.to_string()))?;
        let problem = ProblemSpec {
            name: get("problem")?.to_string(),
            d: num("d")?,
            m: num("m")?,
            num_actions: num("num_actions")?,
            seed: get("problem_seed")?
                .parse()
                .map_err(|e| parse_err(header_line, format!("bad `problem_seed`: {e}")))?,
            normalization,
        };
        let n = num("n")?;
        let meta = DatasetMeta {
            sigma: real("sigma")?,
            epsilon: real("epsilon")?,
            seed: get("seed")?
                .parse()
                .map_err(|e| parse_err(header_line, format!("bad `seed`: {e}")))?,
            problem,
        };

        let ctx = meta.problem.d / 2;
        let m = meta.problem.m;
        let width = ctx + 2 + m;
        let mut records = Vec::with_capacity(n);
        for (i, line) in lines {
            let line_no = i + 1;
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != width {
                return Err(parse_err(
                    line_no,
                    format!(
                        "expected {width} columns (context {ctx}, action, propensity, rewards {m}), found {}",
                        cols.len()
                    ),
                ));
            }
            let real_at = |j: usize| -> Result<f64> {
                cols[j]
                    .parse::<f64>()
                    .map_err(|e| parse_err(line_no, format!("column {}: {e}", j + 1)))
            };
            let x = (0..ctx).map(real_at).collect::<Result<Vec<_>>>()?;
            let a_index: usize = cols[ctx]
                .parse()
                .map_err(|e| parse_err(line_no, format!("action index: {e}")))?;
            let propensity = real_at(ctx + 1)?;
            let y = (ctx + 2..width).map(real_at).collect::<Result<Vec<_>>>()?;
            records.push(LoggedRecord {
                x,
                a_index,
                y,
                propensity,
            });
        }
        let ds = LoggedDataset { meta, records };
        ds.validate(Some(n))?;
        Ok(ds)
    }

    /// Checks record invariants and, if given, the record count declared in the header.
    pub fn validate(&self, declared_n: Option<usize>) -> Result<()> {
        if self.records.is_empty() {
            return Err(Error::Validation("dataset has no records (n >= 1 required)".into()));
        }
        if let Some(n) = declared_n {
            if n != self.records.len() {
                return Err(Error::Validation(format!(
                    "header declares n={n} but {} records follow",
                    self.records.len()
                )));
            }
        }
        let p = &self.meta.problem;
        for (t, r) in self.records.iter().enumerate() {
            if r.a_index >= p.num_actions {
                return Err(Error::Validation(format!(
                    "record {t}: action index {} out of range for {} actions",
                    r.a_index, p.num_actions
                )));
            }
            if !(r.propensity > 0.0 && r.propensity <= 1.0) {
                return Err(Error::Validation(format!(
                    "record {t}: propensity {} outside (0, 1]",
                    r.propensity
                )));
            }
            if r.x.len() != p.d / 2 || r.y.len() != p.m {
                return Err(Error::Validation(format!("record {t}: dimension mismatch")));
            }
        }
        Ok(())
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::config(format!("sigma must be finite and >= 0, got {sigma}")));
    }
    Ok(())
}
