use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use offmoo::benchmarks::Normalization;
use offmoo::estimators::{estimate, ConfidenceConfig, EstimateOptions, EstimatorKind, OffPolicyData};
use offmoo::experiment::{emit_plot, run_sweep, XAxis};
use offmoo::hypervolume::{Hypervolume, HypervolumeMethod};
use offmoo::optimize::{build_value_model, policy_gradient_ascent, GradientConfig, HvObjective, ObjectiveKind};
use offmoo::verification::{format_table, run_suite, SuiteConfig};
use offmoo::{ExperimentConfig, LoggedDataset, LoggingPolicy, PolicySet, ProblemSpec};

#[derive(Parser)]
#[command(name = "offmoo", version, about = "Offline multi-objective policy optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Log a dataset with the ε-greedy Pareto logging policy.
    Generate(GenerateArgs),
    /// Estimate the per-objective values of a policy set from logged data.
    Estimate(EstimateArgs),
    /// Optimize K policies for the hypervolume of their estimated values.
    Optimize(OptimizeArgs),
    /// Run the randomized verification suite and print a pass/fail table.
    Verify(VerifyArgs),
    /// Run a full experiment sweep from a config file.
    Sweep(SweepArgs),
    /// Plot a sweep's CSV as an SVG line chart.
    Plot(PlotArgs),
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long, default_value = "DTLZ2")]
    problem: String,
    #[arg(long, default_value_t = 6)]
    d: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 20)]
    num_actions: usize,
    #[arg(long, default_value_t = 0)]
    problem_seed: u64,
    /// `auto` or `lo:hi,lo:hi,...` per objective.
    #[arg(long, default_value = "auto")]
    normalization: String,
}

impl ProblemArgs {
    fn spec(&self) -> anyhow::Result<ProblemSpec> {
        Ok(ProblemSpec {
            num_actions: self.num_actions,
            seed: self.problem_seed,
            normalization: self.normalization.parse::<Normalization>()?,
            ..ProblemSpec::new(&self.problem, self.d, self.m)
        })
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    policy_file: PathBuf,
    #[arg(long, default_value = "ips")]
    estimator: String,
    #[arg(long, default_value_t = 0.2)]
    beta: f64,
    /// Clipping level of the clipped estimator.
    #[arg(long = "clip-M", default_value_t = f64::INFINITY)]
    clip_m: f64,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    data: PathBuf,
    /// `true`, `mean`, `pess` or `ehvi:<N>`.
    #[arg(long, default_value = "pess")]
    objective: String,
    #[arg(long = "K", default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 500)]
    iters: usize,
    #[arg(long, default_value_t = 0.05)]
    lr: f64,
    #[arg(long, default_value_t = 3)]
    restarts: usize,
    #[arg(long, default_value_t = 0.01)]
    init_scale: f64,
    #[arg(long, default_value_t = 0.2)]
    beta: f64,
    /// Defaults to exact2d for two objectives and scalarized:2000 otherwise.
    #[arg(long)]
    hv_method: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Smaller instance counts for a fast smoke run.
    #[arg(long)]
    quick: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config entry, e.g. `--set sweep.runs=3`. Repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory; overrides `sweep.output`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    csv: PathBuf,
    /// `n`, `K` or `epsilon`.
    #[arg(long, default_value = "n")]
    x: String,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Returns whether every check or cell succeeded.
fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Generate(a) => {
            let spec = a.problem.spec()?;
            let logging = LoggingPolicy::new(spec.build()?, a.epsilon)?;
            let ds = LoggedDataset::generate(&spec, &logging, a.n, a.sigma, a.seed)?;
            ds.save(&a.out)?;
            println!("wrote {} records to {}", ds.len(), a.out.display());
        }
        Command::Estimate(a) => {
            let ds = LoggedDataset::load(&a.data)?;
            let (data, _) = OffPolicyData::from_dataset(&ds)?;
            let policies = PolicySet::load(&a.policy_file)?;
            let kind: EstimatorKind = a.estimator.parse()?;
            if kind == EstimatorKind::True {
                bail!("the true value is not an off-policy estimator");
            }
            let opts = EstimateOptions {
                confidence: ConfidenceConfig::new(a.beta, data.sigma)?,
                clip: a.clip_m,
            };
            println!("policy,objective,value,width");
            for (p, policy) in policies.iter().enumerate() {
                let probs = data.softmax_probs(policy)?;
                let est = estimate(kind, &data, &probs, &opts)?;
                for (i, (v, c)) in est.values.iter().zip(&est.widths).enumerate() {
                    println!("{p},{i},{v},{c}");
                }
            }
        }
        Command::Optimize(a) => {
            let ds = LoggedDataset::load(&a.data)?;
            let (data, logging) = OffPolicyData::from_dataset(&ds)?;
            let problem = logging.problem();
            let kind: ObjectiveKind = a.objective.parse()?;
            let m = problem.num_objectives();
            let method = match &a.hv_method {
                Some(s) => s.parse()?,
                None => HypervolumeMethod::default_for(m),
            };
            let confidence = ConfidenceConfig::new(a.beta, data.sigma)?;
            let model = build_value_model(kind, problem, &data, confidence, a.seed)?;
            let objective = HvObjective::new(model.as_ref(), Hypervolume::new(method, m, a.seed)?, a.k)?;
            let config = GradientConfig {
                iterations: a.iters,
                learning_rate: a.lr,
                restarts: a.restarts,
                init_scale: a.init_scale,
                seed: a.seed,
                ..GradientConfig::default()
            };
            let result = policy_gradient_ascent(&objective, None, &config)?;
            result.policies.save(&a.out)?;
            println!("objective {} {}", kind, result.value);
            println!("wrote {} policies to {}", result.policies.len(), a.out.display());
        }
        Command::Verify(a) => {
            let cfg = if a.quick {
                SuiteConfig {
                    hv_error_instances: 100,
                    bound_instances: 50,
                    greedy_instances: 20,
                    coverage_trials: 1000,
                    coverage_policies: 2,
                    coverage_n: 100,
                    seed: a.seed,
                }
            } else {
                SuiteConfig {
                    seed: a.seed,
                    ..SuiteConfig::default()
                }
            };
            let outcomes = run_suite(&cfg)?;
            print!("{}", format_table(&outcomes));
            return Ok(outcomes.iter().all(|o| o.passed));
        }
        Command::Sweep(a) => {
            let mut cfg = match &a.config {
                Some(p) => ExperimentConfig::load(p)?,
                None => ExperimentConfig::default(),
            };
            cfg.apply_overrides(&a.overrides)?;
            if let Some(out) = a.out {
                cfg.output = out;
            }
            fs::create_dir_all(&cfg.output).with_context(|| format!("creating {}", cfg.output.display()))?;
            fs::write(cfg.output.join("config.ini"), cfg.to_ini()).context("writing the effective config")?;
            let csv = cfg.output.join("results.csv");
            let rows = run_sweep(&cfg, Some(&csv))?;
            let failed = rows.iter().filter(|r| !r.is_ok()).count();
            println!("wrote {} rows to {} ({failed} failed)", rows.len(), csv.display());
            return Ok(failed == 0);
        }
        Command::Plot(a) => {
            let axis: XAxis = a.x.parse()?;
            emit_plot(&a.csv, axis, &a.out)?;
            println!("wrote {}", a.out.display());
        }
    }
    Ok(true)
}
