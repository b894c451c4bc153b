//! Sweeps over (method, n, K, ε, run): log data, optimize, score the solution's true hypervolume
//! against that of a pool of random policies. Results go to CSV in cell order; [`emit_plot`]
//! renders a CSV as an SVG line chart.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;

use crate::benchmarks::{seeded_stream, BenchmarkProblem};
use crate::config::{ExperimentConfig, Method};
use crate::error::{Error, Result};
use crate::estimators::{ConfidenceConfig, OffPolicyData};
use crate::hypervolume::{Hypervolume, HypervolumeMethod};
use crate::logged_data::LoggedDataset;
use crate::optimize::{
    build_value_model, policy_gradient_ascent, random_policy_baseline, GradientConfig, HvObjective, ObjectiveKind,
    TrueValueModel, ValueModel,
};
use crate::policy::{LoggingPolicy, PolicySet};

pub const CSV_HEADER: &str = "method,n,K,epsilon,run,recovered_hv,seconds,status";

// Independent streams under the sweep seed.
const EVAL_CONTEXT_STREAM: u64 = 11;
const REFERENCE_STREAM: u64 = 12;

/// SplitMix64 finalizer, used to fold cell coordinates into one seed.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic seed for a tuple of coordinates.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0x6a09_e667_f3bc_c909, |acc, &p| mix(acc ^ mix(p)))
}

fn str_seed(s: &str) -> u64 {
    // FNV-1a
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
    })
}

/// True values on a fixed context set, plus the reference hypervolume of a random pool.
pub struct Evaluator {
    problem: BenchmarkProblem,
    model: TrueValueModel,
    hv: Hypervolume,
    reference: f64,
}

impl Evaluator {
    /// Draws the evaluation contexts and the random reference pool from `seed`.
    pub fn new(problem: BenchmarkProblem, eval_contexts: usize, reference_policies: usize, seed: u64) -> Result<Self> {
        let contexts = problem.sample_contexts(eval_contexts, &mut seeded_stream(seed, EVAL_CONTEXT_STREAM));
        let model = TrueValueModel::new(&problem, &contexts)?;
        let hv = Hypervolume::new(
            HypervolumeMethod::default_for(problem.num_objectives()),
            problem.num_objectives(),
            seed,
        )?;
        let reference = reference_hypervolume(&model, &hv, reference_policies, seed)?;
        Ok(Evaluator {
            problem,
            model,
            hv,
            reference,
        })
    }

    pub fn problem(&self) -> &BenchmarkProblem {
        &self.problem
    }

    pub fn reference(&self) -> f64 {
        self.reference
    }

    pub fn true_values(&self, policies: &PolicySet) -> Result<Vec<Vec<f64>>> {
        policies
            .iter()
            .map(|p| Ok(self.model.evaluate(&p.theta, false)?.values))
            .collect()
    }

    /// `vol(solution, V) / reference`; may exceed 1 when the solution beats the random pool.
    pub fn recovered_hypervolume(&self, solution: &PolicySet) -> Result<f64> {
        recovered_hypervolume(&self.true_values(solution)?, &self.hv, self.reference)
    }
}

/// Hypervolume of the true values of `count` random unit-ball policies.
pub fn reference_hypervolume(model: &TrueValueModel, hv: &Hypervolume, count: usize, seed: u64) -> Result<f64> {
    if count == 0 {
        return Err(Error::config("the reference pool needs at least one policy"));
    }
    let pool = random_policy_baseline(count, model.dim(), &mut seeded_stream(seed, REFERENCE_STREAM))?;
    let values = pool
        .policies()
        .par_iter()
        .map(|p| Ok(model.evaluate(&p.theta, false)?.values))
        .collect::<Result<Vec<_>>>()?;
    pareto_hypervolume(&values, hv)
}

/// Hypervolume of the non-dominated subset, so that inclusion-exclusion stays within its limit
/// on large pools of one-objective values.
fn pareto_hypervolume(values: &[Vec<f64>], hv: &Hypervolume) -> Result<f64> {
    if hv.method() == HypervolumeMethod::InclusionExclusion {
        let flags = crate::policy::pareto_flags(values);
        let mut front: Vec<Vec<f64>> = Vec::new();
        for (v, keep) in values.iter().zip(flags) {
            if keep && !front.contains(v) {
                front.push(v.clone());
            }
        }
        return hv.value(&front);
    }
    hv.value(values)
}

pub fn recovered_hypervolume(values: &[Vec<f64>], hv: &Hypervolume, reference: f64) -> Result<f64> {
    if !(reference > 0.0) {
        return Err(Error::Validation(format!(
            "reference hypervolume is {reference}; the problem is degenerate"
        )));
    }
    Ok(pareto_hypervolume(values, hv)? / reference)
}

/// One sweep cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub method: Method,
    pub n: usize,
    pub k: usize,
    pub epsilon: f64,
    pub run: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: String,
    pub n: usize,
    pub k: usize,
    pub epsilon: f64,
    pub run: usize,
    /// NaN when the cell failed.
    pub recovered_hv: f64,
    pub seconds: f64,
    /// `ok`, or `error:` and a message.
    pub status: String,
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.3},{}",
            self.method,
            self.n,
            self.k,
            self.epsilon,
            self.run,
            self.recovered_hv,
            self.seconds,
            self.status.replace([',', '\n'], ";")
        )
    }

    pub fn from_csv(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.splitn(8, ',').collect();
        if f.len() != 8 {
            return Err(Error::Data(format!("expected 8 CSV fields, got {}: `{line}`", f.len())));
        }
        let num = |i: usize| -> Result<f64> {
            f[i].parse::<f64>()
                .map_err(|_| Error::Data(format!("bad number `{}` in `{line}`", f[i])))
        };
        let int = |i: usize| -> Result<usize> {
            f[i].parse::<usize>()
                .map_err(|_| Error::Data(format!("bad integer `{}` in `{line}`", f[i])))
        };
        Ok(ResultRow {
            method: f[0].to_string(),
            n: int(1)?,
            k: int(2)?,
            epsilon: num(3)?,
            run: int(4)?,
            recovered_hv: num(5)?,
            seconds: num(6)?,
            status: f[7].to_string(),
        })
    }
}

/// All cells in output order: method, then n, K, ε, run.
pub fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &method in &cfg.methods {
        for &n in &cfg.n_values {
            for &k in &cfg.k_values {
                for &epsilon in &cfg.epsilons {
                    for run in 0..cfg.runs {
                        out.push(Cell {
                            method,
                            n,
                            k,
                            epsilon,
                            run,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Seed of the logged data of a cell; shared by all methods and K at the same (n, ε, run).
pub fn data_seed(cfg: &ExperimentConfig, cell: &Cell) -> u64 {
    derive_seed(&[cfg.seed, 1, cell.n as u64, cell.epsilon.to_bits(), cell.run as u64])
}

/// Seed of the optimizer (restarts, bootstrap, random policies) of a cell.
pub fn optimizer_seed(cfg: &ExperimentConfig, cell: &Cell) -> u64 {
    derive_seed(&[
        cfg.seed,
        2,
        str_seed(&cell.method.to_string()),
        cell.n as u64,
        cell.k as u64,
        cell.epsilon.to_bits(),
        cell.run as u64,
    ])
}

/// Produces the solution of one cell.
pub fn solve_cell(cfg: &ExperimentConfig, problem: &BenchmarkProblem, cell: &Cell) -> Result<PolicySet> {
    let opt_seed = optimizer_seed(cfg, cell);
    let dim = problem.feature_dim();
    let kind = match cell.method {
        Method::Random => {
            return random_policy_baseline(cell.k, dim, &mut seeded_stream(opt_seed, 0));
        }
        Method::MeanHvi => ObjectiveKind::Mean,
        Method::PessHvi => ObjectiveKind::Pessimistic,
        Method::Ehvi { resamples } => ObjectiveKind::Ehvi { resamples },
    };
    let logging = LoggingPolicy::new(problem.clone(), cell.epsilon)?;
    let ds = LoggedDataset::generate(&cfg.problem, &logging, cell.n, cfg.sigma, data_seed(cfg, cell))?;
    let data = OffPolicyData::new(&logging, &ds)?;
    let confidence = ConfidenceConfig::new(cfg.beta, cfg.sigma)?;
    let model = build_value_model(kind, problem, &data, confidence, opt_seed)?;
    let hv = Hypervolume::new(cfg.hv_method, problem.num_objectives(), opt_seed)?;
    let objective = HvObjective::new(model.as_ref(), hv, cell.k)?;
    let gcfg = GradientConfig {
        seed: opt_seed,
        ..cfg.optimizer
    };
    Ok(policy_gradient_ascent(&objective, None, &gcfg)?.policies)
}

/// Runs one cell and records either its score or its error.
pub fn run_cell(cfg: &ExperimentConfig, eval: &Evaluator, cell: &Cell) -> ResultRow {
    let start = Instant::now();
    let outcome = solve_cell(cfg, eval.problem(), cell).and_then(|s| eval.recovered_hypervolume(&s));
    let seconds = if cfg.timing { start.elapsed().as_secs_f64() } else { 0.0 };
    let (recovered_hv, status) = match outcome {
        Ok(v) => (v, "ok".to_string()),
        Err(e) => (f64::NAN, format!("error: {e}")),
    };
    ResultRow {
        method: cell.method.to_string(),
        n: cell.n,
        k: cell.k,
        epsilon: cell.epsilon,
        run: cell.run,
        recovered_hv,
        seconds,
        status,
    }
}

/// The evaluator a sweep scores against: problem, evaluation contexts and reference from the
/// config's seeds.
pub fn sweep_evaluator(cfg: &ExperimentConfig) -> Result<Evaluator> {
    Evaluator::new(
        cfg.problem.build()?,
        cfg.eval_contexts,
        cfg.reference_policies,
        cfg.seed,
    )
}

/// Runs every cell in a worker pool. Rows are written to `csv` (if given) in cell order as soon
/// as all earlier cells are done, and returned in the same order.
pub fn run_sweep(cfg: &ExperimentConfig, csv: Option<&Path>) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let eval = sweep_evaluator(cfg)?;
    let cells = cells(cfg);
    let mut writer = match csv {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
            let mut w = BufWriter::new(file);
            writeln!(w, "{CSV_HEADER}").map_err(|e| Error::io(path, e))?;
            w.flush().map_err(|e| Error::io(path, e))?;
            Some((w, path))
        }
        None => None,
    };
    let (tx, rx) = mpsc::channel::<(usize, ResultRow)>();
    let total = cells.len();
    std::thread::scope(|scope| {
        let collector = scope.spawn(move || -> Result<Vec<ResultRow>> {
            let mut pending = BTreeMap::new();
            let mut rows = Vec::with_capacity(total);
            for (idx, row) in rx {
                pending.insert(idx, row);
                while let Some(row) = pending.remove(&rows.len()) {
                    if let Some((w, path)) = writer.as_mut() {
                        writeln!(w, "{}", row.to_csv())
                            .and_then(|_| w.flush())
                            .map_err(|e| Error::io(*path, e))?;
                    }
                    rows.push(row);
                }
            }
            Ok(rows)
        });
        cells.par_iter().enumerate().for_each_with(tx, |tx, (idx, cell)| {
            let _ = tx.send((idx, run_cell(cfg, &eval, cell)));
        });
        collector.join().expect("CSV writer thread panicked")
    })
}

/// Reads a results CSV written by [`run_sweep`].
pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::Data(format!("{} lacks the results header", path.display()))),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(ResultRow::from_csv)
        .collect()
}

/// Which column is the x axis of a plot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XAxis {
    N,
    K,
    Epsilon,
}

impl std::str::FromStr for XAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "n" => Ok(XAxis::N),
            "K" | "k" => Ok(XAxis::K),
            "epsilon" => Ok(XAxis::Epsilon),
            other => Err(Error::config(format!("unknown x axis `{other}` (n, K, epsilon)"))),
        }
    }
}

impl XAxis {
    fn of(self, row: &ResultRow) -> f64 {
        match self {
            XAxis::N => row.n as f64,
            XAxis::K => row.k as f64,
            XAxis::Epsilon => row.epsilon,
        }
    }

    fn label(self) -> &'static str {
        match self {
            XAxis::N => "logged dataset size n",
            XAxis::K => "number of policies K",
            XAxis::Epsilon => "logging exploration epsilon",
        }
    }
}

/// Mean and standard error of one method at one x value.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub x: f64,
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

/// Mean and standard error of a sample; the error is 0 for fewer than two values.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Successful rows grouped per method (first-appearance order) and x value (ascending).
pub fn summarize(rows: &[ResultRow], axis: XAxis) -> Vec<(String, Vec<SeriesPoint>)> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, BTreeMap<u64, Vec<f64>>> = HashMap::new();
    for r in rows.iter().filter(|r| r.is_ok()) {
        if !order.contains(&r.method) {
            order.push(r.method.clone());
        }
        let x = axis.of(r);
        groups
            .entry(r.method.clone())
            .or_default()
            // bit patterns of non-negative floats sort like the floats
            .entry(x.to_bits())
            .or_default()
            .push(r.recovered_hv);
    }
    order
        .into_iter()
        .map(|method| {
            let points = groups[&method]
                .iter()
                .map(|(&bits, vals)| {
                    let (mean, stderr) = mean_stderr(vals);
                    SeriesPoint {
                        x: f64::from_bits(bits),
                        mean,
                        stderr,
                        count: vals.len(),
                    }
                })
                .collect();
            (method, points)
        })
        .collect()
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Renders the CSV at `csv_path` as an SVG line chart of recovered hypervolume against `axis`.
pub fn emit_plot(csv_path: &Path, axis: XAxis, out_svg: &Path) -> Result<()> {
    let rows = read_csv(csv_path)?;
    let svg = render_svg(&rows, axis)?;
    fs::write(out_svg, svg).map_err(|e| Error::io(out_svg, e))
}

pub fn render_svg(rows: &[ResultRow], axis: XAxis) -> Result<String> {
    let series = summarize(rows, axis);
    if series.is_empty() {
        return Err(Error::Data("no successful rows to plot".into()));
    }
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 150.0, 30.0, 60.0);
    let log_x = axis == XAxis::N && series.iter().flat_map(|(_, p)| p).all(|p| p.x > 0.0);
    let tx = |x: f64| if log_x { x.log10() } else { x };
    let all = || series.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1) = all().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
        (a.min(tx(p.x)), b.max(tx(p.x)))
    });
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let y_hi = all().map(|p| p.mean + p.stderr).fold(0.0, f64::max).max(1e-9) * 1.1;
    let px = |x: f64| left + (tx(x) - x0) / (x1 - x0) * (w - left - right);
    let py = |y: f64| h - bottom - y / y_hi * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let (ax0, ax1, ay0, ay1) = (left, w - right, h - bottom, top);
    let _ = writeln!(
        s,
        r#"<path class="axes" d="M{ax0:.1},{ay1:.1} L{ax0:.1},{ay0:.1} L{ax1:.1},{ay0:.1}" stroke="black" fill="none"/>"#
    );
    let mut xs: Vec<f64> = all().map(|p| p.x).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    for x in &xs {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            px(*x),
            ay0 + 18.0,
            x
        );
    }
    for i in 0..=4 {
        let y = y_hi * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.2}</text>"#,
            ax0 - 6.0,
            py(y) + 4.0,
            y
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (ax0 + ax1) / 2.0,
        h - 15.0,
        axis.label()
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">recovered hypervolume</text>"#,
        (ay0 + ay1) / 2.0,
        (ay0 + ay1) / 2.0
    );
    for (idx, (method, points)) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        if points.len() > 1 {
            let coords: Vec<String> = points
                .iter()
                .map(|p| format!("{:.1},{:.1}", px(p.x), py(p.mean)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline class="series" points="{}" stroke="{color}" fill="none" stroke-width="2"/>"#,
                coords.join(" ")
            );
        }
        for p in points {
            let (cx, lo, hi) = (px(p.x), py(p.mean - p.stderr), py(p.mean + p.stderr));
            let _ = writeln!(
                s,
                r#"<path class="whisker" d="M{cx:.1},{lo:.1} L{cx:.1},{hi:.1} M{:.1},{lo:.1} L{:.1},{lo:.1} M{:.1},{hi:.1} L{:.1},{hi:.1}" stroke="{color}"/>"#,
                cx - 4.0,
                cx + 4.0,
                cx - 4.0,
                cx + 4.0
            );
            let _ = writeln!(
                s,
                r#"<circle class="marker" cx="{cx:.1}" cy="{:.1}" r="3.5" fill="{color}"/>"#,
                py(p.mean)
            );
        }
        let ly = top + 10.0 + 18.0 * idx as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{method}</text>"#,
            ax1 + 15.0,
            ax1 + 35.0,
            ax1 + 40.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
