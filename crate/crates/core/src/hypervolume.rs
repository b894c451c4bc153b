//! Hypervolume indicator of a finite point set in `[0,1]^m` (maximization, reference `a`).
//!
//! Four algorithms:
//! - [`hv_exact_2d`]: sort-and-sweep for two objectives, `O(K log K)`.
//! - [`hv_inclusion_exclusion`]: signed sum over all non-empty subsets, `O(2^K m)`.
//! - [`hv_scalarized`]: random hypervolume scalarization over directions on the positive orthant.
//! - [`hv_monte_carlo`]: fraction of uniform samples dominated by the set, a test oracle.
//!
//! The exact-2D, inclusion-exclusion and scalarized variants also return (sub)gradients with
//! respect to every point coordinate; these are piecewise-linear/polynomial in the points.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Largest set size accepted by the inclusion-exclusion formula.
pub const MAX_INCLUSION_EXCLUSION_POINTS: usize = 20;

/// Points and the reference corner of the dominated region.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontPoints {
    pub points: Vec<Vec<f64>>,
    pub reference: Vec<f64>,
}

impl FrontPoints {
    /// Points measured from the origin. An empty list has no dimension and zero volume.
    pub fn new(points: Vec<Vec<f64>>) -> Self {
        let m = points.first().map_or(0, Vec::len);
        FrontPoints {
            points,
            reference: vec![0.0; m],
        }
    }

    pub fn with_reference(points: Vec<Vec<f64>>, reference: Vec<f64>) -> Self {
        FrontPoints { points, reference }
    }

    pub fn m(&self) -> usize {
        self.reference.len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn validate(&self) -> Result<()> {
        let m = self.m();
        for p in &self.points {
            if p.len() != m {
                return Err(Error::Method(format!(
                    "point of dimension {} in an {m}-objective set",
                    p.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!("non-finite point {p:?}")));
            }
        }
        Ok(())
    }

    /// Coordinates relative to the reference, floored at zero.
    fn shifted(&self) -> Vec<Vec<f64>> {
        self.points
            .iter()
            .map(|p| p.iter().zip(&self.reference).map(|(v, a)| (v - a).max(0.0)).collect())
            .collect()
    }

    /// Zeroes gradient entries of coordinates that sit at or below the reference.
    fn mask_gradient(&self, grad: &mut [Vec<f64>]) {
        for (g, p) in grad.iter_mut().zip(&self.points) {
            for ((gi, v), a) in g.iter_mut().zip(p).zip(&self.reference) {
                if v <= a {
                    *gi = 0.0;
                }
            }
        }
    }
}

/// Exact two-objective hypervolume by a sweep along the first objective.
pub fn hv_exact_2d(pts: &FrontPoints) -> Result<f64> {
    Ok(exact_2d(pts, false)?.0)
}

pub fn hv_exact_2d_with_grad(pts: &FrontPoints) -> Result<(f64, Vec<Vec<f64>>)> {
    exact_2d(pts, true)
}

fn exact_2d(pts: &FrontPoints, want_grad: bool) -> Result<(f64, Vec<Vec<f64>>)> {
    if pts.m() != 2 && !pts.is_empty() {
        return Err(Error::Method(format!(
            "exact 2D hypervolume needs m = 2, got m = {}",
            pts.m()
        )));
    }
    pts.validate()?;
    let k = pts.len();
    let mut grad = if want_grad { vec![vec![0.0; 2]; k] } else { Vec::new() };
    if k == 0 {
        return Ok((0.0, grad));
    }
    let u = pts.shifted();
    // ascending first coordinate; ties by descending second, then input order
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        u[i][0]
            .total_cmp(&u[j][0])
            .then(u[j][1].total_cmp(&u[i][1]))
            .then(i.cmp(&j))
    });
    // suffix maxima of the second coordinate and the point attaining them
    let mut suffix_max = vec![(0.0, usize::MAX); k + 1];
    for pos in (0..k).rev() {
        let idx = order[pos];
        let next = suffix_max[pos + 1];
        suffix_max[pos] = if u[idx][1] >= next.0 && (u[idx][1] > next.0 || next.1 == usize::MAX) {
            (u[idx][1], idx)
        } else {
            next
        };
    }
    let mut hv = 0.0;
    let mut prev = 0.0;
    for pos in 0..k {
        let idx = order[pos];
        let width = u[idx][0] - prev;
        let (height, attained_by) = suffix_max[pos];
        hv += width * height;
        if want_grad {
            grad[idx][0] += height - suffix_max[pos + 1].0;
            grad[attained_by][1] += width;
        }
        prev = u[idx][0];
    }
    if want_grad {
        pts.mask_gradient(&mut grad);
    }
    Ok((hv, grad))
}

/// `Σ_{∅≠C⊆S} (−1)^{|C|+1} Π_i (min_{p∈C} p_i − a_i)`.
pub fn hv_inclusion_exclusion(pts: &FrontPoints) -> Result<f64> {
    Ok(inclusion_exclusion(pts, false)?.0)
}

pub fn hv_inclusion_exclusion_with_grad(pts: &FrontPoints) -> Result<(f64, Vec<Vec<f64>>)> {
    inclusion_exclusion(pts, true)
}

fn inclusion_exclusion(pts: &FrontPoints, want_grad: bool) -> Result<(f64, Vec<Vec<f64>>)> {
    if pts.len() > MAX_INCLUSION_EXCLUSION_POINTS {
        return Err(Error::Method(format!(
            "inclusion-exclusion is limited to {MAX_INCLUSION_EXCLUSION_POINTS} points, got {}",
            pts.len()
        )));
    }
    pts.validate()?;
    let u = pts.shifted();
    let m = pts.m();
    let mut grad = if want_grad {
        vec![vec![0.0; m]; u.len()]
    } else {
        Vec::new()
    };
    let mut state = SubsetWalk {
        u: &u,
        m,
        want_grad,
        total: 0.0,
        grad: &mut grad,
    };
    let mins = vec![f64::INFINITY; m];
    let argmins = vec![usize::MAX; m];
    state.visit(0, 1.0, &mins, &argmins);
    let total = state.total;
    if want_grad {
        pts.mask_gradient(&mut grad);
    }
    Ok((total, grad))
}

struct SubsetWalk<'a> {
    u: &'a [Vec<f64>],
    m: usize,
    want_grad: bool,
    total: f64,
    grad: &'a mut Vec<Vec<f64>>,
}

impl SubsetWalk<'_> {
    /// Extends the current subset (with running minima) by each later point in turn.
    fn visit(&mut self, start: usize, sign: f64, mins: &[f64], argmins: &[usize]) {
        let mut next_mins = vec![0.0; self.m];
        let mut next_arg = vec![0; self.m];
        for j in start..self.u.len() {
            for i in 0..self.m {
                if self.u[j][i] < mins[i] {
                    next_mins[i] = self.u[j][i];
                    next_arg[i] = j;
                } else {
                    next_mins[i] = mins[i];
                    next_arg[i] = argmins[i];
                }
            }
            let vol: f64 = next_mins.iter().product();
            self.total += sign * vol;
            if self.want_grad {
                for i in 0..self.m {
                    let others: f64 = (0..self.m).filter(|&l| l != i).map(|l| next_mins[l]).product();
                    self.grad[next_arg[i]][i] += sign * others;
                }
            }
            if vol > 0.0 || self.want_grad {
                let (mins, args) = (next_mins.clone(), next_arg.clone());
                self.visit(j + 1, -sign, &mins, &args);
            }
        }
    }
}

/// Scalarization directions drawn uniformly from the positive orthant of the unit sphere.
///
/// The estimate is normalized on the same directions so that the unit point `(1, …, 1)`
/// measures exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarizationDirections {
    m: usize,
    lambdas: Vec<f64>,
    anchor: f64,
}

impl ScalarizationDirections {
    pub fn sample<R: Rng + ?Sized>(m: usize, samples: usize, rng: &mut R) -> Result<Self> {
        if samples == 0 || m == 0 {
            return Err(Error::Method(
                "scalarization needs m >= 1 and at least one direction".into(),
            ));
        }
        let mut lambdas = Vec::with_capacity(samples * m);
        let mut anchor = 0.0;
        for _ in 0..samples {
            let dir = loop {
                let g: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal).abs()).collect();
                let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                if g.iter().all(|&v| v > 0.0) && norm > 0.0 {
                    break g.into_iter().map(|v| v / norm).collect::<Vec<_>>();
                }
            };
            let max = dir.iter().copied().fold(0.0, f64::max);
            anchor += max.powi(-(m as i32));
            lambdas.extend(dir);
        }
        Ok(ScalarizationDirections {
            m,
            lambdas,
            anchor: anchor / samples as f64,
        })
    }

    pub fn len(&self) -> usize {
        self.lambdas.len() / self.m
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Normalizing constant implied by these directions, an estimate of `π^{m/2} / (2^m Γ(m/2+1))`.
    pub fn normalizer(&self) -> f64 {
        1.0 / self.anchor
    }

    fn direction(&self, j: usize) -> &[f64] {
        &self.lambdas[j * self.m..(j + 1) * self.m]
    }
}

/// `s_λ(y) = min_i max{0, y_i/λ_i}^m`; returns the value root `min_i max{0, y_i/λ_i}` and its argmin.
fn scalarize_root(y: &[f64], lambda: &[f64]) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for (i, (v, l)) in y.iter().zip(lambda).enumerate() {
        let r = (v / l).max(0.0);
        if r < best.0 {
            best = (r, i);
        }
    }
    best
}

pub fn hv_scalarized(pts: &FrontPoints, dirs: &ScalarizationDirections) -> Result<f64> {
    Ok(scalarized(pts, dirs, false)?.0)
}

pub fn hv_scalarized_with_grad(pts: &FrontPoints, dirs: &ScalarizationDirections) -> Result<(f64, Vec<Vec<f64>>)> {
    scalarized(pts, dirs, true)
}

fn scalarized(pts: &FrontPoints, dirs: &ScalarizationDirections, want_grad: bool) -> Result<(f64, Vec<Vec<f64>>)> {
    pts.validate()?;
    let m = dirs.m;
    if !pts.is_empty() && pts.m() != m {
        return Err(Error::Method(format!(
            "directions are {m}-dimensional, points {}",
            pts.m()
        )));
    }
    let u = pts.shifted();
    let mut grad = if want_grad {
        vec![vec![0.0; m]; u.len()]
    } else {
        Vec::new()
    };
    if u.is_empty() {
        return Ok((0.0, grad));
    }
    let scale = 1.0 / (dirs.len() as f64 * dirs.anchor);
    let mut total = 0.0;
    for j in 0..dirs.len() {
        let lambda = dirs.direction(j);
        let mut best = (0.0, usize::MAX, 0);
        for (p, y) in u.iter().enumerate() {
            let (r, i) = scalarize_root(y, lambda);
            if r > best.0 {
                best = (r, p, i);
            }
        }
        let (r, p, i) = best;
        if p == usize::MAX {
            continue;
        }
        total += r.powi(m as i32);
        if want_grad {
            grad[p][i] += scale * m as f64 * r.powi(m as i32 - 1) / lambda[i];
        }
    }
    if want_grad {
        pts.mask_gradient(&mut grad);
    }
    Ok((total * scale, grad))
}

/// Fraction of `samples` uniform points of the box `[a, 1]^m` dominated by some point,
/// times the box volume.
pub fn hv_monte_carlo<R: Rng + ?Sized>(pts: &FrontPoints, samples: usize, rng: &mut R) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Method(
            "Monte Carlo hypervolume needs at least one sample".into(),
        ));
    }
    pts.validate()?;
    if pts.is_empty() {
        return Ok(0.0);
    }
    let m = pts.m();
    let box_volume: f64 = pts.reference.iter().map(|a| 1.0 - a).product();
    let mut y = vec![0.0; m];
    let mut hits = 0usize;
    for _ in 0..samples {
        for (yi, a) in y.iter_mut().zip(&pts.reference) {
            *yi = a + (1.0 - a) * rng.random::<f64>();
        }
        if pts.points.iter().any(|p| y.iter().zip(p).all(|(yi, pi)| yi <= pi)) {
            hits += 1;
        }
    }
    Ok(box_volume * hits as f64 / samples as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HypervolumeMethod {
    Exact2d,
    InclusionExclusion,
    Scalarized { samples: usize },
    MonteCarlo { samples: usize },
}

impl HypervolumeMethod {
    /// Exact sweep for two objectives, inclusion-exclusion for one, scalarization otherwise.
    pub fn default_for(m: usize) -> Self {
        match m {
            1 => HypervolumeMethod::InclusionExclusion,
            2 => HypervolumeMethod::Exact2d,
            _ => HypervolumeMethod::Scalarized { samples: 2000 },
        }
    }
}

impl fmt::Display for HypervolumeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HypervolumeMethod::Exact2d => f.write_str("exact2d"),
            HypervolumeMethod::InclusionExclusion => f.write_str("incl-excl"),
            HypervolumeMethod::Scalarized { samples } => write!(f, "scalarized:{samples}"),
            HypervolumeMethod::MonteCarlo { samples } => write!(f, "mc:{samples}"),
        }
    }
}

impl FromStr for HypervolumeMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let samples = |v: &str| -> Result<usize> {
            let n: usize = v
                .parse()
                .map_err(|_| Error::config(format!("bad sample count in `{s}`")))?;
            if n == 0 {
                return Err(Error::config("sample count must be >= 1"));
            }
            Ok(n)
        };
        match s.split_once(':') {
            None if s == "exact2d" => Ok(HypervolumeMethod::Exact2d),
            None if s == "incl-excl" => Ok(HypervolumeMethod::InclusionExclusion),
            Some(("scalarized", n)) => Ok(HypervolumeMethod::Scalarized { samples: samples(n)? }),
            Some(("mc", n)) => Ok(HypervolumeMethod::MonteCarlo { samples: samples(n)? }),
            _ => Err(Error::config(format!(
                "unknown hypervolume method `{s}` (exact2d, incl-excl, scalarized:<n>, mc:<n>)"
            ))),
        }
    }
}

/// A hypervolume method bound to its random state. Scalarization directions are drawn once,
/// so repeated evaluations are one deterministic function of the points.
#[derive(Debug, Clone)]
pub struct Hypervolume {
    method: HypervolumeMethod,
    m: usize,
    directions: Option<ScalarizationDirections>,
    seed: u64,
}

impl Hypervolume {
    pub fn new(method: HypervolumeMethod, m: usize, seed: u64) -> Result<Self> {
        if method == HypervolumeMethod::Exact2d && m != 2 {
            return Err(Error::Method(format!("exact2d needs m = 2, got m = {m}")));
        }
        let directions = match method {
            HypervolumeMethod::Scalarized { samples } => Some(ScalarizationDirections::sample(
                m,
                samples,
                &mut ChaCha8Rng::seed_from_u64(seed),
            )?),
            _ => None,
        };
        Ok(Hypervolume {
            method,
            m,
            directions,
            seed,
        })
    }

    pub fn method(&self) -> HypervolumeMethod {
        self.method
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Hypervolume of `points` measured from the origin.
    pub fn value(&self, points: &[Vec<f64>]) -> Result<f64> {
        let pts = self.front(points)?;
        match self.method {
            HypervolumeMethod::Exact2d => hv_exact_2d(&pts),
            HypervolumeMethod::InclusionExclusion => hv_inclusion_exclusion(&pts),
            HypervolumeMethod::Scalarized { .. } => hv_scalarized(&pts, self.directions.as_ref().expect("directions")),
            HypervolumeMethod::MonteCarlo { samples } => {
                hv_monte_carlo(&pts, samples, &mut ChaCha8Rng::seed_from_u64(self.seed))
            }
        }
    }

    /// Value and gradient with respect to every point coordinate.
    pub fn value_and_grad(&self, points: &[Vec<f64>]) -> Result<(f64, Vec<Vec<f64>>)> {
        let pts = self.front(points)?;
        match self.method {
            HypervolumeMethod::Exact2d => hv_exact_2d_with_grad(&pts),
            HypervolumeMethod::InclusionExclusion => hv_inclusion_exclusion_with_grad(&pts),
            HypervolumeMethod::Scalarized { .. } => {
                hv_scalarized_with_grad(&pts, self.directions.as_ref().expect("directions"))
            }
            HypervolumeMethod::MonteCarlo { .. } => Err(Error::Method(
                "the Monte Carlo estimate is piecewise constant and has no useful gradient".into(),
            )),
        }
    }

    fn front(&self, points: &[Vec<f64>]) -> Result<FrontPoints> {
        if let Some(p) = points.iter().find(|p| p.len() != self.m) {
            return Err(Error::Method(format!(
                "expected {}-dimensional points, got {}",
                self.m,
                p.len()
            )));
        }
        Ok(FrontPoints::with_reference(points.to_vec(), vec![0.0; self.m]))
    }
}

/// Evaluates `value_fn` on every policy and measures the resulting front.
pub fn hv_of_policies<P>(
    policies: &[P],
    mut value_fn: impl FnMut(&P) -> Result<Vec<f64>>,
    hv: &Hypervolume,
) -> Result<f64> {
    let points = policies.iter().map(&mut value_fn).collect::<Result<Vec<_>>>()?;
    hv.value(&points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(points: &[&[f64]]) -> FrontPoints {
        FrontPoints::new(points.iter().map(|p| p.to_vec()).collect())
    }

    #[test]
    fn exact_2d_examples() {
        assert_eq!(hv_exact_2d(&fp(&[&[0.5, 0.5]])).unwrap(), 0.25);
        assert!((hv_exact_2d(&fp(&[&[1.0, 0.5], &[0.5, 1.0]])).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(hv_exact_2d(&fp(&[&[0.5, 0.5], &[0.4, 0.4]])).unwrap(), 0.25);
        assert_eq!(hv_exact_2d(&fp(&[&[0.5, 0.5], &[0.5, 0.5]])).unwrap(), 0.25);
        assert_eq!(hv_exact_2d(&FrontPoints::new(vec![])).unwrap(), 0.0);
        assert!(matches!(hv_exact_2d(&fp(&[&[0.5, 0.5, 0.5]])), Err(Error::Method(_))));
    }

    #[test]
    fn exact_2d_with_reference() {
        let pts = FrontPoints::with_reference(vec![vec![0.6, 0.7]], vec![0.1, 0.2]);
        assert!((hv_exact_2d(&pts).unwrap() - 0.25).abs() < 1e-15);
        // a point below the reference contributes nothing
        let below = FrontPoints::with_reference(vec![vec![0.05, 0.7]], vec![0.1, 0.2]);
        assert_eq!(hv_exact_2d(&below).unwrap(), 0.0);
    }

    #[test]
    fn inclusion_exclusion_examples() {
        assert!((hv_inclusion_exclusion(&fp(&[&[1.0, 0.5], &[0.5, 1.0]])).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(hv_inclusion_exclusion(&fp(&[&[1.0, 1.0, 1.0]])).unwrap(), 1.0);
        // m = 1 reduces to the maximum
        assert_eq!(hv_inclusion_exclusion(&fp(&[&[0.2], &[0.7], &[0.4]])).unwrap(), 0.7);
        let many = FrontPoints::new(vec![vec![0.5, 0.5]; MAX_INCLUSION_EXCLUSION_POINTS + 1]);
        assert!(matches!(hv_inclusion_exclusion(&many), Err(Error::Method(_))));
    }

    #[test]
    fn exact_gradient_small_cases() {
        let (v, g) = hv_exact_2d_with_grad(&fp(&[&[1.0, 0.5], &[0.5, 1.0]])).unwrap();
        assert!((v - 0.75).abs() < 1e-15);
        assert_eq!(g, vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        // dominated point has zero gradient
        let (_, g) = hv_exact_2d_with_grad(&fp(&[&[0.6, 0.6], &[0.3, 0.2]])).unwrap();
        assert_eq!(g[1], vec![0.0, 0.0]);
        assert_eq!(g[0], vec![0.6, 0.6]);

        let (v2, g2) = hv_inclusion_exclusion_with_grad(&fp(&[&[1.0, 0.5], &[0.5, 1.0]])).unwrap();
        assert!((v2 - 0.75).abs() < 1e-15);
        assert_eq!(g2, vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
    }

    #[test]
    fn scalarized_anchor_and_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for m in 1..=4 {
            let dirs = ScalarizationDirections::sample(m, 7, &mut rng).unwrap();
            let unit = FrontPoints::new(vec![vec![1.0; m]]);
            assert!((hv_scalarized(&unit, &dirs).unwrap() - 1.0).abs() < 1e-12);
            let zero = FrontPoints::new(vec![vec![0.0; m]]);
            assert_eq!(hv_scalarized(&zero, &dirs).unwrap(), 0.0);
        }
        let dirs = ScalarizationDirections::sample(2, 100_000, &mut rng).unwrap();
        let v = hv_scalarized(&fp(&[&[0.5, 0.5]]), &dirs).unwrap();
        assert!((v - 0.25).abs() < 0.01);
    }

    #[test]
    fn scalarized_normalizer_matches_closed_form() {
        // Directions uniform on the sphere's positive orthant give E[max_i λ_i^{-m}] = 1/c_m with
        // c_m = π^{m/2} / (2^m Γ(m/2 + 1)).
        use std::f64::consts::PI;
        let closed = [(2, PI / 4.0), (3, PI / 6.0), (4, PI * PI / 32.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (m, c) in closed {
            let dirs = ScalarizationDirections::sample(m, 400_000, &mut rng).unwrap();
            assert!((dirs.normalizer() - c).abs() / c < 0.01, "m={m}: {}", dirs.normalizer());
        }
    }

    #[test]
    fn monte_carlo_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(hv_monte_carlo(&fp(&[&[1.0, 1.0, 1.0]]), 1000, &mut rng).unwrap(), 1.0);
        assert_eq!(hv_monte_carlo(&FrontPoints::new(vec![]), 10, &mut rng).unwrap(), 0.0);
        let v = hv_monte_carlo(&fp(&[&[0.5, 0.5]]), 1_000_000, &mut rng).unwrap();
        assert!((v - 0.25).abs() < 0.002);
        assert!(hv_monte_carlo(&fp(&[&[0.5, 0.5]]), 0, &mut rng).is_err());
    }

    #[test]
    fn method_parse_round_trip() {
        for s in ["exact2d", "incl-excl", "scalarized:500", "mc:1000000"] {
            assert_eq!(s.parse::<HypervolumeMethod>().unwrap().to_string(), s);
        }
        for bad in ["exact", "mc:0", "mc:x", "scalarized"] {
            assert!(bad.parse::<HypervolumeMethod>().is_err(), "{bad}");
        }
    }

    #[test]
    fn engine_dispatch() {
        let pts = vec![vec![0.9, 0.2], vec![0.3, 0.8]];
        let exact = Hypervolume::new(HypervolumeMethod::Exact2d, 2, 0)
            .unwrap()
            .value(&pts)
            .unwrap();
        let ie = Hypervolume::new(HypervolumeMethod::InclusionExclusion, 2, 0)
            .unwrap()
            .value(&pts)
            .unwrap();
        assert!((exact - ie).abs() < 1e-15);
        assert!(Hypervolume::new(HypervolumeMethod::Exact2d, 3, 0).is_err());
        let mc = Hypervolume::new(HypervolumeMethod::MonteCarlo { samples: 10 }, 2, 0).unwrap();
        assert!(mc.value_and_grad(&pts).is_err());
        assert!(mc.value(&[vec![0.1, 0.2, 0.3]]).is_err());
    }

    #[test]
    fn hv_of_policies_cases() {
        let hv = Hypervolume::new(HypervolumeMethod::Exact2d, 2, 0).unwrap();
        assert_eq!(hv_of_policies(&[0], |_| Ok(vec![0.5, 0.5]), &hv).unwrap(), 0.25);
        let values = [vec![0.9, 0.2], vec![0.3, 0.8]];
        let single = hv_of_policies(&[0usize, 1], |&i| Ok(values[i].clone()), &hv).unwrap();
        let dup = hv_of_policies(&[0usize, 1, 1, 0], |&i| Ok(values[i].clone()), &hv).unwrap();
        assert_eq!(single, dup);
        let shrunk = hv_of_policies(&[0usize, 1], |&i| Ok(values[i].iter().map(|v| v - 0.1).collect()), &hv).unwrap();
        assert!(shrunk <= single);
    }
}
