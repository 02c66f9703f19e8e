//! Graph metrics, horofunctions on finite windows, distance-like
//! functions and their representation by Busemann points.
//!
//! Distances become the kernel `A = -d`; a function `f` corresponds to the
//! vector `u = -f` and a horofunction `h` to the Martin point `-h`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harmonic::{CheckKind, HarmonicError, MeasureDomain, ResidualReport};
use crate::kernels::{Accumulation, KernelError, Locator, MartinInstance, Point, PointSet};
use crate::measures::{mu_min, MeasureError};
use crate::semiring::{Closure, ExtReal, Kernel, MpVector, SemiringError, StateSpace};
use crate::tail::tail_limit;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error(transparent)]
    Semiring(#[from] SemiringError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("edge `{0}`-`{1}` has non-positive weight {2}")]
    NonPositiveWeight(String, String, f64),
    #[error("`{0}` and `{1}` are in different components")]
    Disconnected(String, String),
    #[error("horofunction does not stabilize at `{0}`")]
    NonConvergent(String),
    #[error("function is not finite at `{0}`")]
    NotFinite(String),
    #[error("points are not tabulated on a common window")]
    WindowMismatch,
    #[error("every weight is +inf")]
    EmptySupport,
}

impl From<HarmonicError> for MetricError {
    fn from(e: HarmonicError) -> Self {
        MetricError::Measure(e.into())
    }
}

/// Undirected weighted graph: `{nodes: [labels], edges: [[a, b, w]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String, f64)>,
}

/// Shortest-path metric of a connected graph.
#[derive(Debug, Clone)]
pub struct MetricInstance {
    states: Arc<StateSpace>,
    d: Vec<f64>,
    adjacency: Vec<Vec<usize>>,
    basepoint: usize,
    /// States where the graph itself was cut off.
    truncated: Vec<bool>,
}

/// All-pairs distances through the max-plus closure of `-w`.
pub fn graph_metric(g: &WeightedGraph, basepoint: &str, tol: f64) -> Result<MetricInstance, MetricError> {
    let states = Arc::new(StateSpace::new(g.nodes.iter().cloned())?);
    let n = states.len();
    let mut a = Kernel::empty(states.clone());
    let mut adjacency = vec![Vec::new(); n];
    for (x, y, w) in &g.edges {
        if !w.is_finite() || *w <= 0.0 {
            return Err(MetricError::NonPositiveWeight(x.clone(), y.clone(), *w));
        }
        let (i, j) = (states.resolve(x)?, states.resolve(y)?);
        let v = a.get(i, j).oplus(ExtReal::real(-w));
        a.set(i, j, v);
        a.set(j, i, v);
        adjacency[i].push(j);
        adjacency[j].push(i);
    }
    let closure = Closure::compute(&a, tol)?;
    let star = closure.star();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let v = star.get(i, j);
            if v.is_neg_inf() {
                return Err(MetricError::Disconnected(states.label(i).into(), states.label(j).into()));
            }
            d[i * n + j] = -v.value();
        }
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
        adj.dedup();
    }
    let basepoint = states.resolve(basepoint)?;
    Ok(MetricInstance { states, d, adjacency, basepoint, truncated: vec![false; n] })
}

impl MetricInstance {
    /// Flags states where a larger ambient space was cut off.
    pub fn with_truncated(mut self, truncated: Vec<bool>) -> Self {
        assert_eq!(truncated.len(), self.n());
        self.truncated = truncated;
        self
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn d(&self, x: usize, y: usize) -> f64 {
        self.d[x * self.n() + y]
    }

    pub fn neighbours(&self, x: usize) -> &[usize] {
        &self.adjacency[x]
    }

    pub fn truncated(&self) -> &[bool] {
        &self.truncated
    }

    /// `A_xy = -d(x, y)`.
    pub fn to_kernel(&self) -> Kernel {
        Kernel::from_fn(self.states.clone(), |x, y| ExtReal::real(-self.d(x, y)))
    }

    /// Window states that touch the outside of the window or a truncated state.
    pub fn window_boundary(&self, window: &[usize]) -> Vec<usize> {
        let inside: BTreeSet<usize> = window.iter().copied().collect();
        window
            .iter()
            .copied()
            .filter(|&x| self.truncated[x] || self.adjacency[x].iter().any(|y| !inside.contains(y)))
            .collect()
    }
}

/// Per-state distance-like check outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceViolation {
    pub x: usize,
    pub t: f64,
    pub expected: f64,
    pub found: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceLikeReport {
    pub checked: usize,
    /// Pairs whose sublevel set misses the window.
    pub empty_level_sets: usize,
    /// Pairs too close to the window boundary for the equality to be judged.
    pub near_boundary: usize,
    pub violations: Vec<DistanceViolation>,
    pub tol: f64,
}

impl DistanceLikeReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `min_{y: f(y) <= t} d(x, y) = f(x) - t` for `t <= f(x)` on a window.
///
/// The inequality `>=` is checked everywhere. Equality is only judged
/// where the ball of radius `f(x) - t` around `x` stays inside the window
/// and `x` lies more than `margin` away from the window boundary. `t_grid`
/// defaults to the values taken by `f`.
pub fn is_distance_like(
    m: &MetricInstance,
    window: &[usize],
    f: &[f64],
    t_grid: Option<&[f64]>,
    margin: f64,
    tol: f64,
) -> Result<DistanceLikeReport, MetricError> {
    if f.len() != window.len() {
        return Err(MetricError::WindowMismatch);
    }
    if let Some(k) = f.iter().position(|v| !v.is_finite()) {
        return Err(MetricError::NotFinite(m.states().label(window[k]).into()));
    }
    let grid: Vec<f64> = match t_grid {
        Some(g) => g.to_vec(),
        None => {
            let mut g = f.to_vec();
            g.sort_by(f64::total_cmp);
            g.dedup_by(|a, b| (*a - *b).abs() <= tol);
            g
        }
    };
    let boundary = m.window_boundary(window);
    let to_boundary: Vec<f64> = window
        .iter()
        .map(|&x| boundary.iter().map(|&y| m.d(x, y)).fold(f64::INFINITY, f64::min))
        .collect();
    let mut report = DistanceLikeReport {
        checked: 0,
        empty_level_sets: 0,
        near_boundary: 0,
        violations: Vec::new(),
        tol,
    };
    for (k, &x) in window.iter().enumerate() {
        for &t in grid.iter().filter(|&&t| t <= f[k] + tol) {
            let found = window
                .iter()
                .zip(f)
                .filter(|(_, &fy)| fy <= t + tol)
                .map(|(&y, _)| m.d(x, y))
                .fold(f64::INFINITY, f64::min);
            if found.is_infinite() {
                report.empty_level_sets += 1;
                continue;
            }
            let expected = f[k] - t;
            let judged = to_boundary[k] > margin && to_boundary[k] >= expected - tol;
            let bad = found < expected - tol || (judged && found > expected + tol);
            if judged {
                report.checked += 1;
            } else {
                report.near_boundary += 1;
            }
            if bad {
                report.violations.push(DistanceViolation { x, t, expected, found });
            }
        }
    }
    Ok(report)
}

/// A horofunction tabulated on a window.
#[derive(Debug, Clone, PartialEq)]
pub struct HorofunctionWindow {
    pub name: String,
    pub window: Vec<usize>,
    pub h: MpVector,
    pub source_sequence: Vec<usize>,
}

impl HorofunctionWindow {
    /// Worst violation of `|h(x) - h(y)| <= d(x, y)` over the window.
    pub fn lipschitz_excess(&self, m: &MetricInstance) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, &x) in self.window.iter().enumerate() {
            for (b, &y) in self.window.iter().enumerate() {
                let diff = (self.h.get(a).value() - self.h.get(b).value()).abs();
                worst = worst.max(diff - m.d(x, y));
            }
        }
        worst
    }

    /// The corresponding Martin point `-h`.
    pub fn martin_point(&self) -> Point {
        let locator = if self.source_sequence.len() >= 3 {
            Locator::Sequence(self.source_sequence.clone())
        } else {
            Locator::Witnesses(self.source_sequence.clone())
        };
        Point {
            name: self.name.clone(),
            values: self.h.iter().map(|v| ExtReal::real(-v.value())).collect(),
            locator,
        }
    }
}

/// Tail limit of `d(·, z_n) - d(b, z_n)` on the window.
pub fn horofunction_limit(
    m: &MetricInstance,
    name: &str,
    window: &[usize],
    z_seq: &[usize],
    tol: f64,
) -> Result<HorofunctionWindow, MetricError> {
    let b = m.basepoint();
    let tail = &z_seq[z_seq.len().saturating_sub(3)..];
    let h = window
        .iter()
        .map(|&x| {
            let vals: Vec<ExtReal> = tail.iter().map(|&z| ExtReal::real(m.d(x, z) - m.d(b, z))).collect();
            tail_limit(&vals, tol)
                .value()
                .filter(|v| v.is_finite())
                .ok_or_else(|| MetricError::NonConvergent(m.states().label(x).into()))
        })
        .collect::<Result<MpVector, _>>()?;
    Ok(HorofunctionWindow {
        name: name.to_string(),
        window: window.to_vec(),
        h,
        source_sequence: z_seq.to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RieffelReport {
    /// Least sample index beyond which every pair satisfies the bound.
    pub threshold: Option<usize>,
    /// Worst `|d(γ(t), γ(s)) + d(γ(s), γ(0)) - t|` over the pairs past the threshold.
    pub worst: f64,
    pub eps: f64,
    pub passes: bool,
}

/// Rieffel's almost-geodesic test on samples `γ(times[k]) = gamma[k]`,
/// with `times[0] = 0`. Passes when the bound holds for all sampled
/// `s <= t` beyond a threshold lying in the first half of the samples.
pub fn rieffel_check(m: &MetricInstance, gamma: &[usize], times: Option<&[f64]>, eps: f64) -> RieffelReport {
    let hops: Vec<f64>;
    let times = match times {
        Some(t) => t,
        None => {
            hops = (0..gamma.len()).map(|k| k as f64).collect();
            &hops
        }
    };
    let len = gamma.len();
    // err_from[s] = worst error over pairs s <= t
    let mut err_from = vec![0.0f64; len + 1];
    for s in (0..len).rev() {
        let worst_s = (s..len)
            .map(|t| (m.d(gamma[t], gamma[s]) + m.d(gamma[s], gamma[0]) - times[t]).abs())
            .fold(0.0, f64::max);
        err_from[s] = err_from[s + 1].max(worst_s);
    }
    let threshold = (0..len).find(|&s| err_from[s] < eps);
    RieffelReport {
        threshold,
        worst: threshold.map_or(f64::INFINITY, |s| err_from[s]),
        eps,
        passes: threshold.is_some_and(|s| len > 0 && s <= (len - 1) / 2),
    }
}

/// `ν` over named Busemann points, `+inf` allowed.
pub type NuMap = BTreeMap<String, f64>;

/// Residuals `f(x) - min_h (h(x) + ν(h))` on the common window.
pub fn inf_representation_check(
    f: &MpVector,
    points: &[HorofunctionWindow],
    nu: &NuMap,
    tol: f64,
) -> Result<ResidualReport, MetricError> {
    let window = points.first().ok_or(MetricError::EmptySupport)?.window.clone();
    if points.iter().any(|p| p.window != window) || f.len() != window.len() {
        return Err(MetricError::WindowMismatch);
    }
    let weights: Vec<f64> = points
        .iter()
        .map(|p| nu.get(&p.name).copied().unwrap_or(f64::INFINITY))
        .collect();
    if weights.iter().all(|w| *w == f64::INFINITY) {
        return Err(MetricError::EmptySupport);
    }
    let mut residuals = Vec::with_capacity(window.len());
    let mut argmax = Vec::with_capacity(window.len());
    for k in 0..window.len() {
        let (arg, best) = points
            .iter()
            .zip(&weights)
            .enumerate()
            .map(|(p, (pt, w))| (p, pt.h.get(k).value() + w))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        residuals.push(f.get(k).value() - best);
        argmax.push(best.is_finite().then_some(arg));
    }
    Ok(ResidualReport {
        kind: CheckKind::Representation,
        states: window.clone(),
        residuals,
        excluded: vec![false; window.len()],
        argmax,
        tol,
    })
}

/// The greatest `ν` with `f = inf_h h + ν(h)`, obtained as `-μ^min_{-f}`
/// over the points `-h`. Points killed by the pipeline get `+inf`.
pub fn greatest_nu(
    m: &MetricInstance,
    f: &MpVector,
    family: &[HorofunctionWindow],
    accumulation: Vec<Accumulation>,
    tol: f64,
) -> Result<NuMap, MetricError> {
    let window = family.first().ok_or(MetricError::EmptySupport)?.window.clone();
    if family.iter().any(|p| p.window != window) {
        return Err(MetricError::WindowMismatch);
    }
    if f.len() != m.n() {
        return Err(MetricError::WindowMismatch);
    }
    if let Some(x) = (0..m.n()).find(|&x| !f.get(x).is_finite()) {
        return Err(MetricError::NotFinite(m.states().label(x).into()));
    }
    let inst = MartinInstance::new(m.to_kernel(), m.states().label(m.basepoint()), tol)?;
    let u: MpVector = f.iter().map(|v| ExtReal::real(-v.value())).collect();
    let points = family.iter().map(HorofunctionWindow::martin_point).collect();
    let set = PointSet::new(m.n(), window, points, accumulation, tol);
    let mm = mu_min(&inst, &u, &set, MeasureDomain::BoundaryFamily)?;
    Ok(family
        .iter()
        .map(|p| {
            let v = mm.mumin.get(&p.name);
            (p.name.clone(), if v.is_neg_inf() { f64::INFINITY } else { -v.value() })
        })
        .collect())
}
