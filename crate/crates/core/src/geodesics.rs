//! Almost-geodesics: minimal parameters, change of basepoint, the two
//! boundary lemmas as executable checks, and a witness-path constructor
//! for harmonic vectors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harmonic::{is_harmonic, HarmonicError, ResidualReport};
use crate::kernels::{MartinInstance, PointSet};
use crate::measures::KappaEvaluator;
use crate::semiring::{ExtReal, Kernel, MpVector, StateSpace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeodesicError {
    #[error("path is empty")]
    EmptyPath,
    #[error("step {position} of the path has weight -inf")]
    BrokenPath { position: usize },
    #[error("`{to}` is not reachable from `{from}`")]
    Unreachable { from: String, to: String },
    #[error("u is -inf at path position {position} but finite at the start; no finite parameter")]
    Unbounded { position: usize },
    #[error("no admissible state at step {step}")]
    EmptyZ { step: usize },
    #[error("target state still moving after {} steps", .0.targets.len() - 1)]
    HorizonExhausted(Box<WitnessGeodesic>),
    #[error("vector is not harmonic at {} state(s)", .0.violations().len())]
    NotHarmonic(Box<ResidualReport>),
    #[error("state is off the point's window")]
    OffWindow,
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeodesicKind {
    Kernel,
    URelative,
    Metric,
}

/// A path and the least parameter for which it is an almost-geodesic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicCertificate {
    pub path: Vec<String>,
    pub kind: GeodesicKind,
    pub beta: ExtReal,
    /// Basepoint label for kernel certificates, vector name otherwise.
    pub reference: String,
}

impl GeodesicCertificate {
    pub fn new(states: &StateSpace, path: &[usize], kind: GeodesicKind, beta: ExtReal, reference: &str) -> Self {
        GeodesicCertificate {
            path: path.iter().map(|&s| states.label(s).to_string()).collect(),
            kind,
            beta,
            reference: reference.to_string(),
        }
    }
}

/// Prefix weights `Σ_{m<l} A_{i_m i_{m+1}}` for `l = 0..=len`.
pub fn prefix_weights(a: &Kernel, path: &[usize]) -> Result<Vec<f64>, GeodesicError> {
    if path.is_empty() {
        return Err(GeodesicError::EmptyPath);
    }
    let mut acc = 0.0;
    let mut out = vec![0.0];
    for (position, w) in path.windows(2).enumerate() {
        let step = a.get(w[0], w[1]);
        if step.is_neg_inf() {
            return Err(GeodesicError::BrokenPath { position });
        }
        acc += step.value();
        out.push(acc);
    }
    Ok(out)
}

/// Least `β` with `A*_{b i_l} <= β + A*_{b i_0} + Σ_{m<l} A` for every prefix,
/// for an explicit closure and basepoint.
pub fn min_parameter_at(a: &Kernel, star: &Kernel, base: usize, path: &[usize]) -> Result<ExtReal, GeodesicError> {
    let sums = prefix_weights(a, path)?;
    let start = star.get(base, path[0]);
    if start.is_neg_inf() {
        return Err(GeodesicError::Unreachable {
            from: a.states().label(base).to_string(),
            to: a.states().label(path[0]).to_string(),
        });
    }
    Ok(path
        .iter()
        .zip(&sums)
        .map(|(&s, &w)| {
            let v = star.get(base, s);
            if v.is_neg_inf() {
                ExtReal::NEG_INF
            } else {
                ExtReal::real(v.value() - start.value() - w)
            }
        })
        .fold(ExtReal::NEG_INF, ExtReal::oplus))
}

/// Kernel almost-geodesic parameter relative to the instance's basepoint.
pub fn min_parameter_kernel(inst: &MartinInstance, path: &[usize]) -> Result<ExtReal, GeodesicError> {
    min_parameter_at(inst.a(), inst.a_star(), inst.basepoint(), path)
}

/// Least `β` with `u_{i_0} <= β + Σ_{m<l} A + u_{i_l}` for every prefix.
pub fn min_parameter_u(a: &Kernel, u: &MpVector, path: &[usize]) -> Result<ExtReal, GeodesicError> {
    let sums = prefix_weights(a, path)?;
    let start = u.get(path[0]);
    if start.is_neg_inf() {
        return Ok(ExtReal::NEG_INF);
    }
    let mut beta = ExtReal::NEG_INF;
    for (position, (&s, &w)) in path.iter().zip(&sums).enumerate() {
        let end = u.get(s);
        if end.is_neg_inf() {
            return Err(GeodesicError::Unbounded { position });
        }
        beta = beta.oplus(ExtReal::real(start.value() - w - end.value()));
    }
    Ok(beta)
}

/// Parameter of the same path seen from basepoint `j`:
/// `β + A*_{b i_0} - A*_{b j} - A*_{j i_0}`.
pub fn rebase(inst: &MartinInstance, path: &[usize], beta: ExtReal, new_base: usize) -> Result<ExtReal, GeodesicError> {
    let i0 = *path.first().ok_or(GeodesicError::EmptyPath)?;
    let s = inst.a_star();
    let b = inst.basepoint();
    let back = s.get(new_base, i0);
    if back.is_neg_inf() {
        return Err(GeodesicError::Unreachable {
            from: inst.states().label(new_base).to_string(),
            to: inst.states().label(i0).to_string(),
        });
    }
    if beta.is_neg_inf() {
        return Ok(beta);
    }
    Ok(ExtReal::real(
        beta.value() + s.get(b, i0).value() - s.get(b, new_base).value() - back.value(),
    ))
}

/// Slack of `ξ(i_0) <= Σ_{l<n} A + ξ(i_n) + β` at each prefix end `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaAReport {
    /// `None` where `i_n` is off the window.
    pub slack: Vec<Option<f64>>,
    pub tol: f64,
}

impl LemmaAReport {
    pub fn worst(&self) -> Option<f64> {
        self.slack.iter().flatten().copied().reduce(f64::min)
    }

    pub fn holds(&self) -> bool {
        self.worst().is_none_or(|w| w >= -self.tol)
    }
}

pub fn lemma_a_check(
    a: &Kernel,
    path: &[usize],
    beta: ExtReal,
    set: &PointSet,
    xi: usize,
    tol: f64,
) -> Result<LemmaAReport, GeodesicError> {
    let sums = prefix_weights(a, path)?;
    let start = set.value(xi, path[0]).ok_or(GeodesicError::OffWindow)?;
    let slack = path
        .iter()
        .zip(&sums)
        .map(|(&s, &w)| {
            set.value(xi, s)
                .map(|v| (v + beta + ExtReal::real(w)).residual(start))
        })
        .collect();
    Ok(LemmaAReport { slack, tol })
}

/// `u_j - ξ(j) - μ^max_u(ξ)`: the least parameter of `u`-relative
/// almost-geodesics from `j` converging to `ξ`.
pub fn lemma_b_gap(eval: &KappaEvaluator<'_>, j: usize, xi: usize) -> Result<f64, GeodesicError> {
    let kappa = eval.kappa_max(j, xi).ok_or(GeodesicError::OffWindow)?;
    Ok(eval.u().get(j).residual(kappa))
}

/// Output of [`witness_geodesic`].
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessGeodesic {
    pub path: Vec<usize>,
    /// `j_0, j_1, ...`
    pub targets: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
    /// `min_parameter_u` of the whole path.
    pub beta: ExtReal,
    pub delta0: f64,
    pub tol: f64,
}

impl WitnessGeodesic {
    pub fn final_state(&self) -> usize {
        *self.path.last().unwrap()
    }

    pub fn guarantee_holds(&self) -> bool {
        self.beta.value() <= self.delta0 + self.tol
    }

    pub fn certificate(&self, states: &StateSpace, u_name: &str) -> GeodesicCertificate {
        GeodesicCertificate::new(states, &self.path, GeodesicKind::URelative, self.beta, u_name)
    }
}

/// Parameters of the witness-path construction.
#[derive(Debug, Clone)]
pub struct WitnessConfig {
    pub j0: usize,
    pub delta0: f64,
    pub eps0: f64,
    pub horizon: usize,
    /// States visited in turn; defaults to round-robin over all states.
    pub visit_order: Option<Vec<usize>>,
}

/// Builds a `u`-relative almost-geodesic with parameter `δ_0` from `j_0`.
///
/// Each step keeps the states `s` whose `k(i, s)` stays within `ε_n` of
/// `k(i, j_n)` for every visited `i` and which are reachable from `j_n`
/// without losing more than `δ_n`; moves to the one maximizing `k(i_n, ·)`
/// and appends an optimal connecting path. Both `ε` and `δ` are then set
/// to half of their admissible upper bound.
pub fn witness_geodesic(
    inst: &MartinInstance,
    u: &MpVector,
    cfg: &WitnessConfig,
) -> Result<WitnessGeodesic, GeodesicError> {
    let tol = inst.tol();
    let report = is_harmonic(inst.a(), u, tol)?.excluding(inst.edge());
    if !report.holds() {
        return Err(GeodesicError::NotHarmonic(Box::new(report)));
    }
    let n = inst.n();
    let order: Vec<usize> = cfg.visit_order.clone().unwrap_or_else(|| (0..n).collect());
    let star = inst.a_star();
    let plus = inst.a_plus();
    let k = |i: usize, s: usize| star.get(i, s) + u.get(s);

    let mut j = cfg.j0;
    let (mut eps, mut delta) = (cfg.eps0, cfg.delta0);
    let mut out = WitnessGeodesic {
        path: vec![j],
        targets: vec![j],
        epsilons: vec![eps],
        deltas: vec![delta],
        beta: ExtReal::ZERO,
        delta0: cfg.delta0,
        tol,
    };
    let mut visited: Vec<usize> = Vec::new();
    let mut last_move = 0;
    for step in 0..cfg.horizon {
        let uj = u.get(j);
        let in_z = |s: usize| {
            let reach = (plus.get(j, s) + u.get(s)).residual(uj);
            reach > -delta
                && visited.iter().all(|&i| {
                    let base = k(i, j);
                    base.is_neg_inf() || k(i, s).residual(base) > -eps
                })
        };
        let probe = order[step % order.len()];
        let mut best: Option<(usize, ExtReal)> = None;
        let candidates = std::iter::once(j).chain((0..n).filter(|&s| s != j));
        for s in candidates {
            if !in_z(s) {
                continue;
            }
            let v = k(probe, s);
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((s, v));
            }
        }
        let (next, _) = best.ok_or(GeodesicError::EmptyZ { step })?;
        let leg = inst.closure().plus_path(j, next).ok_or_else(|| GeodesicError::Unreachable {
            from: inst.states().label(j).to_string(),
            to: inst.states().label(next).to_string(),
        })?;
        let weight = *prefix_weights(inst.a(), &leg)?.last().unwrap();
        let floor = visited
            .iter()
            .filter(|&&i| !k(i, j).is_neg_inf())
            .map(|&i| k(i, next).residual(k(i, j)))
            .fold(f64::INFINITY, f64::min);
        let floor = if floor.is_finite() { floor.min(0.0).max(-eps) } else { 0.0 };
        eps = 0.5 * (eps + floor);
        delta = 0.5 * (delta + (u.get(next) + ExtReal::real(weight)).residual(uj));
        if next != j {
            last_move = step + 1;
        }
        visited.push(probe);
        out.path.extend_from_slice(&leg[1..]);
        out.targets.push(next);
        out.epsilons.push(eps);
        out.deltas.push(delta);
        j = next;
    }
    out.beta = min_parameter_u(inst.a(), u, &out.path)?;
    if cfg.horizon < order.len() || cfg.horizon - last_move < order.len() {
        return Err(GeodesicError::HorizonExhausted(Box::new(out)));
    }
    Ok(out)
}
