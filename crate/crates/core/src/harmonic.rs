//! Harmonicity, superharmonicity and representation checks.
//!
//! Every check returns the full residual vector rather than a bare
//! verdict. Representation checks on a window make no claim off it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernels::PointSet;
use crate::semiring::{mat_vec, ExtReal, Kernel, MpVector, SemiringError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarmonicError {
    #[error(transparent)]
    Semiring(#[from] SemiringError),
    #[error("measure is -inf on every point")]
    EmptySupport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Harmonic,
    Superharmonic,
    Representation,
}

/// Per-state residuals of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub kind: CheckKind,
    /// State index for each residual (the window for representation checks).
    pub states: Vec<usize>,
    pub residuals: Vec<f64>,
    /// States left out of the verdict, e.g. truncated window edges.
    pub excluded: Vec<bool>,
    /// For representation checks, the point attaining the supremum.
    pub argmax: Vec<Option<usize>>,
    pub tol: f64,
}

impl ResidualReport {
    fn passes(&self, r: f64) -> bool {
        match self.kind {
            CheckKind::Superharmonic => r >= -self.tol,
            _ => r.abs() <= self.tol,
        }
    }

    /// Positions of residuals that violate the check, edges excluded.
    pub fn violations(&self) -> Vec<usize> {
        (0..self.residuals.len())
            .filter(|&k| !self.excluded[k] && !self.passes(self.residuals[k]))
            .collect()
    }

    pub fn holds(&self) -> bool {
        self.violations().is_empty()
    }

    /// Largest residual magnitude among the judged states.
    pub fn worst(&self) -> f64 {
        self.residuals
            .iter()
            .zip(&self.excluded)
            .filter(|(_, &e)| !e)
            .map(|(r, _)| match self.kind {
                CheckKind::Superharmonic => (-r).max(0.0),
                _ => r.abs(),
            })
            .fold(0.0, f64::max)
    }

    /// Same report with the given states (by index) excluded from the verdict.
    pub fn excluding(mut self, edge: &[bool]) -> Self {
        for (k, &s) in self.states.iter().enumerate() {
            if edge.get(s).copied().unwrap_or(false) {
                self.excluded[k] = true;
            }
        }
        self
    }
}

fn balance_report(
    a: &Kernel,
    u: &MpVector,
    tol: f64,
    kind: CheckKind,
) -> Result<ResidualReport, HarmonicError> {
    let rhs = mat_vec(a, u)?;
    let residuals: Vec<f64> = u.iter().zip(rhs.iter()).map(|(l, r)| l.residual(r)).collect();
    let n = residuals.len();
    Ok(ResidualReport {
        kind,
        states: (0..n).collect(),
        residuals,
        excluded: vec![false; n],
        argmax: vec![None; n],
        tol,
    })
}

/// Residuals `u_i - max_j (A_ij + u_j)`; harmonic iff all within `tol`.
pub fn is_harmonic(a: &Kernel, u: &MpVector, tol: f64) -> Result<ResidualReport, HarmonicError> {
    balance_report(a, u, tol, CheckKind::Harmonic)
}

/// Same residuals; superharmonic iff all `>= -tol`.
pub fn is_superharmonic(a: &Kernel, u: &MpVector, tol: f64) -> Result<ResidualReport, HarmonicError> {
    balance_report(a, u, tol, CheckKind::Superharmonic)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureDomain {
    FiniteMartinSpace,
    BoundaryFamily,
    Union,
    /// Restriction to the minimal Martin space.
    Minimal,
}

/// A max-plus measure, identified with its density over named points.
/// Points missing from the map carry `-inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    pub domain: MeasureDomain,
    pub density: BTreeMap<String, ExtReal>,
}

impl Measure {
    pub fn from_values(domain: MeasureDomain, set: &PointSet, values: &[ExtReal]) -> Self {
        Measure {
            domain,
            density: set.names().map(String::from).zip(values.iter().copied()).collect(),
        }
    }

    pub fn get(&self, name: &str) -> ExtReal {
        self.density.get(name).copied().unwrap_or(ExtReal::NEG_INF)
    }

    /// Density values in the order of `set`.
    pub fn values_on(&self, set: &PointSet) -> Vec<ExtReal> {
        set.names().map(|n| self.get(n)).collect()
    }

    pub fn set(&mut self, name: &str, v: ExtReal) {
        self.density.insert(name.to_string(), v);
    }

    pub fn is_empty_support(&self) -> bool {
        self.density.values().all(|v| v.is_neg_inf())
    }
}

/// Residuals `u_i - max_ξ (ξ_i + μ(ξ))` on the window of `points`.
/// `u_window` holds `u` restricted to that window.
pub fn represents(
    points: &PointSet,
    mu: &Measure,
    u_window: &MpVector,
    tol: f64,
) -> Result<ResidualReport, HarmonicError> {
    let density = mu.values_on(points);
    if density.iter().all(|v| v.is_neg_inf()) {
        return Err(HarmonicError::EmptySupport);
    }
    if u_window.len() != points.window().len() {
        return Err(SemiringError::DimensionMismatch {
            expected: points.window().len(),
            got: u_window.len(),
        }
        .into());
    }
    let m = points.window().len();
    let mut residuals = Vec::with_capacity(m);
    let mut argmax = Vec::with_capacity(m);
    for k in 0..m {
        let mut best = ExtReal::NEG_INF;
        let mut arg = None;
        for (p, pt) in points.points().iter().enumerate() {
            let v = pt.values.get(k) + density[p];
            if arg.is_none() || v > best {
                best = v;
                arg = Some(p);
            }
        }
        residuals.push(u_window.get(k).residual(best));
        argmax.push(if best.is_neg_inf() { None } else { arg });
    }
    Ok(ResidualReport {
        kind: CheckKind::Representation,
        states: points.window().to_vec(),
        residuals,
        excluded: vec![false; m],
        argmax,
        tol,
    })
}
