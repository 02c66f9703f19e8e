//! Maximum and minimum representing measures.
//!
//! Pipeline: `μ^max_u` on every point, the order `⪯_u`, the map `m_u`
//! that kills dominated points, and its upper semicontinuous hull
//! `μ^min_u` along the declared accumulations.

use thiserror::Error;

use crate::harmonic::{is_harmonic, is_superharmonic, HarmonicError, Measure, MeasureDomain, ResidualReport};
use crate::kernels::{minimal_martin_space, KernelError, Locator, MartinInstance, Point, PointSet};
use crate::semiring::{ExtReal, MpVector, SemiringError};
use crate::tail::tail_limit;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
    #[error("vector is not superharmonic at {} state(s)", .0.violations().len())]
    NotSuperharmonic(Box<ResidualReport>),
    #[error("sequence does not stabilize: {0}")]
    NonConvergent(String),
}

impl From<SemiringError> for MeasureError {
    fn from(e: SemiringError) -> Self {
        MeasureError::Kernel(e.into())
    }
}

/// `μ^max_u(ξ)` from the point's locator alone: the maximum of
/// `A*_bj + u_j` over witnesses, or its tail value along a sequence.
pub fn mu_max(inst: &MartinInstance, u: &MpVector, point: &Point, tol: f64) -> Result<ExtReal, MeasureError> {
    let b = inst.basepoint();
    let term = |j: usize| inst.a_star().get(b, j) + u.get(j);
    match &point.locator {
        Locator::Witnesses(w) => Ok(w.iter().map(|&j| term(j)).fold(ExtReal::NEG_INF, ExtReal::oplus)),
        Locator::Sequence(s) => {
            let vals: Vec<ExtReal> = s[s.len().saturating_sub(3)..].iter().map(|&j| term(j)).collect();
            tail_limit(&vals, tol).value().ok_or_else(|| {
                MeasureError::NonConvergent(format!("mu_max along `{}`: {vals:?}", point.name))
            })
        }
    }
}

/// Raises `values[limit]` to the tail of `values` along each declared
/// accumulation, until nothing changes.
fn usc_close(set: &PointSet, values: &mut [ExtReal]) -> Result<(), MeasureError> {
    for _ in 0..=set.accumulation().len() {
        let mut changed = false;
        for acc in set.accumulation() {
            let seq: Vec<ExtReal> = acc.sequence.iter().map(|&p| values[p]).collect();
            let lim = tail_limit(&seq, set.tol()).value().ok_or_else(|| {
                MeasureError::NonConvergent(format!(
                    "limsup towards `{}`: {seq:?}",
                    set.point(acc.limit).name
                ))
            })?;
            if lim > values[acc.limit] {
                values[acc.limit] = lim;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(())
}

/// `κ^max`, `κ^ν` and `k` for one instance, vector and point set.
#[derive(Debug)]
pub struct KappaEvaluator<'a> {
    inst: &'a MartinInstance,
    u: &'a MpVector,
    set: &'a PointSet,
    mumax: Vec<ExtReal>,
}

impl<'a> KappaEvaluator<'a> {
    /// Checks that `u` is superharmonic and evaluates `μ^max_u` on every
    /// point. `μ^max` is upper semicontinuous, so limits of declared
    /// accumulations are raised to the limsup along their sequences.
    pub fn new(inst: &'a MartinInstance, u: &'a MpVector, set: &'a PointSet) -> Result<Self, MeasureError> {
        let report = is_superharmonic(inst.a(), u, inst.tol())?;
        if !report.holds() {
            return Err(MeasureError::NotSuperharmonic(Box::new(report)));
        }
        let mut mumax = set
            .points()
            .iter()
            .map(|p| mu_max(inst, u, p, set.tol()))
            .collect::<Result<Vec<_>, _>>()?;
        usc_close(set, &mut mumax)?;
        Ok(KappaEvaluator { inst, u, set, mumax })
    }

    pub fn instance(&self) -> &MartinInstance {
        self.inst
    }

    pub fn u(&self) -> &MpVector {
        self.u
    }

    pub fn points(&self) -> &PointSet {
        self.set
    }

    pub fn mumax(&self, p: usize) -> ExtReal {
        self.mumax[p]
    }

    pub fn mumax_values(&self) -> &[ExtReal] {
        &self.mumax
    }

    /// `ξ(i) + μ^max_u(ξ)`; `None` off the window.
    pub fn kappa_max(&self, i: usize, p: usize) -> Option<ExtReal> {
        self.kappa_nu(i, p, self.mumax[p])
    }

    /// `ξ(i) + ν(ξ)`; `None` off the window.
    pub fn kappa_nu(&self, i: usize, p: usize, nu: ExtReal) -> Option<ExtReal> {
        self.set.value(p, i).map(|v| v + nu)
    }

    /// `A*_ij + u_j`.
    pub fn k(&self, i: usize, j: usize) -> ExtReal {
        self.inst.a_star().get(i, j) + self.u.get(j)
    }
}

/// `a <= b + tol` with `-inf` on either side.
fn leq_tol(a: ExtReal, b: ExtReal, tol: f64) -> bool {
    a.residual(b) <= tol
}

/// `z ⪯_u w`, judged on the window. Points with `μ^max = -inf` lie below
/// everything.
pub fn order_leq(eval: &KappaEvaluator<'_>, z: usize, w: usize, tol: f64) -> bool {
    if eval.mumax(z).is_neg_inf() {
        return true;
    }
    let set = eval.points();
    let (mz, mw) = (eval.mumax(z), eval.mumax(w));
    set.point(z)
        .values
        .iter()
        .zip(set.point(w).values.iter())
        .all(|(a, b)| leq_tol(a + mz, b + mw, tol))
}

/// The order `⪯_u` tabulated over a point set.
#[derive(Debug, Clone)]
pub struct OrderedPointSet {
    names: Vec<String>,
    mumax: Vec<ExtReal>,
    leq: Vec<bool>,
    maximal: Vec<bool>,
    dominators: Vec<Vec<usize>>,
}

impl OrderedPointSet {
    pub fn build(eval: &KappaEvaluator<'_>, tol: f64) -> Self {
        let p = eval.points().len();
        let mut leq = vec![false; p * p];
        for z in 0..p {
            for w in 0..p {
                leq[z * p + w] = z == w || order_leq(eval, z, w, tol);
            }
        }
        let set = eval.points();
        let mm = eval.mumax_values();
        let same = |z: usize, w: usize| {
            let eq = |a: ExtReal, b: ExtReal| leq_tol(a, b, tol) && leq_tol(b, a, tol);
            eq(mm[z], mm[w]) && set.point(z).values.iter().zip(set.point(w).values.iter()).all(|(a, b)| eq(a, b))
        };
        // equal points are one point listed twice and never dominate each other
        let dominators: Vec<Vec<usize>> = (0..p)
            .map(|z| (0..p).filter(|&w| w != z && leq[z * p + w] && !same(z, w)).collect())
            .collect();
        let maximal = dominators.iter().map(Vec::is_empty).collect();
        OrderedPointSet {
            names: eval.points().names().map(String::from).collect(),
            mumax: eval.mumax_values().to_vec(),
            leq,
            maximal,
            dominators,
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, p: usize) -> &str {
        &self.names[p]
    }

    pub fn mumax(&self, p: usize) -> ExtReal {
        self.mumax[p]
    }

    pub fn leq(&self, z: usize, w: usize) -> bool {
        self.leq[z * self.len() + w]
    }

    /// All pairs `(z, w)` with `z ⪯_u w`, reflexive ones included.
    pub fn order_pairs(&self) -> Vec<(usize, usize)> {
        let p = self.len();
        (0..p)
            .flat_map(|z| (0..p).map(move |w| (z, w)))
            .filter(|&(z, w)| self.leq(z, w))
            .collect()
    }

    pub fn is_maximal(&self, p: usize) -> bool {
        self.maximal[p]
    }

    pub fn dominators(&self, p: usize) -> &[usize] {
        &self.dominators[p]
    }
}

/// `m_u(η) = -inf` when a distinct point dominates `η`, else `μ^max_u(η)`.
pub fn m_u(order: &OrderedPointSet) -> Vec<ExtReal> {
    (0..order.len())
        .map(|p| if order.is_maximal(p) { order.mumax(p) } else { ExtReal::NEG_INF })
        .collect()
}

/// Upper semicontinuous hull along the declared accumulations. With no
/// accumulations (finite instances, discrete topology) this is the identity.
pub fn usc_hull(set: &PointSet, m: &[ExtReal]) -> Result<Vec<ExtReal>, MeasureError> {
    let mut out = m.to_vec();
    usc_close(set, &mut out)?;
    Ok(out)
}

/// Everything the minimum-measure pipeline produces.
#[derive(Debug, Clone)]
pub struct MinimumMeasure {
    pub order: OrderedPointSet,
    pub mumax: Measure,
    pub m_u: Measure,
    pub mumin: Measure,
    /// Membership of each point in the minimal Martin space.
    pub minimal: Vec<bool>,
    /// Whether `u` is harmonic off the instance's edge states.
    pub harmonic: bool,
    /// `μ^min` restricted to the minimal Martin space, when `u` is harmonic.
    pub restricted: Option<Measure>,
}

/// Runs `μ^max -> ⪯_u -> m_u -> usc hull` over a point set.
pub fn mu_min(
    inst: &MartinInstance,
    u: &MpVector,
    set: &PointSet,
    domain: MeasureDomain,
) -> Result<MinimumMeasure, MeasureError> {
    let eval = KappaEvaluator::new(inst, u, set)?;
    let order = OrderedPointSet::build(&eval, inst.tol());
    let killed = m_u(&order);
    let hull = usc_hull(set, &killed)?;
    let minimal = minimal_martin_space(inst, set)?;
    let harmonic = is_harmonic(inst.a(), u, inst.tol())?.excluding(inst.edge()).holds();
    let mumin = Measure::from_values(domain, set, &hull);
    let restricted = harmonic.then(|| {
        let vals: Vec<ExtReal> = hull
            .iter()
            .zip(&minimal)
            .map(|(&v, &m)| if m { v } else { ExtReal::NEG_INF })
            .collect();
        Measure::from_values(MeasureDomain::Minimal, set, &vals)
    });
    Ok(MinimumMeasure {
        mumax: Measure::from_values(domain, set, eval.mumax_values()),
        m_u: Measure::from_values(domain, set, &killed),
        mumin,
        order,
        minimal,
        harmonic,
        restricted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::represents;
    use crate::kernels::finite_martin_space;
    use crate::semiring::{Kernel, StateSpace, DEFAULT_TOL};
    use std::sync::Arc;

    fn kernel(labels: &[&str], entries: &[(&str, &str, f64)]) -> Kernel {
        let st = Arc::new(StateSpace::new(labels.iter().copied()).unwrap());
        Kernel::from_entries(st, entries.iter().map(|&(a, b, w)| (a, b, ExtReal::real(w)))).unwrap()
    }

    fn sample() -> MartinInstance {
        let a = kernel(
            &["b", "x", "y", "z"],
            &[
                ("b", "b", 0.0),
                ("x", "x", 0.0),
                ("y", "y", 0.0),
                ("z", "z", 0.0),
                ("b", "x", -1.0),
                ("b", "y", -2.0),
                ("x", "z", -1.0),
                ("y", "z", -0.5),
            ],
        );
        MartinInstance::new(a, "b", DEFAULT_TOL).unwrap()
    }

    #[test]
    fn single_state_measures_equal_u_b() {
        let a = kernel(&["b"], &[("b", "b", 0.0)]);
        let inst = MartinInstance::new(a, "b", DEFAULT_TOL).unwrap();
        let set = finite_martin_space(&inst);
        let u = MpVector::from_reals(&[2.5]);
        let mm = mu_min(&inst, &u, &set, MeasureDomain::FiniteMartinSpace).unwrap();
        assert_eq!(mm.mumax.get("K[b]").value(), 2.5);
        assert_eq!(mm.mumin.get("K[b]").value(), 2.5);
    }

    #[test]
    fn order_is_reflexive() {
        let inst = sample();
        let set = finite_martin_space(&inst);
        let u = inst.martin_column(3).oplus(&inst.martin_column(1).shift(-0.25));
        let eval = KappaEvaluator::new(&inst, &u, &set).unwrap();
        for p in 0..set.len() {
            assert!(order_leq(&eval, p, p, DEFAULT_TOL));
        }
    }

    #[test]
    fn dominated_columns_are_killed() {
        let inst = sample();
        let set = finite_martin_space(&inst);
        // u is the column of z: every column feeding into z is dominated
        let u = inst.martin_column(3);
        let mm = mu_min(&inst, &u, &set, MeasureDomain::FiniteMartinSpace).unwrap();
        assert!(mm.harmonic);
        let z = set.index_of("K[z]").unwrap();
        assert!(mm.order.is_maximal(z));
        for p in 0..set.len() {
            let v = mm.mumin.get(set.point(p).name.as_str());
            if p == z {
                assert_eq!(v, ExtReal::ZERO);
            } else {
                assert!(v.is_neg_inf(), "{} kept at {v}", set.point(p).name);
            }
        }
        let rep = represents(&set, &mm.mumin, &u, DEFAULT_TOL).unwrap();
        assert!(rep.holds());
    }

    #[test]
    fn not_superharmonic_is_reported() {
        let inst = sample();
        let set = finite_martin_space(&inst);
        let u = MpVector::from_reals(&[0.0, 5.0, 0.0, 0.0]);
        match KappaEvaluator::new(&inst, &u, &set) {
            Err(MeasureError::NotSuperharmonic(r)) => assert_eq!(r.violations(), vec![0]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn neg_inf_mumax_is_below_everything() {
        let inst = sample();
        let set = finite_martin_space(&inst);
        // u = -inf except on z: b, x, y still reach z
        let u = MpVector::new(vec![ExtReal::NEG_INF, ExtReal::NEG_INF, ExtReal::NEG_INF, ExtReal::ZERO]);
        assert!(!is_superharmonic(inst.a(), &u, DEFAULT_TOL).unwrap().holds());
        let u = inst.martin_column(3);
        let eval = KappaEvaluator::new(&inst, &u, &set).unwrap();
        let z = set.index_of("K[z]").unwrap();
        for p in 0..set.len() {
            if eval.mumax(p).is_neg_inf() {
                assert!(order_leq(&eval, p, z, DEFAULT_TOL));
            }
        }
    }

    #[test]
    fn listed_twice_both_kept() {
        let inst = sample();
        let set = finite_martin_space(&inst);
        let z = set.point(set.index_of("K[z]").unwrap()).clone();
        let copy = Point { name: "copy".into(), ..z.clone() };
        let twice = PointSet::new(inst.n(), set.window().to_vec(), vec![z, copy], Vec::new(), DEFAULT_TOL);
        let mm = mu_min(&inst, &inst.martin_column(3), &twice, MeasureDomain::BoundaryFamily).unwrap();
        assert_eq!(mm.mumin.get("K[z]"), ExtReal::ZERO);
        assert_eq!(mm.mumin.get("copy"), ExtReal::ZERO);
    }

    #[test]
    fn empty_accumulation_hull_is_identity() {
        let inst = sample();
        let set = finite_martin_space(&inst);
        let m = vec![ExtReal::NEG_INF, ExtReal::real(-1.0), ExtReal::NEG_INF, ExtReal::ZERO];
        assert_eq!(usc_hull(&set, &m).unwrap(), m);
        let all_neg = vec![ExtReal::NEG_INF; set.len()];
        assert_eq!(usc_hull(&set, &all_neg).unwrap(), all_neg);
    }
}
