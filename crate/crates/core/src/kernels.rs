//! Martin kernels, finite Martin spaces, windowed boundary families, the
//! `H♭` kernel and the minimal Martin space.
//!
//! An infinite Martin space cannot be computed from finite data. Boundary
//! points are instead tabulated on a finite window of states and tied to
//! the instance through representative state sequences whose Martin
//! columns approach them. Limits along those sequences are read off the
//! last three terms (see [`crate::tail`]).

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::semiring::{Closure, ExtReal, Kernel, MpVector, SemiringError, StateSpace};
use crate::tail::{tail_limit, TailLimit};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error(transparent)]
    Semiring(#[from] SemiringError),
    #[error("state `{0}` is not accessible from the basepoint")]
    InaccessibleState(String),
    #[error("sequence does not stabilize: {0}")]
    NonConvergent(String),
    #[error("boundary family is inconsistent: {}", .0.join("; "))]
    FamilyInvariant(Vec<String>),
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
}

/// A kernel together with a basepoint from which every state is accessible.
#[derive(Debug)]
pub struct MartinInstance {
    closure: Closure,
    basepoint: usize,
    edge: Vec<bool>,
    tol: f64,
    martin: OnceLock<Kernel>,
}

impl MartinInstance {
    pub fn new(a: Kernel, basepoint: &str, tol: f64) -> Result<Self, KernelError> {
        let b = a.states().resolve(basepoint)?;
        let closure = Closure::compute(&a, tol)?;
        if let Some(j) = (0..a.n()).find(|&j| closure.star().get(b, j).is_neg_inf()) {
            return Err(KernelError::InaccessibleState(a.states().label(j).to_string()));
        }
        let n = a.n();
        Ok(MartinInstance {
            closure,
            basepoint: b,
            edge: vec![false; n],
            tol,
            martin: OnceLock::new(),
        })
    }

    /// Marks states whose neighbourhood is cut by a finite window; they are
    /// reported but left out of harmonicity verdicts.
    pub fn with_edge_states(mut self, edge: Vec<bool>) -> Self {
        assert_eq!(edge.len(), self.n());
        self.edge = edge;
        self
    }

    pub fn a(&self) -> &Kernel {
        self.closure.base()
    }

    pub fn a_star(&self) -> &Kernel {
        self.closure.star()
    }

    pub fn a_plus(&self) -> &Kernel {
        self.closure.plus()
    }

    pub fn closure(&self) -> &Closure {
        &self.closure
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn states(&self) -> &StateSpace {
        self.a().states()
    }

    pub fn n(&self) -> usize {
        self.a().n()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn edge(&self) -> &[bool] {
        &self.edge
    }

    /// `K_ij = A*_ij - A*_bj`.
    pub fn martin_entry(&self, i: usize, j: usize) -> ExtReal {
        let s = self.a_star();
        // accessibility makes A*_bj finite
        s.get(i, j).checked_sub(s.get(self.basepoint, j)).unwrap()
    }

    /// The Martin kernel; row `b` is identically zero.
    pub fn martin_kernel(&self) -> &Kernel {
        self.martin.get_or_init(|| {
            Kernel::from_fn(self.a().states_arc().clone(), |i, j| self.martin_entry(i, j))
        })
    }

    pub fn martin_column(&self, j: usize) -> MpVector {
        (0..self.n()).map(|i| self.martin_entry(i, j)).collect()
    }

    /// `A*_bi + A+_ij - A*_bj`, the integrand of `H♭`.
    fn flat_term(&self, i: usize, j: usize) -> ExtReal {
        let s = self.a_star();
        let b = self.basepoint;
        (s.get(b, i) + self.a_plus().get(i, j))
            .checked_sub(s.get(b, j))
            .unwrap()
    }
}

/// How a point of the Martin space is reached from the state set.
#[derive(Debug, Clone, PartialEq)]
pub enum Locator {
    /// An isolated point: exactly the states whose Martin column it is.
    Witnesses(Vec<usize>),
    /// A limit point, approached by the Martin columns of the sequence.
    Sequence(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub name: String,
    /// Values on the owning [`PointSet`]'s window.
    pub values: MpVector,
    pub locator: Locator,
}

/// A declared accumulation: the points in `sequence` converge to `limit`.
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulation {
    pub sequence: Vec<usize>,
    pub limit: usize,
}

/// Points of a (windowed) Martin space, all tabulated on one window.
#[derive(Debug, Clone)]
pub struct PointSet {
    window: Vec<usize>,
    position: Vec<Option<usize>>,
    points: Vec<Point>,
    accumulation: Vec<Accumulation>,
    tol: f64,
}

impl PointSet {
    pub fn new(
        n_states: usize,
        window: Vec<usize>,
        points: Vec<Point>,
        accumulation: Vec<Accumulation>,
        tol: f64,
    ) -> Self {
        let mut position = vec![None; n_states];
        for (p, &s) in window.iter().enumerate() {
            position[s] = Some(p);
        }
        for pt in &points {
            assert_eq!(pt.values.len(), window.len(), "point `{}` off window", pt.name);
        }
        PointSet {
            window,
            position,
            points,
            accumulation,
            tol,
        }
    }

    pub fn window(&self) -> &[usize] {
        &self.window
    }

    /// Position of a state in the window.
    pub fn position(&self, state: usize) -> Option<usize> {
        self.position[state]
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, p: usize) -> &Point {
        &self.points[p]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn accumulation(&self) -> &[Accumulation] {
        &self.accumulation
    }

    /// Tolerance for tail stabilization and family invariants.
    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.points.iter().position(|p| p.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.points.iter().map(|p| p.name.as_str())
    }

    /// `ξ(state)` for point `p`, if the state is on the window.
    pub fn value(&self, p: usize, state: usize) -> Option<ExtReal> {
        self.position[state].map(|k| self.points[p].values.get(k))
    }

    /// Restricts a vector over all states to the window.
    pub fn restrict(&self, full: &MpVector) -> MpVector {
        full.restrict(&self.window)
    }

    /// The same points tabulated on a subset of the window.
    pub fn sub_window(&self, states: &[usize]) -> PointSet {
        let ks: Vec<usize> = states
            .iter()
            .map(|&s| self.position[s].expect("state off window"))
            .collect();
        let points = self
            .points
            .iter()
            .map(|p| Point {
                name: p.name.clone(),
                values: p.values.restrict(&ks),
                locator: p.locator.clone(),
            })
            .collect();
        PointSet::new(self.position.len(), states.to_vec(), points, self.accumulation.clone(), self.tol)
    }

    /// Adds the points of `other` (same window) that are not within `tol`
    /// of a point already present. Accumulations of `other` are remapped.
    pub fn union(mut self, other: &PointSet) -> PointSet {
        assert_eq!(self.window, other.window, "union needs a common window");
        let mut remap = Vec::with_capacity(other.len());
        for pt in &other.points {
            match self
                .points
                .iter()
                .position(|q| q.values.sup_distance(&pt.values) <= self.tol)
            {
                Some(k) => remap.push(k),
                None => {
                    remap.push(self.points.len());
                    self.points.push(pt.clone());
                }
            }
        }
        for acc in &other.accumulation {
            self.accumulation.push(Accumulation {
                sequence: acc.sequence.iter().map(|&p| remap[p]).collect(),
                limit: remap[acc.limit],
            });
        }
        self
    }
}

/// The Martin kernel of an instance (alias for [`MartinInstance::martin_kernel`]).
pub fn martin_kernel(inst: &MartinInstance) -> &Kernel {
    inst.martin_kernel()
}

/// Distinct Martin columns of a finite instance, each with its witnesses.
///
/// Columns are grouped in sup-norm within the instance tolerance; the
/// window is the whole state set and no accumulations exist.
pub fn finite_martin_space(inst: &MartinInstance) -> PointSet {
    let n = inst.n();
    let k = inst.martin_kernel();
    let mut points: Vec<Point> = Vec::new();
    for j in 0..n {
        let col = k.column(j);
        match points
            .iter_mut()
            .find(|p| p.values.sup_distance(&col) <= inst.tol())
        {
            Some(p) => {
                if let Locator::Witnesses(w) = &mut p.locator {
                    w.push(j);
                }
            }
            None => points.push(Point {
                name: format!("K[{}]", inst.states().label(j)),
                values: col,
                locator: Locator::Witnesses(vec![j]),
            }),
        }
    }
    PointSet::new(n, (0..n).collect(), points, Vec::new(), inst.tol())
}

/// File form of a windowed boundary family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFamily {
    pub window: Vec<String>,
    pub points: BTreeMap<String, Vec<ExtReal>>,
    pub rep_sequences: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub accumulation: Vec<AccumulationSpec>,
    /// Family tolerance; the instance tolerance when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// States where the family is expected to represent `u`; the whole
    /// window when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub represent_on: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccumulationSpec {
    pub sequence: Vec<String>,
    pub limit: String,
}

impl BoundaryFamily {
    /// Resolves labels against an instance and checks the family
    /// invariants: basepoint normalization, representative sequences
    /// ending near their point, and consistent accumulations.
    ///
    /// Representative sequences shorter than three states are read as
    /// witness sets of isolated points.
    pub fn resolve(&self, inst: &MartinInstance) -> Result<PointSet, KernelError> {
        let tol = self.tol.unwrap_or(inst.tol());
        let states = inst.states();
        let window = self
            .window
            .iter()
            .map(|l| states.resolve(l))
            .collect::<Result<Vec<_>, _>>()?;
        let mut problems = Vec::new();
        let mut points = Vec::with_capacity(self.points.len());
        for (name, vals) in &self.points {
            if vals.len() != window.len() {
                problems.push(format!(
                    "point `{name}` has {} values for a window of {}",
                    vals.len(),
                    window.len()
                ));
                continue;
            }
            let Some(seq) = self.rep_sequences.get(name) else {
                problems.push(format!("point `{name}` has no representative sequence"));
                continue;
            };
            let seq = seq
                .iter()
                .map(|l| states.resolve(l))
                .collect::<Result<Vec<_>, _>>()?;
            if seq.is_empty() {
                problems.push(format!("point `{name}` has an empty representative sequence"));
                continue;
            }
            let locator = if seq.len() < 3 {
                Locator::Witnesses(seq)
            } else {
                Locator::Sequence(seq)
            };
            points.push(Point {
                name: name.clone(),
                values: MpVector::new(vals.clone()),
                locator,
            });
        }
        let names: Vec<&str> = points.iter().map(|p| p.name.as_str()).collect();
        let lookup = |n: &str| {
            names
                .iter()
                .position(|&m| m == n)
                .ok_or_else(|| KernelError::UnknownPoint(n.to_string()))
        };
        let mut accumulation = Vec::with_capacity(self.accumulation.len());
        for acc in &self.accumulation {
            accumulation.push(Accumulation {
                sequence: acc.sequence.iter().map(|n| lookup(n)).collect::<Result<_, _>>()?,
                limit: lookup(&acc.limit)?,
            });
        }
        let set = PointSet::new(inst.n(), window, points, accumulation, tol);
        problems.extend(family_problems(inst, &set));
        if problems.is_empty() {
            Ok(set)
        } else {
            Err(KernelError::FamilyInvariant(problems))
        }
    }
}

fn family_problems(inst: &MartinInstance, set: &PointSet) -> Vec<String> {
    let tol = set.tol();
    let mut out = Vec::new();
    let b = inst.basepoint();
    for (p, pt) in set.points().iter().enumerate() {
        if let Some(v) = set.value(p, b) {
            if !v.approx_eq(ExtReal::ZERO, tol) {
                out.push(format!("point `{}` is {v} at the basepoint", pt.name));
            }
        }
        let checked: &[usize] = match &pt.locator {
            Locator::Witnesses(w) => w,
            Locator::Sequence(s) => &s[s.len() - 1..],
        };
        for &j in checked {
            let col = inst.martin_column(j).restrict(set.window());
            let dev = col.sup_distance(&pt.values);
            if dev > tol {
                out.push(format!(
                    "point `{}` is {dev} away from the column of `{}`",
                    pt.name,
                    inst.states().label(j)
                ));
            }
        }
    }
    for acc in set.accumulation() {
        if let Some(msg) = accumulation_problem(set, acc, inst.edge()) {
            out.push(msg);
        }
    }
    out
}

/// Pointwise convergence on the window: at every coordinate where the last
/// three points of the sequence agree, they must agree with the limit.
/// Coordinates still moving, and truncated edge states, are not judged.
fn accumulation_problem(set: &PointSet, acc: &Accumulation, edge: &[bool]) -> Option<String> {
    let tail = &acc.sequence[acc.sequence.len().saturating_sub(3)..];
    let limit = set.point(acc.limit);
    let mut settled = 0usize;
    for (k, &state) in set.window().iter().enumerate() {
        if edge[state] {
            continue;
        }
        let vals: Vec<ExtReal> = tail.iter().map(|&p| set.point(p).values.get(k)).collect();
        if let TailLimit::Converged(v) = tail_limit(&vals, set.tol()) {
            settled += 1;
            if !v.approx_eq(limit.values.get(k), set.tol()) {
                return Some(format!(
                    "sequence declared to converge to `{}` settles at {v} instead of {} at `{}`",
                    limit.name,
                    limit.values.get(k),
                    k
                ));
            }
        }
    }
    (settled == 0).then(|| format!("sequence converging to `{}` settles nowhere on the window", limit.name))
}

enum Aggregate<'a> {
    Max(&'a [usize]),
    Min(&'a [usize]),
    Tail(&'a [usize]),
}

fn outer_of(loc: &Locator) -> Aggregate<'_> {
    match loc {
        Locator::Witnesses(w) => Aggregate::Max(w),
        // keep the inner tail ahead of the outer one
        Locator::Sequence(s) if s.len() >= 6 => Aggregate::Tail(&s[..s.len() - 3]),
        Locator::Sequence(s) => Aggregate::Tail(s),
    }
}

fn inner_of(loc: &Locator) -> Aggregate<'_> {
    match loc {
        Locator::Witnesses(w) => Aggregate::Min(w),
        Locator::Sequence(s) => Aggregate::Tail(s),
    }
}

fn aggregate(
    agg: Aggregate<'_>,
    tol: f64,
    mut f: impl FnMut(usize) -> Result<ExtReal, KernelError>,
) -> Result<ExtReal, KernelError> {
    match agg {
        Aggregate::Max(w) => w.iter().try_fold(ExtReal::NEG_INF, |acc, &s| Ok(acc.oplus(f(s)?))),
        Aggregate::Min(w) => {
            let mut best: Option<ExtReal> = None;
            for &s in w {
                let v = f(s)?;
                best = Some(best.map_or(v, |b| b.min(v)));
            }
            Ok(best.unwrap_or(ExtReal::NEG_INF))
        }
        Aggregate::Tail(s) => {
            let tail = &s[s.len().saturating_sub(3)..];
            let vals = tail.iter().map(|&t| f(t)).collect::<Result<Vec<_>, _>>()?;
            tail_limit(&vals, tol)
                .value()
                .ok_or_else(|| KernelError::NonConvergent(format!("tail values {vals:?}")))
        }
    }
}

/// `H♭(z, w)`: limsup over `i -> z` of liminf over `j -> w` of
/// `A*_bi + A+_ij - A*_bj`.
pub fn h_flat(
    inst: &MartinInstance,
    set: &PointSet,
    z: usize,
    w: usize,
) -> Result<ExtReal, KernelError> {
    let tol = set.tol();
    let zl = &set.point(z).locator;
    let wl = &set.point(w).locator;
    aggregate(outer_of(zl), tol, |i| {
        aggregate(inner_of(wl), tol, |j| Ok(inst.flat_term(i, j)))
    })
}

/// Membership in the minimal Martin space: `H♭(w, w) = 0` within tolerance.
pub fn minimal_martin_space(inst: &MartinInstance, set: &PointSet) -> Result<Vec<bool>, KernelError> {
    (0..set.len())
        .map(|p| Ok(h_flat(inst, set, p, p)?.approx_eq(ExtReal::ZERO, set.tol())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiring::DEFAULT_TOL;
    use std::sync::Arc;

    fn kernel(labels: &[&str], entries: &[(&str, &str, f64)]) -> Kernel {
        let st = Arc::new(StateSpace::new(labels.iter().copied()).unwrap());
        Kernel::from_entries(st, entries.iter().map(|&(a, b, w)| (a, b, ExtReal::real(w)))).unwrap()
    }

    #[test]
    fn basepoint_row_is_zero() {
        let a = kernel(&["1", "2", "3"], &[("1", "2", -1.0), ("2", "3", -0.5), ("3", "1", -2.0)]);
        let inst = MartinInstance::new(a, "2", DEFAULT_TOL).unwrap();
        let k = inst.martin_kernel();
        for j in 0..3 {
            assert_eq!(k.get(1, j), ExtReal::ZERO);
        }
    }

    #[test]
    fn two_state_martin_kernel() {
        // A* = [[0, -1], [-2, 0]], basepoint 1: K = A* - row 1
        let a = kernel(&["1", "2"], &[("1", "2", -1.0), ("2", "1", -2.0)]);
        let inst = MartinInstance::new(a, "1", DEFAULT_TOL).unwrap();
        let k = inst.martin_kernel();
        assert_eq!(k.get(0, 0).value(), 0.0);
        assert_eq!(k.get(0, 1).value(), 0.0);
        assert_eq!(k.get(1, 0).value(), -2.0);
        assert_eq!(k.get(1, 1).value(), 1.0);
    }

    #[test]
    fn inaccessible_state_rejected() {
        let a = kernel(&["1", "2"], &[("2", "1", -1.0)]);
        assert_eq!(
            MartinInstance::new(a, "1", DEFAULT_TOL).unwrap_err(),
            KernelError::InaccessibleState("2".into())
        );
    }

    #[test]
    fn single_state_space() {
        let a = kernel(&["b"], &[("b", "b", 0.0)]);
        let inst = MartinInstance::new(a, "b", DEFAULT_TOL).unwrap();
        let set = finite_martin_space(&inst);
        assert_eq!(set.len(), 1);
        assert_eq!(set.point(0).values, MpVector::from_reals(&[0.0]));
    }

    #[test]
    fn duplicate_columns_merge() {
        // states 2 and 3 are copies: same in- and out-edges
        let a = kernel(
            &["1", "2", "3"],
            &[("1", "2", -1.0), ("1", "3", -1.0), ("2", "1", -1.0), ("3", "1", -1.0)],
        );
        let inst = MartinInstance::new(a, "1", DEFAULT_TOL).unwrap();
        let set = finite_martin_space(&inst);
        assert_eq!(set.len(), 3);
        let a = kernel(
            &["1", "2", "3"],
            &[
                ("1", "2", -1.0),
                ("1", "3", -1.0),
                ("2", "1", -1.0),
                ("3", "1", -1.0),
                ("2", "3", 0.0),
                ("3", "2", 0.0),
            ],
        );
        let inst = MartinInstance::new(a, "1", DEFAULT_TOL).unwrap();
        let set = finite_martin_space(&inst);
        assert_eq!(set.len(), 2);
        assert_eq!(set.point(1).locator, Locator::Witnesses(vec![1, 2]));
    }

    #[test]
    fn zero_diagonal_makes_every_column_minimal() {
        let a = kernel(
            &["1", "2", "3"],
            &[("1", "1", 0.0), ("2", "2", 0.0), ("3", "3", 0.0), ("1", "2", -1.0), ("2", "3", -2.0)],
        );
        let inst = MartinInstance::new(a, "1", DEFAULT_TOL).unwrap();
        let set = finite_martin_space(&inst);
        for p in 0..set.len() {
            assert_eq!(h_flat(&inst, &set, p, p).unwrap(), ExtReal::ZERO);
        }
        assert!(minimal_martin_space(&inst, &set).unwrap().iter().all(|&m| m));
    }

    #[test]
    fn columns_without_cycles_are_not_minimal() {
        let a = kernel(&["1", "2"], &[("1", "2", -1.0), ("2", "1", -2.0)]);
        let inst = MartinInstance::new(a, "1", DEFAULT_TOL).unwrap();
        let set = finite_martin_space(&inst);
        for p in 0..set.len() {
            assert_eq!(h_flat(&inst, &set, p, p).unwrap().value(), -3.0);
        }
    }

    #[test]
    fn family_requires_normalized_points() {
        let a = kernel(&["1", "2"], &[("1", "2", -1.0), ("2", "1", -2.0)]);
        let inst = MartinInstance::new(a, "1", DEFAULT_TOL).unwrap();
        let fam = BoundaryFamily {
            window: vec!["1".into(), "2".into()],
            points: BTreeMap::from([("p".to_string(), vec![ExtReal::real(1.0), ExtReal::real(-1.0)])]),
            rep_sequences: BTreeMap::from([("p".to_string(), vec!["1".to_string()])]),
            accumulation: vec![],
            tol: None,
            represent_on: vec![],
        };
        assert!(matches!(fam.resolve(&inst), Err(KernelError::FamilyInvariant(_))));
        let mut ok = fam.clone();
        ok.points.insert("p".into(), vec![ExtReal::ZERO, ExtReal::real(-2.0)]);
        assert!(ok.resolve(&inst).is_ok());
    }
}
