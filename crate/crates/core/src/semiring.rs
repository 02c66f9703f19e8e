//! Max-plus scalars, vectors, kernels and Kleene closures.
//!
//! The scalar type is `f64` with `-inf` as the additive zero of the
//! semiring. `+inf` is never stored: a closure that would produce it fails
//! with [`SemiringError::DivergentStar`] and a witness cycle instead.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::collections::VecDeque;
use std::fmt;
use std::ops::{Add, Index};
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Default comparison tolerance used across the crate.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemiringError {
    #[error("duplicate state label `{0}`")]
    DuplicateState(String),
    #[error("unknown state label `{0}`")]
    UnknownState(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid scalar {0}: only finite values and -inf are allowed")]
    InvalidScalar(f64),
    #[error("closure diverges: positive cycle {} of weight {weight}", .cycle.join(" -> "))]
    DivergentStar { cycle: Vec<String>, weight: f64 },
}

/// An element of the max-plus semiring, a real number or `-inf`.
#[derive(Clone, Copy, PartialEq, Default)]
#[repr(transparent)]
pub struct ExtReal(f64);

impl ExtReal {
    pub const NEG_INF: ExtReal = ExtReal(f64::NEG_INFINITY);
    pub const ZERO: ExtReal = ExtReal(0.0);

    /// Wraps a finite real. Panics on NaN or infinities.
    pub fn real(v: f64) -> Self {
        assert!(v.is_finite(), "ExtReal::real called with {v}");
        ExtReal(v)
    }

    /// Accepts finite values and `-inf`; rejects NaN and `+inf`.
    pub fn from_f64(v: f64) -> Result<Self, SemiringError> {
        if v.is_finite() || v == f64::NEG_INFINITY {
            Ok(ExtReal(v))
        } else {
            Err(SemiringError::InvalidScalar(v))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_neg_inf(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// Semiring addition.
    #[inline]
    pub fn oplus(self, rhs: Self) -> Self {
        if rhs.0 > self.0 {
            rhs
        } else {
            self
        }
    }

    /// Ordinary subtraction `self - rhs`, undefined when `rhs` is `-inf`.
    pub fn checked_sub(self, rhs: Self) -> Option<Self> {
        if rhs.is_neg_inf() {
            None
        } else {
            Some(ExtReal(self.0 - rhs.0))
        }
    }

    /// Difference `self - rhs` as a plain float, with `-inf - -inf = 0`.
    ///
    /// This is the residual convention used by every check in the crate:
    /// two `-inf` sides agree exactly.
    pub fn residual(self, rhs: Self) -> f64 {
        match (self.is_neg_inf(), rhs.is_neg_inf()) {
            (true, true) => 0.0,
            (false, true) => f64::INFINITY,
            (true, false) => f64::NEG_INFINITY,
            (false, false) => self.0 - rhs.0,
        }
    }

    pub fn approx_eq(self, rhs: Self, tol: f64) -> bool {
        self.residual(rhs).abs() <= tol
    }
}

impl Eq for ExtReal {}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        // no NaN can be constructed
        self.0.partial_cmp(&other.0).unwrap()
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        ExtReal(self.0 + rhs.0)
    }
}

impl fmt::Debug for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_neg_inf() {
            f.write_str("-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.is_neg_inf() {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => ExtReal::from_f64(v).map_err(serde::de::Error::custom),
            Raw::Str(s) if s == "-inf" => Ok(ExtReal::NEG_INF),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"-inf\", got \"{s}\""
            ))),
        }
    }
}

/// Ordered, uniquely labelled state set shared by kernels over it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl StateSpace {
    pub fn new<I, S>(labels: I) -> Result<Self, SemiringError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(SemiringError::DuplicateState(l.clone()));
            }
        }
        Ok(StateSpace { labels, index })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn resolve(&self, label: &str) -> Result<usize, SemiringError> {
        self.index_of(label)
            .ok_or_else(|| SemiringError::UnknownState(label.to_string()))
    }
}

/// A vector over a state set, `u: S -> R_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MpVector(Vec<ExtReal>);

impl MpVector {
    pub fn new(values: Vec<ExtReal>) -> Self {
        MpVector(values)
    }

    pub fn from_reals(values: &[f64]) -> Self {
        MpVector(values.iter().map(|&v| ExtReal::real(v)).collect())
    }

    pub fn constant(n: usize, v: ExtReal) -> Self {
        MpVector(vec![v; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> ExtReal {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[ExtReal] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = ExtReal> + '_ {
        self.0.iter().copied()
    }

    /// Entries at the given state indices, in order.
    pub fn restrict(&self, states: &[usize]) -> MpVector {
        MpVector(states.iter().map(|&s| self.0[s]).collect())
    }

    /// Adds the same real constant to every entry.
    pub fn shift(&self, c: f64) -> MpVector {
        MpVector(self.0.iter().map(|&v| v + ExtReal::real(c)).collect())
    }

    pub fn oplus(&self, other: &MpVector) -> MpVector {
        MpVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| a.oplus(b))
                .collect(),
        )
    }

    /// Largest absolute entrywise residual; `-inf` entries must match.
    pub fn sup_distance(&self, other: &MpVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| a.residual(b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for MpVector {
    type Output = ExtReal;
    fn index(&self, i: usize) -> &ExtReal {
        &self.0[i]
    }
}

impl FromIterator<ExtReal> for MpVector {
    fn from_iter<T: IntoIterator<Item = ExtReal>>(iter: T) -> Self {
        MpVector(iter.into_iter().collect())
    }
}

/// A square max-plus matrix indexed by a [`StateSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    states: Arc<StateSpace>,
    data: Vec<f64>,
}

impl Kernel {
    /// The all `-inf` kernel.
    pub fn empty(states: Arc<StateSpace>) -> Self {
        let n = states.len();
        Kernel {
            states,
            data: vec![f64::NEG_INFINITY; n * n],
        }
    }

    /// The max-plus identity: `0` on the diagonal, `-inf` elsewhere.
    pub fn identity(states: Arc<StateSpace>) -> Self {
        let mut k = Kernel::empty(states);
        for i in 0..k.n() {
            k.set(i, i, ExtReal::ZERO);
        }
        k
    }

    pub fn from_fn(states: Arc<StateSpace>, mut f: impl FnMut(usize, usize) -> ExtReal) -> Self {
        let n = states.len();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j).value());
            }
        }
        Kernel { states, data }
    }

    /// Builds a kernel from labelled entries; absent pairs are `-inf`.
    pub fn from_entries<'a, I>(states: Arc<StateSpace>, entries: I) -> Result<Self, SemiringError>
    where
        I: IntoIterator<Item = (&'a str, &'a str, ExtReal)>,
    {
        let mut k = Kernel::empty(states);
        for (a, b, w) in entries {
            let i = k.states.resolve(a)?;
            let j = k.states.resolve(b)?;
            k.set(i, j, w);
        }
        Ok(k)
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn states_arc(&self) -> &Arc<StateSpace> {
        &self.states
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> ExtReal {
        ExtReal(self.data[i * self.n() + j])
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: ExtReal) {
        let n = self.n();
        self.data[i * n + j] = v.value();
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn column(&self, j: usize) -> MpVector {
        (0..self.n()).map(|i| self.get(i, j)).collect()
    }

    /// Finite entries in row-major order.
    pub fn finite_entries(&self) -> impl Iterator<Item = (usize, usize, ExtReal)> + '_ {
        let n = self.n();
        self.data
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(move |(k, &v)| (k / n, k % n, ExtReal(v)))
    }

    /// Copy with every diagonal entry set to `0`.
    pub fn with_zero_diagonal(&self) -> Kernel {
        let mut k = self.clone();
        for i in 0..k.n() {
            k.set(i, i, ExtReal::ZERO);
        }
        k
    }

    /// Entrywise `self <= other`.
    pub fn leq(&self, other: &Kernel) -> bool {
        self.data.len() == other.data.len()
            && self.data.iter().zip(&other.data).all(|(a, b)| a <= b)
    }

    pub fn oplus(&self, other: &Kernel) -> Result<Kernel, SemiringError> {
        self.check_same(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| if b > a { b } else { a })
            .collect();
        Ok(Kernel {
            states: self.states.clone(),
            data,
        })
    }

    /// Largest absolute entrywise difference; `-inf` patterns must match.
    pub fn sup_distance(&self, other: &Kernel) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| ExtReal(a).residual(ExtReal(b)).abs())
            .fold(0.0, f64::max)
    }

    fn check_same(&self, other: &Kernel) -> Result<(), SemiringError> {
        if self.n() != other.n() {
            return Err(SemiringError::DimensionMismatch {
                expected: self.n(),
                got: other.n(),
            });
        }
        Ok(())
    }
}

/// `(A u)_i = max_j (A_ij + u_j)`.
pub fn mat_vec(a: &Kernel, u: &MpVector) -> Result<MpVector, SemiringError> {
    if u.len() != a.n() {
        return Err(SemiringError::DimensionMismatch {
            expected: a.n(),
            got: u.len(),
        });
    }
    Ok((0..a.n())
        .map(|i| {
            a.row(i)
                .iter()
                .zip(u.as_slice())
                .fold(ExtReal::NEG_INF, |acc, (&aij, &uj)| {
                    acc.oplus(ExtReal(aij) + uj)
                })
        })
        .collect())
}

/// Max-plus matrix product.
pub fn mat_mul(a: &Kernel, b: &Kernel) -> Result<Kernel, SemiringError> {
    a.check_same(b)?;
    let n = a.n();
    let mut out = vec![f64::NEG_INFINITY; n * n];
    for i in 0..n {
        let orow = &mut out[i * n..(i + 1) * n];
        for (k, &aik) in a.row(i).iter().enumerate() {
            if aik == f64::NEG_INFINITY {
                continue;
            }
            relax_row(orow, aik, b.row(k));
        }
    }
    Ok(Kernel {
        states: a.states.clone(),
        data: out,
    })
}

#[inline]
fn relax_row(target: &mut [f64], offset: f64, source: &[f64]) {
    for (t, &s) in target.iter_mut().zip(source) {
        let v = offset + s;
        *t = if v > *t { v } else { *t };
    }
}

/// `A+` and `A*` of a kernel, together with the kernel itself.
#[derive(Debug, Clone)]
pub struct Closure {
    base: Kernel,
    plus: Kernel,
    star: Kernel,
    tol: f64,
}

impl Closure {
    /// Semiring Floyd–Warshall. Any state carrying a cycle of weight
    /// `> tol` makes the closure diverge.
    pub fn compute(a: &Kernel, tol: f64) -> Result<Closure, SemiringError> {
        let n = a.n();
        let mut d = a.data.clone();
        let mut pivot = vec![0.0; n];
        for k in 0..n {
            pivot.copy_from_slice(&d[k * n..(k + 1) * n]);
            for i in 0..n {
                let dik = d[i * n + k];
                if dik == f64::NEG_INFINITY {
                    continue;
                }
                relax_row(&mut d[i * n..(i + 1) * n], dik, &pivot);
            }
        }
        if let Some(k) = (0..n).find(|&k| d[k * n + k] > tol) {
            let (cycle, weight) = positive_cycle_from(a, k);
            return Err(SemiringError::DivergentStar {
                cycle: cycle.iter().map(|&s| a.states.label(s).to_string()).collect(),
                weight,
            });
        }
        let plus = Kernel {
            states: a.states.clone(),
            data: d,
        };
        let mut star = plus.clone();
        for i in 0..n {
            let v = star.get(i, i).oplus(ExtReal::ZERO);
            star.set(i, i, v);
        }
        Ok(Closure {
            base: a.clone(),
            plus,
            star,
            tol,
        })
    }

    pub fn base(&self) -> &Kernel {
        &self.base
    }

    pub fn plus(&self) -> &Kernel {
        &self.plus
    }

    pub fn star(&self) -> &Kernel {
        &self.star
    }

    /// A path of length `>= 1` from `i` to `j` whose weight is `A+_ij`
    /// (up to `tol` per step). `None` when `A+_ij = -inf`.
    pub fn plus_path(&self, i: usize, j: usize) -> Option<Vec<usize>> {
        let target = self.plus.get(i, j);
        if target.is_neg_inf() {
            return None;
        }
        let first = (0..self.base.n()).find(|&s| {
            let w = self.base.get(i, s);
            !w.is_neg_inf() && (w + self.star.get(s, j)).value() >= target.value() - self.tol
        })?;
        let mut path = vec![i];
        path.extend(self.star_path(first, j)?);
        Some(path)
    }

    /// A simple path from `i` to `j` (length 0 when `i == j`) of weight
    /// `A*_ij`: breadth-first search over the edges that are tight for `j`.
    pub fn star_path(&self, i: usize, j: usize) -> Option<Vec<usize>> {
        if i == j {
            return Some(vec![i]);
        }
        if self.star.get(i, j).is_neg_inf() {
            return None;
        }
        let n = self.base.n();
        let mut prev = vec![usize::MAX; n];
        prev[i] = i;
        let mut queue = VecDeque::from([i]);
        while let Some(c) = queue.pop_front() {
            let here = self.star.get(c, j).value();
            for (s, &w) in self.base.row(c).iter().enumerate() {
                if prev[s] != usize::MAX || w == f64::NEG_INFINITY {
                    continue;
                }
                if w + self.star.get(s, j).value() < here - self.tol {
                    continue;
                }
                prev[s] = c;
                if s == j {
                    let mut path = vec![j];
                    let mut cur = j;
                    while cur != i {
                        cur = prev[cur];
                        path.push(cur);
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(s);
            }
        }
        None
    }
}

/// Longest-path Bellman–Ford from `source`, which lies on a positive
/// cycle; returns one positive cycle and its weight.
fn positive_cycle_from(a: &Kernel, source: usize) -> (Vec<usize>, f64) {
    let n = a.n();
    let mut dist = vec![f64::NEG_INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    dist[source] = 0.0;
    let mut last = source;
    for _ in 0..n {
        let mut changed = None;
        for i in 0..n {
            if dist[i] == f64::NEG_INFINITY {
                continue;
            }
            for (j, &w) in a.row(i).iter().enumerate() {
                if w != f64::NEG_INFINITY && dist[i] + w > dist[j] {
                    dist[j] = dist[i] + w;
                    pred[j] = i;
                    changed = Some(j);
                }
            }
        }
        match changed {
            Some(j) => last = j,
            None => break,
        }
    }
    let mut v = last;
    for _ in 0..n {
        v = pred[v];
    }
    let mut cycle = vec![v];
    let mut cur = pred[v];
    while cur != v {
        cycle.push(cur);
        cur = pred[cur];
    }
    cycle.reverse();
    let weight = cycle
        .iter()
        .zip(cycle.iter().cycle().skip(1))
        .map(|(&x, &y)| a.get(x, y).value())
        .sum();
    (cycle, weight)
}

/// `A+`, the supremum of path weights over paths of length at least one.
pub fn kleene_plus(a: &Kernel) -> Result<Kernel, SemiringError> {
    Ok(Closure::compute(a, DEFAULT_TOL)?.plus)
}

/// `A* = I ⊕ A+`.
pub fn kleene_star(a: &Kernel) -> Result<Kernel, SemiringError> {
    Ok(Closure::compute(a, DEFAULT_TOL)?.star)
}
