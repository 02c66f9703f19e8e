//! Finite stand-ins for limits along declared sequences.

use crate::semiring::ExtReal;

/// Outcome of inspecting the tail of a finite sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailLimit {
    /// The last three values agree pairwise within the tolerance; the
    /// limit is taken to be the last value.
    Converged(ExtReal),
    /// Strictly decreasing tail whose steps are not shrinking: read as a
    /// limit of `-inf`.
    DivergesDown,
    NonConvergent,
}

impl TailLimit {
    /// The limit as a scalar, with `DivergesDown` mapped to `-inf`.
    pub fn value(self) -> Option<ExtReal> {
        match self {
            TailLimit::Converged(v) => Some(v),
            TailLimit::DivergesDown => Some(ExtReal::NEG_INF),
            TailLimit::NonConvergent => None,
        }
    }
}

/// Three-point tail criterion. Sequences shorter than three must be
/// constant within `tol`.
pub fn tail_limit(values: &[ExtReal], tol: f64) -> TailLimit {
    let Some(&last) = values.last() else {
        return TailLimit::NonConvergent;
    };
    let tail = &values[values.len().saturating_sub(3)..];
    if tail.iter().all(|v| v.approx_eq(last, tol)) {
        return TailLimit::Converged(last);
    }
    if let [a, b, c] = *tail {
        if a.is_finite() && b.is_finite() && c.is_finite() {
            let first = a.value() - b.value();
            let second = b.value() - c.value();
            if second > tol && first > tol && second >= first - tol {
                return TailLimit::DivergesDown;
            }
        }
    }
    TailLimit::NonConvergent
}
