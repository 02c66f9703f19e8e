//! Inputs shared by the benchmarks.

use std::sync::Arc;

use maxplus_core::{ExtReal, Kernel, StateSpace};

/// Nearest-neighbour kernel on an `n x n` grid: weight `-1` per step, `0` on the diagonal.
pub fn grid_kernel(n: usize) -> Kernel {
    let labels = (0..n * n).map(|k| format!("{},{}", k / n, k % n));
    let states = Arc::new(StateSpace::new(labels).expect("labels are distinct"));
    Kernel::from_fn(states, |a, b| {
        let (ax, ay, bx, by) = (a / n, a % n, b / n, b % n);
        match ax.abs_diff(bx) + ay.abs_diff(by) {
            0 => ExtReal::ZERO,
            1 => ExtReal::real(-1.0),
            _ => ExtReal::NEG_INF,
        }
    })
}
