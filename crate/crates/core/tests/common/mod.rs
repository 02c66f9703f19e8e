//! Random instances with dyadic weights, so that sums are exact.

#![allow(dead_code)]

use std::sync::Arc;

use maxplus_core::{ExtReal, Kernel, MartinInstance, MpVector, StateSpace, DEFAULT_TOL};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A multiple of 1/8 in [-5, 0].
pub fn dyadic(rng: &mut impl Rng) -> f64 {
    -(rng.gen_range(0..=40) as f64) / 8.0
}

pub fn states(n: usize) -> Arc<StateSpace> {
    Arc::new(StateSpace::new((0..n).map(|i| format!("s{i}"))).unwrap())
}

/// Entries in [-5, 0] ∪ {-inf}; `-inf` with probability `1 - density`.
pub fn random_kernel(rng: &mut impl Rng, n: usize, density: f64) -> Kernel {
    let st = states(n);
    Kernel::from_fn(st, |_, _| {
        if rng.gen_bool(density) {
            ExtReal::real(dyadic(rng))
        } else {
            ExtReal::NEG_INF
        }
    })
}

/// Zero diagonal and a spanning arborescence rooted at `s0`.
pub fn random_accessible(rng: &mut impl Rng, n: usize, density: f64, zero_diagonal: bool) -> Kernel {
    let mut a = random_kernel(rng, n, density);
    for k in 1..n {
        let parent = rng.gen_range(0..k);
        if a.get(parent, k).is_neg_inf() {
            a.set(parent, k, ExtReal::real(dyadic(rng)));
        }
    }
    if zero_diagonal {
        for i in 0..n {
            a.set(i, i, ExtReal::ZERO);
        }
    }
    a
}

pub fn random_instance(rng: &mut impl Rng, max_states: usize, zero_diagonal: bool) -> MartinInstance {
    let n = rng.gen_range(1..=max_states);
    let density = rng.gen_range(0.15..0.6);
    let a = random_accessible(rng, n, density, zero_diagonal);
    MartinInstance::new(a, "s0", DEFAULT_TOL).unwrap()
}

/// Max-plus combination of one to three Martin columns with dyadic weights.
pub fn random_combination(rng: &mut impl Rng, inst: &MartinInstance) -> MpVector {
    let n = inst.n();
    let terms = rng.gen_range(1..=3);
    let mut u = MpVector::constant(n, ExtReal::NEG_INF);
    for _ in 0..terms {
        let j = rng.gen_range(0..n);
        let lambda = rng.gen_range(-16..=16) as f64 / 8.0;
        u = u.oplus(&inst.martin_column(j).shift(lambda));
    }
    u
}

/// A walk along finite entries of `a`, of at most `len` steps.
pub fn random_walk(rng: &mut impl Rng, a: &Kernel, start: usize, len: usize) -> Vec<usize> {
    let mut path = vec![start];
    for _ in 0..len {
        let here = *path.last().unwrap();
        let next: Vec<usize> = (0..a.n()).filter(|&j| !a.get(here, j).is_neg_inf()).collect();
        if next.is_empty() {
            break;
        }
        path.push(next[rng.gen_range(0..next.len())]);
    }
    path
}

/// Supremum of path weights over paths of length 1..=max_len, by repeated products.
pub fn path_oracle(a: &Kernel, max_len: usize) -> Kernel {
    let n = a.n();
    let mut best = a.clone();
    let mut layer = a.clone();
    for _ in 1..max_len {
        layer = Kernel::from_fn(a.states_arc().clone(), |i, j| {
            (0..n)
                .map(|k| layer.get(i, k) + a.get(k, j))
                .fold(ExtReal::NEG_INF, ExtReal::oplus)
        });
        best = best.oplus(&layer).unwrap();
    }
    best
}
