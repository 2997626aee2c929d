//! Tiny canonical spaces used throughout the test suites and docs.

use alloc::vec;
use alloc::vec::Vec;

use crate::space::{FiniteLmms, TimeMatrix};

/// Uniform two-point space with a single causal relation of separation `t`:
/// τ(a,b) = t, all other entries 0, weights (½, ½).
pub fn two_point(t: f64) -> FiniteLmms {
    FiniteLmms::new(
        vec!["a".into(), "b".into()],
        TimeMatrix::from_rows(&[vec![0.0, t], vec![0.0, 0.0]]).unwrap(),
        vec![0.5, 0.5],
        None,
    )
    .unwrap()
}

/// Uniform chain of `n` points with τ(i,j) = (j − i)·step for i < j.
pub fn chain(n: usize, step: f64) -> FiniteLmms {
    let mut tau = TimeMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            tau.set(i, j, (j - i) as f64 * step);
        }
    }
    let w = vec![1.0 / n as f64; n];
    FiniteLmms::from_parts(tau, w, None).unwrap()
}

/// Five-point causal diamond plus an isolated point: 0 < 1,2 < 3 with unit
/// covering separations, τ(0,3) = 2, point 4 unrelated to everything;
/// uniform weights. A fixed instance with few fat matrix-law atoms.
pub fn diamond_plus_isolated() -> FiniteLmms {
    let mut tau = TimeMatrix::zeros(5);
    tau.set(0, 1, 1.0);
    tau.set(0, 2, 1.0);
    tau.set(1, 3, 1.0);
    tau.set(2, 3, 1.0);
    tau.set(0, 3, 2.0);
    FiniteLmms::from_parts(tau, vec![0.2; 5], None).unwrap()
}

/// The duplicated-point space: {a, b, b″} with τ(a,b) = τ(a,b″) = 1, all
/// else 0, weights (½, ¼, ¼). Its distance quotient is `two_point(1.0)`.
pub fn split_second_point() -> FiniteLmms {
    FiniteLmms::new(
        vec!["a".into(), "b".into(), "b''".into()],
        TimeMatrix::from_rows(&[
            vec![0.0, 1.0, 1.0],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap(),
        vec![0.5, 0.25, 0.25],
        None,
    )
    .unwrap()
}

/// All τ values of a space as a sorted vector (test helper).
pub fn sorted_entries(space: &FiniteLmms) -> Vec<f64> {
    let mut v = space.tau().flat().to_vec();
    v.sort_by(f64::total_cmp);
    v
}
