//! Deterministic random problem instances for tests and benchmarks.

use super::{FilterState, UncertainModel};
use crate::linalg::Mat;
use rand::Rng;

/// Random matrix with entries uniform in `(-0.5, 0.5)`.
fn random_mat(rows: usize, cols: usize, rng: &mut impl Rng) -> Mat {
    let mut m = Mat::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m[(r, c)] = rng.random_range(-0.5..0.5);
        }
    }
    m
}

/// Random symmetric positive-definite matrix, exactly symmetric by
/// construction (`AᵀA` plus a diagonal shift).
fn random_spd(dim: usize, rng: &mut impl Rng) -> Mat {
    let a = random_mat(dim, dim, rng);
    let mut m = a.transpose().matmul(&a);
    for i in 0..dim {
        m[(i, i)] += 0.5;
    }
    m
}

/// A valid random model with the given dimensions.
///
/// Covariances are symmetric positive definite, `K` is a perturbed
/// identity, and every envelope row is nonzero with probability one.
/// Deterministic for a given generator state.
pub fn random_model(
    n: usize,
    q: usize,
    p: usize,
    u_f: usize,
    u_h: usize,
    rng: &mut impl Rng,
) -> UncertainModel {
    let mut k = random_mat(p, p, rng).scale(0.2);
    for i in 0..p {
        k[(i, i)] += 1.0;
    }
    UncertainModel {
        n,
        q,
        p,
        f: random_mat(n, n, rng),
        g: random_mat(n, q, rng),
        h: random_mat(p, n, rng),
        k,
        q_cov: random_spd(q, rng),
        r_cov: random_spd(p, rng),
        n_f: random_mat(u_f, n, rng),
        n_g: random_mat(u_f, q, rng),
        n_h: random_mat(u_h, n, rng),
        n_k: random_mat(u_h, p, rng),
        measurement_fn: None,
    }
}

/// A valid random prior: entries uniform in `(-1, 1)`, covariance SPD.
pub fn random_state(n: usize, rng: &mut impl Rng) -> FilterState {
    let x = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    FilterState::new(x, random_spd(n, rng))
}

/// A random measurement vector with entries uniform in `(-1, 1)`.
pub fn random_measurement(p: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..p).map(|_| rng.random_range(-1.0..1.0)).collect()
}
