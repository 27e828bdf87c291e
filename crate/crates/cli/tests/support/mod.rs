#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use nesim_core::{AugmentedState, CommGraph, CournotGame, GameModel, QuadraticGame};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random spanning tree plus `extra` random chords; always connected.
pub fn random_connected_graph(n: usize, extra: usize, seed: u64) -> CommGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = (2..=n).map(|v| (rng.gen_range(1..v), v)).collect();
    for _ in 0..extra {
        let i = rng.gen_range(1..=n);
        let j = rng.gen_range(1..=n);
        if i != j {
            edges.push((i, j));
        }
    }
    CommGraph::from_edge_list(n, &edges).unwrap()
}

/// Strongly monotone affine-gradient game: symmetric part `B^T B + I`
/// plus a skew perturbation that leaves the modulus untouched.
pub fn random_pd_quadratic(n: usize, seed: u64) -> QuadraticGame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let s = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let q = b.transpose() * &b + DMatrix::identity(n, n) + (&s - s.transpose()) * 0.3;
    let r = DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
    let intervals = vec![(-1.5, 1.5); n];
    QuadraticGame::new(q, r, intervals).unwrap()
}

/// Single-market competition with every firm participating.
pub fn random_cournot(n: usize, seed: u64) -> CournotGame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quad = DVector::from_fn(n, |_, _| rng.gen_range(0.3..1.0));
    let lin = DVector::from_fn(n, |_, _| rng.gen_range(0.5..1.5));
    let intercept = rng.gen_range(8.0..12.0);
    let slope = rng.gen_range(0.5..1.5);
    CournotGame::new(
        DMatrix::from_element(1, n, 1.0),
        DVector::from_element(1, intercept),
        DVector::from_element(1, slope),
        quad,
        lin,
        DVector::from_element(n, 10.0),
        false,
    )
    .unwrap()
}

/// Feasible random starting state with zero duals.
pub fn random_feasible_state(game: &dyn GameModel, seed: u64) -> AugmentedState {
    let n = game.n_players();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks: Vec<DVector<f64>> = (0..n)
        .map(|i| {
            let mut block = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let (lo, hi) = game.action_interval(i);
            block[i] = rng.gen_range(lo..hi);
            block
        })
        .collect();
    AugmentedState::new(blocks).unwrap()
}
