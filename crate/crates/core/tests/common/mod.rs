#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use nesim_core::{
    step, AdmmParams, AugmentedState, CommGraph, CournotGame, GameModel, QuadraticGame,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn two_firm_game() -> CournotGame {
    CournotGame::new(
        DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
        DVector::from_column_slice(&[10.0]),
        DVector::from_column_slice(&[1.0]),
        DVector::from_column_slice(&[0.5, 0.5]),
        DVector::from_column_slice(&[1.0, 1.0]),
        DVector::from_column_slice(&[10.0, 10.0]),
        false,
    )
    .unwrap()
}

pub fn k2() -> CommGraph {
    CommGraph::from_edge_list(2, &[(1, 2)]).unwrap()
}

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

/// Two disjoint rings; every vertex has neighbors but the graph splits.
pub fn two_component_graph(a: usize, b: usize) -> CommGraph {
    assert!(a >= 3 && b >= 3);
    let mut edges: Vec<(usize, usize)> = (1..=a).map(|i| (i, if i == a { 1 } else { i + 1 })).collect();
    edges.extend((a + 1..=a + b).map(|i| (i, if i == a + b { a + 1 } else { i + 1 })));
    CommGraph::from_edge_list(a + b, &edges).unwrap()
}

pub fn arb_connected_graph(max_n: usize) -> impl Strategy<Value = CommGraph> {
    (2..=max_n, 0..4usize, any::<u64>())
        .prop_map(|(n, extra, seed)| random_connected_graph(n, extra, seed))
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

/// A state with nonzero duals, reached by stepping a random start.
pub fn burned_in_state(
    game: &dyn GameModel,
    graph: &CommGraph,
    params: &AdmmParams,
    seed: u64,
    burn_in: usize,
) -> AugmentedState {
    let mut state = random_feasible_state(game, seed);
    for _ in 0..burn_in {
        state = step(&state, game, graph, params).unwrap();
    }
    state
}

/// `sum_{i,l} metric[i,l] <a_i - b_i, a_l - b_l>`.
pub fn weighted_block_distance(
    metric: &DMatrix<f64>,
    a: &[DVector<f64>],
    b: &[DVector<f64>],
) -> f64 {
    let n = a.len();
    let deltas: Vec<DVector<f64>> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mut acc = 0.0;
    for i in 0..n {
        for l in 0..n {
            let m = metric[(i, l)];
            if m != 0.0 {
                acc += m * deltas[i].dot(&deltas[l]);
            }
        }
    }
    acc
}

pub fn max_block_difference(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).amax())
        .fold(0.0, f64::max)
}
