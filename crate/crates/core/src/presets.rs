//! Shipped instances: the 20-firm multi-market competition and the 15-user
//! congestion-pricing game, with their communication graphs and seeded
//! coefficient draws.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::games::{CournotGame, GameModel, RateControlGame};
use crate::graph::CommGraph;
use crate::seeding::{stream_rng, StreamPurpose};

fn ring_edges(n: usize) -> Vec<(usize, usize)> {
    (1..=n).map(|i| (i, if i == n { 1 } else { i + 1 })).collect()
}

/// 20-vertex ring with chords (2,15) and (6,13); algebraic connectivity
/// near 0.102.
pub fn ring20_graph() -> CommGraph {
    let mut edges = ring_edges(20);
    edges.push((2, 15));
    edges.push((6, 13));
    CommGraph::from_edge_list(20, &edges).expect("preset graph is valid")
}

/// 15-vertex ring with chords (1,7) and (1,8); algebraic connectivity
/// near 0.180.
pub fn ring15_graph() -> CommGraph {
    let mut edges = ring_edges(15);
    edges.push((1, 7));
    edges.push((1, 8));
    CommGraph::from_edge_list(15, &edges).expect("preset graph is valid")
}

/// Named communication-graph presets accepted by configuration files.
pub fn graph_preset(name: &str) -> Option<CommGraph> {
    match name {
        "fig2-ring20" => Some(ring20_graph()),
        "example2-ring15" => Some(ring15_graph()),
        _ => None,
    }
}

/// Markets (1-based) each of the 20 firms participates in.
const MARKET_MEMBERSHIP: [&[usize]; 20] = [
    &[1],
    &[1, 2],
    &[2],
    &[3],
    &[1],
    &[1, 2, 3, 4],
    &[4],
    &[3, 4],
    &[3],
    &[1, 4, 6],
    &[4, 5],
    &[5],
    &[5],
    &[6],
    &[5, 6, 7],
    &[5, 7],
    &[6, 7],
    &[7],
    &[7],
    &[7],
];

/// 7x20 market-participation matrix of the competition preset.
pub fn market_participation() -> DMatrix<f64> {
    let mut a = DMatrix::zeros(7, 20);
    for (firm, markets) in MARKET_MEMBERSHIP.iter().enumerate() {
        for &market in *markets {
            a[(market - 1, firm)] = 1.0;
        }
    }
    a
}

/// Draws one instance of the 20-firm competition preset.
///
/// Quadratic and linear cost coefficients are uniform on [1,2); price
/// slopes are 0.01 per market; intercepts are a uniform [1,2) base plus
/// the slope-weighted load of all firms producing at `1 / n_i`. Rows of
/// the gradient map are normalized and each firm's action is capped at
/// `1 / n_i`.
pub fn cournot_instance(seed: u64) -> Result<CournotGame> {
    let a = market_participation();
    let mut rng = stream_rng(seed, StreamPurpose::GameGeneration, 0);
    let n = a.ncols();
    let m = a.nrows();
    let quad = DVector::from_iterator(n, (0..n).map(|_| rng.gen_range(1.0..2.0)));
    let lin = DVector::from_iterator(n, (0..n).map(|_| rng.gen_range(1.0..2.0)));
    let base = DVector::from_iterator(m, (0..m).map(|_| rng.gen_range(1.0..2.0)));

    let markets_per_firm = DVector::from_iterator(n, (0..n).map(|i| a.column(i).sum()));
    let caps = DVector::from_iterator(n, markets_per_firm.iter().map(|&c| 1.0 / c));
    let slopes = DVector::from_element(m, 0.01);
    let load = &a * &caps;
    let intercepts = base + load.component_mul(&slopes);

    CournotGame::new(a, intercepts, slopes, quad, lin, caps, true)
}

/// 16x15 link-user incidence of the congestion preset: user i loads links
/// i+1 and i+2 (1-based), the last user loads links 1 and 2.
pub fn rate_control_incidence() -> DMatrix<f64> {
    let mut incidence = DMatrix::zeros(16, 15);
    for user in 0..14 {
        incidence[(user + 1, user)] = 1.0;
        incidence[(user + 2, user)] = 1.0;
    }
    incidence[(0, 14)] = 1.0;
    incidence[(1, 14)] = 1.0;
    incidence
}

/// The congestion-pricing preset: 15 users on 16 unit-pattern links,
/// capacities 10, congestion weight 10, utility weights 10.
pub fn rate_control_instance() -> RateControlGame {
    RateControlGame::new(
        rate_control_incidence(),
        DVector::from_element(16, 10.0),
        10.0,
        DVector::from_element(15, 10.0),
    )
    .expect("preset instance is valid")
}

/// Seeded starting estimates: each agent draws its full block uniformly
/// from `others_range`, then redraws its own action from `own_range`
/// clamped to its action interval. Each agent uses an independent stream,
/// so one agent's draws never shift another's.
pub fn random_init(
    game: &dyn GameModel,
    own_range: (f64, f64),
    others_range: (f64, f64),
    seed: u64,
) -> Result<Vec<DVector<f64>>> {
    for (name, (lo, hi)) in [("own_range", own_range), ("others_range", others_range)] {
        if !(lo < hi) {
            return Err(Error::InvalidParameter {
                name: name.to_string(),
                message: format!("[{}, {}) is empty", lo, hi),
            });
        }
    }
    let n = game.n_players();
    Ok((0..n)
        .map(|i| {
            let mut rng = stream_rng(seed, StreamPurpose::Initialization, i as u64);
            let mut block = DVector::from_iterator(
                n,
                (0..n).map(|_| rng.gen_range(others_range.0..others_range.1)),
            );
            let (lo, hi) = game.action_interval(i);
            block[i] = rng.gen_range(own_range.0..own_range.1).clamp(lo, hi);
            block
        })
        .collect())
}
