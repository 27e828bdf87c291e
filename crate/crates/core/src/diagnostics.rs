//! Per-iteration convergence metrics and numerical checks of the solver's
//! analytic guarantees (decrease of the weighted difference, restricted
//! strong monotonicity of the augmented map, equilibrium residuals).

use nalgebra::DVector;
use rand::Rng;

use crate::admm::mu_bar;
use crate::error::{Error, Result};
use crate::games::{CournotGame, GameModel};
use crate::graph::CommGraph;
use crate::seeding::{stream_rng, StreamPurpose};

/// Scalar metrics of one recorded iteration.
///
/// `rel_error` is `|x(k)-x*| / |x(0)-x*|` (2-norms) when a reference point
/// is known, NaN otherwise. `consensus_residual` is the Laplacian quadratic
/// form of the stacked estimates, equal to the edge sum of squared block
/// disagreements. `dual_sum_norm` is the max-norm of the summed duals.
/// `delta_x_norm` is the 2-norm of the change of all estimates, NaN at
/// iteration 0. `delta_z_phi` is the weighted decrease quantity
/// `|x(k)-x(k-1)|^2_{H (x) I} + c * consensus_residual(k)` with H the
/// proximal metric; `rate_product` is `k * delta_z_phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationTrace {
    pub k: u64,
    pub rel_error: f64,
    pub consensus_residual: f64,
    pub dual_sum_norm: f64,
    pub delta_x_norm: f64,
    pub delta_z_phi: f64,
    pub rate_product: f64,
}

/// Sum over edges of the squared disagreement between the endpoint blocks.
pub fn consensus_residual(estimates: &[DVector<f64>], graph: &CommGraph) -> f64 {
    let mut acc = 0.0;
    for &(i, j) in graph.edges() {
        acc += (&estimates[i] - &estimates[j]).norm_squared();
    }
    acc
}

/// Laplacian quadratic form on the stacked vector; equals
/// [`consensus_residual`] of the blocks by the Laplacian identity. Kept as
/// an independently coded route for testing.
pub fn consensus_residual_stacked(stacked: &DVector<f64>, graph: &CommGraph) -> f64 {
    let n = graph.n();
    assert_eq!(stacked.len(), n * n, "stacked vector must have length N^2");
    let lap = graph.laplacian();
    let mut acc = 0.0;
    for t in 0..n {
        let component = DVector::from_iterator(n, (0..n).map(|i| stacked[i * n + t]));
        acc += component.dot(&(lap * &component));
    }
    acc
}

/// Extracts the weighted-decrease sequence `(k, delta_z_phi)` for `k >= 1`
/// from a trace recorded every iteration.
pub fn lyapunov_difference_series(trace: &[IterationTrace]) -> Result<Vec<(u64, f64)>> {
    for pair in trace.windows(2) {
        if pair[1].k != pair[0].k + 1 {
            return Err(Error::UnsupportedTrace(format!(
                "rows jump from k={} to k={}; record every iteration",
                pair[0].k, pair[1].k
            )));
        }
    }
    Ok(trace
        .iter()
        .filter(|row| row.k >= 1)
        .map(|row| (row.k, row.delta_z_phi))
        .collect())
}

/// Result of sampling the restricted strong-monotonicity inequality of the
/// augmented map against its predicted modulus `mu_bar`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityProbe {
    /// Smallest sampled `lhs - mu_bar * |x - y|^2`.
    pub min_margin: f64,
    /// Samples with margin below `-1e-9`.
    pub violations: usize,
    /// Smallest sampled `lhs / |x - y|^2`; negative values witness that the
    /// map without enough augmentation is not plainly monotone.
    pub min_rayleigh: f64,
    /// The modulus the margins are measured against.
    pub mu_bar: f64,
}

const PROBE_TOLERANCE: f64 = -1e-9;

fn coupled_map_gap(
    game: &CournotGame,
    graph: &CommGraph,
    c0: f64,
    blocks: &[DVector<f64>],
    y: &DVector<f64>,
) -> Result<(f64, f64)> {
    let n = blocks.len();
    let mut lhs = 0.0;
    let mut norm_squared = 0.0;
    let deltas: Vec<DVector<f64>> = blocks.iter().map(|b| b - y).collect();
    for i in 0..n {
        let gx = game.partial_gradient(i, &blocks[i])?;
        let gy = game.partial_gradient(i, y)?;
        lhs += deltas[i][i] * (gx - gy);
        norm_squared += deltas[i].norm_squared();
    }
    let mut disagreement = 0.0;
    for &(i, j) in graph.edges() {
        disagreement += (&deltas[i] - &deltas[j]).norm_squared();
    }
    lhs += c0 * disagreement;
    Ok((lhs, norm_squared))
}

/// Samples pairs (stacked estimates `x`, consensus point `1 (x) y`) uniformly
/// over the action box inflated by one unit per side and measures
/// `lhs - mu_bar * |x - y|^2`, where `lhs` pairs the estimate difference
/// with the difference of the augmented map (selected gradients plus
/// `c0` times the lifted Laplacian).
///
/// Runs for any `c0 >= 0`; with `c0` below the critical penalty the modulus
/// `mu_bar` may be nonpositive and the margins lose meaning as a guarantee,
/// while `min_rayleigh` still reports how far from monotone the map is.
pub fn restricted_monotonicity_probe(
    game: &CournotGame,
    graph: &CommGraph,
    c0: f64,
    n_samples: usize,
    seed: u64,
) -> Result<MonotonicityProbe> {
    let n = game.n_players();
    if graph.n() != n {
        return Err(Error::InvalidParameter {
            name: "graph".to_string(),
            message: format!("graph has {} vertices, game has {} players", graph.n(), n),
        });
    }
    if c0 < 0.0 {
        return Err(Error::InvalidParameter {
            name: "c0".to_string(),
            message: "must be nonnegative".to_string(),
        });
    }
    if n_samples == 0 {
        return Err(Error::InvalidParameter {
            name: "n_samples".to_string(),
            message: "need at least one sample".to_string(),
        });
    }
    let constants = game.cournot_constants()?;
    let modulus = mu_bar(
        constants.mu,
        constants.theta,
        constants.theta0,
        n,
        graph.algebraic_connectivity(),
        c0,
    )?;

    let ranges: Vec<(f64, f64)> = (0..n)
        .map(|t| {
            let (lo, hi) = game.action_interval(t);
            (lo - 1.0, hi + 1.0)
        })
        .collect();
    let mut rng = stream_rng(seed, StreamPurpose::MonotonicityProbe, 0);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
        DVector::from_iterator(n, ranges.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)))
    };

    let mut min_margin = f64::INFINITY;
    let mut min_rayleigh = f64::INFINITY;
    let mut violations = 0usize;
    for _ in 0..n_samples {
        let y = draw(&mut rng);
        let blocks: Vec<DVector<f64>> = (0..n).map(|_| draw(&mut rng)).collect();
        let (lhs, norm_squared) = coupled_map_gap(game, graph, c0, &blocks, &y)?;
        let margin = lhs - modulus * norm_squared;
        min_margin = min_margin.min(margin);
        if margin < PROBE_TOLERANCE {
            violations += 1;
        }
        if norm_squared > 0.0 {
            min_rayleigh = min_rayleigh.min(lhs / norm_squared);
        }
    }

    Ok(MonotonicityProbe {
        min_margin,
        violations,
        min_rayleigh,
        mu_bar: modulus,
    })
}

/// Natural residual `|x - T(x - tau F(x))|_inf` at the common profile `x`;
/// zero exactly at an equilibrium.
pub fn ne_residual(x: &DVector<f64>, game: &dyn GameModel, tau: f64) -> Result<f64> {
    if tau <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "tau".to_string(),
            message: "must be positive".to_string(),
        });
    }
    let n = game.n_players();
    if x.len() != n {
        return Err(Error::InvalidParameter {
            name: "x".to_string(),
            message: format!("length {} does not match {} players", x.len(), n),
        });
    }
    let mut residual = 0.0f64;
    for i in 0..n {
        let g = game.partial_gradient(i, x)?;
        let (lo, hi) = game.action_interval(i);
        let projected = (x[i] - tau * g).clamp(lo, hi);
        residual = residual.max((x[i] - projected).abs());
    }
    Ok(residual)
}
