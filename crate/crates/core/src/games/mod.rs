//! Game abstraction: per-player costs on interval action sets, partial
//! gradients, and monotonicity / Lipschitz constants of the pseudo-gradient.

mod cournot;
mod quadratic;
mod rate_control;

pub use cournot::CournotGame;
pub use quadratic::QuadraticGame;
pub use rate_control::RateControlGame;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{min_symmetric_part_eigenvalue, symmetric_eigenvalues};
use crate::seeding::{stream_rng, StreamPurpose};

/// Exact constants of a game's pseudo-gradient maps.
///
/// `mu` is the strong-monotonicity modulus of the joint map F, `theta0` its
/// Lipschitz constant, and `theta` the Lipschitz constant of the extended map
/// in which player i evaluates its gradient on its own copy of the profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameConstants {
    pub mu: f64,
    pub theta0: f64,
    pub theta: f64,
}

/// An N-player game with interval action sets and smooth costs.
///
/// `y` arguments are full profiles (or a player's local estimate of one);
/// `partial_gradient(i, y)` evaluates player i's own-action derivative at `y`.
pub trait GameModel: Sync {
    fn n_players(&self) -> usize;

    /// Closed action interval `[lo_i, hi_i]` of player `i` (0-based).
    fn action_interval(&self, i: usize) -> (f64, f64);

    /// Cost of player `i` at profile `y`.
    fn cost(&self, i: usize, y: &DVector<f64>) -> Result<f64>;

    /// Derivative of player i's cost in its own action, at profile `y`.
    fn partial_gradient(&self, i: usize, y: &DVector<f64>) -> Result<f64>;

    /// Exact constants when the game admits them in closed form.
    fn constants(&self) -> Option<GameConstants> {
        None
    }
}

/// Stacks all players' own-action gradients at the common profile `x`.
pub fn pseudo_gradient(game: &dyn GameModel, x: &DVector<f64>) -> Result<DVector<f64>> {
    let n = game.n_players();
    let mut out = DVector::zeros(n);
    for i in 0..n {
        out[i] = game.partial_gradient(i, x)?;
    }
    Ok(out)
}

/// Evaluates each player's gradient on its own estimate block.
///
/// `stacked` concatenates N profile estimates of length N; component i of the
/// result reads only block i.
pub fn extended_pseudo_gradient(game: &dyn GameModel, stacked: &DVector<f64>) -> Result<DVector<f64>> {
    let n = game.n_players();
    if stacked.len() != n * n {
        return Err(Error::InvalidParameter {
            name: "stacked".to_string(),
            message: format!("expected length {}, got {}", n * n, stacked.len()),
        });
    }
    let mut out = DVector::zeros(n);
    for i in 0..n {
        let block = DVector::from_column_slice(&stacked.as_slice()[i * n..(i + 1) * n]);
        out[i] = game.partial_gradient(i, &block)?;
    }
    Ok(out)
}

/// Clamps `v` to player i's action interval.
pub fn project_action(game: &dyn GameModel, i: usize, v: f64) -> f64 {
    let (lo, hi) = game.action_interval(i);
    v.clamp(lo, hi)
}

/// Sampled estimates of the game constants, with sampler bookkeeping.
///
/// These are empirical bounds over the sampled points, not certificates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledConstants {
    pub mu: f64,
    pub theta0: f64,
    pub theta: f64,
    /// Samples at which all finite-difference evaluations succeeded.
    pub used: usize,
    /// Samples skipped because an evaluation left the cost's domain.
    pub skipped: usize,
}

const FD_STEP: f64 = 1e-6;

fn fd_step(x: f64) -> f64 {
    FD_STEP * x.abs().max(1.0)
}

/// Estimates `(mu, theta0, theta)` by central finite differences at sampled
/// profiles.
///
/// Per in-domain sample `x`: the Jacobian DF(x) contributes its smallest
/// symmetric-part eigenvalue to `mu` (minimum over samples) and its largest
/// singular value to `theta0` (maximum); `theta` is the maximum over samples
/// and players of the norm of player i's gradient row. Because each player's
/// extended gradient reads only its own block, the rows of the extended
/// Jacobian have disjoint supports and that row-norm maximum equals its
/// spectral norm. Out-of-domain samples are skipped and counted.
pub fn estimate_constants_sampled(
    game: &dyn GameModel,
    sampler: &mut dyn FnMut() -> DVector<f64>,
    n_samples: usize,
) -> Result<SampledConstants> {
    let n = game.n_players();
    let mut mu = f64::INFINITY;
    let mut theta0 = f64::NEG_INFINITY;
    let mut theta = f64::NEG_INFINITY;
    let mut used = 0usize;
    let mut skipped = 0usize;

    for _ in 0..n_samples {
        let x = sampler();
        if x.len() != n {
            return Err(Error::InvalidParameter {
                name: "sampler".to_string(),
                message: format!("expected points of length {}, got {}", n, x.len()),
            });
        }
        match sample_jacobian(game, &x) {
            Ok(jac) => {
                mu = mu.min(min_symmetric_part_eigenvalue(&jac));
                let gram = jac.transpose() * &jac;
                let top = *symmetric_eigenvalues(&gram).last().expect("n >= 1");
                theta0 = theta0.max(top.max(0.0).sqrt());
                for i in 0..n {
                    theta = theta.max(jac.row(i).norm());
                }
                used += 1;
            }
            Err(Error::CapacityExhausted { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if used == 0 {
        return Err(Error::InvalidGame(format!(
            "constant sampling failed: all {} samples out of domain",
            skipped
        )));
    }
    Ok(SampledConstants {
        mu,
        theta0,
        theta,
        used,
        skipped,
    })
}

/// Seeded [`estimate_constants_sampled`] over the lower part of the action
/// box: each coordinate is drawn uniformly from
/// `[lo_i, lo_i + fraction (hi_i - lo_i)]`.
///
/// Restricting to the lower part keeps samples away from capacity walls in
/// congestion-style games, where the upper box corners are infeasible.
pub fn estimate_constants_in_lower_box(
    game: &dyn GameModel,
    fraction: f64,
    n_samples: usize,
    seed: u64,
) -> Result<SampledConstants> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "fraction".to_string(),
            message: "must lie in (0, 1]".to_string(),
        });
    }
    let n = game.n_players();
    let ranges: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let (lo, hi) = game.action_interval(i);
            (lo, lo + fraction * (hi - lo))
        })
        .collect();
    let mut rng = stream_rng(seed, StreamPurpose::ConstantSampling, 0);
    let mut draw = || DVector::from_fn(n, |i, _| rng.gen_range(ranges[i].0..ranges[i].1));
    estimate_constants_sampled(game, &mut draw, n_samples)
}

/// Central-difference Jacobian of the pseudo-gradient at `x`.
fn sample_jacobian(game: &dyn GameModel, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = game.n_players();
    let mut jac = DMatrix::zeros(n, n);
    let mut point = x.clone();
    for j in 0..n {
        let h = fd_step(x[j]);
        point[j] = x[j] + h;
        let plus = pseudo_gradient(game, &point)?;
        point[j] = x[j] - h;
        let minus = pseudo_gradient(game, &point)?;
        point[j] = x[j];
        let col = (plus - minus) / (2.0 * h);
        jac.set_column(j, &col);
    }
    Ok(jac)
}

/// Central-difference derivative of player i's cost in coordinate `j`.
///
/// Test helper for validating closed-form gradients.
pub fn cost_finite_difference(
    game: &dyn GameModel,
    i: usize,
    y: &DVector<f64>,
    j: usize,
) -> Result<f64> {
    let h = fd_step(y[j]);
    let mut point = y.clone();
    point[j] = y[j] + h;
    let plus = game.cost(i, &point)?;
    point[j] = y[j] - h;
    let minus = game.cost(i, &point)?;
    Ok((plus - minus) / (2.0 * h))
}
