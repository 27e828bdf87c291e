//! Reference solvers: a centralized projected-gradient oracle for the
//! equilibrium, and a diminishing-step consensus-gradient baseline used in
//! speed comparisons.

use nalgebra::DVector;

use crate::admm::{ReferencePoint, StopReason, StoppingRule};
use crate::diagnostics::{consensus_residual, IterationTrace};
use crate::error::{Error, Result};
use crate::games::{pseudo_gradient, GameModel};
use crate::graph::CommGraph;

/// Step-size schedule for gradient-type iterations: either a constant or
/// `a / (k + b)`, which sums to infinity while its squares stay summable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    Diminishing { a: f64, b: f64 },
}

impl StepSchedule {
    pub fn constant(tau: f64) -> Result<Self> {
        if tau <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "tau".to_string(),
                message: "must be positive".to_string(),
            });
        }
        Ok(StepSchedule::Constant(tau))
    }

    pub fn diminishing(a: f64, b: f64) -> Result<Self> {
        if a <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "a".to_string(),
                message: "must be positive".to_string(),
            });
        }
        if b < 1.0 {
            return Err(Error::InvalidParameter {
                name: "b".to_string(),
                message: "must be at least 1".to_string(),
            });
        }
        Ok(StepSchedule::Diminishing { a, b })
    }

    /// Step used to compute iterate `k` (first computed iterate has k = 1).
    pub fn step(&self, k: u64) -> f64 {
        match *self {
            StepSchedule::Constant(tau) => tau,
            StepSchedule::Diminishing { a, b } => a / (k as f64 + b),
        }
    }
}

fn feasible_start(game: &dyn GameModel) -> Result<DVector<f64>> {
    let n = game.n_players();
    let point_at = |fraction: f64| {
        DVector::from_iterator(
            n,
            (0..n).map(|i| {
                let (lo, hi) = game.action_interval(i);
                lo + fraction * (hi - lo)
            }),
        )
    };
    let mut last_err = None;
    for fraction in [0.5, 0.25, 0.1, 0.01] {
        let x = point_at(fraction);
        match pseudo_gradient(game, &x) {
            Ok(_) => return Ok(x),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one candidate evaluated"))
}

/// Computes the equilibrium by centralized projected gradient:
/// `x <- T(x - tau F(x))` until the move's max-norm falls below `tol`.
///
/// With `tau = None` and exact game constants, uses `tau = mu / theta0^2`;
/// a supplied `tau` is validated against `0 < tau < 2 mu / theta0^2` when
/// constants exist, and only for positivity otherwise. Games without exact
/// constants require an explicit `tau`. The start point is the first entry
/// of a fixed ladder of box cross-sections at which the gradient is
/// defined.
pub fn centralized_ne(
    game: &dyn GameModel,
    tau: Option<f64>,
    tol: f64,
    max_iter: u64,
) -> Result<DVector<f64>> {
    if tol <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "tol".to_string(),
            message: "must be positive".to_string(),
        });
    }
    let limit = game.constants().map(|c| 2.0 * c.mu / (c.theta0 * c.theta0));
    let tau = match (tau, game.constants()) {
        (Some(t), _) => {
            if t <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "tau".to_string(),
                    message: "must be positive".to_string(),
                });
            }
            if let Some(cap) = limit {
                if t >= cap {
                    return Err(Error::InvalidParameter {
                        name: "tau".to_string(),
                        message: format!("must be below 2 mu / theta0^2 = {:.6e}", cap),
                    });
                }
            }
            t
        }
        (None, Some(c)) => c.mu / (c.theta0 * c.theta0),
        (None, None) => {
            return Err(Error::InvalidParameter {
                name: "tau".to_string(),
                message: "required for games without exact constants".to_string(),
            });
        }
    };

    let n = game.n_players();
    let mut x = feasible_start(game)?;
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let g = pseudo_gradient(game, &x)?;
        let mut moved = 0.0f64;
        let mut next = DVector::zeros(n);
        for i in 0..n {
            let (lo, hi) = game.action_interval(i);
            next[i] = (x[i] - tau * g[i]).clamp(lo, hi);
            moved = moved.max((next[i] - x[i]).abs());
        }
        x = next;
        residual = moved;
        if residual < tol {
            return Ok(x);
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual,
    })
}

/// Final state and trace of a baseline run.
#[derive(Debug, Clone)]
pub struct BaselineOutcome {
    pub estimates: Vec<DVector<f64>>,
    pub trace: Vec<IterationTrace>,
    pub iterations: u64,
    pub stop_reason: StopReason,
}

impl BaselineOutcome {
    pub fn action_profile(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.estimates.len(),
            self.estimates.iter().enumerate().map(|(i, x)| x[i]),
        )
    }
}

/// Consensus-gradient baseline, recorded every iteration for `max_iter`
/// iterations (no early stopping).
///
/// Per iteration: each agent averages toward its neighbors with weight
/// `gamma`, then takes a projected gradient step in its own action with the
/// scheduled step size; other components pass through the averaging only.
/// Requires `0 < gamma < 1 / (d* + 1)`.
pub fn baseline_consensus_gradient(
    game: &dyn GameModel,
    graph: &CommGraph,
    schedule: StepSchedule,
    gamma: f64,
    init: Vec<DVector<f64>>,
    max_iter: u64,
) -> Result<BaselineOutcome> {
    let stop = StoppingRule {
        tol: 0.0,
        max_iterations: max_iter,
        record_every: 1,
    };
    baseline_run(game, graph, schedule, gamma, init, stop, None)
}

/// [`baseline_consensus_gradient`] with trace cadence, residual stopping,
/// and optional reference-point stopping, mirroring the main solver's run
/// loop. A `tol` of zero disables residual stopping.
pub fn baseline_run(
    game: &dyn GameModel,
    graph: &CommGraph,
    schedule: StepSchedule,
    gamma: f64,
    init: Vec<DVector<f64>>,
    stop: StoppingRule,
    reference: Option<&ReferencePoint>,
) -> Result<BaselineOutcome> {
    let n = graph.n();
    if init.len() != n || game.n_players() != n {
        return Err(Error::InvalidParameter {
            name: "init".to_string(),
            message: format!(
                "sizes disagree: graph {}, init {}, game {}",
                n,
                init.len(),
                game.n_players()
            ),
        });
    }
    if init.iter().any(|x| x.len() != n) {
        return Err(Error::InvalidParameter {
            name: "init".to_string(),
            message: format!("each block must have length {}", n),
        });
    }
    if !graph.is_connected() {
        return Err(Error::Disconnected);
    }
    let cap = 1.0 / (graph.max_degree() as f64 + 1.0);
    if gamma <= 0.0 || gamma >= cap {
        return Err(Error::InvalidParameter {
            name: "gamma".to_string(),
            message: format!("must lie in (0, {:.6}) for this graph", cap),
        });
    }
    if stop.record_every == 0 {
        return Err(Error::InvalidParameter {
            name: "record_every".to_string(),
            message: "must be at least 1".to_string(),
        });
    }
    for (i, block) in init.iter().enumerate() {
        let (lo, hi) = game.action_interval(i);
        if block[i] < lo || block[i] > hi {
            return Err(Error::InvalidParameter {
                name: "init".to_string(),
                message: format!(
                    "own action of player {} is {} outside [{}, {}]",
                    i + 1,
                    block[i],
                    lo,
                    hi
                ),
            });
        }
    }
    if let Some(r) = reference {
        if r.x_star.len() != n {
            return Err(Error::InvalidParameter {
                name: "reference".to_string(),
                message: format!("x_star has length {}, expected {}", r.x_star.len(), n),
            });
        }
    }

    let profile = |blocks: &[DVector<f64>]| {
        DVector::from_iterator(n, blocks.iter().enumerate().map(|(i, x)| x[i]))
    };
    let initial_error = reference.map(|r| (profile(&init) - &r.x_star).norm());
    let row = |blocks: &[DVector<f64>], k: u64, delta: Option<f64>| {
        let rel_error = match (reference, initial_error) {
            (Some(r), Some(e0)) if e0 > 0.0 => (profile(blocks) - &r.x_star).norm() / e0,
            (Some(_), Some(_)) => 0.0,
            _ => f64::NAN,
        };
        IterationTrace {
            k,
            rel_error,
            consensus_residual: consensus_residual(blocks, graph),
            dual_sum_norm: f64::NAN,
            delta_x_norm: delta.unwrap_or(f64::NAN),
            delta_z_phi: f64::NAN,
            rate_product: f64::NAN,
        }
    };

    let mut trace = Vec::new();
    trace.push(row(&init, 0, None));
    let mut state = init;
    let mut reason = StopReason::IterationLimit;
    let mut k = 0u64;
    while k < stop.max_iterations {
        k += 1;
        let alpha = schedule.step(k);
        let mut mixed: Vec<DVector<f64>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut v = state[i].clone();
            for &j in graph.neighbors(i) {
                v += (&state[j] - &state[i]) * gamma;
            }
            mixed.push(v);
        }
        let mut next = mixed;
        let mut delta_squared = 0.0;
        let mut delta_inf = 0.0f64;
        for i in 0..n {
            let g = game.partial_gradient(i, &next[i]).map_err(|e| {
                Error::StepFailed {
                    iteration: k,
                    source: Box::new(Error::PlayerGradient {
                        player: i + 1,
                        source: Box::new(e),
                    }),
                }
            })?;
            let (lo, hi) = game.action_interval(i);
            next[i][i] = (next[i][i] - alpha * g).clamp(lo, hi);
        }
        for i in 0..n {
            let d = &next[i] - &state[i];
            delta_squared += d.norm_squared();
            delta_inf = delta_inf.max(d.amax());
        }

        let consensus = consensus_residual(&next, graph);
        let mut reason_now = None;
        if stop.tol > 0.0 && delta_inf + consensus < stop.tol {
            reason_now = Some(StopReason::ResidualTolerance);
        } else if let Some(r) = reference {
            if let Some(rtol) = r.stop_tol {
                if (profile(&next) - &r.x_star).amax() < rtol {
                    reason_now = Some(StopReason::ReferenceTolerance);
                }
            }
        }

        let finished = reason_now.is_some() || k == stop.max_iterations;
        if k % stop.record_every == 0 || finished {
            trace.push(row(&next, k, Some(delta_squared.sqrt())));
        }
        state = next;
        if let Some(r) = reason_now {
            reason = r;
            break;
        }
    }

    Ok(BaselineOutcome {
        estimates: state,
        trace,
        iterations: k,
        stop_reason: reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{CournotGame, QuadraticGame};
    use approx::assert_relative_eq;
    use nalgebra::{dvector, DMatrix};

    fn two_firm_game() -> CournotGame {
        CournotGame::new(
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            dvector![10.0],
            dvector![1.0],
            dvector![0.5, 0.5],
            dvector![1.0, 1.0],
            dvector![10.0, 10.0],
            false,
        )
        .unwrap()
    }

    fn k2() -> CommGraph {
        CommGraph::from_edge_list(2, &[(1, 2)]).unwrap()
    }

    #[test]
    fn schedule_values() {
        let s = StepSchedule::diminishing(2.0, 1.0).unwrap();
        assert_eq!(s.step(1), 1.0);
        assert_eq!(s.step(3), 0.5);
        assert_eq!(StepSchedule::constant(0.1).unwrap().step(99), 0.1);
    }

    #[test]
    fn schedule_rejects_bad_parameters() {
        assert!(StepSchedule::constant(0.0).is_err());
        assert!(StepSchedule::diminishing(0.0, 1.0).is_err());
        assert!(StepSchedule::diminishing(1.0, 0.5).is_err());
    }

    #[test]
    fn oracle_finds_interior_equilibrium() {
        let game = two_firm_game();
        let x = centralized_ne(&game, Some(0.2), 1e-10, 100_000).unwrap();
        assert_relative_eq!(x[0], 2.25, epsilon = 1e-9);
        assert_relative_eq!(x[1], 2.25, epsilon = 1e-9);
        let default_tau = centralized_ne(&game, None, 1e-10, 100_000).unwrap();
        assert!((default_tau - x).amax() < 1e-8);
    }

    #[test]
    fn oracle_on_symmetric_zero_solution() {
        let game = QuadraticGame::new(
            DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]),
            dvector![0.0, 0.0],
            vec![(-1.0, 1.0), (-1.0, 1.0)],
        )
        .unwrap();
        let x = centralized_ne(&game, None, 1e-12, 100_000).unwrap();
        assert!(x.amax() < 1e-10, "got {}", x);
    }

    #[test]
    fn oracle_finds_boundary_equilibrium() {
        let game = QuadraticGame::new(
            DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]),
            dvector![-3.0, 0.0],
            vec![(-1.0, 1.0), (-1.0, 1.0)],
        )
        .unwrap();
        let x = centralized_ne(&game, None, 1e-12, 100_000).unwrap();
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(x[1], -0.5, epsilon = 1e-9);
    }

    #[test]
    fn oracle_validates_tau() {
        let game = two_firm_game();
        // 2 mu / theta0^2 = 0.25
        assert!(centralized_ne(&game, Some(0.25), 1e-8, 10).is_err());
        assert!(centralized_ne(&game, Some(-0.1), 1e-8, 10).is_err());
    }

    #[test]
    fn oracle_reports_nonconvergence() {
        let game = two_firm_game();
        let err = centralized_ne(&game, Some(0.2), 1e-12, 3).unwrap_err();
        match err {
            Error::NonConvergence { iterations, residual } => {
                assert_eq!(iterations, 3);
                assert!(residual > 0.0);
            }
            other => panic!("unexpected error {:?}", other),
        }
    }

    #[test]
    fn baseline_fixed_at_consensus_equilibrium() {
        let game = two_firm_game();
        let graph = k2();
        let star = dvector![2.25, 2.25];
        let schedule = StepSchedule::diminishing(1.0, 1.0).unwrap();
        let out = baseline_consensus_gradient(
            &game,
            &graph,
            schedule,
            0.3,
            vec![star.clone(), star.clone()],
            5,
        )
        .unwrap();
        for block in &out.estimates {
            assert!((block - &star).amax() < 1e-12);
        }
    }

    #[test]
    fn identical_blocks_reduce_to_projected_gradient() {
        let game = two_firm_game();
        let graph = k2();
        let common = dvector![1.0, 2.0];
        let schedule = StepSchedule::constant(0.1).unwrap();
        let out = baseline_consensus_gradient(
            &game,
            &graph,
            schedule,
            0.3,
            vec![common.clone(), common.clone()],
            1,
        )
        .unwrap();
        for i in 0..2 {
            let g = game.partial_gradient(i, &common).unwrap();
            let expected = (common[i] - 0.1 * g).clamp(0.0, 10.0);
            assert_relative_eq!(out.estimates[i][i], expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn baseline_rejects_unstable_gamma() {
        let game = two_firm_game();
        let graph = k2();
        let schedule = StepSchedule::constant(0.1).unwrap();
        let init = vec![dvector![1.0, 1.0], dvector![1.0, 1.0]];
        assert!(baseline_consensus_gradient(&game, &graph, schedule, 0.5, init, 1).is_err());
    }

    #[test]
    fn baseline_trace_has_no_dual_columns() {
        let game = two_firm_game();
        let graph = k2();
        let schedule = StepSchedule::diminishing(1.0, 1.0).unwrap();
        let init = vec![dvector![1.0, 0.5], dvector![0.5, 1.0]];
        let out = baseline_consensus_gradient(&game, &graph, schedule, 0.3, init, 3).unwrap();
        assert_eq!(out.trace.len(), 4);
        assert!(out.trace[0].delta_x_norm.is_nan());
        for row in &out.trace {
            assert!(row.dual_sum_norm.is_nan());
            assert!(row.delta_z_phi.is_nan());
        }
        assert!(out.trace[3].delta_x_norm > 0.0);
    }
}
