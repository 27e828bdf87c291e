//! The distributed solver: synchronous per-agent updates with local dual
//! variables, its stacked-operator formulation, and the parameter theory
//! (penalty bounds, restricted-monotonicity constants, decrease condition).
//!
//! Each of the N agents keeps a full estimate x^i of the joint action
//! profile plus a dual vector w^i. One iteration first refreshes every dual
//! from the neighborhood disagreement, then updates every estimate from the
//! previous snapshot and the fresh duals: the own component through a
//! projected proximal-gradient expression, the remaining components through
//! a weighted neighborhood average corrected by the dual.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::diagnostics::{consensus_residual, IterationTrace};
use crate::error::{require_positive, Error, Result};
use crate::games::GameModel;
use crate::graph::CommGraph;
use crate::linalg::{kron_with_identity, min_eigenvalue_2x2, symmetric_eigenvalues};

/// Penalty and proximal weights of the solver.
///
/// `c` scales the dual ascent and the consensus augmentation, `c0` is the
/// extra augmentation making the coupled map strongly monotone, and
/// `beta[i]` is agent i's proximal weight. Derived: `c_bar = c + c0` and
/// `alpha_i = beta_i + 2 c_bar |N_i|` (neighborhood-dependent).
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmParams {
    c: f64,
    c0: f64,
    beta: DVector<f64>,
}

impl AdmmParams {
    pub fn new(c: f64, c0: f64, beta: DVector<f64>) -> Result<Self> {
        require_positive("c", c)?;
        require_positive("c0", c0)?;
        if beta.is_empty() {
            return Err(Error::InvalidParameter {
                name: "beta".to_string(),
                message: "must not be empty".to_string(),
            });
        }
        for &b in beta.iter() {
            require_positive("beta", b)?;
        }
        Ok(AdmmParams { c, c0, beta })
    }

    /// All agents share one proximal weight.
    pub fn uniform(c: f64, c0: f64, beta: f64, n: usize) -> Result<Self> {
        Self::new(c, c0, DVector::from_element(n, beta))
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn c_bar(&self) -> f64 {
        self.c + self.c0
    }

    /// Per-agent effective step denominators `alpha_i = beta_i + 2 c_bar |N_i|`.
    pub fn alpha(&self, graph: &CommGraph) -> Result<DVector<f64>> {
        self.check_graph(graph)?;
        let c_bar = self.c_bar();
        Ok(DVector::from_iterator(
            self.beta.len(),
            self.beta
                .iter()
                .zip(graph.degrees())
                .map(|(&b, &d)| b + 2.0 * c_bar * d as f64),
        ))
    }

    fn check_graph(&self, graph: &CommGraph) -> Result<()> {
        if self.beta.len() != graph.n() {
            return Err(Error::InvalidParameter {
                name: "beta".to_string(),
                message: format!(
                    "length {} does not match graph size {}",
                    self.beta.len(),
                    graph.n()
                ),
            });
        }
        Ok(())
    }
}

/// All agents' estimate and dual vectors at one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedState {
    estimates: Vec<DVector<f64>>,
    duals: Vec<DVector<f64>>,
    iteration: u64,
}

impl AugmentedState {
    /// Starts at iteration 0 with the given estimates and zero duals.
    pub fn new(estimates: Vec<DVector<f64>>) -> Result<Self> {
        let n = estimates.len();
        if n < 2 {
            return Err(Error::InvalidParameter {
                name: "estimates".to_string(),
                message: "need at least 2 agents".to_string(),
            });
        }
        if estimates.iter().any(|x| x.len() != n) {
            return Err(Error::InvalidParameter {
                name: "estimates".to_string(),
                message: format!("each of the {} blocks must have length {}", n, n),
            });
        }
        let duals = vec![DVector::zeros(n); n];
        Ok(AugmentedState {
            estimates,
            duals,
            iteration: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.estimates.len()
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// Agent blocks x^i, each a full profile estimate.
    pub fn estimates(&self) -> &[DVector<f64>] {
        &self.estimates
    }

    pub fn duals(&self) -> &[DVector<f64>] {
        &self.duals
    }

    /// Concatenation of the estimate blocks (length N^2).
    pub fn stacked_estimates(&self) -> DVector<f64> {
        stack(&self.estimates)
    }

    /// Concatenation of the dual blocks (length N^2).
    pub fn stacked_duals(&self) -> DVector<f64> {
        stack(&self.duals)
    }

    /// The played actions: component i of block i.
    pub fn action_profile(&self) -> DVector<f64> {
        DVector::from_iterator(self.n(), self.estimates.iter().enumerate().map(|(i, x)| x[i]))
    }

    /// Sum of all dual vectors; zero (to rounding) under the protocol.
    pub fn dual_sum(&self) -> DVector<f64> {
        let mut acc = DVector::zeros(self.n());
        for w in &self.duals {
            acc += w;
        }
        acc
    }
}

fn stack(blocks: &[DVector<f64>]) -> DVector<f64> {
    let n = blocks.len();
    let mut out = DVector::zeros(n * n);
    for (i, b) in blocks.iter().enumerate() {
        out.rows_mut(i * n, n).copy_from(b);
    }
    out
}

fn unstack(v: &DVector<f64>, n: usize) -> Vec<DVector<f64>> {
    (0..n)
        .map(|i| DVector::from_column_slice(&v.as_slice()[i * n..(i + 1) * n]))
        .collect()
}

// ---------------------------------------------------------------------------
// Parameter theory
// ---------------------------------------------------------------------------

/// Smallest extra augmentation weight that restores strong monotonicity of
/// the coupled map: `c_min * lambda2 = (theta + theta0)^2 / (4 mu) + theta`.
pub fn c_min(theta: f64, theta0: f64, mu: f64, lambda2: f64) -> Result<f64> {
    require_positive("theta", theta)?;
    require_positive("theta0", theta0)?;
    require_positive("mu", mu)?;
    require_positive("lambda2", lambda2)?;
    let s = theta + theta0;
    Ok((s * s / (4.0 * mu) + theta) / lambda2)
}

/// Restricted strong-monotonicity modulus for augmentation weight `c0`:
/// the smaller eigenvalue of
/// `[[mu/N, -(theta+theta0)/(2 sqrt N)], [.., c0*lambda2 - theta]]`.
///
/// May be nonpositive when `c0 <= c_min`; callers interpret.
pub fn mu_bar(mu: f64, theta: f64, theta0: f64, n: usize, lambda2: f64, c0: f64) -> Result<f64> {
    require_positive("mu", mu)?;
    require_positive("theta", theta)?;
    require_positive("theta0", theta0)?;
    require_positive("lambda2", lambda2)?;
    if c0 < 0.0 {
        return Err(Error::InvalidParameter {
            name: "c0".to_string(),
            message: "must be nonnegative".to_string(),
        });
    }
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n".to_string(),
            message: format!("need at least 2 players, got {}", n),
        });
    }
    let nf = n as f64;
    let off = -(theta + theta0) / (2.0 * nf.sqrt());
    Ok(min_eigenvalue_2x2(mu / nf, off, c0 * lambda2 - theta))
}

/// Lipschitz constant of the coupled (augmented) map: `theta + 2 c0 d*`.
pub fn theta_bar(theta: f64, c0: f64, d_star: usize) -> f64 {
    theta + 2.0 * c0 * d_star as f64
}

/// The proximal metric `diag(beta) + 2 c_bar D - c L` weighting successive
/// estimate differences in the decrease analysis.
pub fn proximal_metric(params: &AdmmParams, graph: &CommGraph) -> Result<DMatrix<f64>> {
    params.check_graph(graph)?;
    let n = graph.n();
    let mut h = graph.laplacian() * (-params.c());
    let c_bar = params.c_bar();
    for i in 0..n {
        h[(i, i)] += params.beta()[i] + 2.0 * c_bar * graph.degree(i) as f64;
    }
    Ok(h)
}

/// Outcome of the proximal-weight condition
/// `lambda_min(diag(beta) + 2 c_bar D - c L) > theta_bar^2 / (2 mu_bar)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaCondition {
    pub satisfied: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// Checks the sufficient decrease condition. When `mu_bar <= 0` the right
/// side is reported as infinite and the condition as unsatisfied.
pub fn check_beta_condition(
    params: &AdmmParams,
    graph: &CommGraph,
    theta_bar: f64,
    mu_bar: f64,
) -> Result<BetaCondition> {
    let h = proximal_metric(params, graph)?;
    let lhs = symmetric_eigenvalues(&h)[0];
    let rhs = if mu_bar > 0.0 {
        theta_bar * theta_bar / (2.0 * mu_bar)
    } else {
        f64::INFINITY
    };
    Ok(BetaCondition {
        satisfied: lhs > rhs,
        lhs,
        rhs,
    })
}

/// All derived constants for one (game, graph, parameters) setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConstants {
    pub mu: f64,
    pub theta0: f64,
    pub theta: f64,
    pub lambda2: f64,
    pub d_star: usize,
    pub c_min: f64,
    pub mu_bar: f64,
    pub theta_bar: f64,
    pub beta_condition: BetaCondition,
}

/// Evaluates the full parameter theory from game constants (exact or
/// sampled), the graph spectrum, and the chosen parameters.
pub fn theory_constants(
    mu: f64,
    theta0: f64,
    theta: f64,
    graph: &CommGraph,
    params: &AdmmParams,
) -> Result<TheoryConstants> {
    let lambda2 = graph.algebraic_connectivity();
    let d_star = graph.max_degree();
    let c_min_value = c_min(theta, theta0, mu, lambda2)?;
    let mu_bar_value = mu_bar(mu, theta, theta0, graph.n(), lambda2, params.c0())?;
    let theta_bar_value = theta_bar(theta, params.c0(), d_star);
    let beta_condition = check_beta_condition(params, graph, theta_bar_value, mu_bar_value)?;
    Ok(TheoryConstants {
        mu,
        theta0,
        theta,
        lambda2,
        d_star,
        c_min: c_min_value,
        mu_bar: mu_bar_value,
        theta_bar: theta_bar_value,
        beta_condition,
    })
}

// ---------------------------------------------------------------------------
// Iteration
// ---------------------------------------------------------------------------

fn check_dimensions(
    state: &AugmentedState,
    game: &dyn GameModel,
    graph: &CommGraph,
    params: &AdmmParams,
) -> Result<()> {
    params.check_graph(graph)?;
    let n = graph.n();
    if state.n() != n || game.n_players() != n {
        return Err(Error::InvalidParameter {
            name: "state".to_string(),
            message: format!(
                "sizes disagree: graph {}, state {}, game {}",
                n,
                state.n(),
                game.n_players()
            ),
        });
    }
    Ok(())
}

/// One synchronous iteration in per-agent form.
///
/// Phase 1 refreshes every dual from the k-1 snapshot; phase 2 rebuilds
/// every estimate from the k-1 snapshot and the fresh duals. Agents are
/// independent within each phase, so both phases run in parallel without
/// affecting the result.
pub fn step(
    state: &AugmentedState,
    game: &dyn GameModel,
    graph: &CommGraph,
    params: &AdmmParams,
) -> Result<AugmentedState> {
    check_dimensions(state, game, graph, params)?;
    let n = state.n();
    let c = params.c();
    let c_bar = params.c_bar();
    let x = &state.estimates;

    let duals: Vec<DVector<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut disagreement = &x[i] * graph.degree(i) as f64;
            for &j in graph.neighbors(i) {
                disagreement -= &x[j];
            }
            &state.duals[i] + disagreement * c
        })
        .collect();

    let estimates: Vec<DVector<f64>> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<DVector<f64>> {
            let beta_i = params.beta()[i];
            let alpha_i = beta_i + 2.0 * c_bar * graph.degree(i) as f64;
            // s = sum over neighbors of (x^i + x^j)
            let mut s = &x[i] * graph.degree(i) as f64;
            for &j in graph.neighbors(i) {
                s += &x[j];
            }
            let mut block = (&x[i] * beta_i + &s * c_bar - &duals[i]) / alpha_i;
            let gradient = game.partial_gradient(i, &x[i]).map_err(|e| {
                Error::PlayerGradient {
                    player: i + 1,
                    source: Box::new(e),
                }
            })?;
            let own = (-gradient - duals[i][i] + beta_i * x[i][i] + c_bar * s[i]) / alpha_i;
            let (lo, hi) = game.action_interval(i);
            block[i] = own.clamp(lo, hi);
            Ok(block)
        })
        .collect::<Result<_>>()?;

    Ok(AugmentedState {
        estimates,
        duals,
        iteration: state.iteration + 1,
    })
}

/// One synchronous iteration through explicit stacked operators.
///
/// Produces the same state as [`step`] (within rounding) but computes with
/// Kronecker-lifted graph matrices on the length-N^2 vectors. Kept as an
/// independently coded route for equivalence testing; prefer [`step`] for
/// speed.
pub fn step_vectorized(
    state: &AugmentedState,
    game: &dyn GameModel,
    graph: &CommGraph,
    params: &AdmmParams,
) -> Result<AugmentedState> {
    check_dimensions(state, game, graph, params)?;
    let n = state.n();
    let x = state.stacked_estimates();
    let w = state.stacked_duals();

    let lap_lifted = kron_with_identity(graph.laplacian(), n);
    let sum_lifted = kron_with_identity(&(graph.adjacency() + DMatrix::from_diagonal(
        &DVector::from_iterator(n, graph.degrees().iter().map(|&d| d as f64)),
    )), n);

    let w_next = &w + &lap_lifted * &x * params.c();

    // selection of own-action gradients into their stacked slots
    let mut selected = DVector::zeros(n * n);
    for i in 0..n {
        let block = DVector::from_column_slice(&x.as_slice()[i * n..(i + 1) * n]);
        let g = game
            .partial_gradient(i, &block)
            .map_err(|e| Error::PlayerGradient {
                player: i + 1,
                source: Box::new(e),
            })?;
        selected[i * n + i] = g;
    }

    let mut scaled_prox = DVector::zeros(n * n);
    let mut inverse_alpha = DVector::zeros(n * n);
    for i in 0..n {
        let beta_i = params.beta()[i];
        let alpha_i = beta_i + 2.0 * params.c_bar() * graph.degree(i) as f64;
        for t in 0..n {
            scaled_prox[i * n + t] = beta_i * x[i * n + t];
            inverse_alpha[i * n + t] = 1.0 / alpha_i;
        }
    }

    let unprojected = (scaled_prox + &sum_lifted * &x * params.c_bar() - &w_next - selected)
        .component_mul(&inverse_alpha);

    let mut next = unprojected;
    for i in 0..n {
        let (lo, hi) = game.action_interval(i);
        let idx = i * n + i;
        next[idx] = next[idx].clamp(lo, hi);
    }

    Ok(AugmentedState {
        estimates: unstack(&next, n),
        duals: unstack(&w_next, n),
        iteration: state.iteration + 1,
    })
}

// ---------------------------------------------------------------------------
// Run loop
// ---------------------------------------------------------------------------

/// Loop termination settings.
///
/// The residual rule stops when
/// `max |x(k) - x(k-1)| + consensus_residual(x(k)) < tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    pub tol: f64,
    pub max_iterations: u64,
    /// Trace cadence; iteration 0 and the final iteration are always kept.
    pub record_every: u64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule {
            tol: 1e-8,
            max_iterations: 1_000_000,
            record_every: 1,
        }
    }
}

/// Optional known equilibrium against which the loop reports errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePoint {
    pub x_star: DVector<f64>,
    /// When set, the loop additionally stops once
    /// `max |action_profile - x_star| < stop_tol`.
    pub stop_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The combined step-and-consensus residual fell below `tol`.
    ResidualTolerance,
    /// The action profile reached the reference point's `stop_tol`.
    ReferenceTolerance,
    /// `max_iterations` reached.
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: AugmentedState,
    pub trace: Vec<IterationTrace>,
    pub stop_reason: StopReason,
}

/// Runs the solver from `init` until the stopping rule fires.
///
/// Requires a connected graph, feasible own-action initials, and zero
/// initial duals. The trace holds iteration 0, every `record_every`-th
/// iteration, and the final one.
pub fn run(
    game: &dyn GameModel,
    graph: &CommGraph,
    params: &AdmmParams,
    init: AugmentedState,
    stop: StoppingRule,
) -> Result<RunOutcome> {
    run_with_reference(game, graph, params, init, stop, None)
}

/// [`run`] with an optional reference point for error reporting and
/// reference-based stopping.
pub fn run_with_reference(
    game: &dyn GameModel,
    graph: &CommGraph,
    params: &AdmmParams,
    init: AugmentedState,
    stop: StoppingRule,
    reference: Option<&ReferencePoint>,
) -> Result<RunOutcome> {
    check_dimensions(&init, game, graph, params)?;
    if !graph.is_connected() {
        return Err(Error::Disconnected);
    }
    if stop.record_every == 0 {
        return Err(Error::InvalidParameter {
            name: "record_every".to_string(),
            message: "must be at least 1".to_string(),
        });
    }
    let n = init.n();
    for i in 0..n {
        let (lo, hi) = game.action_interval(i);
        let own = init.estimates[i][i];
        if own < lo || own > hi {
            return Err(Error::InvalidParameter {
                name: "init".to_string(),
                message: format!(
                    "own action of player {} is {} outside [{}, {}]",
                    i + 1,
                    own,
                    lo,
                    hi
                ),
            });
        }
        if init.duals[i].iter().any(|&v| v != 0.0) {
            return Err(Error::InvalidParameter {
                name: "init".to_string(),
                message: format!("duals of player {} must start at zero", i + 1),
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

    let metric = proximal_metric(params, graph)?;
    let initial_error = reference.map(|r| (init.action_profile() - &r.x_star).norm());
    let mut trace = Vec::new();
    trace.push(trace_row(&init, graph, None, params, &metric, reference, initial_error));

    let mut state = init;
    let mut reason = StopReason::IterationLimit;
    let mut k = 0u64;
    while k < stop.max_iterations {
        k += 1;
        let next = step(&state, game, graph, params).map_err(|e| Error::StepFailed {
            iteration: k,
            source: Box::new(e),
        })?;

        let delta_inf = max_abs_block_difference(&next.estimates, &state.estimates);
        let consensus = consensus_residual(&next.estimates, graph);
        let mut reason_now = None;
        if delta_inf + consensus < stop.tol {
            reason_now = Some(StopReason::ResidualTolerance);
        } else if let Some(r) = reference {
            if let Some(rtol) = r.stop_tol {
                if (next.action_profile() - &r.x_star).amax() < rtol {
                    reason_now = Some(StopReason::ReferenceTolerance);
                }
            }
        }

        let finished = reason_now.is_some() || k == stop.max_iterations;
        if k % stop.record_every == 0 || finished {
            trace.push(trace_row(
                &next,
                graph,
                Some(&state),
                params,
                &metric,
                reference,
                initial_error,
            ));
        }
        state = next;
        if let Some(r) = reason_now {
            reason = r;
            break;
        }
    }

    Ok(RunOutcome {
        state,
        trace,
        stop_reason: reason,
    })
}

fn max_abs_block_difference(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    let mut acc = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        for (u, v) in x.iter().zip(y.iter()) {
            acc = acc.max((u - v).abs());
        }
    }
    acc
}

fn trace_row(
    state: &AugmentedState,
    graph: &CommGraph,
    prev: Option<&AugmentedState>,
    params: &AdmmParams,
    metric: &DMatrix<f64>,
    reference: Option<&ReferencePoint>,
    initial_error: Option<f64>,
) -> IterationTrace {
    let consensus = consensus_residual(&state.estimates, graph);
    let rel_error = match (reference, initial_error) {
        (Some(r), Some(e0)) if e0 > 0.0 => (state.action_profile() - &r.x_star).norm() / e0,
        (Some(_), Some(_)) => 0.0,
        _ => f64::NAN,
    };
    let (delta_x_norm, delta_z_phi) = match prev {
        Some(p) => {
            let deltas: Vec<DVector<f64>> = state
                .estimates
                .iter()
                .zip(&p.estimates)
                .map(|(a, b)| a - b)
                .collect();
            let mut squared = 0.0;
            for d in &deltas {
                squared += d.norm_squared();
            }
            // metric-weighted squared norm of the estimate difference plus
            // the consensus quadratic form of the new iterate
            let mut weighted = 0.0;
            let n = deltas.len();
            for i in 0..n {
                let mut acc = DVector::zeros(n);
                for l in 0..n {
                    let m = metric[(i, l)];
                    if m != 0.0 {
                        acc += &deltas[l] * m;
                    }
                }
                weighted += acc.dot(&deltas[i]);
            }
            let dz = weighted + params.c() * consensus;
            (squared.sqrt(), dz)
        }
        None => (f64::NAN, f64::NAN),
    };
    let k = state.iteration;
    let rate_product = if delta_z_phi.is_nan() {
        f64::NAN
    } else {
        k as f64 * delta_z_phi
    };
    IterationTrace {
        k,
        rel_error,
        consensus_residual: consensus,
        dual_sum_norm: state.dual_sum().amax(),
        delta_x_norm,
        delta_z_phi,
        rate_product,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::CournotGame;
    use approx::assert_relative_eq;
    use nalgebra::dvector;

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
    fn c_min_examples() {
        assert_relative_eq!(c_min(1.0, 1.0, 1.0, 1.0).unwrap(), 2.0, max_relative = 1e-12);
        assert_relative_eq!(c_min(4.0, 4.0, 2.0, 1.0).unwrap(), 12.0, max_relative = 1e-12);
        let near_paper = c_min(1.099, 1.099, 1.001, 0.102).unwrap();
        assert!((near_paper - 22.5).abs() < 0.5, "got {}", near_paper);
    }

    #[test]
    fn c_min_rejects_nonpositive_inputs() {
        assert!(c_min(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(c_min(1.0, 1.0, 1.0, -0.5).is_err());
    }

    #[test]
    fn mu_bar_boundary_and_interior() {
        // c0 at the exact boundary: the 2x2 matrix is singular
        let boundary = mu_bar(1.0, 1.0, 1.0, 4, 1.0, 2.0).unwrap();
        assert!(boundary.abs() < 1e-12, "got {}", boundary);
        let interior = mu_bar(1.0, 1.0, 1.0, 4, 1.0, 3.0).unwrap();
        let expected = (2.25 - (3.0625_f64 + 1.0).sqrt()) / 2.0;
        assert_relative_eq!(interior, expected, max_relative = 1e-12);
    }

    #[test]
    fn mu_bar_limit_is_mu_over_n() {
        let v = mu_bar(1.0, 1.0, 1.0, 4, 1.0, 1e9).unwrap();
        assert_relative_eq!(v, 0.25, max_relative = 1e-6);
    }

    #[test]
    fn theta_bar_formula() {
        assert_eq!(theta_bar(4.0, 12.0, 3), 4.0 + 72.0);
    }

    #[test]
    fn beta_condition_on_two_agents() {
        // metric is [[b + 2 c_bar - c, c], [c, b + 2 c_bar - c]],
        // eigenvalues b + 2 c_bar - c -+ c, so lhs = b + 2 c0
        let graph = k2();
        let params = AdmmParams::uniform(1.0, 12.0, 10.0, 2).unwrap();
        let cond = check_beta_condition(&params, &graph, 1.0, 1.0).unwrap();
        assert_relative_eq!(cond.lhs, 10.0 + 24.0, max_relative = 1e-9);
        assert_relative_eq!(cond.rhs, 0.5, max_relative = 1e-12);
        assert!(cond.satisfied);
    }

    #[test]
    fn beta_condition_vacuous_when_mu_bar_nonpositive() {
        let graph = k2();
        let params = AdmmParams::uniform(1.0, 12.0, 10.0, 2).unwrap();
        let cond = check_beta_condition(&params, &graph, 1.0, -0.3).unwrap();
        assert!(!cond.satisfied);
        assert!(cond.rhs.is_infinite());
    }

    #[test]
    fn consensus_interior_fixed_point_is_stationary() {
        let game = two_firm_game();
        let graph = k2();
        let params = AdmmParams::uniform(1.0, 12.5, 1.0, 2).unwrap();
        let star = dvector![2.25, 2.25];
        let init = AugmentedState::new(vec![star.clone(), star.clone()]).unwrap();
        let next = step(&init, &game, &graph, &params).unwrap();
        for i in 0..2 {
            assert!((&next.estimates()[i] - &star).amax() < 1e-14);
            assert!(next.duals()[i].amax() < 1e-14);
        }
    }

    #[test]
    fn consensus_nonequilibrium_reduces_to_projected_gradient() {
        let game = two_firm_game();
        let graph = k2();
        let params = AdmmParams::uniform(1.0, 12.5, 1.0, 2).unwrap();
        let common = dvector![1.0, 2.0];
        let init = AugmentedState::new(vec![common.clone(), common.clone()]).unwrap();
        let next = step(&init, &game, &graph, &params).unwrap();
        let alpha = 1.0 + 2.0 * 13.5;
        for i in 0..2 {
            assert!(next.duals()[i].amax() < 1e-14);
            let g = game.partial_gradient(i, &common).unwrap();
            let expected = (common[i] - g / alpha).clamp(0.0, 10.0);
            assert_relative_eq!(next.estimates()[i][i], expected, max_relative = 1e-12);
            // other components stay on the consensus value
            let other = 1 - i;
            assert_relative_eq!(next.estimates()[i][other], common[other], max_relative = 1e-12);
        }
    }

    #[test]
    fn one_step_hand_trace() {
        let game = two_firm_game();
        let graph = k2();
        let params = AdmmParams::uniform(1.0, 12.5, 1.0, 2).unwrap();
        let init = AugmentedState::new(vec![dvector![0.0, 0.0], dvector![1.0, 1.0]]).unwrap();
        let next = step(&init, &game, &graph, &params).unwrap();
        assert_eq!(next.duals()[0], dvector![-1.0, -1.0]);
        assert_eq!(next.duals()[1], dvector![1.0, 1.0]);
        // alpha_1 = 1 + 2 * 13.5 = 28; own update (9 + 1 + 0 + 13.5) / 28
        assert_relative_eq!(next.estimates()[0][0], 23.5 / 28.0, max_relative = 1e-12);
        assert_eq!(next.iteration(), 1);
    }

    #[test]
    fn vectorized_step_matches_hand_trace() {
        let game = two_firm_game();
        let graph = k2();
        let params = AdmmParams::uniform(1.0, 12.5, 1.0, 2).unwrap();
        let init = AugmentedState::new(vec![dvector![0.0, 0.0], dvector![1.0, 1.0]]).unwrap();
        let a = step(&init, &game, &graph, &params).unwrap();
        let b = step_vectorized(&init, &game, &graph, &params).unwrap();
        for i in 0..2 {
            assert!((&a.estimates()[i] - &b.estimates()[i]).amax() < 1e-12);
            assert!((&a.duals()[i] - &b.duals()[i]).amax() < 1e-12);
        }
    }

    #[test]
    fn run_converges_on_two_firms() {
        let game = two_firm_game();
        let graph = k2();
        let params = AdmmParams::uniform(1.0, 13.0, 10.0, 2).unwrap();
        let init = AugmentedState::new(vec![dvector![0.5, 0.3], dvector![1.0, 0.2]]).unwrap();
        let stop = StoppingRule {
            tol: 1e-10,
            max_iterations: 200_000,
            record_every: 100,
        };
        let out = run(&game, &graph, &params, init, stop).unwrap();
        assert_eq!(out.stop_reason, StopReason::ResidualTolerance);
        let profile = out.state.action_profile();
        assert!((profile[0] - 2.25).abs() < 1e-4, "profile {}", profile);
        assert!((profile[1] - 2.25).abs() < 1e-4);
        // both blocks agree at the end
        let blocks = out.state.estimates();
        assert!((&blocks[0] - &blocks[1]).amax() < 1e-4);
    }

    #[test]
    fn zero_iteration_run_returns_init() {
        let game = two_firm_game();
        let graph = k2();
        let params = AdmmParams::uniform(1.0, 13.0, 10.0, 2).unwrap();
        let init = AugmentedState::new(vec![dvector![0.5, 0.3], dvector![1.0, 0.2]]).unwrap();
        let stop = StoppingRule {
            tol: 1e-10,
            max_iterations: 0,
            record_every: 1,
        };
        let out = run(&game, &graph, &params, init.clone(), stop).unwrap();
        assert_eq!(out.state, init);
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.trace[0].k, 0);
        assert_eq!(out.stop_reason, StopReason::IterationLimit);
    }

    #[test]
    fn run_rejects_disconnected_graph() {
        let game = CournotGame::new(
            DMatrix::from_row_slice(1, 4, &[1.0, 1.0, 1.0, 1.0]),
            dvector![10.0],
            dvector![1.0],
            DVector::from_element(4, 0.5),
            DVector::from_element(4, 1.0),
            DVector::from_element(4, 10.0),
            false,
        )
        .unwrap();
        let graph = CommGraph::from_edge_list(4, &[(1, 2), (3, 4)]).unwrap();
        let params = AdmmParams::uniform(1.0, 13.0, 10.0, 4).unwrap();
        let init = AugmentedState::new(vec![DVector::zeros(4); 4]).unwrap();
        let err = run(&game, &graph, &params, init, StoppingRule::default()).unwrap_err();
        assert_eq!(err, Error::Disconnected);
    }

    #[test]
    fn run_rejects_infeasible_initial_action() {
        let game = two_firm_game();
        let graph = k2();
        let params = AdmmParams::uniform(1.0, 13.0, 10.0, 2).unwrap();
        let init = AugmentedState::new(vec![dvector![-0.5, 0.3], dvector![1.0, 0.2]]).unwrap();
        assert!(run(&game, &graph, &params, init, StoppingRule::default()).is_err());
    }
}
