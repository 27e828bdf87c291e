//! Distributed equilibrium seeking over communication graphs.
//!
//! N players, each owning one interval-constrained action, seek a Nash
//! equilibrium while observing only neighbors on a connected graph. Every
//! player keeps a local estimate of the whole action profile; a synchronous
//! dual-augmented protocol drives the estimates to consensus on the
//! equilibrium using only neighbor exchanges and own-cost gradients.
//!
//! The crate provides:
//!
//! - [`graph`]: undirected communication graphs with Laplacian spectra;
//! - [`games`]: the game abstraction plus three concrete families
//!   (multi-market competition, congestion pricing, explicit quadratic);
//! - [`admm`]: the distributed solver, its stacked-operator twin, and the
//!   penalty/step-size theory with checkable sufficient conditions;
//! - [`reference`]: a centralized equilibrium oracle and a
//!   consensus-gradient baseline for speed comparisons;
//! - [`diagnostics`]: per-iteration metrics and numerical checks of the
//!   analytic guarantees;
//! - [`presets`]: the two shipped experiment instances;
//! - [`seeding`]: deterministic per-purpose random streams.

pub mod admm;
pub mod diagnostics;
pub mod error;
pub mod games;
pub mod graph;
pub mod linalg;
pub mod presets;
pub mod reference;
pub mod seeding;

pub use admm::{
    c_min, check_beta_condition, mu_bar, proximal_metric, run, run_with_reference, step,
    step_vectorized, theory_constants, theta_bar, AdmmParams, AugmentedState, BetaCondition,
    ReferencePoint, RunOutcome, StopReason, StoppingRule, TheoryConstants,
};
pub use diagnostics::{
    consensus_residual, consensus_residual_stacked, lyapunov_difference_series, ne_residual,
    restricted_monotonicity_probe, IterationTrace, MonotonicityProbe,
};
pub use error::{Error, Result};
pub use games::{
    estimate_constants_in_lower_box, estimate_constants_sampled, extended_pseudo_gradient,
    pseudo_gradient, project_action, CournotGame, GameConstants, GameModel, QuadraticGame,
    RateControlGame, SampledConstants,
};
pub use graph::{parse_edge_list, CommGraph};
pub use reference::{
    baseline_consensus_gradient, baseline_run, centralized_ne, BaselineOutcome, StepSchedule,
};
pub use seeding::{stream_rng, StreamPurpose};
