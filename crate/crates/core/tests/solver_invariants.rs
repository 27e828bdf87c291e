mod common;

use nalgebra::{DMatrix, DVector};
use nesim_core::{
    lyapunov_difference_series, ne_residual, proximal_metric, restricted_monotonicity_probe, run,
    step, step_vectorized, theory_constants, AdmmParams, Error, GameModel, RateControlGame,
    StopReason, StoppingRule,
};
use proptest::prelude::*;

/// Exact constants plus the graph give a concrete penalty threshold.
fn penalty_floor(game: &nesim_core::CournotGame, graph: &nesim_core::CommGraph) -> f64 {
    let constants = game.cournot_constants().unwrap();
    nesim_core::c_min(
        constants.theta,
        constants.theta0,
        constants.mu,
        graph.algebraic_connectivity(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn dual_variable_sums_stay_at_zero(
        n in 2usize..5,
        game_seed in 0u64..1000,
        init_seed in 0u64..1000,
    ) {
        let game = common::random_pd_quadratic(n, game_seed);
        let graph = common::random_connected_graph(n, 2, game_seed ^ 0x5eed);
        let params = AdmmParams::uniform(1.0, 10.0, 20.0, n).unwrap();
        let init = common::random_feasible_state(&game, init_seed);
        let stop = StoppingRule { tol: 0.0, max_iterations: 120, record_every: 1 };
        let out = run(&game, &graph, &params, init, stop).unwrap();
        for row in &out.trace {
            prop_assert!(row.dual_sum_norm < 1e-12 * (row.k as f64 + 1.0));
        }
    }

    #[test]
    fn own_actions_stay_inside_their_intervals(
        game_seed in 0u64..1000,
        init_seed in 0u64..1000,
    ) {
        let n = 3;
        let game = common::random_cournot(n, game_seed);
        let graph = common::random_connected_graph(n, 1, game_seed ^ 0xabcd);
        let params = AdmmParams::uniform(1.0, 40.0, 10.0, n).unwrap();
        let mut state = common::random_feasible_state(&game, init_seed);
        for _ in 0..60 {
            state = step(&state, &game, &graph, &params).unwrap();
            for i in 0..n {
                let (lo, hi) = game.action_interval(i);
                let own = state.estimates()[i][i];
                prop_assert!(own >= lo - 1e-12 && own <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn dual_updates_follow_the_disagreement_rule(
        n in 2usize..6,
        game_seed in 0u64..1000,
        init_seed in 0u64..1000,
    ) {
        let game = common::random_pd_quadratic(n, game_seed);
        let graph = common::random_connected_graph(n, 2, game_seed ^ 0x77);
        let params = AdmmParams::uniform(0.7, 5.0, 12.0, n).unwrap();
        let state = common::burned_in_state(&game, &graph, &params, init_seed, 4);
        let next = step(&state, &game, &graph, &params).unwrap();
        for i in 0..n {
            let mut disagreement = state.estimates()[i].clone() * graph.degree(i) as f64;
            for &j in graph.neighbors(i) {
                disagreement -= &state.estimates()[j];
            }
            let expected = &state.duals()[i] + disagreement * params.c();
            let gap = (&next.duals()[i] - &expected).amax();
            prop_assert!(gap < 1e-9 * (1.0 + expected.amax()));
        }
    }

    #[test]
    fn per_agent_and_stacked_updates_agree(
        n in 2usize..=8,
        game_seed in 0u64..1000,
        init_seed in 0u64..1000,
    ) {
        let game = common::random_pd_quadratic(n, game_seed);
        let graph = common::random_connected_graph(n, 3, game_seed ^ 0xf00d);
        let params = AdmmParams::uniform(1.0, 8.0, 15.0, n).unwrap();
        let state = common::burned_in_state(&game, &graph, &params, init_seed, 3);
        let a = step(&state, &game, &graph, &params).unwrap();
        let b = step_vectorized(&state, &game, &graph, &params).unwrap();
        prop_assert!(common::max_block_difference(a.estimates(), b.estimates()) < 1e-12);
        prop_assert!(common::max_block_difference(a.duals(), b.duals()) < 1e-12);
    }
}

#[test]
fn converged_runs_land_on_an_equilibrium() {
    for seed in 0..5 {
        let n = 2 + (seed as usize % 3);
        let game = common::random_pd_quadratic(n, 900 + seed);
        let graph = common::random_connected_graph(n, 2, 40 + seed);
        let constants = game.constants().unwrap();
        let lambda2 = graph.algebraic_connectivity();
        let floor = nesim_core::c_min(constants.theta, constants.theta0, constants.mu, lambda2)
            .unwrap();
        let params = AdmmParams::uniform(1.0, 1.5 * floor, 10.0, n).unwrap();
        let init = common::random_feasible_state(&game, 7 * seed + 1);
        let stop = StoppingRule { tol: 1e-10, max_iterations: 400_000, record_every: 100 };
        let out = run(&game, &graph, &params, init, stop).unwrap();
        assert_eq!(out.stop_reason, StopReason::ResidualTolerance, "seed {seed}");
        let profile = out.state.action_profile();
        let tau = constants.mu / (constants.theta0 * constants.theta0);
        let residual = ne_residual(&profile, &game, tau).unwrap();
        assert!(residual < 1e-6, "seed {seed}: equilibrium residual {residual}");
        let last = out.trace.last().unwrap();
        assert!(last.consensus_residual < 1e-12, "seed {seed}");
    }
}

#[test]
fn decrease_condition_implies_monotone_transition_measure() {
    let game = common::two_firm_game();
    let graph = common::k2();
    let params = AdmmParams::uniform(1.0, 12.0, 700.0, 2).unwrap();
    let theory = theory_constants(2.0, 4.0, 4.0, &graph, &params).unwrap();
    assert!(theory.mu_bar > 0.0);
    assert!(theory.beta_condition.satisfied);

    let init = common::random_feasible_state(&game, 3);
    let stop = StoppingRule { tol: 0.0, max_iterations: 2_000, record_every: 1 };
    let out = run(&game, &graph, &params, init, stop).unwrap();
    let series = lyapunov_difference_series(&out.trace).unwrap();
    assert_eq!(series.len(), 2_000);
    for pair in series.windows(2) {
        assert!(
            pair[1].1 <= pair[0].1 + 1e-12,
            "increase at k={}: {} -> {}",
            pair[1].0,
            pair[0].1,
            pair[1].1
        );
    }
}

#[test]
fn transition_measure_matches_weighted_quadratic_form() {
    let game = common::two_firm_game();
    let graph = common::k2();
    let params = AdmmParams::uniform(1.0, 12.0, 700.0, 2).unwrap();
    let metric = proximal_metric(&params, &graph).unwrap();

    let start = common::random_feasible_state(&game, 11);
    let replay_start =
        nesim_core::AugmentedState::new(start.estimates().to_vec()).unwrap();
    let stop = StoppingRule { tol: 0.0, max_iterations: 6, record_every: 1 };
    let out = run(&game, &graph, &params, start, stop).unwrap();
    assert_eq!(out.trace.len(), 7);

    let mut state = replay_start;
    for row in &out.trace[1..] {
        let next = step(&state, &game, &graph, &params).unwrap();
        let weighted =
            common::weighted_block_distance(&metric, next.estimates(), state.estimates());
        let residual = nesim_core::consensus_residual(next.estimates(), &graph);
        let expected = weighted + params.c() * residual;
        assert!(
            (row.delta_z_phi - expected).abs() < 1e-12 * (1.0 + expected.abs()),
            "k={}",
            row.k
        );
        state = next;
    }
}

#[test]
fn weighted_distance_to_equilibrium_decreases_after_transient() {
    let game = common::two_firm_game();
    let graph = common::k2();
    let params = AdmmParams::uniform(1.0, 12.0, 700.0, 2).unwrap();
    let metric = proximal_metric(&params, &graph).unwrap();
    let star = DVector::from_vec(vec![2.25, 2.25]);
    let target = vec![star.clone(), star];

    let mut state = common::random_feasible_state(&game, 3);
    let mut first = 0.0;
    let mut previous = f64::INFINITY;
    for k in 1..=3_000u64 {
        state = step(&state, &game, &graph, &params).unwrap();
        let value = common::weighted_block_distance(&metric, state.estimates(), &target);
        if k == 1 {
            first = value;
        }
        if k > 500 {
            assert!(value <= previous + 1e-12, "distance rose at k={k}");
        }
        previous = value;
    }
    assert!(previous < 1e-3 * first, "first {first:.3e}, last {previous:.3e}");
}

#[test]
fn probe_reports_no_violations_above_the_penalty_floor() {
    for seed in 0..5 {
        let n = 2 + (seed as usize % 3);
        let game = common::random_cournot(n, 300 + seed);
        let graph = common::random_connected_graph(n, 2, 60 + seed);
        let c0 = 2.0 * penalty_floor(&game, &graph);
        let probe = restricted_monotonicity_probe(&game, &graph, c0, 300, 17 + seed).unwrap();
        assert_eq!(probe.violations, 0, "seed {seed}");
        assert!(probe.min_margin >= -1e-9, "seed {seed}: margin {}", probe.min_margin);
        assert!(probe.mu_bar > 0.0, "seed {seed}");
    }
}

#[test]
fn gradient_failures_carry_player_and_iteration_context() {
    let incidence = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
    let capacities = DVector::from_element(1, 1.0);
    let game = RateControlGame::new(incidence, capacities, 10.0, DVector::from_element(2, 10.0))
        .unwrap();
    let graph = common::k2();
    let params = AdmmParams::uniform(1.0, 5.0, 10.0, 2).unwrap();
    let blocks = vec![
        DVector::from_vec(vec![0.6, 0.6]),
        DVector::from_vec(vec![0.6, 0.6]),
    ];
    let init = nesim_core::AugmentedState::new(blocks).unwrap();
    let stop = StoppingRule { tol: 1e-8, max_iterations: 10, record_every: 1 };
    let err = run(&game, &graph, &params, init, stop).unwrap_err();
    match err {
        Error::StepFailed { iteration, source } => {
            assert_eq!(iteration, 1);
            match *source {
                Error::PlayerGradient { player, source } => {
                    assert_eq!(player, 1);
                    assert!(matches!(*source, Error::CapacityExhausted { .. }));
                }
                other => panic!("unexpected inner error: {other:?}"),
            }
        }
        other => panic!("unexpected error: {other:?}"),
    }
}

#[test]
fn trace_records_first_requested_and_final_iterations() {
    let game = common::two_firm_game();
    let graph = common::k2();
    let params = AdmmParams::uniform(1.0, 13.0, 10.0, 2).unwrap();
    let init = common::random_feasible_state(&game, 5);
    let stop = StoppingRule { tol: 0.0, max_iterations: 20, record_every: 7 };
    let out = run(&game, &graph, &params, init, stop).unwrap();
    let ks: Vec<u64> = out.trace.iter().map(|row| row.k).collect();
    assert_eq!(ks, vec![0, 7, 14, 20]);
    assert_eq!(out.stop_reason, StopReason::IterationLimit);
}
