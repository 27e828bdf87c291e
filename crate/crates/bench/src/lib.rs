//! Benchmark-only crate; see `benches/solver.rs`.
//!
//! Shared fixtures for the benchmarks live here so they stay in one place.

use nesim_core::presets::{cournot_instance, random_init, ring20_graph};
use nesim_core::{AdmmParams, AugmentedState, CommGraph, CournotGame};

/// The 20-firm preset with its ring-plus-chords graph and solver parameters.
pub fn twenty_firm_fixture() -> (CournotGame, CommGraph, AdmmParams, AugmentedState) {
    let game = cournot_instance(0).expect("preset instance");
    let graph = ring20_graph();
    let params = AdmmParams::uniform(1.0, 22.6, 10.0, 20).expect("valid parameters");
    let blocks = random_init(&game, (0.0, 0.5), (0.0, 1.0), 0).expect("valid ranges");
    let state = AugmentedState::new(blocks).expect("valid state");
    (game, graph, params, state)
}
