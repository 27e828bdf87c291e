mod common;

use nalgebra::DVector;
use proptest::prelude::*;

proptest! {
    #[test]
    fn laplacian_annihilates_constants(g in common::arb_connected_graph(10)) {
        let ones = DVector::from_element(g.n(), 1.0);
        prop_assert!((g.laplacian() * ones).amax() < 1e-12);
    }

    #[test]
    fn connectivity_shows_in_the_spectrum(g in common::arb_connected_graph(12)) {
        prop_assert!(g.is_connected());
        prop_assert!(g.algebraic_connectivity() > 1e-9);
        let spectrum = g.laplacian_spectrum();
        prop_assert!(spectrum[0].abs() < 1e-10);
        for pair in spectrum.windows(2) {
            prop_assert!(pair[0] <= pair[1] + 1e-12);
        }
    }

    #[test]
    fn spectral_radius_bounded_by_twice_max_degree(g in common::arb_connected_graph(12)) {
        prop_assert!(g.laplacian_spectral_radius() <= 2.0 * g.max_degree() as f64 + 1e-9);
    }

    #[test]
    fn fiedler_value_bounds_the_form_on_zero_mean_vectors(
        (g, raw) in common::arb_connected_graph(10)
            .prop_flat_map(|g| {
                let n = g.n();
                (Just(g), prop::collection::vec(-5.0..5.0f64, n))
            })
    ) {
        let n = g.n();
        let mut x = DVector::from_vec(raw);
        let mean = x.sum() / n as f64;
        x.add_scalar_mut(-mean);
        let form = x.dot(&(g.laplacian() * &x));
        prop_assert!(form >= g.algebraic_connectivity() * x.norm_squared() - 1e-9);
    }
}

#[test]
fn split_graph_has_zero_fiedler_value() {
    let g = common::two_component_graph(3, 5);
    assert!(!g.is_connected());
    assert!(g.algebraic_connectivity() < 1e-10);
}
