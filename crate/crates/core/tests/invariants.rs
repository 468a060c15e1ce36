mod common;

use infswap::lagrange::{minimize_with_constraint, LinearConstraint, RootOptions};
use infswap::ldp::{association_of, map_m, nu_sym, rate_i_unsym, rate_j, SYMMETRY_TOL};
use infswap::measure::total_variation;
use infswap::model::{glauber_rates, AdjacencyKind, Grid, Potential};
use infswap::swapchain::StateCodec;
use proptest::prelude::*;

use common::*;

fn potential_values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..3.0f64, n)
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01..1.0f64, n).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn glauber_dynamics_is_reversible_for_gibbs(
        (values, tau) in (3usize..20).prop_flat_map(|n| (potential_values(n), 0.05..2.0f64))
    ) {
        let grid = Grid::uniform(-1.0, 1.0, values.len(), AdjacencyKind::NearestNeighbor).unwrap();
        let potential = Potential::tabulated(values).unwrap();
        let chain = glauber_rates(&potential, &grid, tau).unwrap();
        let mu = &chain.stationary.probs;
        prop_assert!((mu.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(chain.rates.detailed_balance_violation(mu) < 1e-12);
        prop_assert!(chain.rates.is_irreducible());
        for x in 0..grid.len() {
            for (_, r) in chain.rates.row(x) {
                prop_assert!(r > 0.0 && r <= 1.0);
            }
            // generator rows sum to zero
            let ones = vec![1.0; grid.len()];
            prop_assert!(chain.rates.apply_generator(&ones)[x].abs() < 1e-12);
        }
    }

    #[test]
    fn codec_round_trips(n in 2usize..12, k in 1usize..5, seed: u64) {
        let codec = StateCodec::new(n, k);
        let idx = (seed as usize) % codec.size();
        let x = codec.decode(idx);
        prop_assert!(x.iter().all(|&c| c < n));
        prop_assert_eq!(codec.encode(&x), idx);
    }

    #[test]
    fn swap_generator_preserves_symmetrized_gibbs(seed: u64, n in 2usize..7, k in 2usize..4) {
        let chain = random_product_chain(n, k, &mut rng(seed));
        let ins = chain.ins_generator().unwrap();
        prop_assert!(ins.rates.detailed_balance_violation(chain.mu_bar()) < 1e-12);
        let flux = ins.rates.left_apply_generator(chain.mu_bar());
        prop_assert!(flux.iter().all(|f| f.abs() < 1e-12));
        for x in 0..chain.size() {
            let total: f64 = (0..chain.num_permutations()).map(|s| chain.rho_at(x, s)).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
        let w = association_of(&chain, chain.mu_bar()).unwrap();
        let uniform = 1.0 / chain.num_permutations() as f64;
        prop_assert!(w.weights().iter().all(|p| (p - uniform).abs() < 1e-12));
    }

    #[test]
    fn weighted_measures_are_recovered_from_their_symmetric_preimage(seed: u64, n in 2usize..6) {
        let mut r = rng(seed);
        let chain = random_product_chain(n, 2, &mut r);
        let nu = random_measure(chain.size(), 0.0, &mut r);
        let gamma = map_m(&chain, &nu).unwrap();
        let back = nu_sym(&chain, gamma.probs(), SYMMETRY_TOL).unwrap();
        let again = map_m(&chain, back.probs()).unwrap();
        prop_assert!(total_variation(again.probs(), gamma.probs()) < 1e-12);
        // M is constant on permutation orbits, so the preimage is symmetric
        for x in 0..chain.size() {
            prop_assert!((back.probs()[x] - back.probs()[chain.permuted(x, 1)]).abs() < 1e-12);
        }
        let i = rate_i_unsym(&chain, gamma.probs(), SYMMETRY_TOL).unwrap();
        let ins = chain.ins_generator().unwrap();
        prop_assert!((i - rate_j(&ins.rates, chain.mu_bar(), back.probs())).abs() < 1e-9);
    }

    #[test]
    fn rate_is_nonnegative_and_matches_its_definition(seed: u64, n in 2usize..40) {
        let mut r = rng(seed);
        let (rates, pi) = random_reversible(n, &mut r);
        let nu = random_measure(n, 0.0, &mut r);
        let value = rate_j(&rates, &pi, &nu);
        prop_assert!(value >= 0.0);
        let oracle = rate_by_definition(&rates, &pi, &nu);
        prop_assert!((value - oracle).abs() < 1e-12 * (1.0 + oracle.abs()));
    }

    #[test]
    fn total_variation_is_a_bounded_symmetric_distance(
        (a, b) in (2usize..30).prop_flat_map(|n| (weights(n), weights(n)))
    ) {
        let d = total_variation(&a, &b);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(d, total_variation(&b, &a));
        prop_assert_eq!(total_variation(&a, &a), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The constrained minimizer beats every other measure meeting the
    /// same constraint.
    #[test]
    fn constrained_minimizer_is_optimal(seed: u64, n in 3usize..25) {
        let mut r = rng(seed);
        let (rates, pi) = random_reversible(n, &mut r);
        let g = random_measure(n, 0.0, &mut r).iter().map(|x| x * n as f64).collect::<Vec<_>>();
        let candidate = random_measure(n, 0.05, &mut r);
        let target: f64 = candidate.iter().zip(&g).map(|(a, b)| a * b).sum();
        let constraint = LinearConstraint { coefficients: g.clone(), target };
        let res = minimize_with_constraint(&rates, &pi, &constraint, RootOptions::default()).unwrap();
        prop_assert!((res.achieved - target).abs() <= 1e-10);
        prop_assert!(res.rate <= rate_j(&rates, &pi, &candidate) + 1e-8);
        prop_assert!(res.bellman_residual < 1e-9);
    }
}
