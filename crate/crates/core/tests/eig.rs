mod oracles;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use quiver_core::controller::estimate_eig;
use quiver_core::preference::{NoiseModel, ParticleSet, Query};

#[test]
fn ps_estimate_matches_exact_information() {
    let noise = NoiseModel::default();
    let grid = oracles::simplex_grid_2d(20);
    let ps = ParticleSet::from_particles(&grid, None).unwrap();
    let cases = [
        (vec![-0.2, -0.8], vec![-0.7, -0.3]),
        (vec![-0.5, -0.5], vec![-0.6, -0.35]),
        (vec![-0.1, -0.9], vec![-0.9, -0.1]),
    ];
    for (seed, (a, b)) in cases.into_iter().enumerate() {
        let exact = oracles::exact_ps_information(&grid, ps.weights(), &a, &b, noise.sigma_ps);
        let query = Query::Ps { a_value: a, b_value: b };
        let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
        let est = estimate_eig(&ps, &query, &noise, 10_000, None, &mut rng);
        assert!((est - exact).abs() < 0.01, "estimate {est} exact {exact}");
    }
}

#[test]
fn nonuniform_prior_matches_exact_information() {
    let noise = NoiseModel::default();
    let grid = oracles::simplex_grid_2d(20);
    let weights: Vec<f64> = (1..=20).map(|i| i as f64).collect();
    let ps = ParticleSet::from_particles(&grid, Some(weights)).unwrap();
    let (a, b) = (vec![-0.3, -0.6], vec![-0.55, -0.4]);
    let exact = oracles::exact_ps_information(&grid, ps.weights(), &a, &b, noise.sigma_ps);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let est = estimate_eig(&ps, &Query::Ps { a_value: a, b_value: b }, &noise, 10_000, None, &mut rng);
    assert!((est - exact).abs() < 0.01, "estimate {est} exact {exact}");
}

proptest! {
    #[test]
    fn estimate_is_nonnegative(seed in any::<u64>(), ia in any::<bool>(), a in prop::collection::vec(-1.0f64..0.0, 3), b in prop::collection::vec(-1.0f64..0.0, 3)) {
        let noise = NoiseModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ps = ParticleSet::init(3, 128, &[1.0; 3], &mut rng).unwrap();
        let query = if ia {
            Query::Ia { a_value: a, b_value: b, dim: (seed % 3) as usize }
        } else {
            Query::Ps { a_value: a, b_value: b }
        };
        let e = estimate_eig(&ps, &query, &noise, 50, Some(15), &mut rng);
        prop_assert!(e >= 0.0 && e.is_finite());
        prop_assert!(e <= ps.entropy() + 1e-9);
    }

    #[test]
    fn identical_outcomes_carry_no_information(seed in any::<u64>(), a in prop::collection::vec(-1.0f64..0.0, 3)) {
        let noise = NoiseModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ps = ParticleSet::init(3, 64, &[1.0; 3], &mut rng).unwrap();
        let ps_query = Query::Ps { a_value: a.clone(), b_value: a.clone() };
        let ia_query = Query::Ia { a_value: a.clone(), b_value: a, dim: 1 };
        prop_assert_eq!(estimate_eig(&ps, &ps_query, &noise, 50, None, &mut rng), 0.0);
        prop_assert_eq!(estimate_eig(&ps, &ia_query, &noise, 50, Some(15), &mut rng), 0.0);
    }
}
