use proptest::prelude::*;

use switchdiff::model::{wright_fisher_model, WrightFisherParams};
use switchdiff::montecarlo::{
    estimate_invariant_histogram, estimate_transition_probability, simulate_indexed, BoundaryPolicy, SimConfig,
};
use switchdiff::spectral::InvariantDistribution;

fn cfg(step: f64, n_paths: usize, seed: u64) -> SimConfig {
    SimConfig {
        step,
        horizon: 1.0,
        n_paths,
        seed,
        ..SimConfig::default()
    }
}

#[test]
fn quartering_the_step_moves_estimates_within_noise() {
    let m = wright_fisher_model(WrightFisherParams::new(0.0, 0.0, 0.5, 4).unwrap()).unwrap();
    let a = estimate_transition_probability(&m, 0.5, 1.0, (0.75, 1.0), &cfg(1e-3, 10_000, 1)).unwrap();
    let b = estimate_transition_probability(&m, 0.5, 1.0, (0.75, 1.0), &cfg(2.5e-4, 10_000, 2)).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let se = a.std_error[(i, j)].hypot(b.std_error[(i, j)]);
            let d = (a.mean[(i, j)] - b.mean[(i, j)]).abs();
            assert!(d < 3.0 * se, "({i},{j}): {d} vs se {se}");
        }
    }
}

#[test]
fn histogram_phase_masses_match_density() {
    let p = WrightFisherParams::new(1.0, 1.0, 1.25, 3).unwrap();
    let m = wright_fisher_model(p).unwrap();
    let c = SimConfig {
        horizon: 2000.0,
        n_paths: 1,
        seed: 4,
        ..SimConfig::default()
    };
    let h = estimate_invariant_histogram(&m, 0.5, 3, &c, 50.0, 10).unwrap();
    let total: f64 = h.mass.iter().flatten().sum();
    assert!((total - 1.0).abs() < 1e-12);
    for (a, b) in h.phase_masses().iter().zip(InvariantDistribution::new(&p).unwrap().phase_masses()) {
        assert!((a - b).abs() < 0.02, "{a} vs {b}");
    }
}

#[test]
fn horizon_must_exceed_burn_in() {
    let m = wright_fisher_model(WrightFisherParams::new(1.0, 1.0, 1.25, 2).unwrap()).unwrap();
    let c = SimConfig {
        horizon: 10.0,
        n_paths: 1,
        ..SimConfig::default()
    };
    assert!(estimate_invariant_histogram(&m, 0.5, 1, &c, 10.0, 10).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reflected_paths_stay_in_unit_interval(
        a in -0.9..2.0f64,
        b in -0.9..2.0f64,
        kf in 0.05..0.95f64,
        n in 1usize..5,
        x0 in 0.01..0.99f64,
        seed in any::<u64>(),
    ) {
        let m = wright_fisher_model(WrightFisherParams::new(a, b, kf * (b + 1.0), n).unwrap()).unwrap();
        let c = SimConfig { step: 1e-3, horizon: 0.5, n_paths: 1, seed, boundary_policy: BoundaryPolicy::Reflect, ..SimConfig::default() };
        let s = simulate_indexed(&m, x0, n, &c, 3).unwrap();
        prop_assert!(s.positions.iter().all(|&x| (0.0..=1.0).contains(&x)));
        prop_assert!(s.phases.iter().all(|&i| (1..=n).contains(&i)));
        prop_assert_eq!(s, simulate_indexed(&m, x0, n, &c, 3).unwrap());
    }
}
