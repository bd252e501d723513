use proptest::prelude::*;
use rand::Rng;
use symrmt::dmpk::*;
use symrmt::ensembles::{draw_rng, Beta};

/// Random points of the chamber `0 < x_1 < … < x_N < extent`.
fn chamber_point<R: Rng>(n: usize, extent: f64, rng: &mut R) -> Vec<f64> {
    loop {
        let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(1e-3..extent)).collect();
        x.sort_by(f64::total_cmp);
        if x.windows(2).all(|w| w[1] - w[0] > 1e-6) {
            return x;
        }
    }
}

#[test]
fn exact_density_is_positive_in_the_resolved_chamber() {
    let mut rng = draw_rng(2024, 0);
    for n in [1, 2] {
        for s in [0.5, 2.0, 8.0] {
            let d = ExactDensity::new(n, s, ExactOptions::default()).unwrap();
            let extent = 0.9 * d.resolved_extent();
            for _ in 0..1000 {
                let x = chamber_point(n, extent, &mut rng);
                let p = d.density(&x).unwrap();
                assert!(p > 0.0, "N={n} s={s} x={x:?}: {p}");
            }
        }
    }
}

#[test]
fn exact_moments_are_consistent() {
    for (n, s) in [(1, 0.5), (1, 2.0), (2, 0.5), (2, 2.0), (3, 0.5)] {
        let m = ExactDensity::new(n, s, ExactOptions::default())
            .unwrap()
            .moments()
            .unwrap();
        assert!(m.norm > 0.0);
        assert!(m.mean_g > 0.0 && m.mean_g < n as f64, "N={n} s={s}: {m:?}");
        assert!(m.var_g >= 0.0);
    }
    // Conductance decreases with length.
    let g = |s: f64| {
        ExactDensity::new(2, s, ExactOptions::default())
            .unwrap()
            .moments()
            .unwrap()
            .mean_g
    };
    assert!(g(0.5) > g(1.0) && g(1.0) > g(2.0));
}

#[test]
fn sde_path_decreases_from_ballistic() {
    let path = mc_dmpk_path(2, Beta::One, &[0.05, 0.5, 2.0], 400, SdeOptions::with_dt(2e-3), 3).unwrap();
    let means: Vec<f64> = path.iter().map(|e| e.conductance_stats().mean).collect();
    assert!(means[0] > 1.8, "{means:?}");
    assert!(means.windows(2).all(|w| w[1] < w[0]), "{means:?}");
    for e in &path {
        assert_eq!(e.states.len(), 400);
        for st in &e.states {
            assert!(st.lambdas.windows(2).all(|w| w[1] > w[0]));
        }
    }
}

#[test]
fn transfer_and_sde_agree_at_short_length() {
    let s = 0.5;
    let sde = mc_dmpk_path(2, Beta::Two, &[s], 3000, SdeOptions::with_dt(5e-4), 8).unwrap()[0].conductance_stats();
    let tm = mc_transfer_path(2, 0.005, &[100], 3000, 9).unwrap()[0].conductance_stats();
    let z = (sde.mean - tm.mean).abs() / (sde.stderr.powi(2) + tm.stderr.powi(2)).sqrt();
    assert!(z < 4.0, "sde {sde:?} tm {tm:?}");
}

#[test]
fn unresolved_lengths_are_reported_not_guessed() {
    let d = ExactDensity::new(2, 8.0, ExactOptions::default()).unwrap();
    assert!(matches!(d.moments(), Err(DmpkError::Unresolved { .. })));
    assert!(matches!(
        ExactDensity::new(5, 1.0, ExactOptions::default()),
        Err(DmpkError::Channels(5))
    ));
}

proptest! {
    #[test]
    fn coordinate_maps_round_trip(lambda in 0.0f64..1e6) {
        let t = t_from_lambda(lambda).unwrap();
        prop_assert!(t > 0.0 && t <= 1.0);
        prop_assert!((lambda_from_t(t).unwrap() - lambda).abs() <= 1e-9 * (1.0 + lambda));
        let x = x_from_lambda(lambda).unwrap();
        prop_assert!((lambda_from_x(x).unwrap() - lambda).abs() <= 1e-9 * (1.0 + lambda));
        prop_assert!((convert(lambda, Coordinate::Lambda, Coordinate::X).unwrap() - x).abs() < 1e-12 * (1.0 + x));
    }

    #[test]
    fn conductance_is_between_zero_and_n(lambdas in prop::collection::vec(0.0f64..1e3, 1..6)) {
        let n = lambdas.len();
        let st = DMPKState::new(Beta::Two, 1.0, lambdas).unwrap();
        let g = conductance(&st);
        prop_assert!(g > 0.0 && g <= n as f64);
        let t: f64 = st.transmissions().iter().sum();
        prop_assert!((g - t).abs() < 1e-12);
    }

    #[test]
    fn beta_two_remainder_is_constant(x in prop::collection::vec(0.05f64..3.0, 1..4)) {
        let mut x = x;
        x.sort_by(f64::total_cmp);
        prop_assume!(x.windows(2).all(|w| w[1] - w[0] > 1e-2));
        let u = decoupling_potential(Beta::Two, &x);
        prop_assert!((u - decoupling_constant_beta2(x.len())).abs() < 1e-8 * (1.0 + u.abs()));
    }
}
