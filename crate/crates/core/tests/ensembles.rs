use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use symrmt::ensembles::*;

fn beta() -> impl Strategy<Value = Beta> {
    prop_oneof![Just(Beta::One), Just(Beta::Two), Just(Beta::Four)]
}

fn hermitian_defect(m: &DMatrix<Complex64>) -> f64 {
    (m - m.adjoint()).iter().fold(0.0f64, |a, z| a.max(z.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gaussian_draws_are_hermitian_and_reproducible(b in beta(), n in 1usize..12, seed: u64, draw in 0u64..1000) {
        let spec = EnsembleSpec::gaussian(b, n, 1.0, seed);
        let m = sample_gaussian(&spec, draw).unwrap();
        let dim = if b == Beta::Four { 2 * n } else { n };
        prop_assert_eq!(m.nrows(), dim);
        prop_assert!(hermitian_defect(&m.to_complex()) < 1e-14);
        prop_assert_eq!(sample_gaussian(&spec, draw).unwrap(), m);
        let s = sample_spectrum(&spec, draw).unwrap();
        prop_assert_eq!(s.len(), n);
        prop_assert!(s.levels.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn chiral_spectra_are_symmetric_with_nu_zero_modes(b in beta(), q in 1usize..6, nu in 0usize..4, seed: u64) {
        let spec = EnsembleSpec::chiral(b, q + nu, q, 1.0, seed);
        let s = sample_spectrum(&spec, 0).unwrap();
        let scale = s.levels.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let zeros = s.levels.iter().filter(|x| x.abs() <= 1e-9 * scale).count();
        prop_assert_eq!(zeros, nu);
        let n = s.len();
        for i in 0..n {
            prop_assert!((s.levels[i] + s.levels[n - 1 - i]).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn circular_draws_are_unitary(b in beta(), n in 1usize..8, seed: u64) {
        let spec = EnsembleSpec::circular(b, n, seed);
        let u = sample_circular(&spec, 3).unwrap();
        let id = DMatrix::<Complex64>::identity(u.nrows(), u.nrows());
        prop_assert!((u.adjoint() * &u - id).iter().all(|z| z.norm() < 1e-12));
        let s = sample_spectrum(&spec, 3).unwrap();
        prop_assert_eq!(s.len(), n);
        prop_assert!(s.levels.iter().all(|p| *p > -std::f64::consts::PI - 1e-12 && *p <= std::f64::consts::PI));
    }

    #[test]
    fn transfer_slices_conserve_flux(n in 1usize..5, delta_s in 1e-3f64..0.5, seed: u64) {
        let spec = EnsembleSpec::transfer_slice(n, seed);
        let m = sample_transfer_slice(&spec, delta_s, 0).unwrap();
        prop_assert_eq!(m.nrows(), 2 * n);
        prop_assert!(flux_residual(&m) < 1e-10);
    }

    #[test]
    fn streams_differ_between_draws(seed: u64, a in 0u64..1000, b in 0u64..1000) {
        prop_assume!(a != b);
        use rand::Rng;
        let x: u64 = draw_rng(seed, a).random();
        let y: u64 = draw_rng(seed, b).random();
        prop_assert_ne!(x, y);
    }
}

/// `⟨Σλ²⟩/N = v²(1 + (2/β − 1)/N)` for the Gaussian normalization.
#[test]
fn second_moment_oracle() {
    for (b, bf) in [(Beta::One, 1.0), (Beta::Two, 2.0), (Beta::Four, 4.0)] {
        let (n, v, draws) = (8usize, 1.5, 4000usize);
        let spec = EnsembleSpec::gaussian(b, n, v, 99);
        let m2: Vec<f64> = sample_spectra(&spec, draws)
            .unwrap()
            .iter()
            .map(|s| s.levels.iter().map(|x| x * x).sum::<f64>() / n as f64)
            .collect();
        let mean = m2.iter().sum::<f64>() / draws as f64;
        let se = (m2.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws * (draws - 1)) as f64).sqrt();
        let want = v * v * (1.0 + (2.0 / bf - 1.0) / n as f64);
        assert!((mean - want).abs() < 4.0 * se, "beta {bf}: {mean} vs {want} (se {se})");
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let spec = EnsembleSpec::gaussian(Beta::One, 20, 1.0, 5);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| sample_spectra(&spec, 16).unwrap());
    let b = four.install(|| sample_spectra(&spec, 16).unwrap());
    assert_eq!(a, b);
}
