use proptest::prelude::*;
use symrmt::ensembles::{draw_rng, Spectrum};
use symrmt::spectra::*;

fn sorted_levels() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0f64..50.0, 60..160).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unfolding_is_monotone_and_keeps_count(levels in sorted_levels()) {
        let s = Spectrum::from_raw(levels.clone(), 1).unwrap();
        for m in [UnfoldMethod::LocalMeanSpacing { window: 5 }, UnfoldMethod::Uniform { density: 0.7 }] {
            let u = unfold(&s, m).unwrap();
            prop_assert_eq!(u.levels.len(), levels.len());
            prop_assert!(u.levels.windows(2).all(|w| w[1] >= w[0]));
        }
        let u = unfold_with_fallback(&s, 7).unwrap();
        prop_assert_eq!(u.levels.len(), levels.len());
        prop_assert!(u.levels.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn histograms_are_normalized(samples in prop::collection::vec(0.0f64..5.0, 10..400), width in 0.05f64..1.0) {
        let h = histogram(&samples, Binning::Fixed { width, max: 4.0 }).unwrap();
        let mass: f64 = h.curve.values.iter().zip(h.edges.windows(2)).map(|(v, e)| v * (e[1] - e[0])).sum();
        prop_assert!((mass + h.overflow - 1.0).abs() < 1e-12);
        let fd = histogram(&samples, Binning::FreedmanDiaconis).unwrap();
        let mass: f64 = fd.curve.values.iter().zip(fd.edges.windows(2)).map(|(v, e)| v * (e[1] - e[0])).sum();
        prop_assert!((mass + fd.overflow - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sigma2_formula_reduces_to_poisson(l in 0.1f64..20.0) {
        prop_assert!((sigma2_from_y2(l, |_| 0.0) - l).abs() < 1e-10 * l);
        prop_assert!((delta3_from_sigma2(l, |r| r) - l / 15.0).abs() < 1e-10 * l);
    }

    #[test]
    fn surmise_is_normalized_with_unit_mean(beta in prop_oneof![Just(1u32), Just(2), Just(4)]) {
        let rule = symrmt::quad::GaussRule::new(16);
        let mass = rule.integrate(0.0, 12.0, 48, |s| wigner_surmise(beta, s).unwrap());
        let mean = rule.integrate(0.0, 12.0, 48, |s| s * wigner_surmise(beta, s).unwrap());
        prop_assert!((mass - 1.0).abs() < 1e-10);
        prop_assert!((mean - 1.0).abs() < 1e-10);
    }
}

#[test]
fn kernel_density_integrates_to_n() {
    for n in [5, 20, 60] {
        let k = HermiteKernel::new(n).unwrap();
        let edge = 2.0 * (n as f64).sqrt() + 12.0;
        assert!((k.mass(-edge, edge) - n as f64).abs() < 1e-8, "n={n}");
    }
}

#[test]
fn kernel_cluster_function_starts_at_one_and_decays() {
    let k = HermiteKernel::new(80).unwrap();
    assert!((k.cluster(0.0, 0.0) - 1.0).abs() < 1e-9);
    // Sine-kernel limit (sin πr / πr)² at the band centre.
    for r in [0.5, 1.5, 2.5] {
        let sine = ((std::f64::consts::PI * r).sin() / (std::f64::consts::PI * r)).powi(2);
        assert!((k.cluster(0.0, r) - sine).abs() < 0.01, "r={r}");
    }
}

#[test]
fn surrogate_spacings_are_exponential() {
    let batch: Vec<UnfoldedSpectrum> = (0..40)
        .map(|d| {
            unfold(
                &poisson_surrogate(1000, &mut draw_rng(1, d)),
                UnfoldMethod::Uniform { density: 1.0 },
            )
            .unwrap()
        })
        .collect();
    let h = spacing_distribution(&batch, Binning::Fixed { width: 0.2, max: 6.0 }).unwrap();
    let (l1, _) = histogram_distance(&h, |s| (-s).exp(), 40.0);
    assert!(l1 < 0.06, "{l1}");
}

#[test]
fn power_law_estimator_on_exact_samples() {
    // Inverse-CDF samples of p(s) ∝ s² on (0, 1].
    let samples: Vec<f64> = (1..=20_000).map(|i| (f64::from(i) / 20_000.0).cbrt()).collect();
    let (a, se, _) = power_law_exponent(&samples, 0.05, 1.0, &[], |_| 0.0).unwrap();
    assert!((a - 2.0).abs() < 3.0 * se.max(1e-3), "{a} +- {se}");
}
