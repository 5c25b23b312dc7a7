use hyperstat::rng::seeded;
use hyperstat::stationarity::hull::min_norm_in_hull;
use hyperstat::structure::WitnessMode;
use hyperstat::{
    inner_value_with, lipschitz_check, moreau_prox, registry_get, secant_modulus, set_smoothness_check, Bounds,
    EnvelopeConfig, FnOracle, InnerOptions, Mode, Problem, Sense,
};
use proptest::prelude::*;

fn problem(name: &str) -> Problem {
    registry_get(name).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn soft_threshold_for_any_point(x in -5.0f64..5.0, gamma in 0.01f64..0.99) {
        let abs = FnOracle::new(1, |v: &[f64]| v[0].abs());
        let cfg = EnvelopeConfig::new(gamma).with_rho(0.0).with_lipschitz(1.0);
        let z = moreau_prox(&abs, &[x], &cfg).unwrap().point[0];
        let expected = x.signum() * (x.abs() - gamma).max(0.0);
        prop_assert!((z - expected).abs() <= 1e-9);
    }

    #[test]
    fn inner_value_error_stays_within_w(x in -2.0f64..2.0, k in 4i32..10, pess in any::<bool>()) {
        let w = 10f64.powi(-k);
        let mode = if pess { Mode::Pessimistic } else { Mode::Optimistic };
        let p = problem("P2-sin-interval").with_mode(mode);
        let approx = inner_value_with(&p, &[x], w, &InnerOptions::descriptor_only()).unwrap().value;
        let exact = p.exact_hyper().unwrap()(&[x]);
        prop_assert!((approx - exact).abs() <= w);
    }

    #[test]
    fn refining_w_never_loosens_the_certificate(x in -5.0f64..5.0) {
        let p = problem("P1-line-coercive");
        let exact = p.exact_hyper().unwrap()(&[x]);
        let mut last = f64::INFINITY;
        for w in [1e-3, 1e-5, 1e-7, 1e-9] {
            let r = inner_value_with(&p, &[x], w, &InnerOptions::descriptor_only()).unwrap();
            prop_assert!(r.achieved_tol <= w);
            prop_assert!((r.value - exact).abs() <= w.min(last));
            last = w;
        }
    }

    #[test]
    fn projection_is_idempotent(x in -5.0f64..5.0, y0 in -9.0f64..9.0, y1 in -9.0f64..9.0) {
        let p = problem("P1-line");
        let d = p.descriptor().unwrap();
        let py = d.project(&[x], &[y0, y1]);
        prop_assert!(d.contains(&[x], &py));
        let ppy = d.project(&[x], &py);
        prop_assert!(hyperstat::linalg::dist(&py, &ppy) <= 1e-12);
    }

    #[test]
    fn hull_point_is_no_longer_than_any_generator(
        gens in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 1..12)
    ) {
        let r = min_norm_in_hull(&gens, 10_000);
        let n = hyperstat::linalg::norm(&r.point);
        for g in &gens {
            prop_assert!(n <= hyperstat::linalg::norm(g) + 1e-12);
        }
        prop_assert!((r.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        prop_assert!(r.weights.iter().all(|&w| w >= -1e-15));
    }

    #[test]
    fn more_samples_never_lower_the_modulus(seed in 0u64..1_000, n in 5usize..60) {
        let p = problem("P2-sin-interval");
        let d = p.descriptor().unwrap();
        let bx = &p.constants.working_box;
        let few = set_smoothness_check(d, bx, 1.0, n, &mut seeded(seed), WitnessMode::AnalyticTranslation).unwrap();
        let many = set_smoothness_check(d, bx, 1.0, 2 * n, &mut seeded(seed), WitnessMode::AnalyticTranslation).unwrap();
        prop_assert!(many.empirical_modulus >= few.empirical_modulus);

        let few = lipschitz_check(&p, n, &mut seeded(seed)).unwrap();
        let many = lipschitz_check(&p, 2 * n, &mut seeded(seed)).unwrap();
        prop_assert!(many.empirical_modulus >= few.empirical_modulus);

        let phi = p.exact_hyper().unwrap().clone();
        let oracle = FnOracle::new(1, move |x: &[f64]| phi(x));
        let bx = Bounds::cube(1, -2.0, 2.0);
        let few = secant_modulus(&oracle, Sense::Convexity, n, &bx, &mut seeded(seed)).unwrap();
        let many = secant_modulus(&oracle, Sense::Convexity, 2 * n, &bx, &mut seeded(seed)).unwrap();
        prop_assert!(many.empirical_modulus >= few.empirical_modulus);
    }
}
