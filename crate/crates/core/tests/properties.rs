use approx::assert_relative_eq;
use nondegen::funk_hecke::ratio_closed;
use nondegen::special_fns::{dim_harmonic, gauss_rule, log_gamma, GaussFamily};
use nondegen::sphere_transform::{conformal_distance_defect, stereo_inverse, stereo_project};
use nondegen::{eigenvalue_closed, fit_decay, normalization_audit, Bubble, KernelFunction, Params};
use proptest::prelude::*;

/// `(N, s)` with `N > 2s`.
fn problem() -> impl Strategy<Value = (usize, f64)> {
    (1usize..=6, 0.01f64..0.99).prop_filter("N > 2s", |(n, s)| *n as f64 > 2.0 * s)
}

fn point(n: usize, scale: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-scale..scale, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_obeys_the_ratio_law((n, s) in problem(), l in 0usize..50) {
        let p = Params::new(n, s).unwrap();
        let (a, b) = (eigenvalue_closed(&p, l), eigenvalue_closed(&p, l + 1));
        prop_assert!(a > 0.0 && b > 0.0 && b < a);
        let alpha = n as f64 / 2.0 - s;
        let law = (l as f64 + alpha) / (l as f64 + n as f64 - alpha);
        prop_assert!((b / a / law - 1.0).abs() <= 1e-12);
        prop_assert!((ratio_closed(&p, l) / law - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn quadrature_differs_from_closed_form_by_one_constant(n in 2usize..=4, s in 0.05f64..0.95) {
        let p = Params::new(n, s).unwrap();
        let audit = normalization_audit(&p, 12).unwrap();
        prop_assert!(audit.factor > 0.0);
        prop_assert!(audit.max_residual <= 1e-10);
    }

    #[test]
    fn stereographic_round_trip(x in (1usize..=4).prop_flat_map(|n| point(n, 50.0))) {
        let omega = stereo_project(&x);
        let norm: f64 = omega.coords().iter().map(|c| c * c).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() <= 1e-12);
        let back = stereo_inverse(&omega).unwrap();
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn conformal_distance_identity(
        (x, y) in (1usize..=4).prop_flat_map(|n| (point(n, 5.0), point(n, 5.0)))
    ) {
        prop_assume!(x.iter().zip(&y).any(|(a, b)| (a - b).abs() > 1e-6));
        prop_assert!(conformal_distance_defect(&x, &y) <= 1e-12);
    }

    #[test]
    fn scaled_bubble_matches_dilation((n, s) in problem(), lambda in 0.1f64..10.0, r in 0.0f64..20.0) {
        let p = Params::new(n, s).unwrap();
        let mut x = vec![0.0; n];
        x[0] = r;
        let scaled = Bubble::with_scaling(p, lambda, vec![0.0; n]).unwrap();
        let standard = Bubble::standard(p);
        let lx: Vec<f64> = x.iter().map(|v| lambda * v).collect();
        let want = lambda.powf((n as f64 - 2.0 * s) / 2.0) * standard.eval(&lx);
        assert_relative_eq!(scaled.eval(&x), want, max_relative = 1e-13);
    }

    #[test]
    fn kernel_generators_span_degree_one_harmonics((n, s) in problem()) {
        let p = Params::new(n, s).unwrap();
        prop_assert_eq!(KernelFunction::all(p).len() as u128, dim_harmonic(n, 1));
    }

    #[test]
    fn jacobi_rule_total_weight(a in -0.9f64..3.0, b in -0.9f64..3.0, n in 2usize..40) {
        let rule = gauss_rule(GaussFamily::Jacobi { a, b }, n).unwrap();
        let ln_beta = log_gamma(a + 1.0).unwrap() + log_gamma(b + 1.0).unwrap() - log_gamma(a + b + 2.0).unwrap();
        let want = ((a + b + 1.0) * 2f64.ln() + ln_beta).exp();
        assert_relative_eq!(rule.total_weight(), want, max_relative = 1e-11);
    }

    #[test]
    fn power_law_fit_is_exact(exponent in 0.1f64..6.0, amp in 1e-3f64..1e3) {
        let samples: Vec<(f64, f64)> = (0..24)
            .map(|i| {
                let r = 10f64.powf(1.0 + 2.0 * i as f64 / 23.0);
                (r, amp * r.powf(-exponent))
            })
            .collect();
        let fit = fit_decay(&samples).unwrap();
        prop_assert!((fit.exponent - exponent).abs() <= 1e-10);
        prop_assert!(fit.quality >= 0.999);
    }
}
