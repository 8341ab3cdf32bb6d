use meijer::gfunction::{g10_closed, gp0pp_eval, shift_parameters};
use meijer::identities::{verify_ptolemy, Far, Sampler};
use meijer::norlund::{g_bernoulli, g_recurrence_n, g_recurrence_p, g_young, BernoulliForm};
use meijer::report::IdentityReport;
use meijer::{Field, ParamSet, Scalar, C64};
use proptest::prelude::*;
use serde_json::json;

fn rational_set(seed: u64, p: usize) -> ParamSet {
    Sampler::new(seed, 0).rational_params(p, false)
}

fn permuted(v: &[Scalar], perm: &[usize]) -> Vec<Scalar> {
    perm.iter().map(|&i| v[i].clone()).collect()
}

fn rel(x: C64, y: C64) -> f64 {
    (x - y).norm() / y.norm().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_routes_agree(seed in any::<u64>(), p in 2usize..=4, k0 in 0usize..4, n in 0usize..=5) {
        let ps = rational_set(seed, p);
        let k = 1 + k0 % p;
        let young = g_young(&ps, k, n).unwrap().values;
        prop_assert_eq!(&g_recurrence_n(&ps, k, n).unwrap().values, &young);
        prop_assert_eq!(&g_recurrence_p(&ps, k, n).unwrap().values, &young);
        prop_assert_eq!(&g_bernoulli(&ps, k, n, BernoulliForm::Psi).unwrap().values, &young);
        prop_assert_eq!(&g_bernoulli(&ps, k, n, BernoulliForm::Tilde).unwrap().values, &young);
    }

    #[test]
    fn leading_coefficient_is_one(seed in any::<u64>(), p in 1usize..=6, k0 in 0usize..6) {
        let ps = rational_set(seed, p);
        let k = 1 + k0 % p;
        prop_assert_eq!(&g_young(&ps, k, 0).unwrap().values[0], &Scalar::int(1));
    }

    #[test]
    fn young_symmetric_in_b_and_free_a(seed in any::<u64>(), p in 2usize..=4, shift in 0usize..4) {
        let ps = rational_set(seed, p);
        let n = 4;
        let want = g_young(&ps, p, n).unwrap().values;
        // rotate b fully and the non-anchor a's; a_p stays the anchor
        let pb: Vec<usize> = (0..p).map(|i| (i + shift) % p).collect();
        let pa: Vec<usize> = (0..p - 1).map(|i| (i + shift) % (p - 1)).chain([p - 1]).collect();
        let other = ParamSet::new(permuted(ps.a(), &pa), permuted(ps.b(), &pb)).unwrap();
        prop_assert_eq!(g_young(&other, p, n).unwrap().values, want);
    }

    #[test]
    fn shift_multiplies_by_power(seed in any::<u64>(), p in 1usize..=3, alpha in -0.4f64..0.4, z in 0.2f64..0.9) {
        let ps = Sampler::new(seed, 1).float_params(p, false, Far::None);
        let tol = 1e-12;
        let base = gp0pp_eval(&ps, &Scalar::real(z), tol);
        let moved = gp0pp_eval(&shift_parameters(&ps, &Scalar::real(alpha)), &Scalar::real(z), tol);
        prop_assume!(base.is_ok() && moved.is_ok());
        let want = base.unwrap().to_c64() * z.powf(alpha);
        let moved = moved.unwrap().to_c64();
        prop_assert!((moved - want).norm() <= 1e-8 * want.norm().max(1.0), "{} vs {}", moved, want);
    }

    #[test]
    fn ptolemy_holds_for_real_draws(seed in any::<u64>(), p in 1usize..=8) {
        let ps = Sampler::new(seed, 2).float_params(p, false, Far::None);
        let r = verify_ptolemy(&ps);
        prop_assert!(r.passed(), "rel {:e}", r.rel_residual);
    }

    #[test]
    fn verdict_follows_tolerance(x in -10.0f64..10.0, d in -1e-3f64..1e-3, tol in 1e-12f64..1e-2) {
        let r = IdentityReport::compare("t", json!({}), Scalar::real(x + d), Scalar::real(x), 0.0, tol);
        prop_assert_eq!(r.passed(), r.rel_residual <= tol);
    }

    #[test]
    fn order_one_closed_form(a in -0.8f64..0.8, gap in 0.3f64..3.0, z in 0.05f64..0.95) {
        let b = a + gap;
        let ps = ParamSet::new(vec![Scalar::real(a)], vec![Scalar::real(b)]).unwrap();
        let got = gp0pp_eval(&ps, &Scalar::real(z), 1e-13).unwrap().to_c64();
        let want = g10_closed(&Scalar::real(a), &Scalar::real(b), &Scalar::real(z)).unwrap().to_c64();
        prop_assert!(rel(got, want) <= 1e-10, "{} vs {}", got, want);
    }
}
