use chaotic_mode::events::{bn_to_expr, eval_prob, expr_to_bn_set, EventExpr, Expr};
use chaotic_mode::io::format_float;
use chaotic_mode::kinetics::{build_ladder, max_rate_imbalance, q_inverse, q_transform, verify_q_invariant, LadderKind, OccupancyState};
use chaotic_mode::laws::{self, binary_levels, binary_summary, BinaryLevel};
use chaotic_mode::montecarlo::{LevelSet, SampleBatch};
use chaotic_mode::spectra::{spectral_density, SpectralLaw};
use chaotic_mode::{Constants, Context};
use proptest::prelude::*;

fn ctx(beta: f64) -> Context {
    Context::from_beta(beta).unwrap()
}

fn expr_strategy() -> impl Strategy<Value = Expr> {
    let leaf = (0u32..6, any::<bool>()).prop_map(|(level, occupied)| Expr::Atom { level, occupied });
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::not),
            prop::collection::vec(inner.clone(), 1..4).prop_map(Expr::And),
            prop::collection::vec(inner, 1..4).prop_map(Expr::Or),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn mean_splits_into_dark_and_planck(beta in 1e-3f64..50.0) {
        let c = ctx(beta);
        let g = laws::gauss_summary(&c).unwrap();
        let d = laws::dark_summary(&c).unwrap();
        let p = laws::planck_summary(&c);
        prop_assert!(((g.mean - p.mean) - d.mean).abs() <= 1e-14 * g.mean.max(1.0));
        prop_assert!(d.mean > 0.0 && d.mean < 0.5);
        prop_assert!(d.variance > 0.0 && d.variance <= 1.0 / 12.0 + 1e-15);
    }

    #[test]
    fn binary_photons_add_up(beta in 1e-3f64..50.0) {
        let c = ctx(beta);
        let p = laws::planck_summary(&c);
        let levels = binary_levels(&c);
        let mean: f64 = levels.iter().map(|&s| binary_summary(s, &c).mean).sum();
        let var: f64 = levels.iter().map(|&s| binary_summary(s, &c).variance).sum();
        let ent: f64 = levels.iter().map(|&s| binary_summary(s, &c).entropy).sum();
        prop_assert!((mean / p.mean - 1.0).abs() < 1e-12);
        prop_assert!((var / p.variance - 1.0).abs() < 1e-10);
        prop_assert!((ent - p.entropy).abs() < 1e-12 * p.entropy.max(1.0));
    }

    #[test]
    fn characteristic_functions_factorize(beta in 0.05f64..20.0, t in -50.0f64..50.0) {
        let c = ctx(beta);
        prop_assert!(laws::cf_factorization_residual(&[t], &c) < 1e-12);
        for law in [laws::Law::Gauss, laws::Law::Dark, laws::Law::Planck, laws::Law::Binary(BinaryLevel::new(2).unwrap())] {
            prop_assert!(law.cf(t, &c).norm() <= 1.0 + 1e-15);
            let conj = law.cf(-t, &c);
            prop_assert!((law.cf(t, &c) - conj.conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn complement_and_inclusion_exclusion(e in expr_strategy(), f in expr_strategy(), b in 0.0f64..0.99) {
        let ev = EventExpr::new(e.clone(), false).unwrap();
        let fv = EventExpr::new(f.clone(), false).unwrap();
        let pe: f64 = eval_prob(&ev, &b).unwrap();
        let pf: f64 = eval_prob(&fv, &b).unwrap();
        prop_assert!((-1e-15..=1.0 + 1e-15).contains(&pe));
        let not_e: f64 = eval_prob(&ev.negate().unwrap(), &b).unwrap();
        prop_assert!((pe + not_e - 1.0).abs() < 1e-14);
        let both: f64 = eval_prob(&EventExpr::new(Expr::And(vec![e.clone(), f.clone()]), false).unwrap(), &b).unwrap();
        let either: f64 = eval_prob(&EventExpr::new(Expr::Or(vec![e, f]), false).unwrap(), &b).unwrap();
        prop_assert!((either - (pe + pf - both)).abs() < 1e-14);
    }

    #[test]
    fn closed_events_match_their_photon_sets(e in expr_strategy(), b in 0.0f64..0.95) {
        let ev = EventExpr::with_cap(e, 5, true).unwrap();
        let set = expr_to_bn_set(&ev).unwrap();
        let c = Context::from_ratio(b).unwrap();
        let sum: f64 = set.iter().map(|&n| laws::planck_pmf(n, &c)).sum();
        let p: f64 = eval_prob(&ev, &b).unwrap();
        prop_assert!((p - sum).abs() < 1e-14);
        for n in 0..80u64 {
            prop_assert_eq!(ev.contains(n), set.contains(&n));
        }
    }

    #[test]
    fn photon_number_events(n in 0u64..5000, b in 0.0f64..0.99) {
        let cap = 13;
        let p: f64 = eval_prob(&bn_to_expr(n, cap).unwrap(), &b).unwrap();
        let c = Context::from_ratio(b).unwrap();
        let expected = laws::planck_pmf(n, &c);
        prop_assert!((p - expected).abs() <= 1e-14);
    }

    #[test]
    fn decomposition_is_exact(eta in prop::collection::vec(0.0f64..1e12, 1..50)) {
        let batch = SampleBatch::from_eta(eta.clone()).unwrap();
        batch.check_decomposition().unwrap();
        for (i, &e) in eta.iter().enumerate() {
            prop_assert_eq!(batch.xi()[i] as f64 + batch.zeta()[i], e);
            let bits = batch.bits()[i];
            prop_assert_eq!(bits.iter().map(|s| 1u64 << s).sum::<u64>(), batch.xi()[i]);
        }
    }

    #[test]
    fn level_sets_round_trip(xi in any::<u64>()) {
        let set = LevelSet::from_photons(xi);
        let text = set.to_string();
        let back = text.chars().rev().fold(0u64, |acc, ch| acc << 1 | u64::from(ch == '1'));
        prop_assert_eq!(back, xi);
    }

    #[test]
    fn fermi_state_is_balanced(beta in 0.01f64..5.0, count in 2usize..12) {
        let ladder = build_ladder::<f64>(LadderKind::Linear, count, None).unwrap();
        let f = OccupancyState::fermi(&ladder, beta);
        prop_assert!(max_rate_imbalance(&f, &ladder).unwrap() < 1e-14);
        prop_assert!(verify_q_invariant(&f, &ladder).unwrap() < 1e-13);
    }

    #[test]
    fn q_transform_inverts(n in prop::collection::vec(0.0f64..0.999, 1..10)) {
        let s = OccupancyState::new(n.clone()).unwrap();
        let back = q_inverse(&q_transform(&s).unwrap()).unwrap();
        for (a, b) in back.occupancies().iter().zip(&n) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn radiation_laws_are_ordered_and_scale(nu in 1e8f64..1e15, t in 0.1f64..1e4, lambda in 0.1f64..100.0) {
        let c = Constants::default();
        let [p, rj, w, _] = SpectralLaw::ALL.map(|l| spectral_density(l, nu, t, &c).unwrap());
        prop_assert!(w <= p && p <= rj);
        for law in SpectralLaw::ALL {
            let u = spectral_density(law, nu, t, &c).unwrap();
            let v = spectral_density(law, lambda * nu, lambda * t, &c).unwrap();
            if u > 1e-290 {
                prop_assert!((v / (lambda.powi(3) * u) - 1.0).abs() < 1e-11, "{:?}", law);
            }
        }
    }

    #[test]
    fn float_format_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
    }
}
