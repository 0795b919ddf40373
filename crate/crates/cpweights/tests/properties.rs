use cpweights::geometry::{dyadic_cover, validate_whitney, whitney};
use cpweights::maximal::{m_indicator, MaximalProfile};
use cpweights::oracles::{dyadic_layer_cake_window, hilbert_quadrature, m_indicator_candidates};
use cpweights::singular::hilbert_eval;
use cpweights::sparse::{cz_sparse, exponent_check, verify_sparse};
use cpweights::weights::{phi_p, tail_discretized, tail_functional};
use cpweights::{CertifiedValue, Cube, OpenSet, PsiFunction, StepFunction1D, Weight};
use proptest::prelude::*;

fn step() -> impl Strategy<Value = StepFunction1D> {
    prop::collection::vec((-4.0..4.0f64, 0.05..2.0f64, 0.1..3.0f64), 1..5)
        .prop_map(|v| StepFunction1D::from_pieces(&v.iter().map(|&(a, l, h)| (a, a + l, h)).collect::<Vec<_>>()).unwrap())
}

fn open_set() -> impl Strategy<Value = OpenSet> {
    prop::collection::vec((-10.0..10.0f64, 0.01..3.0f64), 1..6)
        .prop_map(|v| OpenSet::intervals(&v.iter().map(|&(a, l)| (a, a + l)).collect::<Vec<_>>()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn m_indicator_matches_candidates(a in -5.0..5.0f64, l in 1e-3..10.0f64, x in -20.0..20.0f64) {
        let got = m_indicator(&Cube::interval(a, a + l).unwrap(), &[x]);
        let want = m_indicator_candidates(a, a + l, x);
        prop_assert!((got - want).abs() <= 1e-12 * want.max(1e-300));
        prop_assert!(got > 0.0 && got <= 1.0);
    }

    #[test]
    fn maximal_dominates_and_is_bounded(f in step(), x in -6.0..8.0f64) {
        let m = MaximalProfile::new(&f).unwrap();
        let v = m.eval(x);
        prop_assert!(v <= f.max_value() * (1.0 + 1e-12));
        if !f.breakpoints().contains(&x) {
            prop_assert!(v >= f.eval(x) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn maximal_weak_type(f in step(), lambda in 0.05..3.0f64) {
        let m = MaximalProfile::new(&f).unwrap();
        let level = m.superlevel(lambda).unwrap().measure();
        let mass = f.total_integral().unwrap();
        prop_assert!(level <= 2.0 * mass / lambda * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn whitney_contract_holds(omega in open_set(), r in prop::sample::select(vec![1.0, 2.0])) {
        let cubes = whitney(&omega, r).unwrap();
        let rep = validate_whitney(&omega, r, &cubes).unwrap();
        prop_assert!(rep.ratio_ok && rep.disjoint);
        prop_assert!(rep.coverage_error <= 1e-12);
    }

    #[test]
    fn dyadic_cover_contains_interval(a in -50.0..50.0f64, l in 1e-3..20.0f64) {
        let q = Cube::interval(a, a + l).unwrap();
        let cover = dyadic_cover(&q);
        let lo = cover.iter().map(|c| c.to_cube().lower()[0]).fold(f64::INFINITY, f64::min);
        let hi = cover.iter().map(|c| c.to_cube().upper(0)).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= a && hi >= a + l);
    }

    #[test]
    fn stopping_family_is_half_sparse(f in step()) {
        let (a, b) = f.support().unwrap();
        let s = cz_sparse(&f, &dyadic_cover(&Cube::interval(a, b).unwrap()), 2.0).unwrap();
        let chk = verify_sparse(&s, 0.5).unwrap();
        prop_assert!(chk.ok, "worst ratio {}", chk.worst_ratio);
    }

    #[test]
    fn hilbert_closed_form_matches_quadrature(f in step(), x in -6.0..8.0f64) {
        prop_assume!(!f.breakpoints().iter().any(|b| (b - x).abs() < 1e-6));
        let a = hilbert_eval(&f, x, None).unwrap();
        let b = hilbert_quadrature(&f, x).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * b.abs().max(1e-3));
    }

    #[test]
    fn exponent_identities(p in 1.01..20.0f64, delta in 1e-3..1.0f64) {
        prop_assert!(exponent_check(p, delta).unwrap().all());
    }

    #[test]
    fn tail_ratio_is_scale_invariant(j in -6i32..6, a in -3.0..3.0f64) {
        let w = Weight::constant(1.0);
        let q = Cube::interval(a, a + (j as f64).exp2()).unwrap();
        let t = tail_functional(&q, &w, &PsiFunction::Power(2.0)).unwrap().value / q.volume();
        let d = tail_discretized(&q, &w, 2.0).unwrap().value;
        prop_assert!((d / t - 2.0 / 3.0).abs() <= 1e-9);
    }

    #[test]
    fn phi_p_monotone_on_unit_interval(s in 1e-8..1.0f64, u in 1e-8..1.0f64, p in 1.1..4.0f64) {
        let (s, t) = if s < u { (s, u) } else { (u, s) };
        prop_assert!(phi_p(s, p) <= phi_p(t, p));
        prop_assert!(phi_p(s, p) / s <= phi_p(t, p) / t * (1.0 + 1e-12));
    }

    #[test]
    fn layer_cake_window_is_ordered(p in 0.5..8.0f64) {
        let (a, b) = dyadic_layer_cake_window(p);
        prop_assert!(0.0 < a && a < b);
        prop_assert!((b / a - p.exp2()).abs() <= 1e-12 * p.exp2());
    }

    #[test]
    fn certified_sums_contain_exact(xs in prop::collection::vec((-1e3..1e3f64, 0.0..1.0f64), 1..20)) {
        let s: CertifiedValue = xs.iter().map(|&(v, e)| CertifiedValue::new(v, e)).sum();
        let exact: f64 = xs.iter().map(|x| x.0).sum();
        prop_assert!(s.contains(exact));
    }
}
