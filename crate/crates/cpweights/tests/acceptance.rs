//! Acceptance battery, one test per criterion. Every tolerance used here is
//! pinned in this file. Run with `--nocapture` to see the verdict lines.
//!
//! Two statements are mathematically false and their tests are `#[ignore]`d
//! with the measured counterexample in the reason; `cargo test -- --ignored`
//! runs them and they fail.

use cpweights::geometry::{dyadic_cover, validate_whitney, whitney};
use cpweights::harness::corpus::{cf_corpus, random_menu, random_open_set_1d, random_step, rng};
use cpweights::harness::criteria::{c12_shift, c15_triples};
use cpweights::marcinkiewicz::layer_cake_check;
use cpweights::maximal::m_indicator;
use cpweights::oracles::{dyadic_layer_cake_window, hilbert_quadrature, m_indicator_candidates, m_indicator_grid};
use cpweights::singular::{cf_ratio, hilbert_eval, HilbertMode};
use cpweights::sparse::{cz_sparse, exponent_check_exact, verify_sparse};
use cpweights::weights::{
    cp_characteristic_estimate, cpsi_certify, dilated_menu, hole_ratio, km_adversarial_menu, km_weight_1d, phi_doubling_sup,
    phi_moment_integral, phi_p, ratio_a, ratio_b, tail_discretized, tail_functional, CertifyMode, HeightRule, KmRule,
};
use cpweights::{Cube, OpenSet, PsiFunction, StepFunction1D, Weight};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

const SEED: u64 = 7;

fn verdict(n: u32, passed: bool, detail: String) {
    println!("criterion {n:>2}: {} {detail}", if passed { "PASS" } else { "FAIL" });
    assert!(passed, "criterion {n} failed: {detail}");
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn km(h: HeightRule) -> Weight {
    km_weight_1d(KmRule::preset("geometric", 2.0).unwrap().with_height(h)).unwrap()
}

fn hole_sweep(w: &Weight, psi: &PsiFunction, kmax: i64) -> Vec<f64> {
    let Weight::Km1d(k) = w else { panic!("not a KM weight") };
    (0..=kmax).map(|i| hole_ratio(&k.hole(i).unwrap(), w, psi).unwrap().as_f64()).collect()
}

#[test]
fn criterion_01_maximal_closed_form() {
    const CASES: usize = 1000;
    const REL_TOL: f64 = 1e-12;
    const ANCHOR_TOL: f64 = 1e-6;
    let mut r = rng(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..CASES {
        let a = r.random_range(-5.0..5.0);
        let l = r.random_range(1e-3..10.0);
        let x = r.random_range(-20.0..20.0);
        let got = m_indicator(&Cube::interval(a, a + l).unwrap(), &[x]);
        worst = worst.max(rel(got, m_indicator_candidates(a, a + l, x)));
    }
    let sq = Cube::new(vec![0.0, 0.0], 1.0).unwrap();
    let anchor = m_indicator(&sq, &[2.0, 0.5]);
    let grid = m_indicator_grid(&sq, &[2.0, 0.5], 40, 40, 4.0);
    let passed = worst <= REL_TOL && (anchor - 0.25).abs() <= ANCHOR_TOL && (grid - 0.25).abs() <= ANCHOR_TOL;
    verdict(1, passed, format!("max rel error {worst:.2e}; 2D anchor {anchor:.12}, grid oracle {grid:.12}"));
}

#[test]
fn criterion_02_whitney_contract() {
    const SETS: usize = 50;
    const COVERAGE_TOL: f64 = 1e-12;
    let mut r = rng(SEED);
    let mut bad = 0;
    let mut worst_cov: f64 = 0.0;
    for _ in 0..SETS {
        let omega = random_open_set_1d(&mut r).unwrap();
        for rr in [1.0, 2.0] {
            let cubes = whitney(&omega, rr).unwrap();
            let rep = validate_whitney(&omega, rr, &cubes).unwrap();
            worst_cov = worst_cov.max(rep.coverage_error);
            if !(rep.ratio_ok && rep.disjoint && rep.coverage_error <= COVERAGE_TOL) {
                bad += 1;
            }
        }
    }
    verdict(2, bad == 0, format!("{bad} bad decompositions of {} ; worst coverage error {worst_cov:.2e}", 2 * SETS));
}

#[test]
fn criterion_03_tail_anchors() {
    const TOL: f64 = 1e-6;
    const SCALE_TOL: f64 = 1e-9;
    let w = Weight::constant(1.0);
    let unit = Cube::interval(0.0, 1.0).unwrap();
    let t = tail_functional(&unit, &w, &PsiFunction::Power(2.0)).unwrap();
    let d = tail_discretized(&unit, &w, 2.0).unwrap();
    let mut spread: f64 = 0.0;
    for j in -5..=5 {
        let q = Cube::interval(0.0, (j as f64).exp2()).unwrap();
        let a = tail_functional(&q, &w, &PsiFunction::Power(2.0)).unwrap().value / q.volume();
        let b = tail_discretized(&q, &w, 2.0).unwrap().value;
        spread = spread.max((b / a - 2.0 / 3.0).abs());
    }
    let passed = (t.value - 3.0).abs() <= TOL && t.error_bound <= TOL && (d.value - 2.0).abs() <= TOL && spread <= SCALE_TOL;
    verdict(3, passed, format!("tail {:.12} ± {:.1e}, discretized {:.12}, ratio spread {spread:.2e}", t.value, t.error_bound, d.value));
}

#[test]
fn criterion_04_cp_characteristic_anchor() {
    const TOL: f64 = 1e-6;
    let menu = random_menu(&mut rng(SEED), 50, 1.0 / 64.0, 64.0).unwrap();
    let est = cp_characteristic_estimate(&Weight::constant(1.0), 2.0, &menu).unwrap();
    let dev = est.per_cube.iter().map(|v| (v - 1.0 / 3.0).abs()).fold(0.0, f64::max);
    verdict(4, est.per_cube.len() == menu.len() && dev <= TOL, format!("max |value - 1/3| {dev:.2e} over {} cubes", menu.len()));
}

#[test]
fn criterion_05_hole_ratio_dichotomy() {
    const K_MAX: i64 = 20;
    // first-run maximum of the bounded sweep was 1.8219
    const CAP: f64 = 2.0;
    const DIVERGENT_MIN: f64 = 1e3;
    let w = km(HeightRule::Cp { p: 2.0 });
    let bounded = hole_sweep(&w, &PsiFunction::Power(2.0), K_MAX);
    let growing = hole_sweep(&w, &PsiFunction::Power(3.0), K_MAX);
    let bmax = bounded.iter().copied().fold(0.0, f64::max);
    let last = growing[growing.len() - 1];
    let passed = bmax <= CAP && increasing(&growing) && last > DIVERGENT_MIN;
    verdict(5, passed, format!("Power(2) max {bmax:.4}; Power(3) increasing {}, {last:.3e} at k = {K_MAX}", increasing(&growing)));
}

#[test]
fn criterion_06_strictness_witnesses() {
    const K_MAX: i64 = 20;
    // first-run maximum of the bounded sweep was 4.8193
    const CAP: f64 = 5.0;
    const DIVERGENT_MIN: f64 = 1e2;
    let psi = PsiFunction::PhiP(2.0);
    let growing = hole_sweep(&km(HeightRule::Cp { p: 2.0 }), &psi, K_MAX);
    let bounded = hole_sweep(&km(HeightRule::PhiP { p: 2.0 }), &psi, K_MAX);
    let bmax = bounded.iter().copied().fold(0.0, f64::max);
    let last = growing[growing.len() - 1];
    let passed = increasing(&growing) && last > DIVERGENT_MIN && bmax <= CAP;
    verdict(6, passed, format!("h = l^(p-1): {last:.3e} at k = {K_MAX}; h = phi_2(l)/l: max {bmax:.4}"));
}

#[test]
fn criterion_07_limit_functionals() {
    const LIMIT: f64 = 1e-2;
    let a: Vec<f64> = (2..=8).map(|j| ratio_a(10f64.powi(-j), 2.0).unwrap().upper()).collect();
    let b: Vec<f64> = (4..=10).map(|j| ratio_b(10f64.powi(-j), 2.0, 0.5).unwrap()).collect();
    let a6 = ratio_a(1e-6, 2.0).unwrap().upper();
    let b10 = b[b.len() - 1];
    let passed = a6 <= LIMIT && decreasing(&a) && b10 <= LIMIT && decreasing(&b);
    verdict(7, passed, format!("ratio_a(1e-6) <= {a6:.3e}; ratio_b(1e-10) = {b10:.3e}"));
}

fn phi_grid() -> Vec<f64> {
    const GRID: usize = 10_000;
    (0..GRID).map(|i| 10f64.powf(-8.0 + 8.0 * i as f64 / (GRID - 1) as f64)).collect()
}

#[test]
fn criterion_08_phi_p_monotonicity_and_moment() {
    const CAUCHY_TOL: f64 = 1e-8;
    let grid = phi_grid();
    let mut violations = 0;
    for p in [1.5, 2.0, 3.0] {
        let v: Vec<f64> = grid.iter().map(|t| phi_p(*t, p)).collect();
        let u: Vec<f64> = grid.iter().zip(&v).map(|(t, f)| f / t).collect();
        violations += v.windows(2).filter(|w| w[1] < w[0]).count();
        violations += u.windows(2).filter(|w| w[1] < w[0]).count();
    }
    let refine: Vec<f64> = [1e-6, 1e-8, 1e-10, 1e-12].iter().map(|t| phi_moment_integral(*t).value).collect();
    let step = (refine[3] - refine[2]).abs();
    verdict(8, violations == 0 && step <= CAUCHY_TOL, format!("{violations} monotonicity violations; moment integral {:.12}, step {step:.1e}", refine[3]));
}

#[test]
#[ignore = "false bound: sup phi_p(2t)/phi_p(t) = 2^p (ln 3 / ln 2)^2 > 2^(p+1), attained at t = 1/2"]
fn criterion_08_phi_p_doubling_bound() {
    let grid = phi_grid();
    let sups: Vec<f64> = [1.5, 2.0, 3.0].iter().map(|p| phi_doubling_sup(*p, &grid)).collect();
    let over = [1.5f64, 2.0, 3.0].iter().zip(&sups).filter(|(p, d)| **d > (**p + 1.0).exp2()).count();
    verdict(8, over == 0, format!("doubling sups {sups:.4?} against 2^(p+1); {over} over"));
}

#[test]
fn criterion_09_sparsity() {
    const CASES: usize = 100;
    let mut r = rng(SEED);
    let mut failures = 0;
    let mut worst: f64 = 1.0;
    for _ in 0..CASES {
        let f = random_step(&mut r, 6, -8.0, 8.0).unwrap();
        let (a, b) = f.support().unwrap();
        let s = cz_sparse(&f, &dyadic_cover(&Cube::interval(a, b).unwrap()), 2.0).unwrap();
        let chk = verify_sparse(&s, 0.5).unwrap();
        failures += usize::from(!chk.ok);
        worst = worst.min(chk.worst_ratio);
    }
    verdict(9, failures == 0, format!("{failures} failures of {CASES}; min |E_Q|/|Q| {worst:.6}"));
}

#[test]
fn criterion_10_exponent_identities() {
    let mut violations = 0;
    for i in 1..=20u32 {
        for j in 1..=20u32 {
            // p = 1 + i/4, δ = j/20, both exact
            let p = BigRational::new(BigInt::from(4 + i), BigInt::from(4));
            let delta = BigRational::new(BigInt::from(j), BigInt::from(20));
            if !exponent_check_exact(&p, &delta).unwrap().all() {
                violations += 1;
            }
        }
    }
    verdict(10, violations == 0, format!("{violations} violations on the 20x20 grid"));
}

#[test]
fn criterion_11_hilbert_anchors() {
    const CASES: usize = 100;
    const REL_TOL: f64 = 1e-8;
    const ANCHOR_TOL: f64 = 1e-6;
    let mut r = rng(SEED);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < CASES {
        let f = random_step(&mut r, 3, -2.0, 2.0).unwrap();
        let x = r.random_range(-4.0..4.0);
        if f.breakpoints().contains(&x) {
            continue;
        }
        worst = worst.max(rel(hilbert_eval(&f, x, None).unwrap(), hilbert_quadrature(&f, x).unwrap()));
        n += 1;
    }
    let cf = cf_ratio(&StepFunction1D::indicator(0.0, 1.0, 1.0).unwrap(), &Weight::constant(1.0), 2.0, HilbertMode::Pv).unwrap();
    let dev = (cf.ratio - 1.0 / 3f64.sqrt()).abs();
    verdict(11, worst <= REL_TOL && dev <= ANCHOR_TOL, format!("max rel error {worst:.2e}; cf ratio {:.10}", cf.ratio));
}

#[test]
fn criterion_12_coifman_fefferman_sweep() {
    const SEEDS: [u64; 3] = [7, 8, 9];
    const STABILITY: f64 = 0.05;
    let w = km(HeightRule::PhiP { p: 2.0 });
    let corpus = cf_corpus();
    let maxima: Vec<f64> = SEEDS
        .iter()
        .map(|s| {
            let shift = c12_shift(*s);
            corpus.iter().map(|f| cf_ratio(&f.translate(shift), &w, 2.0, HilbertMode::Pv).unwrap().ratio).fold(0.0, f64::max)
        })
        .collect();
    let mean = maxima.iter().sum::<f64>() / maxima.len() as f64;
    let dev = maxima.iter().map(|m| (m / mean - 1.0).abs()).fold(0.0, f64::max);
    verdict(12, maxima.iter().all(|m| m.is_finite()) && dev <= STABILITY, format!("maxima {maxima:.6?}; deviation {dev:.4}"));
}

#[test]
fn criterion_13_compact_support_exclusion() {
    const EPS: f64 = 0.1;
    const J_MAX: u32 = 12;
    // the required growth equals the true growth 2^(jε) at p = 2
    const FLOAT_SLACK: f64 = 1e-12;
    let w = Weight::step(StepFunction1D::indicator(0.0, 1.0, 1.0).unwrap());
    let menu = dilated_menu(&Cube::interval(0.0, 1.0).unwrap(), J_MAX).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [1.5, 2.0] {
        let res = cpsi_certify(&w, &PsiFunction::Power(p), EPS, &menu, CertifyMode::All).unwrap();
        let ratios: Vec<f64> = res.rows.iter().map(|r| r.ratio).collect();
        let growth = ratios[ratios.len() - 1] / ratios[0];
        let need = (EPS * p * J_MAX as f64 / 2.0).exp2();
        ok &= increasing(&ratios) && growth >= need * (1.0 - FLOAT_SLACK);
        parts.push(format!("p = {p}: growth {growth:.6} vs {need:.6}"));
    }
    verdict(13, ok, parts.join("; "));
}

#[test]
fn criterion_14_mode_equivalence() {
    const EPS: f64 = 0.1;
    const MAX_FACTOR: f64 = 100.0;
    let kmw = km(HeightRule::Cp { p: 2.0 });
    let km_menu = km_adversarial_menu(&kmw, &[0, 2, 5, 10]).unwrap();
    let tail_w = Weight::half_line(0.0);
    let mut tail_menu = Vec::new();
    for j in -3..=4 {
        let s = (j as f64).exp2();
        let q = Cube::interval(-s, s).unwrap();
        tail_menu.push((q.clone(), OpenSet::intervals(&[(0.0, s)]).unwrap()));
        tail_menu.push((q, OpenSet::intervals(&[(-s, 0.0)]).unwrap()));
        tail_menu.push((Cube::interval(-s / 4.0, 3.0 * s / 4.0).unwrap(), OpenSet::intervals(&[(0.0, s / 16.0)]).unwrap()));
    }
    let psi = PsiFunction::Power(2.0);
    let modes = [CertifyMode::All, CertifyMode::Dyadic, CertifyMode::Dilated { gamma: 3.0 }];
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, w, menu) in [("km", &kmw, &km_menu), ("indicator-tail", &tail_w, &tail_menu)] {
        let cs: Vec<f64> = modes.iter().map(|m| cpsi_certify(w, &psi, EPS, menu, *m).unwrap().c_star).collect();
        let hi = cs.iter().copied().fold(0.0, f64::max);
        let lo = cs.iter().copied().fold(f64::INFINITY, f64::min);
        ok &= lo > 0.0 && hi / lo <= MAX_FACTOR;
        parts.push(format!("{label}: factor {:.3}", hi / lo));
    }
    verdict(14, ok, parts.join("; "));
}

#[test]
fn criterion_15_layer_cake_sharp_window() {
    const REL_SLACK: f64 = 1e-9;
    let mut outside = 0;
    for (f, w, p) in c15_triples().unwrap() {
        let c = layer_cake_check(&f, &w, p).unwrap();
        let (a, b) = dyadic_layer_cake_window(p);
        outside += usize::from(!(c.ratio >= a * (1.0 - REL_SLACK) && c.ratio <= b * (1.0 + REL_SLACK)));
    }
    verdict(15, outside == 0, format!("{outside} of 20 triples outside [p/(2^p-1), p 2^p/(2^p-1)]"));
}

#[test]
#[ignore = "false window: 18 of 20 triples fall outside [2^-p, 1], e.g. ratio 1.6984; the attainable window is [p/(2^p-1), p 2^p/(2^p-1)]"]
fn criterion_15_layer_cake_stated_window() {
    let mut outside = 0;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (f, w, p) in c15_triples().unwrap() {
        let c = layer_cake_check(&f, &w, p).unwrap();
        lo = lo.min(c.ratio);
        hi = hi.max(c.ratio);
        outside += usize::from(!(c.ratio >= (-p).exp2() && c.ratio <= 1.0));
    }
    verdict(15, outside == 0, format!("{outside} of 20 triples outside [2^-p, 1]; ratios in [{lo:.4}, {hi:.4}]"));
}
