//! The acceptance battery. Each criterion returns its verdict, the measured
//! quantities and per-case rows; all tolerances are the constants below.

use rand::Rng;

use super::corpus::{cf_corpus, random_menu, random_open_set_1d, random_step, rng};
use super::{Cell, CriterionResult, Row, RowBuilder};
use crate::calculus::StepFunction1D;
use crate::error::Result;
use crate::geometry::{dyadic_cover, validate_whitney, whitney, Cube, OpenSet};
use crate::marcinkiewicz::layer_cake_check;
use crate::maximal::m_indicator;
use crate::oracles::{dyadic_layer_cake_window, hilbert_quadrature, m_indicator_candidates, m_indicator_grid};
use crate::singular::{cf_ratio, hilbert_eval, HilbertMode};
use crate::sparse::{cz_sparse, exponent_check, verify_sparse};
use crate::weights::{
    cp_characteristic_estimate, cpsi_certify, dilated_menu, hole_ratio, km_adversarial_menu, km_weight_1d, phi_doubling_sup,
    phi_moment_integral, phi_p, ratio_a, ratio_b, tail_discretized, tail_functional, CertifyMode, HeightRule, KmRule,
    PsiFunction, Weight,
};

pub const COUNT: u32 = 15;

pub const C1_CASES: usize = 1000;
pub const C1_REL_TOL: f64 = 1e-12;
pub const C1_ANCHOR_TOL: f64 = 1e-6;
pub const C2_SETS: usize = 50;
pub const C2_COVERAGE_TOL: f64 = 1e-12;
pub const C3_TOL: f64 = 1e-6;
pub const C3_SCALE_TOL: f64 = 1e-9;
pub const C4_TOL: f64 = 1e-6;
pub const C4_CUBES: usize = 50;
pub const C5_K_MAX: i64 = 20;
/// max of the bounded sweep observed at first run: 1.8219
pub const C5_CAP: f64 = 2.0;
pub const C5_DIVERGENT_MIN: f64 = 1e3;
/// max of the bounded sweep observed at first run: 4.8193
pub const C6_CAP: f64 = 5.0;
pub const C6_DIVERGENT_MIN: f64 = 1e2;
pub const C7_LIMIT: f64 = 1e-2;
pub const C8_GRID: usize = 10_000;
pub const C8_CAUCHY_TOL: f64 = 1e-8;
pub const C9_CASES: usize = 100;
pub const C10_GRID: usize = 20;
pub const C11_CASES: usize = 100;
pub const C11_REL_TOL: f64 = 1e-8;
pub const C11_ANCHOR_TOL: f64 = 1e-6;
pub const C12_SEEDS: u64 = 3;
pub const C12_STABILITY: f64 = 0.05;
pub const C13_EPS: f64 = 0.1;
pub const C13_J_MAX: u32 = 12;
pub const C13_EXPONENTS: [f64; 2] = [1.5, 2.0];
/// relative float slack on the growth comparison, which is an equality at p = 2
pub const C13_FLOAT_SLACK: f64 = 1e-12;
pub const C14_EPS: f64 = 0.1;
pub const C14_MAX_FACTOR: f64 = 100.0;
pub const C15_TRIPLES: usize = 20;

pub struct Outcome {
    pub result: CriterionResult,
    pub rows: Vec<Row>,
}

pub fn name(id: u32) -> &'static str {
    match id {
        1 => "maximal closed form",
        2 => "whitney contract",
        3 => "tail anchors",
        4 => "C_p characteristic anchor",
        5 => "hole-ratio dichotomy",
        6 => "C~_p strictness witnesses",
        7 => "limit functionals",
        8 => "phi_p property suite",
        9 => "sparsity",
        10 => "exponent identities",
        11 => "Hilbert anchors",
        12 => "Coifman-Fefferman sweep",
        13 => "compact-support exclusion",
        14 => "mode equivalence",
        15 => "Marcinkiewicz layer-cake consistency",
        _ => "unknown",
    }
}

struct Check {
    passed: bool,
    detail: String,
    measured: Vec<(&'static str, Cell)>,
    rows: Vec<Row>,
}

/// Runs criterion `id`; an error inside the criterion counts as a failure.
pub fn run(id: u32, seed: u64) -> Outcome {
    let r = match id {
        1 => c1(seed),
        2 => c2(seed),
        3 => c3(),
        4 => c4(seed),
        5 => c5(),
        6 => c6(),
        7 => c7(),
        8 => c8(),
        9 => c9(seed),
        10 => c10(),
        11 => c11(seed),
        12 => c12(seed),
        13 => c13(),
        14 => c14(),
        15 => c15(),
        _ => Ok(Check { passed: false, detail: format!("no criterion {id}"), measured: vec![], rows: vec![] }),
    };
    let c = r.unwrap_or_else(|e| Check { passed: false, detail: format!("error: {e}"), measured: vec![], rows: vec![] });
    Outcome {
        result: CriterionResult {
            id,
            name: name(id).into(),
            passed: c.passed,
            detail: c.detail,
            measured: c.measured.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        },
        rows: c.rows,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn c1(seed: u64) -> Result<Check> {
    let mut r = rng(seed ^ 0xC1);
    let mut worst: f64 = 0.0;
    for _ in 0..C1_CASES {
        let a = r.random_range(-5.0..5.0);
        let l = r.random_range(1e-3..10.0);
        let x = r.random_range(-20.0..20.0);
        let exact = m_indicator(&Cube::interval(a, a + l)?, &[x]);
        worst = worst.max(rel(exact, m_indicator_candidates(a, a + l, x)));
    }
    let sq = Cube::new(vec![0.0, 0.0], 1.0)?;
    let anchor = m_indicator(&sq, &[2.0, 0.5]);
    let grid = m_indicator_grid(&sq, &[2.0, 0.5], 40, 40, 4.0);
    let anchor_err = (anchor - 0.25).abs().max((grid - 0.25).abs());
    Ok(Check {
        passed: worst <= C1_REL_TOL && anchor_err <= C1_ANCHOR_TOL,
        detail: format!("max rel error {worst:.3e} over {C1_CASES} cases; 2D anchor {anchor:.12} (grid {grid:.12})"),
        measured: vec![("max_rel_error", worst.into()), ("anchor", anchor.into()), ("anchor_grid", grid.into())],
        rows: vec![],
    })
}

fn c2(seed: u64) -> Result<Check> {
    let mut r = rng(seed ^ 0xC2);
    let mut rows = Vec::new();
    let mut ok = true;
    let mut worst_cov: f64 = 0.0;
    let mut max_ov = 0usize;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..C2_SETS {
        let omega: OpenSet = random_open_set_1d(&mut r)?;
        for rr in [1.0, 2.0] {
            let cubes = whitney(&omega, rr)?;
            let rep = validate_whitney(&omega, rr, &cubes)?;
            let good = rep.ratio_ok && rep.disjoint && rep.coverage_error <= C2_COVERAGE_TOL && rep.max_overlap >= 1;
            ok &= good;
            worst_cov = worst_cov.max(rep.coverage_error);
            max_ov = max_ov.max(rep.max_overlap);
            lo = lo.min(rep.min_ratio / rr);
            hi = hi.max(rep.max_ratio / rr);
            rows.push(
                RowBuilder::new()
                    .set("set", i)
                    .set("r", rr)
                    .set("cubes", rep.cubes)
                    .set("min_ratio", rep.min_ratio)
                    .set("max_ratio", rep.max_ratio)
                    .set("coverage_error", rep.coverage_error)
                    .set("max_overlap", rep.max_overlap)
                    .set("passed", good)
                    .build(),
            );
        }
    }
    Ok(Check {
        passed: ok,
        detail: format!(
            "{C2_SETS} sets x R in {{1,2}}: dist/(R diam) in [{lo:.3}, {hi:.3}], coverage error <= {worst_cov:.2e}, max overlap {max_ov}"
        ),
        measured: vec![("coverage_error", worst_cov.into()), ("max_overlap", max_ov.into()), ("min_ratio_over_r", lo.into()), ("max_ratio_over_r", hi.into())],
        rows,
    })
}

fn c3() -> Result<Check> {
    let w = Weight::constant(1.0);
    let unit = Cube::interval(0.0, 1.0)?;
    let t = tail_functional(&unit, &w, &PsiFunction::Power(2.0))?;
    let d = tail_discretized(&unit, &w, 2.0)?;
    let mut ratios = Vec::new();
    for j in -5..=5 {
        let q = Cube::interval(0.0, (j as f64).exp2())?;
        let a = tail_functional(&q, &w, &PsiFunction::Power(2.0))?.value;
        let b = tail_discretized(&q, &w, 2.0)?.value;
        ratios.push(b / (a / q.volume()));
    }
    let spread = ratios.iter().map(|r| (r - 2.0 / 3.0).abs()).fold(0.0, f64::max);
    let passed = (t.value - 3.0).abs() <= C3_TOL && t.error_bound <= C3_TOL && (d.value - 2.0).abs() <= C3_TOL && spread <= C3_SCALE_TOL;
    Ok(Check {
        passed,
        detail: format!("tail {:.12} (bound {:.1e}), discretized {:.12}, max |ratio - 2/3| {spread:.2e}", t.value, t.error_bound, d.value),
        measured: vec![("tail", t.value.into()), ("tail_err", t.error_bound.into()), ("discretized", d.value.into()), ("ratio_deviation", spread.into())],
        rows: vec![],
    })
}

fn c4(seed: u64) -> Result<Check> {
    let menu = random_menu(&mut rng(seed ^ 0xC4), C4_CUBES, 1.0 / 64.0, 64.0)?;
    let est = cp_characteristic_estimate(&Weight::constant(1.0), 2.0, &menu)?;
    let dev = est.per_cube.iter().map(|v| (v - 1.0 / 3.0).abs()).fold(0.0, f64::max);
    Ok(Check {
        passed: est.per_cube.len() == menu.len() && dev <= C4_TOL,
        detail: format!("{} cubes, max |value - 1/3| {dev:.2e}", menu.len()),
        measured: vec![("estimate", est.value.into()), ("max_deviation", dev.into())],
        rows: vec![],
    })
}

fn km(height: HeightRule) -> Result<Weight> {
    km_weight_1d(KmRule::preset("geometric", 2.0)?.with_height(height))
}

fn hole_sweep(w: &Weight, psi: &PsiFunction) -> Result<Vec<f64>> {
    let Weight::Km1d(k) = w else { unreachable!() };
    (0..=C5_K_MAX)
        .map(|i| {
            let hole = k.hole(i).ok_or_else(|| crate::Error::Domain(format!("no hole {i}")))?;
            Ok(hole_ratio(&hole, w, psi)?.as_f64())
        })
        .collect()
}

fn sweep_rows(label: &str, v: &[f64]) -> Vec<Row> {
    v.iter().enumerate().map(|(k, r)| RowBuilder::new().set("sweep", label).set("k", k).set("hole_ratio", *r).build()).collect()
}

fn c5() -> Result<Check> {
    let w = km(HeightRule::Cp { p: 2.0 })?;
    let bounded = hole_sweep(&w, &PsiFunction::Power(2.0))?;
    let growing = hole_sweep(&w, &PsiFunction::Power(3.0))?;
    let bmax = bounded.iter().copied().fold(0.0, f64::max);
    let last = *growing.last().unwrap_or(&0.0);
    let passed = bmax <= C5_CAP && strictly_increasing(&growing) && last > C5_DIVERGENT_MIN;
    let mut rows = sweep_rows("power2", &bounded);
    rows.extend(sweep_rows("power3", &growing));
    Ok(Check {
        passed,
        detail: format!(
            "Power(2) max {bmax:.4} (cap {C5_CAP}); Power(3) increasing {} with value {last:.4e} at k = {C5_K_MAX}",
            strictly_increasing(&growing)
        ),
        measured: vec![("bounded_max", bmax.into()), ("divergent_last", last.into())],
        rows,
    })
}

fn c6() -> Result<Check> {
    let psi = PsiFunction::PhiP(2.0);
    let growing = hole_sweep(&km(HeightRule::Cp { p: 2.0 })?, &psi)?;
    let bounded = hole_sweep(&km(HeightRule::PhiP { p: 2.0 })?, &psi)?;
    let bmax = bounded.iter().copied().fold(0.0, f64::max);
    let last = *growing.last().unwrap_or(&0.0);
    let passed = strictly_increasing(&growing) && last > C6_DIVERGENT_MIN && bmax <= C6_CAP;
    let mut rows = sweep_rows("h=l^(p-1)", &growing);
    rows.extend(sweep_rows("h=phi(l)/l", &bounded));
    Ok(Check {
        passed,
        detail: format!("h = l^(p-1): {last:.4e} at k = {C5_K_MAX}; h = phi_2(l)/l: max {bmax:.4} (cap {C6_CAP})"),
        measured: vec![("divergent_last", last.into()), ("bounded_max", bmax.into())],
        rows,
    })
}

fn c7() -> Result<Check> {
    let ta: Vec<f64> = (2..=8).map(|j| 10f64.powi(-j)).collect();
    let a: Vec<f64> = ta.iter().map(|t| Ok(ratio_a(*t, 2.0)?.upper())).collect::<Result<_>>()?;
    let tb: Vec<f64> = (4..=10).map(|j| 10f64.powi(-j)).collect();
    let b: Vec<f64> = tb.iter().map(|t| ratio_b(*t, 2.0, 0.5)).collect::<Result<_>>()?;
    let a6 = ratio_a(1e-6, 2.0)?.upper();
    let b10 = *b.last().unwrap_or(&f64::INFINITY);
    let passed = a6 <= C7_LIMIT && strictly_decreasing(&a) && b10 <= C7_LIMIT && strictly_decreasing(&b);
    Ok(Check {
        passed,
        detail: format!("ratio_a(1e-6) <= {a6:.4e}, decreasing {}; ratio_b(1e-10) = {b10:.4e}, decreasing {}", strictly_decreasing(&a), strictly_decreasing(&b)),
        measured: vec![("ratio_a_1e-6", a6.into()), ("ratio_b_1e-10", b10.into())],
        rows: vec![],
    })
}

fn c8() -> Result<Check> {
    // φ_p is defined on (0, 1]; beyond 1 it is the constant φ_p(1)
    let grid: Vec<f64> = (0..C8_GRID).map(|i| 10f64.powf(-8.0 + 8.0 * i as f64 / (C8_GRID - 1) as f64)).collect();
    let mut violations = 0usize;
    let mut doubling = Vec::new();
    let mut doubling_over = 0usize;
    for p in [1.5, 2.0, 3.0] {
        let v: Vec<f64> = grid.iter().map(|t| phi_p(*t, p)).collect();
        violations += v.windows(2).filter(|w| w[1] < w[0]).count();
        let u: Vec<f64> = grid.iter().zip(&v).map(|(t, f)| f / t).collect();
        violations += u.windows(2).filter(|w| w[1] < w[0]).count();
        let d = phi_doubling_sup(p, &grid);
        if d > (p + 1.0).exp2() {
            doubling_over += 1;
        }
        doubling.push(d);
    }
    let refinements: Vec<f64> = [1e-6, 1e-8, 1e-10, 1e-12].iter().map(|t| phi_moment_integral(*t).value).collect();
    let cauchy = refinements.windows(2).map(|w| (w[1] - w[0]).abs()).next_back().unwrap_or(f64::INFINITY);
    Ok(Check {
        passed: violations == 0 && doubling_over == 0 && cauchy <= C8_CAUCHY_TOL,
        detail: format!(
            "{violations} monotonicity violations on a {C8_GRID}-point grid; doubling sups {doubling:.4?} vs 2^(p+1) [5.6569, 8, 16], {doubling_over} over; moment integral {:.12}, last refinement step {cauchy:.2e}",
            refinements.last().unwrap_or(&f64::NAN)
        ),
        measured: vec![("violations", violations.into()), ("doubling_over", doubling_over.into()), ("cauchy_step", cauchy.into())],
        rows: vec![],
    })
}

fn c9(seed: u64) -> Result<Check> {
    let mut r = rng(seed ^ 0xC9);
    let mut failures = 0usize;
    let mut worst: f64 = 1.0;
    let mut rows = Vec::new();
    for i in 0..C9_CASES {
        let f = random_step(&mut r, 6, -8.0, 8.0)?;
        let (a, b) = f.support().unwrap_or((0.0, 1.0));
        let roots = dyadic_cover(&Cube::interval(a, b)?);
        let s = cz_sparse(&f, &roots, 2.0)?;
        let chk = verify_sparse(&s, 0.5)?;
        if !chk.ok {
            failures += 1;
        }
        worst = worst.min(chk.worst_ratio);
        rows.push(RowBuilder::new().set("case", i).set("cubes", s.len()).set("worst_ratio", chk.worst_ratio).set("passed", chk.ok).build());
    }
    Ok(Check {
        passed: failures == 0,
        detail: format!("{failures} failures in {C9_CASES} cases; min |E_Q|/|Q| = {worst:.6}"),
        measured: vec![("failures", failures.into()), ("worst_ratio", worst.into())],
        rows,
    })
}

fn c10() -> Result<Check> {
    let mut violations = 0usize;
    for i in 1..=C10_GRID {
        let p = 1.0 + 0.25 * i as f64;
        for j in 1..=C10_GRID {
            let d = j as f64 / C10_GRID as f64;
            if !exponent_check(p, d)?.all() {
                violations += 1;
            }
        }
    }
    Ok(Check {
        passed: violations == 0,
        detail: format!("{violations} violations on the {C10_GRID}x{C10_GRID} grid p in [1.25, 6], delta in (0, 1]"),
        measured: vec![("violations", violations.into())],
        rows: vec![],
    })
}

fn c11(seed: u64) -> Result<Check> {
    let mut r = rng(seed ^ 0xC11);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < C11_CASES {
        let f = random_step(&mut r, 3, -2.0, 2.0)?;
        let x = r.random_range(-4.0..4.0);
        if f.breakpoints().contains(&x) {
            continue;
        }
        let a = hilbert_eval(&f, x, None)?;
        let b = hilbert_quadrature(&f, x)?;
        worst = worst.max(rel(a, b));
        n += 1;
    }
    let cf = cf_ratio(&StepFunction1D::indicator(0.0, 1.0, 1.0)?, &Weight::constant(1.0), 2.0, HilbertMode::Pv)?;
    let dev = (cf.ratio - 1.0 / 3f64.sqrt()).abs();
    Ok(Check {
        passed: worst <= C11_REL_TOL && dev <= C11_ANCHOR_TOL,
        detail: format!("max rel error {worst:.3e} over {C11_CASES} cases; cf ratio {:.10} (|dev| {dev:.2e})", cf.ratio),
        measured: vec![("max_rel_error", worst.into()), ("cf_ratio", cf.ratio.into())],
        rows: vec![],
    })
}

/// Lattice translation of the corpus for a given seed, in whole periods.
pub fn c12_shift(seed: u64) -> f64 {
    4.0 * rng(seed ^ 0xC12).random_range(-8i64..=8) as f64
}

fn c12(seed: u64) -> Result<Check> {
    let w = km(HeightRule::PhiP { p: 2.0 })?;
    let corpus = cf_corpus();
    let mut maxima = Vec::new();
    let mut rows = Vec::new();
    for s in seed..seed + C12_SEEDS {
        let shift = c12_shift(s);
        let mut mx: f64 = 0.0;
        for (i, f) in corpus.iter().enumerate() {
            let row = cf_ratio(&f.translate(shift), &w, 2.0, HilbertMode::Pv)?;
            mx = mx.max(row.ratio);
            rows.push(
                RowBuilder::new()
                    .set("seed", s as i64)
                    .set("shift", shift)
                    .set("function", i)
                    .cert("h_norm", row.h_norm)
                    .cert("m_norm", row.m_norm)
                    .set("ratio", row.ratio)
                    .build(),
            );
        }
        maxima.push(mx);
    }
    let mean = maxima.iter().sum::<f64>() / maxima.len() as f64;
    let dev = maxima.iter().map(|m| (m / mean - 1.0).abs()).fold(0.0, f64::max);
    Ok(Check {
        passed: maxima.iter().all(|m| m.is_finite()) && dev <= C12_STABILITY,
        detail: format!("max ratio per seed {maxima:.6?}; max relative deviation from the mean {dev:.4}"),
        measured: vec![("max_ratio", maxima.iter().copied().fold(0.0, f64::max).into()), ("deviation", dev.into())],
        rows,
    })
}

fn c13() -> Result<Check> {
    let w = Weight::step(StepFunction1D::indicator(0.0, 1.0, 1.0)?);
    let e = Cube::interval(0.0, 1.0)?;
    let menu = dilated_menu(&e, C13_J_MAX)?;
    let mut ok = true;
    let mut parts = Vec::new();
    let mut rows = Vec::new();
    for p in C13_EXPONENTS {
        let res = cpsi_certify(&w, &PsiFunction::Power(p), C13_EPS, &menu, CertifyMode::All)?;
        let ratios: Vec<f64> = res.rows.iter().map(|r| r.ratio).collect();
        let growth = ratios[ratios.len() - 1] / ratios[0];
        let need = (C13_EPS * p * C13_J_MAX as f64 / 2.0).exp2();
        let good = strictly_increasing(&ratios) && growth >= need * (1.0 - C13_FLOAT_SLACK);
        ok &= good;
        parts.push(format!("p = {p}: growth {growth:.12} vs required {need:.12}"));
        for (j, r) in ratios.iter().enumerate() {
            rows.push(RowBuilder::new().set("p", p).set("j", j).set("ratio", *r).build());
        }
    }
    Ok(Check { passed: ok, detail: parts.join("; "), measured: vec![], rows })
}

fn c14() -> Result<Check> {
    let kmw = km(HeightRule::Cp { p: 2.0 })?;
    let km_menu = km_adversarial_menu(&kmw, &[0, 2, 5, 10])?;
    let tail_w = Weight::half_line(0.0);
    let mut tail_menu = Vec::new();
    for j in -3..=4 {
        let s = (j as f64).exp2();
        let q = Cube::interval(-s, s)?;
        tail_menu.push((q.clone(), OpenSet::intervals(&[(0.0, s)])?));
        tail_menu.push((q.clone(), OpenSet::intervals(&[(0.0, s / 8.0)])?));
        tail_menu.push((q, OpenSet::intervals(&[(-s, 0.0)])?));
        let q = Cube::interval(-s / 4.0, 3.0 * s / 4.0)?;
        tail_menu.push((q, OpenSet::intervals(&[(0.0, s / 16.0)])?));
    }
    let psi = PsiFunction::Power(2.0);
    let modes = [("all", CertifyMode::All), ("dyadic", CertifyMode::Dyadic), ("dilated3", CertifyMode::Dilated { gamma: 3.0 })];
    let mut ok = true;
    let mut parts = Vec::new();
    let mut rows = Vec::new();
    let mut measured = Vec::new();
    for (label, w, menu) in [("km", &kmw, &km_menu), ("indicator-tail", &tail_w, &tail_menu)] {
        let cs: Vec<f64> = modes.iter().map(|(_, m)| Ok(cpsi_certify(w, &psi, C14_EPS, menu, *m)?.c_star)).collect::<Result<_>>()?;
        let hi = cs.iter().copied().fold(0.0, f64::max);
        let lo = cs.iter().copied().fold(f64::INFINITY, f64::min);
        let factor = hi / lo;
        ok &= lo > 0.0 && factor <= C14_MAX_FACTOR;
        parts.push(format!("{label}: all {:.4e}, dyadic {:.4e}, dilated(3) {:.4e}, factor {factor:.3}", cs[0], cs[1], cs[2]));
        for ((m, _), c) in modes.iter().zip(&cs) {
            rows.push(RowBuilder::new().set("weight", label).set("mode", *m).set("c_star", *c).build());
        }
        measured.push((if label == "km" { "km_factor" } else { "tail_factor" }, factor.into()));
    }
    Ok(Check { passed: ok, detail: parts.join("; "), measured, rows })
}

/// The fixed (f, w, p) triples of the layer-cake check.
pub fn c15_triples() -> Result<Vec<(StepFunction1D, Weight, f64)>> {
    let fs = [StepFunction1D::indicator(0.0, 1.0, 1.0)?,
        StepFunction1D::from_pieces(&[(0.0, 1.0, 2.0), (3.0, 3.5, 5.0)])?,
        StepFunction1D::from_pieces(&[(-2.0, -1.7, 0.3), (0.1, 0.12, 40.0)])?,
        StepFunction1D::from_pieces(&[(0.0, 4.0, 1.0), (1.0, 2.0, 2.0)])?,
        StepFunction1D::from_pieces(&[(-5.0, -4.0, 3.0), (4.0, 5.0, 3.0)])?];
    let ws = [Weight::constant(1.0), km(HeightRule::Cp { p: 2.0 })?, Weight::half_line(0.0), Weight::constant(0.5)];
    let ps = [1.5, 2.0, 3.0, 4.0];
    let mut out = Vec::new();
    for (i, f) in fs.iter().enumerate() {
        for (j, w) in ws.iter().enumerate() {
            let p = ps[(i + 2 * j) % ps.len()];
            out.push((f.clone(), w.clone(), p));
        }
    }
    out.truncate(C15_TRIPLES);
    Ok(out)
}

fn c15() -> Result<Check> {
    let triples = c15_triples()?;
    let mut outside = 0usize;
    let mut outside_sharp = 0usize;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut rows = Vec::new();
    for (i, (f, w, p)) in triples.iter().enumerate() {
        let c = layer_cake_check(f, w, *p)?;
        let (a, b) = dyadic_layer_cake_window(*p);
        let sharp = c.ratio >= a * (1.0 - 1e-9) && c.ratio <= b * (1.0 + 1e-9);
        if !c.within {
            outside += 1;
        }
        if !sharp {
            outside_sharp += 1;
        }
        lo = lo.min(c.ratio);
        hi = hi.max(c.ratio);
        rows.push(
            RowBuilder::new()
                .set("triple", i)
                .set("weight", w.label())
                .set("p", *p)
                .set("dyadic_sum", c.dyadic)
                .set("norm_power", c.norm_power)
                .set("ratio", c.ratio)
                .set("window_lo", c.lower)
                .set("window_hi", c.upper)
                .set("within", c.within)
                .set("sharp_lo", a)
                .set("sharp_hi", b)
                .set("within_sharp", sharp)
                .build(),
        );
    }
    Ok(Check {
        passed: outside == 0,
        detail: format!(
            "{outside} of {} triples outside [2^-p, 1]; ratios in [{lo:.4}, {hi:.4}]; {outside_sharp} outside the sharp window [p/(2^p-1), p 2^p/(2^p-1)]",
            triples.len()
        ),
        measured: vec![("outside", outside.into()), ("outside_sharp", outside_sharp.into()), ("min_ratio", lo.into()), ("max_ratio", hi.into())],
        rows,
    })
}
