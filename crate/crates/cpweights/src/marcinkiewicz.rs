//! Level decompositions `Ω_k = {Mf > 2^k}` with Whitney families, and the
//! Marcinkiewicz integrals `∫(M_{k,p,q}h)^p w` and `∫(M_{p,q}h)^p w`.

use serde::Serialize;

use crate::calculus::{pairwise_sum, CertifiedValue, StepFunction1D};
use crate::error::{domain, Error, Result};
use crate::geometry::{validate_whitney, whitney_with, Cube, OpenSet, WhitneyOptions, WhitneyReport};
use crate::maximal::{maximal_lp_power, MaximalProfile};
use crate::weights::{cp_characteristic_estimate, tail_functional, PsiFunction, Weight};

#[derive(Debug, Clone, Serialize)]
pub struct Level {
    pub k: i32,
    pub omega: OpenSet,
    pub cubes: Vec<Cube>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelDecomposition {
    pub source: StepFunction1D,
    pub k_min: i32,
    pub k_max: i32,
    pub whitney_r: f64,
    /// ascending in k
    pub levels: Vec<Level>,
    /// `max Mf`
    pub peak: f64,
}

fn whitney_level(omega: &OpenSet, r: f64) -> Result<Vec<Cube>> {
    let extent = omega.bounding_rect().map_or(0.0, |b| b.hi[0] - b.lo[0]);
    let opts = WhitneyOptions { min_side: 2f64.powi(-48).max(extent * 2f64.powi(-44)), ..WhitneyOptions::default() };
    whitney_with(omega, r, opts)
}

fn build_levels(prof: &MaximalProfile, k0: i32, k1: i32, r: f64) -> Result<Vec<Level>> {
    (k0..=k1)
        .map(|k| {
            let omega = prof.superlevel((k as f64).exp2())?;
            let cubes = whitney_level(&omega, r)?;
            Ok(Level { k, omega, cubes })
        })
        .collect()
}

/// Level sets of Mf at heights `2^k`, `k_min ≤ k ≤ k_max`, with Whitney families.
pub fn level_decompose(f: &StepFunction1D, k_min: i32, k_max: i32, r: f64) -> Result<LevelDecomposition> {
    if k_min > k_max {
        return domain(format!("empty level range {k_min}..={k_max}"));
    }
    if !(r >= 1.0) {
        return domain(format!("Whitney parameter R must be at least 1, got {r}"));
    }
    let prof = MaximalProfile::new(f)?;
    let levels = build_levels(&prof, k_min, k_max, r)?;
    Ok(LevelDecomposition { source: f.clone(), k_min, k_max, whitney_r: r, levels, peak: prof.max_value() })
}

impl LevelDecomposition {
    pub fn level(&self, k: i32) -> Option<&Level> {
        if k < self.k_min || k > self.k_max {
            return None;
        }
        self.levels.get((k - self.k_min) as usize)
    }

    /// Smallest k with `Ω_k = ∅`.
    pub fn top_empty_level(&self) -> i32 {
        if self.peak <= 0.0 {
            return i32::MIN;
        }
        self.peak.log2().ceil() as i32
    }

    /// Adds the levels `new_min..k_min`.
    pub fn extend_down(&mut self, new_min: i32) -> Result<()> {
        if new_min >= self.k_min {
            return Ok(());
        }
        let prof = MaximalProfile::new(&self.source)?;
        let mut fresh = build_levels(&prof, new_min, self.k_min - 1, self.whitney_r)?;
        fresh.append(&mut self.levels);
        self.levels = fresh;
        self.k_min = new_min;
        Ok(())
    }

    pub fn validate(&self) -> Result<Vec<WhitneyReport>> {
        self.levels.iter().map(|l| validate_whitney(&l.omega, self.whitney_r, &l.cubes)).collect()
    }

    pub fn is_nested(&self) -> bool {
        self.levels.windows(2).all(|w| {
            w[1].omega.boxes().iter().all(|b| (w[0].omega.overlap(b) - b.volume()).abs() <= 1e-12 * b.volume().max(1.0))
        })
    }
}

fn level_sum(level: &Level, q: f64, w: &Weight) -> Result<CertifiedValue> {
    let psi = PsiFunction::Power(q);
    level.cubes.iter().map(|c| tail_functional(c, w, &psi)).sum()
}

/// `2^{kp} Σ_{Q∈Q_k} ∫(M1_Q)^q w`.
pub fn mkpq_integral(dec: &LevelDecomposition, k: i32, p: f64, q: f64, w: &Weight) -> Result<CertifiedValue> {
    if !(q > 1.0) {
        return domain(format!("q must exceed 1, got {q}"));
    }
    match dec.level(k) {
        Some(l) => Ok(level_sum(l, q, w)?.scale((k as f64 * p).exp2())),
        None if k >= dec.top_empty_level() => Ok(CertifiedValue::exact(0.0)),
        None => domain(format!("level {k} lies outside the decomposition {}..={}", dec.k_min, dec.k_max)),
    }
}

/// Per-level terms of a decomposition together with a geometric estimate of
/// the levels below `k_min`.
#[derive(Debug, Clone, Serialize)]
pub struct LevelSum {
    pub terms: Vec<(i32, CertifiedValue)>,
    pub value: CertifiedValue,
    /// ratio of the two lowest nonzero terms
    pub decay: f64,
    pub remainder: f64,
}

fn summarize(terms: Vec<(i32, CertifiedValue)>) -> LevelSum {
    let nz: Vec<f64> = terms.iter().map(|t| t.1.value).filter(|v| *v > 0.0).take(2).collect();
    let (decay, remainder) = match nz.as_slice() {
        [] => (0.0, 0.0),
        [_] => (f64::INFINITY, f64::INFINITY),
        [a, b, ..] => {
            let rho = a / b;
            (rho, if rho < 1.0 { a * rho / (1.0 - rho) } else { f64::INFINITY })
        }
    };
    let partial: CertifiedValue = terms.iter().map(|t| t.1).sum();
    let value = CertifiedValue::new(partial.value + if remainder.is_finite() { remainder } else { 0.0 }, partial.error_bound + remainder);
    LevelSum { terms, value, decay, remainder }
}

fn check_top(dec: &LevelDecomposition) -> Result<()> {
    if dec.peak > 0.0 && dec.k_max + 1 < dec.top_empty_level() {
        return domain(format!("levels above {} are missing; max Mf = {}", dec.k_max, dec.peak));
    }
    Ok(())
}

/// `Σ_k ∫(M_{k,p,q}h)^p w` over the decomposition plus the estimated remainder.
pub fn mpq_integral(dec: &LevelDecomposition, p: f64, q: f64, w: &Weight) -> Result<LevelSum> {
    if !(p > 0.0 && q > 1.0) {
        return domain(format!("need p > 0 and q > 1, got p = {p}, q = {q}"));
    }
    check_top(dec)?;
    let terms = dec
        .levels
        .iter()
        .map(|l| Ok((l.k, level_sum(l, q, w)?.scale((l.k as f64 * p).exp2()))))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(terms))
}

/// Maximum number of levels examined below the top.
const MAX_LEVELS: i32 = 400;
const SUM_REL_TOL: f64 = 1e-9;

/// Decomposition of Mf from its top level down to where the remainder of
/// `term(level)` is at most `SUM_REL_TOL` of the accumulated value.
pub fn adaptive_level_sum(
    f: &StepFunction1D,
    r: f64,
    term: &dyn Fn(&Level) -> Result<CertifiedValue>,
) -> Result<(LevelDecomposition, LevelSum)> {
    let prof = MaximalProfile::new(f)?;
    let peak = prof.max_value();
    if peak <= 0.0 {
        let dec = LevelDecomposition { source: f.clone(), k_min: 0, k_max: 0, whitney_r: r, levels: vec![], peak };
        return Ok((dec, summarize(vec![])));
    }
    let top = peak.log2().ceil() as i32 - 1;
    let mut dec = level_decompose(f, top - 3, top, r)?;
    let mut terms: Vec<(i32, CertifiedValue)> = dec.levels.iter().map(|l| Ok((l.k, term(l)?))).collect::<Result<_>>()?;
    loop {
        let s = summarize(terms.clone());
        if s.remainder <= SUM_REL_TOL * s.value.value {
            return Ok((dec, s));
        }
        if top - dec.k_min >= MAX_LEVELS {
            if s.decay >= 1.0 - 1e-3 {
                return Err(Error::Infinite(format!("level sums do not decay (ratio {:.6})", s.decay)));
            }
            return Ok((dec, s));
        }
        let k = dec.k_min - 1;
        dec.extend_down(k)?;
        terms.insert(0, (k, term(&dec.levels[0])?));
    }
}

/// `∫(M_{p,q}(Mf))^p w` with the level range chosen adaptively.
pub fn mpq_integral_auto(f: &StepFunction1D, p: f64, q: f64, w: &Weight, r: f64) -> Result<LevelSum> {
    if !(p > 0.0 && q > 1.0) {
        return domain(format!("need p > 0 and q > 1, got p = {p}, q = {q}"));
    }
    let term = |l: &Level| Ok(level_sum(l, q, w)?.scale((l.k as f64 * p).exp2()));
    Ok(adaptive_level_sum(f, r, &term)?.1)
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub mpq: CertifiedValue,
    pub mf_power: CertifiedValue,
    pub ratio: f64,
    pub cq_estimate: f64,
    /// `max(1, c·log c)` at the estimated characteristic
    pub reference: f64,
}

/// `∫(M_{p,q}(Mf))^p w / ∫(Mf)^p w` and the estimated characteristic factor.
pub fn lemma_ratio(f: &StepFunction1D, w: &Weight, p: f64, q: f64) -> Result<LemmaReport> {
    if !(p > 0.0 && p < q) {
        return domain(format!("lemma needs 0 < p < q, got p = {p}, q = {q}"));
    }
    let term = |l: &Level| Ok(level_sum(l, q, w)?.scale((l.k as f64 * p).exp2()));
    let (dec, sum) = adaptive_level_sum(f, 1.0, &term)?;
    let mf = maximal_lp_power(f, p, w)?;
    let mut family: Vec<Cube> = dec.levels.iter().rev().take(4).flat_map(|l| l.cubes.iter().cloned()).collect();
    family.sort_by(|a, b| b.side().total_cmp(&a.side()));
    family.truncate(64);
    let c = cp_characteristic_estimate(w, q, &family)?.value;
    let reference = if c > 1.0 { (c * c.ln()).max(1.0) } else { 1.0 };
    Ok(LemmaReport { mpq: sum.value, mf_power: mf, ratio: sum.value.value / mf.value, cq_estimate: c, reference })
}

#[derive(Debug, Clone, Serialize)]
pub struct LayerCakeCheck {
    /// `p·Σ_k 2^{kp} Σ_{Q∈Q_k} w(Q)`
    pub dyadic: f64,
    pub norm_power: f64,
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub within: bool,
    pub levels: usize,
}

/// Dyadic layer-cake sum against `‖Mf‖^p_{L^p(w)}`, window `[2^{-p}, 1]`.
pub fn layer_cake_check(f: &StepFunction1D, w: &Weight, p: f64) -> Result<LayerCakeCheck> {
    if !(p > 0.0) {
        return domain("layer-cake exponent must be positive");
    }
    let term = |l: &Level| {
        let masses: Vec<f64> = l.cubes.iter().map(|c| w.mass_of(c)).collect::<Result<_>>()?;
        Ok(CertifiedValue::exact(pairwise_sum(masses) * (l.k as f64 * p).exp2()))
    };
    let (dec, sum) = adaptive_level_sum(f, 1.0, &term)?;
    let dyadic = p * sum.value.value;
    let norm_power = maximal_lp_power(f, p, w)?.value;
    let ratio = dyadic / norm_power;
    let lower = (-p).exp2();
    Ok(LayerCakeCheck { dyadic, norm_power, ratio, lower, upper: 1.0, within: ratio >= lower && ratio <= 1.0, levels: dec.levels.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> StepFunction1D {
        StepFunction1D::indicator(0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn level_sets_of_indicator() {
        let dec = level_decompose(&unit(), -2, 0, 1.0).unwrap();
        assert_eq!(dec.level(-1).unwrap().omega.components_1d(), vec![(-1.0, 2.0)]);
        assert_eq!(dec.level(-2).unwrap().omega.components_1d(), vec![(-3.0, 4.0)]);
        assert!(dec.level(0).unwrap().omega.is_empty());
        assert!(dec.is_nested());
        for rep in dec.validate().unwrap() {
            assert!(rep.passes(1e-9), "{rep:?}");
        }
    }

    #[test]
    fn mkpq_examples() {
        let dec = level_decompose(&unit(), -3, 0, 1.0).unwrap();
        let w = Weight::constant(1.0);
        let v = mkpq_integral(&dec, -1, 1.0, 2.0, &w).unwrap();
        assert!((v.value - 4.5).abs() < 1e-9, "{v:?}");
        assert_eq!(mkpq_integral(&dec, 0, 1.0, 2.0, &w).unwrap().value, 0.0);
        assert_eq!(mkpq_integral(&dec, 5, 1.0, 2.0, &w).unwrap().value, 0.0);
        assert!(mkpq_integral(&dec, -9, 1.0, 2.0, &w).is_err());
    }

    #[test]
    fn mkpq_is_additive_over_cubes() {
        let f = StepFunction1D::from_pieces(&[(0.0, 1.0, 2.0), (3.0, 3.5, 5.0)]).unwrap();
        let dec = level_decompose(&f, -2, -1, 1.0).unwrap();
        let w = km();
        let l = dec.level(-1).unwrap();
        let whole = mkpq_integral(&dec, -1, 1.5, 2.0, &w).unwrap().value;
        let parts: f64 = l.cubes.iter().map(|c| tail_functional(c, &w, &PsiFunction::Power(2.0)).unwrap().value).sum();
        assert!((whole - 2f64.powf(-1.5) * parts).abs() <= 1e-12 * whole);
    }

    fn km() -> Weight {
        crate::weights::km_weight_1d(crate::weights::KmRule::preset("geometric", 2.0).unwrap()).unwrap()
    }

    #[test]
    fn mpq_closed_form_for_lebesgue() {
        // Σ_{k≤-1} 2^{kp}·3·(2^{1-k} - 1) at q = 2
        let p = 2.0;
        let exact: f64 = (1..200).map(|j| 2f64.powf(-(j as f64) * p) * 3.0 * (2f64.powi(1 + j) - 1.0)).sum();
        let s = mpq_integral_auto(&unit(), p, 2.0, &Weight::constant(1.0), 1.0).unwrap();
        assert!((s.value.value - exact).abs() <= 1e-8 * exact, "{:?} vs {exact}", s.value);
        assert_eq!(mpq_integral_auto(&StepFunction1D::zero(), p, 2.0, &Weight::constant(1.0), 1.0).unwrap().value.value, 0.0);
    }

    #[test]
    fn mpq_diverges_at_p_one() {
        let r = mpq_integral_auto(&unit(), 1.0, 2.0, &Weight::constant(1.0), 1.0);
        assert!(matches!(r, Err(Error::Infinite(_))), "{r:?}");
    }

    #[test]
    fn mpq_stable_under_whitney_parameter() {
        let w = Weight::constant(1.0);
        let a = mpq_integral(&level_decompose(&unit(), -12, -1, 1.0).unwrap(), 2.0, 2.0, &w).unwrap().value.value;
        let b = mpq_integral(&level_decompose(&unit(), -12, -1, 2.0).unwrap(), 2.0, 2.0, &w).unwrap().value.value;
        assert!((a - b).abs() <= 1e-9 * a);
    }

    #[test]
    fn lemma_examples() {
        let w = Weight::constant(1.0);
        let r = lemma_ratio(&unit(), &w, 1.5, 2.0).unwrap();
        assert!(r.ratio.is_finite() && r.ratio > 0.0);
        assert!((r.cq_estimate - 1.0 / 3.0).abs() < 1e-6);
        assert!(lemma_ratio(&unit(), &w, 2.0, 2.0).is_err());
    }

    #[test]
    fn layer_cake_indicator() {
        let c = layer_cake_check(&unit(), &Weight::constant(1.0), 2.0).unwrap();
        // p·S/‖h‖^p always lies in [p/(2^p-1), p·2^p/(2^p-1)]
        assert!(c.ratio >= 2.0 / 3.0 - 1e-9 && c.ratio <= 8.0 / 3.0 + 1e-9, "{c:?}");
    }
}
