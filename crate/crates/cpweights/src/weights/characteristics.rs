//! Weight-class characteristics over finite cube menus: `[w]_{C_p}`, the C_ψ
//! certifier, classical A_p / RH_q / A_∞ ratios and reverse Hölder probes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::calculus::StepFunction1D;
use crate::error::{domain, Error, Ratio, Result};
use crate::geometry::{dyadic_cover, Cube, OpenSet};
use crate::maximal::MaximalProfile;

use super::{tail_functional, PsiFunction, Weight};

/// `∫_Q M(1_Q w)` for 1D piecewise-constant weights.
pub fn localized_maximal_integral(q: &Cube, w: &Weight) -> Result<f64> {
    if q.dim() != 1 {
        return Err(Error::Unsupported("localized maximal integrals are implemented in 1D".into()));
    }
    let (a, b) = q.endpoints();
    let prof = MaximalProfile::new(&w.restrict_to_step(a, b)?)?;
    Ok(prof.integral(a, b))
}

/// Tail functional with the zero convention: `None` when infinite.
fn tail_or_infinite(q: &Cube, w: &Weight, psi: &PsiFunction) -> Result<Option<f64>> {
    match tail_functional(q, w, psi) {
        Ok(v) => Ok(Some(v.value)),
        Err(Error::Infinite(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CpEstimate {
    /// max over the family; 0 under the zero convention
    pub value: f64,
    /// true when the tail functional is infinite
    pub zero_convention: bool,
    pub per_cube: Vec<f64>,
    pub argmax: Option<usize>,
}

/// `max_Q ∫_Q M(1_Q w) / ∫(M1_Q)^p w` over the family.
pub fn cp_characteristic_estimate(w: &Weight, p: f64, family: &[Cube]) -> Result<CpEstimate> {
    if !(p > 0.0) {
        return domain("C_p exponent must be positive");
    }
    let psi = PsiFunction::Power(p);
    let mut per_cube = Vec::with_capacity(family.len());
    for q in family {
        let den = match tail_or_infinite(q, w, &psi)? {
            Some(d) => d,
            None => return Ok(CpEstimate { value: 0.0, zero_convention: true, per_cube: vec![], argmax: None }),
        };
        let num = localized_maximal_integral(q, w)?;
        per_cube.push(Ratio::of(num, den).as_f64());
    }
    let argmax = (0..per_cube.len()).max_by(|i, j| per_cube[*i].total_cmp(&per_cube[*j]));
    Ok(CpEstimate { value: argmax.map_or(0.0, |i| per_cube[i]), zero_convention: false, per_cube, argmax })
}

/// `(1 - 2^{-n(p-1)})·2^{-(2np+3n)}·20^{-n}·min(1, 1/[w]_{C_p})`.
pub fn eps_default(n: usize, p: f64, cp: f64) -> f64 {
    let n = n as f64;
    let m = if cp > 1.0 { 1.0 / cp } else { 1.0 };
    (1.0 - (-n * (p - 1.0)).exp2()) * (-(2.0 * n * p + 3.0 * n)).exp2() * 20f64.powf(-n) * m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CertifyMode {
    All,
    Dyadic,
    Dilated { gamma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifyRow {
    /// menu index of the pair
    pub pair: usize,
    /// cube entering the ratio
    pub cube: Vec<f64>,
    pub e_measure: f64,
    pub w_e: f64,
    /// tail functional of the denominator cube; infinite under the zero convention
    pub tail: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifyResult {
    pub c_star: f64,
    pub argmax: Option<usize>,
    pub rows: Vec<CertifyRow>,
}

fn set_mass(w: &Weight, e: &OpenSet, q: Option<&Cube>) -> Result<f64> {
    let mut s = 0.0;
    for b in e.boxes() {
        let r = match q {
            Some(q) => b.intersect(&q.to_rect()),
            None => b.clone(),
        };
        if !r.is_empty() {
            s += w.mass(&r)?.value;
        }
    }
    Ok(s)
}

fn cube_key(q: &Cube) -> Vec<u64> {
    let mut k: Vec<u64> = q.lower().iter().map(|v| v.to_bits()).collect();
    k.push(q.side().to_bits());
    k
}

/// Best constant `C*` with `w(E) ≤ C (|E|/|Q|)^ε ∫ψ(M1_Q)w` over the menu.
pub fn cpsi_certify(w: &Weight, psi: &PsiFunction, eps: f64, menu: &[(Cube, OpenSet)], mode: CertifyMode) -> Result<CertifyResult> {
    if !(eps > 0.0) {
        return domain("ε must be positive");
    }
    if let CertifyMode::Dilated { gamma } = mode {
        if !(gamma >= 1.0) {
            return domain("dilated mode needs γ ≥ 1");
        }
    }
    let mut cache: BTreeMap<Vec<u64>, Option<f64>> = BTreeMap::new();
    let mut tail = |q: &Cube| -> Result<Option<f64>> {
        let k = cube_key(q);
        if let Some(v) = cache.get(&k) {
            return Ok(*v);
        }
        let v = tail_or_infinite(q, w, psi)?;
        cache.insert(k, v);
        Ok(v)
    };
    let mut rows = Vec::new();
    for (i, (q, e)) in menu.iter().enumerate() {
        let em = e.measure();
        if !(em > 0.0) {
            return domain(format!("menu pair {i}: E must have positive measure"));
        }
        if e.overlap(&q.to_rect()) < em * (1.0 - 1e-12) {
            return domain(format!("menu pair {i}: E is not contained in Q"));
        }
        let mut push = |cube: &Cube, den_cube: &Cube, e_meas: f64, w_e: f64| -> Result<()> {
            let t = tail(den_cube)?;
            let (tail_v, ratio) = match t {
                Some(t) => (t, Ratio::of(w_e, (e_meas / cube.volume()).powf(eps) * t).as_f64()),
                None => (f64::INFINITY, 0.0),
            };
            rows.push(CertifyRow { pair: i, cube: den_cube.to_array(), e_measure: e_meas, w_e, tail: tail_v, ratio });
            Ok(())
        };
        match mode {
            CertifyMode::All => push(q, q, em, set_mass(w, e, None)?)?,
            CertifyMode::Dilated { gamma } => push(q, &q.dilate(gamma)?, em, set_mass(w, e, None)?)?,
            CertifyMode::Dyadic => {
                for d in dyadic_cover(q) {
                    let qi = d.to_cube();
                    let ei = e.overlap(&qi.to_rect());
                    if ei > 0.0 {
                        push(&qi, &qi, ei, set_mass(w, e, Some(&qi))?)?;
                    }
                }
            }
        }
    }
    let argmax = (0..rows.len()).max_by(|a, b| rows[*a].ratio.total_cmp(&rows[*b].ratio));
    Ok(CertifyResult { c_star: argmax.map_or(0.0, |i| rows[i].ratio), argmax: argmax.map(|i| rows[i].pair), rows })
}

/// The extremal configurations for a 1D KM weight around the holes `ks`:
/// intervals meeting an island, intervals inside a hole, and intervals
/// straddling a hole.
pub fn km_adversarial_menu(w: &Weight, ks: &[i64]) -> Result<Vec<(Cube, OpenSet)>> {
    let Weight::Km1d(km) = w else {
        return domain("adversarial menus are defined for 1D KM weights");
    };
    let mut menu = Vec::new();
    let iv = |a: f64, b: f64| -> Result<(Cube, OpenSet)> { Ok((Cube::interval(a, b)?, OpenSet::intervals(&[(a, b)])?)) };
    for &k in ks {
        let Some(hole) = km.hole(k) else { continue };
        let (ha, hb) = hole.endpoints();
        let l = hole.side();
        let c = 0.5 * (ha + hb);
        // inside the hole
        menu.push(iv(ha, hb)?);
        menu.push(iv(ha, c)?);
        menu.push(iv(c - l / 4.0, c + l / 4.0)?);
        // straddling the hole, E = Ω_k
        for s in [2.0 * l, 4.0 * l, 0.5, 1.0, 2.0] {
            if s > l {
                let q = Cube::interval(c - s / 2.0, c + s / 2.0)?;
                menu.push((q, OpenSet::intervals(&[(ha, hb)])?));
            }
        }
        // meeting the island to the left
        let q = Cube::interval(c - 2.0, c)?;
        menu.push((q.clone(), OpenSet::intervals(&[(ha, c)])?));
        menu.push((q, OpenSet::intervals(&[(c - 2.0, c - 1.0)])?));
        let q = Cube::interval(c - 3.0, c + 1.0)?;
        menu.push((q.clone(), OpenSet::intervals(&[(ha, hb)])?));
        menu.push((q.clone(), OpenSet::intervals(&[(c - 3.0, c - 1.0)])?));
        menu.push((q, OpenSet::intervals(&[(c - 1.0 - l, c - 1.0)])?));
    }
    Ok(menu)
}

/// `Q_j = dilate(E, 2^j)` paired with E, for `j = 0..=jmax`.
pub fn dilated_menu(e: &Cube, jmax: u32) -> Result<Vec<(Cube, OpenSet)>> {
    let (a, b) = e.endpoints();
    let set = OpenSet::intervals(&[(a, b)])?;
    (0..=jmax).map(|j| Ok((e.dilate((j as f64).exp2())?, set.clone()))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classical {
    pub a_p: f64,
    pub rh_q: f64,
    pub a_inf_fw: f64,
}

fn restricted(q: &Cube, w: &Weight) -> Result<StepFunction1D> {
    if q.dim() != 1 || !w.is_piecewise_constant_1d() {
        return Err(Error::Unsupported("classical characteristics are implemented for 1D piecewise-constant weights".into()));
    }
    let (a, b) = q.endpoints();
    w.restrict_to_step(a, b)
}

/// Sup over the family of the A_p, RH_q and Fujii–Wilson ratios; an infinite
/// A_p entry flags a weight vanishing on part of some cube.
pub fn classical_characteristics(w: &Weight, family: &[Cube], p: f64, q: f64) -> Result<Classical> {
    if !(p > 1.0 && q > 1.0) {
        return domain("classical characteristics need p, q > 1");
    }
    let mut out = Classical { a_p: 0.0, rh_q: 0.0, a_inf_fw: 0.0 };
    for cube in family {
        let f = restricted(cube, w)?;
        let v = cube.volume();
        let (a, b) = cube.endpoints();
        let avg = f.integral(a, b)? / v;
        let support: f64 = f.support_pieces().iter().filter(|x| x.2 > 0.0).map(|x| x.1 - x.0).sum();
        let ap = if support < v * (1.0 - 1e-12) {
            f64::INFINITY
        } else {
            let dual = f.support_pieces().iter().map(|x| (x.1 - x.0) * x.2.powf(-1.0 / (p - 1.0))).sum::<f64>() / v;
            avg * dual.powf(p - 1.0)
        };
        let rh = Ratio::of((f.integral_power(q, a, b)? / v).powf(1.0 / q), avg).as_f64();
        let fw = Ratio::of(localized_maximal_integral(cube, w)?, avg * v).as_f64();
        out.a_p = out.a_p.max(ap);
        out.rh_q = out.rh_q.max(rh);
        out.a_inf_fw = out.a_inf_fw.max(fw);
    }
    Ok(out)
}

/// Minimal C in `⟨w^{1+δ}⟩_Q^{1/(1+δ)} ≤ C·|Q|^{-1}∫(M1_Q)^p w` over the menu.
pub fn reverse_holder_probe(w: &Weight, delta: f64, p: f64, menu: &[Cube]) -> Result<f64> {
    if !(delta > 0.0) {
        return domain("δ must be positive");
    }
    let wd = w.power_transform(1.0 + delta)?;
    let psi = PsiFunction::Power(p);
    let mut c = 0.0f64;
    for q in menu {
        let lhs = (wd.mass(&q.to_rect())?.value / q.volume()).powf(1.0 / (1.0 + delta));
        match tail_or_infinite(q, w, &psi)? {
            Some(t) => c = c.max(Ratio::of(lhs, t / q.volume()).as_f64()),
            None => continue,
        }
    }
    Ok(c)
}

/// Minimal C in
/// `|Q|^{-1}∫(M1_Q)^p w^{1+δ} ≤ C [|Q|^{-1}∫(M1_Q)^{(p+δ)/(1+δ)} w]^{1+δ}`.
pub fn tail_self_improvement_probe(w: &Weight, delta: f64, p: f64, menu: &[Cube]) -> Result<f64> {
    let wd = w.power_transform(1.0 + delta)?;
    let lhs_psi = PsiFunction::Power(p);
    let rhs_psi = PsiFunction::Power((p + delta) / (1.0 + delta));
    let mut c = 0.0f64;
    for q in menu {
        let v = q.volume();
        let Some(l) = tail_or_infinite(q, &wd, &lhs_psi)? else { continue };
        let Some(r) = tail_or_infinite(q, w, &rhs_psi)? else { continue };
        c = c.max(Ratio::of(l / v, (r / v).powf(1.0 + delta)).as_f64());
    }
    Ok(c)
}

/// Left over right side of the open reverse Hölder question
/// `(|Q|^{-1}∫(M1_Q)^p w^{1+ε})^{1/(1+ε)} ≤ C |Q|^{-1}∫(M1_Q)^p w`, per cube.
pub fn rh_question_ratios(w: &Weight, eps: f64, p: f64, menu: &[Cube]) -> Result<Vec<f64>> {
    let we = w.power_transform(1.0 + eps)?;
    let psi = PsiFunction::Power(p);
    let mut out = Vec::new();
    for q in menu {
        let v = q.volume();
        let (Some(l), Some(r)) = (tail_or_infinite(q, &we, &psi)?, tail_or_infinite(q, w, &psi)?) else {
            out.push(f64::NAN);
            continue;
        };
        out.push(Ratio::of((l / v).powf(1.0 / (1.0 + eps)), r / v).as_f64());
    }
    Ok(out)
}

/// `(Σ a^β)^{1/β}` and `(Σ a^α)^{1/α}` for α < β.
pub fn ell_alpha_embedding(a: &[f64], alpha: f64, beta: f64) -> Result<(f64, f64)> {
    if !(0.0 < alpha && alpha < beta) {
        return domain("embedding needs 0 < α < β");
    }
    let norm = |t: f64| a.iter().map(|x| x.abs().powf(t)).sum::<f64>().powf(1.0 / t);
    Ok((norm(beta), norm(alpha)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{km_weight_1d, KmRule};

    fn iv(a: f64, b: f64) -> Cube {
        Cube::interval(a, b).unwrap()
    }

    #[test]
    fn cp_constant_weight() {
        let fam: Vec<Cube> = (-4..=4).map(|j| Cube::new(vec![0.37 * j as f64], (j as f64).exp2()).unwrap()).collect();
        let est = cp_characteristic_estimate(&Weight::constant(1.0), 2.0, &fam).unwrap();
        for v in &est.per_cube {
            assert!((v - 1.0 / 3.0).abs() < 1e-6);
        }
    }

    #[test]
    fn cp_zero_convention() {
        let w = Weight::sparse_power(4.0).unwrap();
        let est = cp_characteristic_estimate(&w, 2.0, &[iv(0.0, 1.0)]).unwrap();
        assert!(est.zero_convention);
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn dyadic_subfamily_is_smaller() {
        let w = km_weight_1d(KmRule::preset("geometric", 2.0).unwrap()).unwrap();
        let dy: Vec<Cube> = vec![iv(0.0, 1.0), iv(0.0, 4.0), iv(-4.0, 0.0)];
        let mut all = dy.clone();
        all.extend([iv(-0.5, 0.5), iv(3.0, 5.0), iv(-1.0, 1.0)]);
        let a = cp_characteristic_estimate(&w, 2.0, &dy).unwrap().value;
        let b = cp_characteristic_estimate(&w, 2.0, &all).unwrap().value;
        assert!(a <= b);
    }

    #[test]
    fn certify_full_set_is_at_most_one() {
        let w = km_weight_1d(KmRule::preset("geometric", 2.0).unwrap()).unwrap();
        let menu: Vec<(Cube, OpenSet)> = [(0.0, 1.0), (-0.25, 0.25), (1.0, 5.0)]
            .iter()
            .map(|&(a, b)| (iv(a, b), OpenSet::intervals(&[(a, b)]).unwrap()))
            .collect();
        let r = cpsi_certify(&w, &PsiFunction::Power(2.0), 0.1, &menu, CertifyMode::All).unwrap();
        assert!(r.c_star <= 1.0 + 1e-12);
    }

    #[test]
    fn certify_rejects_bad_menus() {
        let w = Weight::constant(1.0);
        let bad = vec![(iv(0.0, 1.0), OpenSet::intervals(&[(0.5, 1.5)]).unwrap())];
        assert!(cpsi_certify(&w, &PsiFunction::Power(2.0), 0.1, &bad, CertifyMode::All).is_err());
        let empty = vec![(iv(0.0, 1.0), OpenSet::empty(1))];
        assert!(cpsi_certify(&w, &PsiFunction::Power(2.0), 0.1, &empty, CertifyMode::All).is_err());
    }

    #[test]
    fn compact_support_diverges() {
        let w = Weight::step(StepFunction1D::indicator(0.0, 1.0, 1.0).unwrap());
        let eps = 0.05;
        let menu = dilated_menu(&iv(0.0, 1.0), 10).unwrap();
        let r = cpsi_certify(&w, &PsiFunction::Power(2.0), eps, &menu, CertifyMode::All).unwrap();
        for (j, row) in r.rows.iter().enumerate() {
            assert!((row.ratio - (eps * j as f64).exp2()).abs() < 1e-9 * row.ratio);
        }
    }

    #[test]
    fn half_line_certificate_is_finite() {
        let w = Weight::half_line(0.0);
        let mut menu = Vec::new();
        for j in -3..=6 {
            let s = (j as f64).exp2();
            for c in [-s, -s / 2.0, 0.0, s] {
                let q = iv(c, c + s);
                let (a, b) = (c.max(0.0), c + s);
                if b > a {
                    menu.push((q, OpenSet::intervals(&[(a, b)]).unwrap()));
                }
            }
        }
        let r = cpsi_certify(&w, &PsiFunction::Power(2.0), 0.1, &menu, CertifyMode::All).unwrap();
        assert!(r.c_star.is_finite() && r.c_star > 0.0 && r.c_star < 10.0, "{}", r.c_star);
    }

    #[test]
    fn modes_run() {
        let w = km_weight_1d(KmRule::preset("geometric", 2.0).unwrap()).unwrap();
        let menu = km_adversarial_menu(&w, &[0, 3]).unwrap();
        for mode in [CertifyMode::All, CertifyMode::Dyadic, CertifyMode::Dilated { gamma: 3.0 }] {
            let r = cpsi_certify(&w, &PsiFunction::Power(2.0), 0.05, &menu, mode).unwrap();
            assert!(r.c_star.is_finite() && r.c_star > 0.0);
        }
    }

    #[test]
    fn classical_examples() {
        let one = Weight::constant(1.0);
        let fam = vec![iv(0.0, 1.0), iv(-3.0, 5.0)];
        let c = classical_characteristics(&one, &fam, 2.0, 2.0).unwrap();
        assert!((c.a_p - 1.0).abs() < 1e-12 && (c.rh_q - 1.0).abs() < 1e-12 && (c.a_inf_fw - 1.0).abs() < 1e-12);
        let ind = Weight::step(StepFunction1D::indicator(0.0, 1.0, 1.0).unwrap());
        assert!(classical_characteristics(&ind, &[iv(0.1, 0.6)], 2.0, 2.0).unwrap().a_p.is_finite());
        assert!(classical_characteristics(&ind, &[iv(0.5, 1.5)], 2.0, 2.0).unwrap().a_p.is_infinite());
    }

    #[test]
    fn km_fujii_wilson_grows() {
        let w = km_weight_1d(KmRule::preset("geometric", 2.0).unwrap()).unwrap();
        let Weight::Km1d(k) = &w else { panic!() };
        let mut prev = 0.0;
        for j in [2, 6, 10, 14] {
            let l = k.holes().iter().find(|h| h.0 == j).unwrap().1;
            let c = 4.0 * j as f64;
            let q = iv(c - 1.0 - l, c + 1.0 + l);
            let fw = classical_characteristics(&w, &[q], 2.0, 2.0).unwrap().a_inf_fw;
            assert!(fw >= prev);
            prev = fw;
        }
    }

    #[test]
    fn embedding_holds() {
        let a = [0.3, 2.0, 1.1, 0.01];
        let (l, r) = ell_alpha_embedding(&a, 1.5, 3.0).unwrap();
        assert!(l <= r);
        assert!(ell_alpha_embedding(&a, 2.0, 1.0).is_err());
    }

    #[test]
    fn eps_default_formula() {
        let e = eps_default(1, 2.0, 0.5);
        assert!((e - 0.5 * (-7f64).exp2() / 20.0).abs() < 1e-18);
        assert!(eps_default(1, 2.0, 4.0) < e);
    }

    #[test]
    fn rh_probes_constant_weight() {
        let one = Weight::constant(1.0);
        let menu = vec![iv(0.0, 1.0), iv(2.0, 10.0)];
        assert!((reverse_holder_probe(&one, 0.5, 2.0, &menu).unwrap() - 1.0 / 3.0).abs() < 1e-9);
        let r = rh_question_ratios(&one, 0.5, 2.0, &menu).unwrap();
        assert!(r.iter().all(|v| (v - 3f64.powf(1.0 / 1.5) / 3.0).abs() < 1e-9));
        assert!(tail_self_improvement_probe(&one, 0.5, 2.0, &menu).unwrap().is_finite());
    }
}
