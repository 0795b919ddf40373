//! Hilbert transform of step functions, Coifman–Fefferman ratios, the grand
//! maximal function 𝓜_H^θ and θ-sparse domination checks.
//!
//! Normalization: `Hf(x) = (1/π) p.v.∫ f(x-y)/y dy`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::calculus::{quad, CertifiedValue, StepFunction1D};
use crate::error::{domain, Error, Ratio, Result};
use crate::geometry::{dyadic_cover, Cube, DyadicCube};
use crate::maximal::maximal_lp_power;
use crate::sparse::{cz_sparse, sparse_form, SparseCollection};
use crate::weights::halfline::{integrate_halfline, RadialIntegrand};
use crate::weights::Weight;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum HilbertMode {
    Pv,
    Trunc { eps: f64 },
}

impl HilbertMode {
    fn eps(self) -> Option<f64> {
        match self {
            HilbertMode::Pv => None,
            HilbertMode::Trunc { eps } => Some(eps),
        }
    }
}

/// `∫_c^d dt/(x - t)` for an interval not containing x in its interior.
fn log_piece(x: f64, c: f64, d: f64) -> f64 {
    if d <= c {
        return 0.0;
    }
    ((x - c).abs() / (x - d).abs()).ln()
}

/// Hf(x), or the truncation `(1/π)∫_{|x-t|>ε} f(t)/(x-t) dt`.
pub fn hilbert_eval(f: &StepFunction1D, x: f64, trunc: Option<f64>) -> Result<f64> {
    if !f.has_zero_tails() {
        return domain("Hilbert transform needs a compactly supported f");
    }
    let pieces = f.simplified().support_pieces();
    let mut s = 0.0;
    match trunc {
        None => {
            for &(a, b, _) in &pieces {
                if x == a || x == b {
                    return Err(Error::Singular { x });
                }
            }
            for &(a, b, v) in &pieces {
                if a < x && x < b {
                    // symmetric excision around x cancels
                    let r = (x - a).min(b - x);
                    s += v * (log_piece(x, a, x - r) + log_piece(x, x + r, b));
                } else {
                    s += v * log_piece(x, a, b);
                }
            }
        }
        Some(eps) => {
            if !(eps > 0.0) {
                return domain(format!("truncation must be positive, got {eps}"));
            }
            for &(a, b, v) in &pieces {
                s += v * (log_piece(x, a, b.min(x - eps)) + log_piece(x, a.max(x + eps), b));
            }
        }
    }
    Ok(s / PI)
}

/// Independent oracle: `(1/π)∫_0^∞ (f(x-y) - f(x+y))/y dy` by adaptive quadrature.
pub fn hilbert_quadrature(f: &StepFunction1D, x: f64) -> Result<f64> {
    if !f.has_zero_tails() {
        return domain("Hilbert transform needs a compactly supported f");
    }
    let mut cuts: Vec<f64> = f.breakpoints().iter().map(|b| (b - x).abs()).filter(|d| *d > 0.0).collect();
    cuts.push(0.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let g = |y: f64| (f.eval(x - y) - f.eval(x + y)) / y;
    let mut s = 0.0;
    for w in cuts.windows(2) {
        s += quad::integrate(g, w[0], w[1], 1e-300, 1e-14).value;
    }
    Ok(s / PI)
}

/// Breakpoints of `H_ε f`: those of f, shifted by ±ε when truncated.
fn singular_points(f: &StepFunction1D, mode: HilbertMode) -> Vec<f64> {
    let mut pts: Vec<f64> = Vec::new();
    for &b in f.breakpoints() {
        match mode.eps() {
            None => pts.push(b),
            Some(e) => pts.extend([b - e, b + e]),
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn eval_mode(f: &StepFunction1D, x: f64, mode: HilbertMode) -> f64 {
    hilbert_eval(f, x, mode.eps()).unwrap_or(0.0)
}

/// `|Hf|^p` beyond the support hull, as a function of the distance from it.
/// For f ≥ 0 this is decreasing and convex there.
struct HilbertTail<'a> {
    f: &'a StepFunction1D,
    mode: HilbertMode,
    base: f64,
    sign: f64,
    p: f64,
    width: f64,
}

impl RadialIntegrand for HilbertTail<'_> {
    fn value(&self, d: f64) -> f64 {
        eval_mode(self.f, self.base + self.sign * d, self.mode).abs().powf(self.p)
    }
    fn integral(&self, d0: f64, d1: f64) -> CertifiedValue {
        let g = |d: f64| self.value(d);
        let mut cut = vec![d0];
        if let Some(e) = self.mode.eps() {
            if e > d0 && e < d1 {
                cut.push(e);
            }
        }
        let mut total = CertifiedValue::exact(0.0);
        let far = if d1.is_finite() { None } else { Some(cut.last().copied().unwrap_or(d0).max(d0)) };
        let lim = if d1.is_finite() { d1 } else { far.unwrap() + 8.0 * self.width.max(1.0) };
        cut.push(lim);
        for w in cut.windows(2) {
            let r = quad::integrate(g, w[0], w[1], 1e-300, 1e-12);
            total = total.add(CertifiedValue::new(r.value, r.error));
        }
        if !d1.is_finite() {
            let r = quad::integrate_to_infinity(g, lim, lim + self.width.max(1.0), self.p, 1e-300, 1e-12);
            total = total.add(CertifiedValue::new(r.value, r.error));
        }
        total
    }
    fn decay_exponent(&self) -> f64 {
        self.p
    }
    fn convex_from(&self) -> f64 {
        self.mode.eps().unwrap_or(0.0)
    }
}

/// `∫|Hf|^p w` (or with `H_ε`) for a compactly supported step f.
pub fn hilbert_lp_power(f: &StepFunction1D, p: f64, w: &Weight, mode: HilbertMode) -> Result<CertifiedValue> {
    if !(p > 0.0) {
        return domain(format!("exponent must be positive, got {p}"));
    }
    if let Some(e) = mode.eps() {
        if !(e > 0.0) {
            return domain("truncation must be positive");
        }
    }
    let f = f.simplified();
    let (lo, hi) = match f.support() {
        Some(s) => s,
        None => return Ok(CertifiedValue::exact(0.0)),
    };
    let sing = singular_points(&f, mode);
    let (lo_x, hi_x) = (sing[0].min(lo), sing[sing.len() - 1].max(hi));
    let mut total = CertifiedValue::exact(0.0);
    for (a, b, v) in w.pieces_1d(lo_x, hi_x)? {
        if v <= 0.0 {
            continue;
        }
        let mut cuts = vec![a];
        cuts.extend(sing.iter().copied().filter(|s| *s > a && *s < b));
        cuts.push(b);
        for c in cuts.windows(2) {
            let r = quad::integrate(|x| eval_mode(&f, x, mode).abs().powf(p), c[0], c[1], 1e-300, 1e-12);
            total = total.add(CertifiedValue::new(r.value, r.error).scale(v));
        }
    }
    let width = hi - lo;
    for (base, sign) in [(hi_x, 1.0), (lo_x, -1.0)] {
        let t = HilbertTail { f: &f, mode, base, sign, p, width };
        total = total.add(integrate_halfline(w, base, sign, &t, 1e-9)?);
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CfRow {
    pub h_norm: CertifiedValue,
    pub m_norm: CertifiedValue,
    pub ratio: f64,
}

/// `‖Hf‖_{L^p(w)} / ‖Mf‖_{L^p(w)}`.
pub fn cf_ratio(f: &StepFunction1D, w: &Weight, p: f64, mode: HilbertMode) -> Result<CfRow> {
    if !(p > 0.0 && p.is_finite()) {
        return domain(format!("exponent must be finite and positive, got {p}"));
    }
    let m = maximal_lp_power(f, p, w)?;
    if m.value <= 0.0 {
        return Err(Error::Domain("‖Mf‖ vanishes; the ratio is undefined".into()));
    }
    let h = hilbert_lp_power(f, p, w, mode)?;
    let (hn, mn) = (h.root(p), m.root(p));
    Ok(CfRow { h_norm: hn, m_norm: mn, ratio: hn.value / mn.value })
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < 1.0) {
        return domain(format!("θ must lie in (0, 1), got {theta}"));
    }
    Ok(())
}

/// `∫_a^b |Hf|^θ |g|` by quadrature split at the singular points.
fn hilbert_against(f: &StepFunction1D, g: &StepFunction1D, theta: f64, a: f64, b: f64) -> Result<CertifiedValue> {
    let sing = singular_points(f, HilbertMode::Pv);
    let mut total = CertifiedValue::exact(0.0);
    for (x0, x1, v) in g.restrict(a, b).support_pieces() {
        if v == 0.0 {
            continue;
        }
        let mut cuts = vec![x0];
        cuts.extend(sing.iter().copied().filter(|s| *s > x0 && *s < x1));
        cuts.push(x1);
        for c in cuts.windows(2) {
            let r = quad::integrate(|x| eval_mode(f, x, HilbertMode::Pv).abs().powf(theta), c[0], c[1], 1e-300, 1e-12);
            total = total.add(CertifiedValue::new(r.value, r.error).scale(v.abs()));
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrandMaximal {
    pub per_cube: Vec<f64>,
    pub max: f64,
}

/// `(1/|Q|)∫_Q |H(f·1_{ℝ∖3Q})|^θ |g|` for each menu cube, and their max.
pub fn grand_maximal_eval(f: &StepFunction1D, g: &StepFunction1D, theta: f64, menu: &[Cube]) -> Result<GrandMaximal> {
    check_theta(theta)?;
    let mut per_cube = Vec::with_capacity(menu.len());
    for q in menu {
        if q.dim() != 1 {
            return domain("grand maximal function is implemented in 1D");
        }
        let (a, b) = q.endpoints();
        let l = b - a;
        let outer = f.remove(a - l, b + l);
        let v = if outer.support().is_none() { 0.0 } else { hilbert_against(&outer, g, theta, a, b)?.value / l };
        per_cube.push(v);
    }
    let max = per_cube.iter().copied().fold(0.0, f64::max);
    Ok(GrandMaximal { per_cube, max })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaSparseCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: Ratio,
    pub cubes: usize,
}

/// Stopping family for f over the dyadic cells covering `supp f ∪ supp g`.
pub fn domination_family(f: &StepFunction1D, g: &StepFunction1D) -> Result<SparseCollection> {
    let hull = match (f.support(), g.support()) {
        (Some(a), Some(b)) => (a.0.min(b.0), a.1.max(b.1)),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => return Ok(SparseCollection::from_cubes(vec![], 0.5)),
    };
    let roots: Vec<DyadicCube> = dyadic_cover(&Cube::interval(hull.0, hull.1)?);
    cz_sparse(f, &roots, 2.0)
}

/// `⟨|Hf|^θ, |g|⟩` against `Λ^{s,θ}(f, g)` on the stopping family of f.
pub fn theta_sparse_check(f: &StepFunction1D, g: &StepFunction1D, theta: f64, s: f64) -> Result<ThetaSparseCheck> {
    check_theta(theta)?;
    if !(s > 1.0 && s <= 1.0 / (1.0 - theta)) {
        return domain(format!("need 1 < s ≤ 1/(1-θ), got s = {s}"));
    }
    if f.support().is_none() || g.support().is_none() {
        return Ok(ThetaSparseCheck { lhs: 0.0, rhs: 0.0, ratio: Ratio::Undefined, cubes: 0 });
    }
    let (a, b) = g.support().unwrap();
    let lhs = hilbert_against(f, g, theta, a, b)?.value;
    let fam = domination_family(f, g)?;
    let rhs = sparse_form(&fam, f, g, s, theta)?;
    Ok(ThetaSparseCheck { lhs, rhs, ratio: Ratio::of(lhs, rhs), cubes: fam.len() })
}
