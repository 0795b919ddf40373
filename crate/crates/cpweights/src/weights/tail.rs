//! The tail functional `∫ ψ(M1_Q) w`, its discretization and the hole ratio.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::calculus::CertifiedValue;
use crate::error::{domain, Error, Ratio, Result};
use crate::geometry::{Cube, Rect};
use crate::maximal::m_indicator_from_distances;

use super::halfline::{integrate_halfline, RadialIntegrand};
use super::{PsiFunction, Weight};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailOptions {
    /// target relative width of the certified bracket in 1D
    pub rel_tol: f64,
    /// target relative width in dimension ≥ 2
    pub nd_rel_tol: f64,
    /// cap on bracket refinements in dimension ≥ 2
    pub nd_max_refinements: usize,
    /// cap on the truncation radius in dimension ≥ 2, in units of ℓ(Q) + 4
    pub nd_max_radius: f64,
}

impl Default for TailOptions {
    fn default() -> Self {
        TailOptions { rel_tol: 1e-9, nd_rel_tol: 1e-4, nd_max_refinements: 200_000, nd_max_radius: 1024.0 }
    }
}

/// `ψ(ℓ/(ℓ+d))` as a radial profile.
pub(crate) struct PsiProfile<'a> {
    pub psi: &'a PsiFunction,
    pub l: f64,
}

impl RadialIntegrand for PsiProfile<'_> {
    fn value(&self, d: f64) -> f64 {
        self.psi.eval(self.l / (self.l + d))
    }
    fn integral(&self, d0: f64, d1: f64) -> CertifiedValue {
        self.psi.distance_integral(self.l, d0, d1)
    }
    fn decay_exponent(&self) -> f64 {
        self.psi.exponent()
    }
}

/// `(∫_Q ψ(M1_Q) w, ∫_{ℝ^n∖Q} ψ(M1_Q) w)`.
pub fn tail_parts(q: &Cube, w: &Weight, psi: &PsiFunction, opts: &TailOptions) -> Result<(CertifiedValue, CertifiedValue)> {
    if q.dim() != w.dim() {
        return domain("cube and weight dimensions differ");
    }
    psi.validate()?;
    let inside = w.mass(&q.to_rect())?.scale(psi.eval(1.0));
    if q.dim() == 1 {
        let (a, b) = q.endpoints();
        let prof = PsiProfile { psi, l: q.side() };
        let right = integrate_halfline(w, b, 1.0, &prof, opts.rel_tol)?;
        let left = integrate_halfline(w, a, -1.0, &prof, opts.rel_tol)?;
        return Ok((inside, right.add(left)));
    }
    Ok((inside, outside_nd(q, w, psi, opts)?))
}

/// `∫ ψ(M1_Q) w` with default options.
pub fn tail_functional(q: &Cube, w: &Weight, psi: &PsiFunction) -> Result<CertifiedValue> {
    tail_functional_with(q, w, psi, &TailOptions::default())
}

pub fn tail_functional_with(q: &Cube, w: &Weight, psi: &PsiFunction, opts: &TailOptions) -> Result<CertifiedValue> {
    let (i, o) = tail_parts(q, w, psi, opts)?;
    Ok(i.add(o))
}

/// `∫ψ(M1_Q)w / ∫_{ℝ^n∖Q} ψ(M1_Q)w`.
pub fn hole_ratio(q: &Cube, w: &Weight, psi: &PsiFunction) -> Result<Ratio> {
    let (i, o) = tail_parts(q, w, psi, &TailOptions::default())?;
    Ok(Ratio::of(i.value + o.value, o.value))
}

/// `Σ_{k≥0} 2^{-n(p-1)k} ⟨w⟩_{2^k Q}` with the remainder bounded through the
/// weight's supremum.
pub fn tail_discretized(q: &Cube, w: &Weight, p: f64) -> Result<CertifiedValue> {
    if !(p > 1.0) {
        return domain(format!("discretized tail needs p > 1, got {p}"));
    }
    let wmax = w
        .bound_hint()
        .ok_or_else(|| Error::Unsupported("discretized tail needs a bounded weight (bound_hint)".into()))?;
    let n = q.dim() as f64;
    let r = (-n * (p - 1.0)).exp2();
    let mut sum = 0.0;
    let mut err = 0.0;
    for k in 0..400 {
        let qk = q.dilate((k as f64).exp2())?;
        let m = w.mass(&qk.to_rect())?;
        let rk = r.powi(k);
        sum += rk * m.value / qk.volume();
        err += rk * m.error_bound / qk.volume();
        let rem = wmax * rk * r / (1.0 - r);
        if rem <= 1e-13 * sum || k == 399 {
            return Ok(CertifiedValue::new(sum + 0.5 * rem, err + 0.5 * rem));
        }
    }
    unreachable!()
}

#[derive(Debug)]
struct Cell {
    width: f64,
    rect: Rect,
    value: f64,
    lo: f64,
    hi: f64,
}

impl PartialEq for Cell {
    fn eq(&self, o: &Self) -> bool {
        self.width == o.width
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Cell {
    fn cmp(&self, o: &Self) -> Ordering {
        self.width.total_cmp(&o.width)
    }
}

/// Range of the per-axis distance to `[qa, qb]` over `[lo, hi]`.
fn axis_range(lo: f64, hi: f64, qa: f64, qb: f64) -> (f64, f64) {
    let dmin = if hi < qa {
        qa - hi
    } else if lo > qb {
        lo - qb
    } else {
        0.0
    };
    (dmin, (qa - lo).max(hi - qb).max(0.0))
}

fn bracket(q: &Cube, psi: &PsiFunction, r: &Rect, v: f64) -> Cell {
    let n = q.dim();
    let mut dmin = Vec::with_capacity(n);
    let mut dmax = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = axis_range(r.lo[i], r.hi[i], q.lower()[i], q.upper(i));
        dmin.push(a);
        dmax.push(b);
    }
    let vol = r.volume() * v;
    let hi = vol * psi.eval(m_indicator_from_distances(q.side(), &dmin));
    let lo = vol * psi.eval(m_indicator_from_distances(q.side(), &dmax));
    Cell { width: hi - lo, rect: r.clone(), value: v, lo, hi }
}

fn split(r: &Rect) -> Vec<Rect> {
    let n = r.dim();
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0..(1usize << n) {
        let mut lo = r.lo.clone();
        let mut hi = r.hi.clone();
        for i in 0..n {
            let mid = 0.5 * (r.lo[i] + r.hi[i]);
            if mask >> i & 1 == 1 {
                lo[i] = mid;
            } else {
                hi[i] = mid;
            }
        }
        out.push(Rect { lo, hi });
    }
    out
}

/// Constant pieces of an nD weight meeting the bounded box, outside Q.
fn nd_pieces(w: &Weight, r: &Rect) -> Result<Vec<(Rect, f64)>> {
    match w {
        Weight::KmNd(k) => Ok(k.pieces(r)),
        Weight::Grid(g) => {
            let mut out: Vec<(Rect, f64)> = g
                .cells()
                .into_iter()
                .map(|(c, v)| (c.intersect(r), v))
                .filter(|(c, v)| !c.is_empty() && *v > 0.0)
                .collect();
            if g.outside_value() > 0.0 {
                for b in complement_boxes(r, &g.cube().to_rect()) {
                    out.push((b, g.outside_value()));
                }
            }
            Ok(out)
        }
        _ => Err(Error::Unsupported("multi-dimensional tail needs a KM or grid weight".into())),
    }
}

/// Disjoint boxes covering `outer ∖ inner`.
pub(crate) fn complement_boxes(outer: &Rect, inner: &Rect) -> Vec<Rect> {
    let mut out = Vec::new();
    let mut core = outer.clone();
    for i in 0..outer.dim() {
        if inner.lo[i] > core.lo[i] {
            let mut b = core.clone();
            b.hi[i] = inner.lo[i].min(core.hi[i]);
            if !b.is_empty() {
                out.push(b);
            }
            core.lo[i] = inner.lo[i].min(core.hi[i]);
        }
        if inner.hi[i] < core.hi[i] {
            let mut b = core.clone();
            b.lo[i] = inner.hi[i].max(core.lo[i]);
            if !b.is_empty() {
                out.push(b);
            }
            core.hi[i] = inner.hi[i].max(core.lo[i]);
        }
    }
    out
}

fn outside_nd(q: &Cube, w: &Weight, psi: &PsiFunction, opts: &TailOptions) -> Result<CertifiedValue> {
    let n = q.dim();
    let nf = n as f64;
    let qexp = psi.exponent();
    let l = q.side();
    let wmax = w.bound_hint().unwrap_or(f64::INFINITY);
    let infinite_far = match w {
        Weight::KmNd(_) => true,
        Weight::Grid(g) => g.outside_value() > 0.0,
        _ => false,
    };
    if infinite_far && qexp <= 1.0 {
        return Err(Error::Infinite("profile decays too slowly against a weight with positive density at infinity".into()));
    }
    let far_bound = |d: f64| -> f64 {
        if !infinite_far {
            return 0.0;
        }
        psi.constant() * wmax * nf * nf.exp2() * l.powf(nf * qexp) * (l + d).powf(nf - nf * qexp) / (nf * qexp - nf)
    };
    let qr = q.to_rect();
    let mut d = ((nf - 1.0) * l).max(8.0);
    let dmax = opts.nd_max_radius * (l + 4.0);
    loop {
        let far = far_bound(d);
        let outer = Rect::new(qr.lo.iter().map(|v| v - d).collect(), qr.hi.iter().map(|v| v + d).collect())?;
        let mut heap = BinaryHeap::new();
        let mut lo = 0.0;
        let mut hi = 0.0;
        for (r, v) in nd_pieces(w, &outer)? {
            for b in complement_boxes(&r, &qr) {
                let c = bracket(q, psi, &b, v);
                lo += c.lo;
                hi += c.hi;
                heap.push(c);
            }
        }
        let mut steps = 0;
        while hi - lo > opts.nd_rel_tol * lo && steps < opts.nd_max_refinements {
            let Some(c) = heap.pop() else { break };
            lo -= c.lo;
            hi -= c.hi;
            for b in split(&c.rect) {
                let k = bracket(q, psi, &b, c.value);
                lo += k.lo;
                hi += k.hi;
                heap.push(k);
            }
            steps += 1;
        }
        if far <= opts.nd_rel_tol * lo || d >= dmax || !infinite_far {
            let upper = hi + far;
            return Ok(CertifiedValue::new(0.5 * (lo + upper), 0.5 * (upper - lo)));
        }
        d *= 2.0;
    }
}
