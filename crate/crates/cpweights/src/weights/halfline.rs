//! Integrals `∫_0^∞ g(d) w(x0 + dir·d) dd` of decreasing radial profiles g
//! against 1D weights, with certified far-field brackets.

use crate::calculus::{quad, CertifiedValue};
use crate::error::{Error, Result};

use super::{FarField, Weight};

/// A nonincreasing profile on `[0, ∞)`, convex beyond `convex_from()`.
pub trait RadialIntegrand {
    fn value(&self, d: f64) -> f64;
    /// `∫_{d0}^{d1} g`, with `d1 = ∞` allowed.
    fn integral(&self, d0: f64, d1: f64) -> CertifiedValue;
    /// q with `g(d) ≍ d^{-q}` at infinity.
    fn decay_exponent(&self) -> f64;
    fn convex_from(&self) -> f64 {
        0.0
    }
}

const MAX_PERIODS: f64 = 262_144.0;

fn near_sum(w: &Weight, x0: f64, dir: f64, d0: f64, d1: f64, g: &dyn RadialIntegrand) -> Result<CertifiedValue> {
    if d1 <= d0 {
        return Ok(CertifiedValue::exact(0.0));
    }
    let (a, b) = if dir > 0.0 { (x0 + d0, x0 + d1) } else { (x0 - d1, x0 - d0) };
    let mut parts = Vec::new();
    for (pa, pb, v) in w.pieces_1d(a, b)? {
        let (e0, e1) = if dir > 0.0 { (pa - x0, pb - x0) } else { (x0 - pb, x0 - pa) };
        parts.push(g.integral(e0.max(0.0), e1).scale(v));
    }
    Ok(parts.into_iter().sum())
}

/// `(1/P)·[∫_s^{s+L} g(t)(t-s) dt + L·∫_{s+L}^∞ g]`, the integral of the
/// continuous island-mass profile from s onwards.
fn train_integral(g: &dyn RadialIntegrand, s: f64, len: f64, period: f64) -> CertifiedValue {
    let m = quad::integrate(|t| g.value(t) * (t - s), s, s + len, 1e-300, 1e-13);
    let tail = g.integral(s + len, f64::INFINITY);
    CertifiedValue::new(m.value, m.error).add(tail.scale(len)).scale(1.0 / period)
}

/// Two-sided bound on the far field beyond distance `cut` (a period boundary).
fn periodic_bracket(g: &dyn RadialIntegrand, cut: f64, dir: f64, period: f64, pattern: &[(f64, f64, f64)]) -> (f64, f64) {
    let mut lo = 0.0;
    let mut hi = 0.0;
    for &(o, len, v) in pattern {
        if v <= 0.0 || len <= 0.0 {
            continue;
        }
        let off = if dir > 0.0 { o } else { period - o - len };
        let z0 = cut + off;
        // island masses h(j) are convex and decreasing in j: trapezoid from
        // above, midpoint from below
        let h0 = g.integral(z0, z0 + len);
        let a = train_integral(g, z0, len, period);
        let b = train_integral(g, z0 - 0.5 * period, len, period);
        lo += v * (a.lower() + 0.5 * h0.lower());
        hi += v * b.upper();
    }
    (lo, hi.max(lo))
}

fn far_density(ff: &FarField) -> f64 {
    match ff {
        FarField::Zero => 0.0,
        FarField::Constant(c) => *c,
        FarField::Periodic { pattern, .. } => pattern.iter().map(|p| p.1 * p.2).sum(),
    }
}

/// `∫_0^∞ g(d) w(x0 + dir·d) dd` with `dir = ±1`.
pub fn integrate_halfline(w: &Weight, x0: f64, dir: f64, g: &dyn RadialIntegrand, rel_tol: f64) -> Result<CertifiedValue> {
    if let Weight::Analytic(_) = w {
        return integrate_analytic(w, x0, dir, g, rel_tol);
    }
    if let Weight::Km1d(k) = w {
        if !k.holes().is_empty() {
            // islands and holes are disjoint: the train goes through the
            // periodic bracket from x0, the finitely many holes exactly
            let train = integrate_halfline(&Weight::Km1d(k.without_holes()), x0, dir, g, rel_tol)?;
            let mut parts = vec![train];
            for &(c, l, h) in k.holes() {
                let (lo, hi) = (4.0 * c as f64 - l / 2.0, 4.0 * c as f64 + l / 2.0);
                let (e0, e1) = if dir > 0.0 { (lo - x0, hi - x0) } else { (x0 - hi, x0 - lo) };
                if e1 > 0.0 {
                    parts.push(g.integral(e0.max(0.0), e1).scale(h));
                }
            }
            return Ok(parts.into_iter().sum());
        }
    }
    let (win, left, right) = w.layout_1d()?;
    let far = if dir > 0.0 { right } else { left };
    let edge = if dir > 0.0 { (win.1 - x0).max(0.0) } else { (x0 - win.0).max(0.0) };
    if far_density(&far) > 0.0 && g.decay_exponent() <= 1.0 {
        return Err(Error::Infinite(format!(
            "profile decays like d^-{} against a weight bounded below on a positive fraction of the half-line",
            g.decay_exponent()
        )));
    }
    match far {
        FarField::Zero => near_sum(w, x0, dir, 0.0, edge, g),
        FarField::Constant(c) => Ok(near_sum(w, x0, dir, 0.0, edge, g)?.add(g.integral(edge, f64::INFINITY).scale(c))),
        FarField::Periodic { period, anchor, pattern } => {
            let align = |dmin: f64| -> f64 {
                if dir > 0.0 {
                    let k = ((x0 + dmin - anchor) / period).ceil();
                    anchor + k * period - x0
                } else {
                    let k = ((x0 - dmin - anchor) / period).floor();
                    x0 - anchor - k * period
                }
            };
            let mut cut = align(edge.max(g.convex_from() + period).max(16.0 * period));
            let mut near = near_sum(w, x0, dir, 0.0, cut, g)?;
            loop {
                let (lo, hi) = periodic_bracket(g, cut, dir, period, &pattern);
                let total = near.value + 0.5 * (lo + hi);
                if hi - lo <= rel_tol * total || cut >= MAX_PERIODS * period {
                    return Ok(CertifiedValue::new(total, near.error_bound + 0.5 * (hi - lo)));
                }
                let next = align(2.0 * cut);
                near = near.add(near_sum(w, x0, dir, cut, next, g)?);
                cut = next;
            }
        }
    }
}

fn integrate_analytic(w: &Weight, x0: f64, dir: f64, g: &dyn RadialIntegrand, rel_tol: f64) -> Result<CertifiedValue> {
    let Weight::Analytic(a) = w else { unreachable!() };
    let q = g.decay_exponent();
    let desc = a.descriptor();
    match desc.diverges(1, q) {
        Some(true) => {
            return Err(Error::Infinite(format!(
                "weight shell mass grows like X^{} against decay d^-{q}",
                desc.low.map_or(f64::NAN, |l| l.1)
            )))
        }
        Some(false) => {}
        None => return Err(Error::Unsupported("tail descriptor cannot classify this integral; supply an upper growth bound".into())),
    }
    let (c_up, b_up, x_up) = desc.up.expect("classified as convergent");
    let far_bound = |dn: f64| -> f64 {
        let r0 = (dn - x0.abs()).max(x_up).max(1e-300);
        let mut s = 0.0;
        let mut last = 0.0;
        for j in 0..400 {
            let x = r0 * (j as f64).exp2();
            let d = (x - x0.abs()).max(0.0);
            let t = c_up * x.powf(b_up) * g.value(d);
            if !t.is_finite() {
                break;
            }
            s += t;
            last = t;
            if j > 60 && t < 1e-18 * s {
                break;
            }
        }
        let r = (b_up - q).exp2() * 1.01;
        s + if r < 1.0 { last * r / (1.0 - r) } else { f64::INFINITY }
    };
    let mut dn = (2.0 * x0.abs() + x_up + 1.0).max(16.0);
    let mut near = CertifiedValue::exact(0.0);
    let mut done = 0.0;
    loop {
        // quadrature in dyadic blocks, split at the weight's breakpoints
        let mut cuts = vec![done];
        let mut b = if done == 0.0 { 1.0 } else { 2.0 * done };
        while b < dn {
            cuts.push(b);
            b *= 2.0;
        }
        cuts.push(dn);
        let (xa, xb) = if dir > 0.0 { (x0 + done, x0 + dn) } else { (x0 - dn, x0 - done) };
        for bp in a.breakpoints(xa, xb) {
            cuts.push((bp - x0).abs());
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for win in cuts.windows(2) {
            let r = quad::integrate(|d| g.value(d) * a.eval(x0 + dir * d), win[0], win[1], 1e-300, 1e-12);
            near = near.add(CertifiedValue::new(r.value, r.error));
        }
        done = dn;
        let fb = far_bound(dn);
        if fb <= rel_tol * near.value || dn > 1e150 {
            return Ok(CertifiedValue::new(near.value + 0.5 * fb, near.error_bound + 0.5 * fb));
        }
        dn *= 4.0;
    }
}
