//! Uncentered Hardy–Littlewood maximal function over cubes: closed forms for
//! indicators, exact evaluation and superlevel sets for step functions.

use crate::calculus::{pairwise_sum, CertifiedValue, StepFunction1D};
use crate::error::{domain, Result};
use crate::geometry::{Cube, OpenSet, Rect};
use crate::weights::Weight;

/// `M1_Q(x)`: 1D closed form `ℓ/(ℓ + dist(x,Q))`, nD maximization over the
/// side `s` of cubes touching both x and Q.
pub fn m_indicator(q: &Cube, x: &[f64]) -> f64 {
    let d = q.axis_distances(x);
    m_indicator_from_distances(q.side(), &d)
}

/// `sup_s Π_i min(ℓ, (s - d_i)_+) / s^n` for per-axis distances `d_i ≥ 0`.
pub fn m_indicator_from_distances(l: f64, d: &[f64]) -> f64 {
    let n = d.len();
    if n == 1 {
        return l / (l + d[0]);
    }
    let dmax = d.iter().fold(0.0f64, |m, v| m.max(*v));
    if dmax == 0.0 {
        return 1.0;
    }
    let objective = |s: f64| -> f64 {
        let mut prod = 1.0;
        for di in d {
            prod *= l.min((s - di).max(0.0)) / s;
        }
        prod
    };
    // saturation points s = d_i + ℓ split (dmax, ∞) into intervals on which the
    // set of unsaturated axes is fixed; on each, d/ds log F has the sign of
    // Σ_U s/(s - d_i) - n, which decreases in s.
    let mut cuts: Vec<f64> = d.iter().map(|di| di + l).filter(|c| *c > dmax).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut best = objective(dmax + l).max(objective(*cuts.last().unwrap_or(&(dmax + l))));
    let mut lo = dmax;
    for hi in cuts {
        let mid = 0.5 * (lo + hi);
        let unsat: Vec<f64> = d.iter().copied().filter(|di| mid - di < l).collect();
        let slope = |s: f64| unsat.iter().map(|di| s / (s - di)).sum::<f64>() - n as f64;
        let s_star = if slope(hi) >= 0.0 {
            hi
        } else {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if slope(m) > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            0.5 * (a + b)
        };
        best = best.max(objective(s_star)).max(objective(hi));
        lo = hi;
    }
    best.min(1.0)
}

fn require_compact(f: &StepFunction1D) -> Result<()> {
    if !f.has_zero_tails() {
        return domain("maximal function evaluation needs a compactly supported step function");
    }
    Ok(())
}

/// Cumulative integrals of f at its breakpoints.
fn prefix(f: &StepFunction1D) -> Vec<f64> {
    let bp = f.breakpoints();
    let mut out = Vec::with_capacity(bp.len());
    let mut acc = 0.0;
    out.push(0.0);
    for (i, v) in f.values().iter().enumerate() {
        acc += v * (bp[i + 1] - bp[i]);
        out.push(acc);
    }
    out
}

/// Exact `Mf(x)` for a compactly supported step function by enumerating
/// intervals whose endpoints lie in `breakpoints ∪ {x}`.
///
/// For a fixed right end the average is a Möbius function of the left end on
/// each constant piece, hence monotone there; the same holds with roles
/// swapped, so the supremum is attained on this finite candidate set (or as
/// the one-sided limits `f(x±)`).
pub fn m_stepfn_eval(f: &StepFunction1D, x: f64) -> Result<f64> {
    require_compact(f)?;
    let bp = f.breakpoints();
    if bp.is_empty() {
        return Ok(0.0);
    }
    let fx = |t: f64| -> f64 {
        // F(t) = ∫_{x_0}^{t} f
        f.integral(bp[0], t.max(bp[0])).unwrap_or(0.0)
    };
    let mut left: Vec<f64> = bp.iter().copied().filter(|b| *b < x).collect();
    let mut right: Vec<f64> = bp.iter().copied().filter(|b| *b > x).collect();
    left.push(x);
    right.push(x);
    let fl: Vec<f64> = left.iter().map(|a| fx(*a)).collect();
    let fr: Vec<f64> = right.iter().map(|b| fx(*b)).collect();
    let mut best = f.eval(x).max(f.eval_left(x));
    for (a, fa) in left.iter().zip(&fl) {
        for (b, fb) in right.iter().zip(&fr) {
            if b > a {
                best = best.max((fb - fa) / (b - a));
            }
        }
    }
    Ok(best)
}

/// `M_s f(x) = (M|f|^s(x))^{1/s}`.
pub fn m_s_eval(f: &StepFunction1D, s: f64, x: f64) -> Result<f64> {
    if !(s >= 1.0) {
        return domain(format!("M_s needs s ≥ 1, got {s}"));
    }
    Ok(m_stepfn_eval(&f.powf(s), x)?.powf(1.0 / s))
}

/// `M(1_Q w)(x)` for 1D piecewise-constant weights.
pub fn m_localized(q: &Cube, w: &Weight, x: f64) -> Result<f64> {
    let (a, b) = q.endpoints();
    m_stepfn_eval(&w.restrict_to_step(a, b)?, x)
}

/// One branch `c + α/(x - pole)` of the maximal function on a segment
/// (`α = 0` encodes a constant).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub c: f64,
    pub alpha: f64,
    pub pole: f64,
}

impl Branch {
    fn constant(c: f64) -> Branch {
        Branch { c, alpha: 0.0, pole: 0.0 }
    }
    pub fn eval(&self, x: f64) -> f64 {
        if self.alpha == 0.0 {
            self.c
        } else {
            self.c + self.alpha / (x - self.pole)
        }
    }
    /// ∫_a^b of the branch (the pole lies outside [a, b]); b may be infinite
    /// only for a vanishing constant part.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let mut s = if self.c == 0.0 { 0.0 } else { self.c * (b - a) };
        if self.alpha != 0.0 {
            s += self.alpha * ((b - self.pole) / (a - self.pole)).abs().ln();
        }
        s
    }
    /// ∫_a^b branch^p, closed form when the constant part vanishes.
    pub fn integral_power(&self, p: f64, a: f64, b: f64) -> CertifiedValue {
        if self.alpha == 0.0 {
            return CertifiedValue::exact(if self.c == 0.0 { 0.0 } else { self.c.powf(p) * (b - a) });
        }
        if self.c == 0.0 {
            let k = self.alpha.abs().powf(p);
            let (u0, u1) = ((a - self.pole).abs(), (b - self.pole).abs());
            let (lo, hi) = if u0 < u1 { (u0, u1) } else { (u1, u0) };
            let v = if (p - 1.0).abs() < 1e-14 {
                k * (hi / lo).ln()
            } else {
                k * (lo.powf(1.0 - p) - if hi.is_finite() { hi.powf(1.0 - p) } else { 0.0 }) / (p - 1.0)
            };
            return CertifiedValue::exact(v);
        }
        let r = crate::calculus::quad::integrate(|x| self.eval(x).powf(p), a, b, 1e-15, 1e-13);
        CertifiedValue::new(r.value, r.error)
    }
}

/// A maximal interval on which Mf coincides with one branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: f64,
    pub b: f64,
    pub branch: Branch,
}

/// Exact piecewise description of Mf for a compactly supported step f.
#[derive(Debug, Clone)]
pub struct MaximalProfile {
    segments: Vec<Segment>,
    support: Option<(f64, f64)>,
}

fn crossings(u: &Branch, v: &Branch, lo: f64, hi: f64, out: &mut Vec<f64>) {
    // (c1 - c2)(x - p1)(x - p2) + α1(x - p2) - α2(x - p1) = 0
    let dc = u.c - v.c;
    let (p1, p2) = (u.pole, v.pole);
    let (a1, a2) = (u.alpha, v.alpha);
    let qa = dc;
    let qb = -dc * (p1 + p2) + a1 - a2;
    let qc = dc * p1 * p2 - a1 * p2 + a2 * p1;
    let mut push = |x: f64| {
        if x > lo && x < hi && x.is_finite() {
            out.push(x);
        }
    };
    if qa == 0.0 {
        if qb != 0.0 {
            push(-qc / qb);
        }
        return;
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return;
    }
    let sq = disc.sqrt();
    let t = -0.5 * (qb + qb.signum() * sq);
    if t != 0.0 {
        push(t / qa);
        push(qc / t);
    } else {
        push(-qb / (2.0 * qa));
    }
}

fn probe(a: f64, b: f64) -> f64 {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => 0.5 * (a + b),
        (true, false) => a + a.abs().max(1.0),
        (false, true) => b - b.abs().max(1.0),
        (false, false) => 0.0,
    }
}

impl MaximalProfile {
    pub fn new(f: &StepFunction1D) -> Result<MaximalProfile> {
        require_compact(f)?;
        let bp = f.breakpoints();
        if bp.is_empty() || f.support().is_none() {
            return Ok(MaximalProfile {
                segments: vec![Segment {
                    a: f64::NEG_INFINITY,
                    b: f64::INFINITY,
                    branch: Branch::constant(0.0),
                }],
                support: None,
            });
        }
        let fp = prefix(f);
        let m = bp.len() - 1;
        let mut segments = Vec::new();
        // gap g spans (bp[g-1], bp[g]) with g = 0 and g = m + 1 the outer gaps
        for g in 0..=m + 1 {
            let lo = if g == 0 { f64::NEG_INFINITY } else { bp[g - 1] };
            let hi = if g == m + 1 { f64::INFINITY } else { bp[g] };
            let v = if g == 0 || g == m + 1 { 0.0 } else { f.values()[g - 1] };
            let mut cands: Vec<Branch> = vec![Branch::constant(v)];
            if g >= 1 && g <= m {
                let mut c0 = 0.0f64;
                for i in 0..g {
                    for j in g..=m {
                        c0 = c0.max((fp[j] - fp[i]) / (bp[j] - bp[i]));
                    }
                }
                cands.push(Branch::constant(c0));
            }
            if g >= 1 {
                let l = g - 1;
                for i in 0..=l {
                    let alpha = (fp[l] - fp[i]) - v * (bp[l] - bp[i]);
                    if alpha > 0.0 {
                        cands.push(Branch { c: v, alpha, pole: bp[i] });
                    }
                }
            }
            if g <= m {
                let r = g;
                for j in r..=m {
                    let beta = (fp[j] - fp[r]) - v * (bp[j] - bp[r]);
                    if beta > 0.0 {
                        cands.push(Branch { c: v, alpha: -beta, pole: bp[j] });
                    }
                }
            }
            let mut cuts = vec![lo, hi];
            for (i, u) in cands.iter().enumerate() {
                for w in &cands[i + 1..] {
                    crossings(u, w, lo, hi, &mut cuts);
                }
            }
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            for win in cuts.windows(2) {
                let x = probe(win[0], win[1]);
                let top = cands
                    .iter()
                    .copied()
                    .max_by(|s, t| s.eval(x).total_cmp(&t.eval(x)))
                    .unwrap_or(Branch::constant(0.0));
                match segments.last_mut() {
                    Some(Segment { b, branch, .. }) if *branch == top && *b == win[0] => *b = win[1],
                    _ => segments.push(Segment { a: win[0], b: win[1], branch: top }),
                }
            }
        }
        Ok(MaximalProfile { segments, support: f.support() })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    /// Mf(x); at a segment boundary the larger one-sided value.
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segments.partition_point(|s| s.b < x);
        let mut best = 0.0f64;
        for s in &self.segments[i.saturating_sub(1)..(i + 2).min(self.segments.len())] {
            if s.a <= x && x <= s.b {
                let y = s.branch.eval(x);
                if y.is_finite() {
                    best = best.max(y);
                }
            }
        }
        best
    }

    pub fn max_value(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| {
                let ends = [s.a, s.b].map(|e| if e.is_finite() { s.branch.eval(e) } else { s.branch.c });
                ends[0].max(ends[1])
            })
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max)
    }

    /// The open set {Mf > λ}.
    pub fn superlevel(&self, lambda: f64) -> Result<OpenSet> {
        if !(lambda > 0.0) {
            return domain(format!("superlevel threshold must be positive, got {lambda}"));
        }
        let mut parts = Vec::new();
        for s in &self.segments {
            let br = s.branch;
            if br.alpha == 0.0 {
                if br.c > lambda {
                    parts.push((s.a, s.b));
                }
                continue;
            }
            let rhs = lambda - br.c;
            if rhs <= 0.0 {
                parts.push((s.a, s.b));
                continue;
            }
            let xs = br.pole + br.alpha / rhs;
            if br.alpha > 0.0 {
                // decreasing branch right of its pole
                let hi = xs.min(s.b);
                if hi > s.a {
                    parts.push((s.a, hi));
                }
            } else {
                let lo = xs.max(s.a);
                if lo < s.b {
                    parts.push((lo, s.b));
                }
            }
        }
        if parts.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return domain("superlevel set is unbounded");
        }
        OpenSet::intervals(&parts)
    }

    /// ∫_a^b Mf.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        pairwise_sum(self.segments.iter().filter_map(|s| {
            let lo = s.a.max(a);
            let hi = s.b.min(b);
            (hi > lo).then(|| s.branch.integral(lo, hi))
        }))
    }

    /// ∫_a^b (Mf)^p.
    pub fn integral_power(&self, p: f64, a: f64, b: f64) -> CertifiedValue {
        self.segments
            .iter()
            .filter_map(|s| {
                let lo = s.a.max(a);
                let hi = s.b.min(b);
                (hi > lo).then(|| s.branch.integral_power(p, lo, hi))
            })
            .sum()
    }
}

/// `{x : Mf(x) > λ}` as a finite union of open intervals.
pub fn m_superlevel(f: &StepFunction1D, lambda: f64) -> Result<OpenSet> {
    MaximalProfile::new(f)?.superlevel(lambda)
}

/// `∫ (Mf)^p w` for a compactly supported step f and a 1D weight.
pub fn maximal_lp_power(f: &StepFunction1D, p: f64, w: &Weight) -> Result<CertifiedValue> {
    if !(p > 0.0) {
        return domain(format!("exponent must be positive, got {p}"));
    }
    let prof = MaximalProfile::new(f)?;
    let (lo, hi) = match prof.support() {
        Some(s) => s,
        None => return Ok(CertifiedValue::exact(0.0)),
    };
    let inner: Vec<(f64, f64, Branch)> =
        prof.segments().iter().filter(|s| s.a >= lo && s.b <= hi).map(|s| (s.a, s.b, s.branch)).collect();
    let right: Vec<Segment> = prof.segments().iter().filter(|s| s.a >= hi).copied().collect();
    let left: Vec<Segment> = prof.segments().iter().filter(|s| s.b <= lo).copied().collect();
    let mut total = CertifiedValue::exact(0.0);
    for (a, b, br) in inner {
        for (x0, x1, v) in w.pieces_1d(a, b)? {
            if v > 0.0 {
                total = total.add(br.integral_power(p, x0, x1).scale(v));
            }
        }
    }
    let right_tail = SegmentTail { segments: right, base: hi, sign: 1.0, p };
    let left_tail = SegmentTail { segments: left, base: lo, sign: -1.0, p };
    total = total.add(crate::weights::halfline::integrate_halfline(w, hi, 1.0, &right_tail, 1e-10)?);
    total = total.add(crate::weights::halfline::integrate_halfline(w, lo, -1.0, &left_tail, 1e-10)?);
    Ok(total)
}

/// `(Mf)^p` on an outer region as a function of the distance from the support.
struct SegmentTail {
    segments: Vec<Segment>,
    base: f64,
    sign: f64,
    p: f64,
}

impl crate::weights::halfline::RadialIntegrand for SegmentTail {
    fn value(&self, d: f64) -> f64 {
        let x = self.base + self.sign * d;
        self.segments
            .iter()
            .find(|s| s.a <= x && x <= s.b)
            .map(|s| s.branch.eval(x).max(0.0).powf(self.p))
            .unwrap_or(0.0)
    }
    fn integral(&self, d0: f64, d1: f64) -> CertifiedValue {
        let (x0, x1) = if self.sign > 0.0 {
            (self.base + d0, self.base + d1)
        } else {
            (self.base - d1, self.base - d0)
        };
        self.segments
            .iter()
            .filter_map(|s| {
                let lo = s.a.max(x0);
                let hi = s.b.min(x1);
                (hi > lo).then(|| s.branch.integral_power(self.p, lo, hi))
            })
            .sum()
    }
    fn decay_exponent(&self) -> f64 {
        self.p
    }
}

/// Smallest C with `M1_{Q0} ≤ (C/η)·M1_{E0}` on the sample points, where
/// `E0 ⊆ Q0` is a union of intervals and `η = |E0|/|Q0|`.
pub fn hl_bound_constant(q0: &Cube, e0: &OpenSet, samples: &[f64]) -> Result<f64> {
    let (a, b) = q0.endpoints();
    if e0.overlap(&Rect::interval(a, b)) + 1e-12 < e0.measure() {
        return domain("the subset must lie inside the cube");
    }
    let eta = e0.measure() / q0.volume();
    if !(eta > 0.0) {
        return domain("the subset must have positive measure");
    }
    let ind = StepFunction1D::from_pieces(&e0.components_1d().iter().map(|(a, b)| (*a, *b, 1.0)).collect::<Vec<_>>())?;
    let prof = MaximalProfile::new(&ind)?;
    let mut c = 0.0f64;
    for x in samples {
        let num = m_indicator(q0, &[*x]);
        let den = prof.eval(*x);
        if den > 0.0 {
            c = c.max(eta * num / den);
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn ind(a: f64, b: f64) -> StepFunction1D {
        StepFunction1D::indicator(a, b, 1.0).unwrap()
    }

    /// Brute force: best average over a dense family of intervals containing x.
    fn brute(f: &StepFunction1D, x: f64, span: f64, n: usize) -> f64 {
        let mut best = f.eval(x);
        for i in 0..=n {
            let a = x - span * i as f64 / n as f64;
            for j in 0..=n {
                let b = x + span * j as f64 / n as f64;
                if b > a {
                    best = best.max(f.integral(a, b).unwrap() / (b - a));
                }
            }
        }
        best
    }

    #[test]
    fn indicator_examples() {
        let q = Cube::interval(0.0, 1.0).unwrap();
        assert!((m_indicator(&q, &[2.0]) - 0.5).abs() < 1e-15);
        assert_eq!(m_indicator(&q, &[0.5]), 1.0);
        let sq = Cube::new(vec![0.0, 0.0], 1.0).unwrap();
        assert!((m_indicator(&sq, &[2.0, 0.5]) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn indicator_2d_against_grid_search() {
        let sq = Cube::new(vec![0.0, 0.0], 1.0).unwrap();
        for x in [[2.0, 0.5], [1.5, 1.5], [-0.3, 2.2], [0.5, -4.0]] {
            let exact = m_indicator(&sq, &x);
            // cubes of side s with lower corner c, x ∈ [c, c+s]^2
            let mut best: f64 = 0.0;
            for si in 1..=300 {
                let s = 0.02 * si as f64;
                for i in 0..=40 {
                    for j in 0..=40 {
                        let c0 = x[0] - s * i as f64 / 40.0;
                        let c1 = x[1] - s * j as f64 / 40.0;
                        let ov = ((c0 + s).min(1.0) - c0.max(0.0)).max(0.0) * ((c1 + s).min(1.0) - c1.max(0.0)).max(0.0);
                        best = best.max(ov / (s * s));
                    }
                }
            }
            assert!(best <= exact + 1e-12, "{x:?}: {best} > {exact}");
            assert!(exact - best < 5e-3, "{x:?}: {best} vs {exact}");
        }
    }

    #[test]
    fn step_examples() {
        assert!((m_stepfn_eval(&ind(0.0, 1.0), 2.0).unwrap() - 0.5).abs() < 1e-15);
        let f = ind(0.0, 1.0).add(&ind(2.0, 3.0));
        assert!((m_stepfn_eval(&f, 1.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m_stepfn_eval(&StepFunction1D::zero(), 3.0).unwrap(), 0.0);
        assert!(m_stepfn_eval(&StepFunction1D::constant(1.0), 0.0).is_err());
    }

    #[test]
    fn s_maximal_examples() {
        let f = ind(0.0, 1.0);
        assert!((m_s_eval(&f, 1.0, 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((m_s_eval(&f, 2.0, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(m_s_eval(&f, 0.5, 2.0).is_err());
        let g = StepFunction1D::from_pieces(&[(0.0, 1.0, 2.0), (1.5, 2.0, 0.5)]).unwrap();
        let v = m_s_eval(&g, 3.0, 1.2).unwrap();
        let oracle = m_stepfn_eval(&g.powf(3.0), 1.2).unwrap().powf(1.0 / 3.0);
        assert!((v - oracle).abs() < 1e-12);
        assert!(v >= brute(&g.powf(3.0), 1.2, 3.0, 300).powf(1.0 / 3.0) - 1e-12);
    }

    #[test]
    fn step_eval_dominates_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let pieces: Vec<(f64, f64, f64)> = (0..4)
                .map(|_| {
                    let a = rng.random_range(-3.0..3.0);
                    (a, a + rng.random_range(0.1..1.5), rng.random_range(0.0..3.0))
                })
                .collect();
            let f = StepFunction1D::from_pieces(&pieces).unwrap();
            let x = rng.random_range(-5.0..5.0);
            let exact = m_stepfn_eval(&f, x).unwrap();
            let b = brute(&f, x, 10.0, 400);
            assert!(b <= exact + 1e-12);
            assert!(exact - b < 0.05 * exact.max(1e-3) + 1e-3, "{exact} vs {b}");
        }
    }

    #[test]
    fn profile_matches_candidate_search() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let pieces: Vec<(f64, f64, f64)> = (0..5)
                .map(|_| {
                    let a = rng.random_range(-4.0..4.0);
                    (a, a + rng.random_range(0.05..2.0), rng.random_range(0.0..4.0))
                })
                .collect();
            let f = StepFunction1D::from_pieces(&pieces).unwrap();
            let prof = MaximalProfile::new(&f).unwrap();
            for _ in 0..40 {
                let x = rng.random_range(-12.0..12.0);
                let a = prof.eval(x);
                let b = m_stepfn_eval(&f, x).unwrap();
                assert!((a - b).abs() <= 1e-12 * b.max(1.0), "x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn superlevel_examples() {
        let f = ind(0.0, 1.0);
        assert_eq!(m_superlevel(&f, 0.5).unwrap().components_1d(), vec![(-1.0, 2.0)]);
        assert_eq!(m_superlevel(&f, 0.25).unwrap().components_1d(), vec![(-3.0, 4.0)]);
        assert!(m_superlevel(&f, 2.0).unwrap().is_empty());
        assert!(m_superlevel(&f, 1.0).unwrap().is_empty());
        assert!(m_superlevel(&f, 0.0).is_err());
    }

    #[test]
    fn superlevel_agrees_with_sampling() {
        let f = StepFunction1D::from_pieces(&[(0.0, 1.0, 3.0), (2.0, 2.5, 1.0), (4.0, 6.0, 0.5)]).unwrap();
        for lambda in [0.2, 0.6, 1.0, 1.7] {
            let set = m_superlevel(&f, lambda).unwrap();
            let comps = set.components_1d();
            for i in 0..10_000 {
                let x = -10.0 + 26.0 * (i as f64 + 0.5) / 10_000.0;
                let inside = m_stepfn_eval(&f, x).unwrap() > lambda;
                let near_edge = comps.iter().any(|(a, b)| (x - a).abs() < 1e-9 || (x - b).abs() < 1e-9);
                if !near_edge {
                    assert_eq!(inside, set.contains_point(&[x]), "λ={lambda}, x={x}");
                }
            }
        }
    }

    #[test]
    fn profile_integral_of_indicator() {
        // ∫ (M1_{[0,1]})^2 = 1 + 2∫_0^∞ (1+d)^{-2} = 3
        let prof = MaximalProfile::new(&ind(0.0, 1.0)).unwrap();
        let v = prof.integral_power(2.0, f64::NEG_INFINITY, f64::INFINITY);
        assert!((v.value - 3.0).abs() < 1e-12);
        // ∫_0^3 M1_{[0,1]} = 1 + ln 3
        assert!((prof.integral(0.0, 3.0) - (1.0 + 3f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn monotone_in_f() {
        let f = StepFunction1D::from_pieces(&[(0.0, 1.0, 1.0), (3.0, 4.0, 0.5)]).unwrap();
        let g = f.add(&StepFunction1D::indicator(1.5, 2.0, 0.7).unwrap());
        for i in 0..200 {
            let x = -5.0 + 0.06 * i as f64;
            assert!(m_stepfn_eval(&f, x).unwrap() <= m_stepfn_eval(&g, x).unwrap() + 1e-15);
        }
    }

    #[test]
    fn hl_bound_is_finite() {
        let q0 = Cube::interval(0.0, 4.0).unwrap();
        let e0 = OpenSet::intervals(&[(0.0, 0.5), (3.0, 3.25)]).unwrap();
        let xs: Vec<f64> = (0..2000).map(|i| -50.0 + 0.05 * i as f64).collect();
        let c = hl_bound_constant(&q0, &e0, &xs).unwrap();
        assert!(c.is_finite() && c > 0.0 && c < 10.0, "{c}");
    }
}
