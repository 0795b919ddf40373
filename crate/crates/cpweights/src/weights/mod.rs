//! Weights: step, Kahanpää–Mejlbro rules in 1D and nD, analytic families with
//! tail descriptors, and grid samples. Tail functionals, certifiers and the
//! counterexample functionals live in the submodules.

pub mod characteristics;
pub mod halfline;
pub mod psi;
pub mod tail;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::{pairwise_sum, quad, CertifiedValue, GridFunctionND, StepFunction1D};
use crate::error::{domain, Error, Result};
use crate::geometry::{Cube, Rect};

pub use characteristics::*;
pub use psi::{phi_doubling_sup, phi_moment_integral, phi_p, ratio_a, ratio_b, PsiFunction};
pub use tail::{hole_ratio, tail_discretized, tail_functional, tail_functional_with, TailOptions};

/// Hole side lengths `ℓ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LengthRule {
    /// `2^{-|k|-1}`
    Geometric,
    /// `1/(|k|+2)`
    Harmonic,
    /// `1/(|k|+offset)`, offset ≥ 1
    Reciprocal { offset: f64 },
    /// explicit values; holes exist exactly at the listed indices
    Table { values: BTreeMap<i64, f64> },
}

/// Hole heights `h_k` as a function of `ℓ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HeightRule {
    /// `ℓ^{n(p-1)}`
    Cp { p: f64 },
    /// `φ_p(ℓ^n)/ℓ^n`
    PhiP { p: f64 },
    Constant { h: f64 },
    Table { values: BTreeMap<i64, f64> },
}

/// Kahanpää–Mejlbro rule. In nD the index of `P_m` is `|m|_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmRule {
    pub ell: LengthRule,
    pub height: HeightRule,
    /// holes exist for `|k| ≤ k_max` (ignored for table lengths)
    #[serde(default = "default_k_max")]
    pub k_max: i64,
}

fn default_k_max() -> i64 {
    20
}

impl KmRule {
    pub fn new(ell: LengthRule, height: HeightRule) -> KmRule {
        KmRule { ell, height, k_max: default_k_max() }
    }

    /// Named presets: "geometric", "harmonic"; heights default to `Cp{p}`.
    pub fn preset(name: &str, p: f64) -> Result<KmRule> {
        let ell = match name {
            "geometric" => LengthRule::Geometric,
            "harmonic" => LengthRule::Harmonic,
            _ => return Err(Error::Config(format!("unknown rule preset {name:?}; available: geometric, harmonic"))),
        };
        Ok(KmRule::new(ell, HeightRule::Cp { p }))
    }

    pub fn with_height(mut self, height: HeightRule) -> KmRule {
        self.height = height;
        self
    }

    pub fn with_k_max(mut self, k_max: i64) -> KmRule {
        self.k_max = k_max;
        self
    }

    /// `ℓ_k`, or None where the rule places no hole.
    pub fn ell(&self, k: i64) -> Option<f64> {
        let a = k.abs() as f64;
        match &self.ell {
            LengthRule::Table { values } => values.get(&k).copied(),
            _ if k.abs() > self.k_max => None,
            LengthRule::Geometric => Some((-a - 1.0).exp2()),
            LengthRule::Harmonic => Some(1.0 / (a + 2.0)),
            LengthRule::Reciprocal { offset } => Some(1.0 / (a + offset)),
        }
    }

    /// `h_k` for a hole of side `ℓ` in dimension n.
    pub fn height(&self, k: i64, ell: f64, n: usize) -> Option<f64> {
        let vol = ell.powi(n as i32);
        match &self.height {
            HeightRule::Cp { p } => Some(ell.powf(n as f64 * (p - 1.0))),
            HeightRule::PhiP { p } => Some(psi::phi_p(vol, *p) / vol),
            HeightRule::Constant { h } => Some(*h),
            HeightRule::Table { values } => values.get(&k).copied(),
        }
    }

    pub fn hole_indices(&self) -> Vec<i64> {
        match &self.ell {
            LengthRule::Table { values } => values.keys().copied().collect(),
            _ => (-self.k_max..=self.k_max).collect(),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if let LengthRule::Reciprocal { offset } = self.ell {
            if !(offset >= 1.0) {
                return domain("reciprocal length rule needs offset ≥ 1");
            }
        }
        if self.k_max < 0 {
            return domain("k_max must be nonnegative");
        }
        for k in self.hole_indices() {
            let l = self.ell(k).unwrap_or(f64::NAN);
            if !(l > 0.0 && l <= 1.0) {
                return domain(format!("hole side ℓ_{k} = {l} outside (0, 1]"));
            }
            let h = self.height(k, l, n);
            match h {
                Some(h) if h > 0.0 && h.is_finite() => {}
                Some(h) => return domain(format!("hole height h_{k} = {h} must be positive and finite")),
                None => return domain(format!("height table has no entry for k = {k}")),
            }
        }
        Ok(())
    }
}

/// One-dimensional Kahanpää–Mejlbro weight `Σ 1_{I_k} + Σ h_k^r 1_{Ω_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Km1d {
    rule: KmRule,
    power: f64,
    holes: Vec<(i64, f64, f64)>,
}

impl Km1d {
    pub fn rule(&self) -> &KmRule {
        &self.rule
    }
    /// `(k, ℓ_k, h_k)` for every hole, after any power transform.
    pub fn holes(&self) -> &[(i64, f64, f64)] {
        &self.holes
    }
    pub fn island(k: i64) -> Cube {
        Cube::interval(4.0 * k as f64 - 3.0, 4.0 * k as f64 - 1.0).expect("island")
    }
    pub fn hole(&self, k: i64) -> Option<Cube> {
        self.holes.iter().find(|h| h.0 == k).map(|&(_, l, _)| Cube::interval(4.0 * k as f64 - l / 2.0, 4.0 * k as f64 + l / 2.0).expect("hole"))
    }
    pub fn eval(&self, x: f64) -> f64 {
        let k = (x / 4.0).round() as i64;
        if let Ok(i) = self.holes.binary_search_by_key(&k, |h| h.0) {
            let (_, l, h) = self.holes[i];
            if (x - 4.0 * k as f64).abs() <= l / 2.0 {
                return h;
            }
        }
        if (x + 3.0).rem_euclid(4.0) <= 2.0 {
            1.0
        } else {
            0.0
        }
    }
    /// Empty (lo > hi) when there are no holes.
    fn hole_range(&self) -> (f64, f64) {
        match (self.holes.first(), self.holes.last()) {
            (Some(a), Some(b)) => (4.0 * a.0 as f64 - 1.0, 4.0 * b.0 as f64 + 1.0),
            _ => (f64::INFINITY, f64::NEG_INFINITY),
        }
    }
    /// The island train alone.
    pub(crate) fn without_holes(&self) -> Km1d {
        Km1d { rule: self.rule.clone(), power: self.power, holes: Vec::new() }
    }
    /// `w([a, b])` without enumerating islands.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        let mut s = island_measure_1d(a, b);
        for &(k, l, h) in &self.holes {
            let c = 4.0 * k as f64;
            s += h * ((c + l / 2.0).min(b) - (c - l / 2.0).max(a)).max(0.0);
        }
        s
    }
    fn pieces(&self, a: f64, b: f64) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        let k0 = ((a + 1.0) / 4.0).floor() as i64;
        let k1 = ((b + 3.0) / 4.0).ceil() as i64;
        for k in k0..=k1 {
            let (lo, hi) = (4.0 * k as f64 - 3.0, 4.0 * k as f64 - 1.0);
            if hi.min(b) > lo.max(a) {
                out.push((lo.max(a), hi.min(b), 1.0));
            }
        }
        let first = self.holes.partition_point(|h| 4.0 * (h.0 as f64) + 1.0 < a);
        for &(k, l, h) in &self.holes[first..] {
            let c = 4.0 * k as f64;
            if c - 1.0 > b {
                break;
            }
            let (lo, hi) = (c - l / 2.0, c + l / 2.0);
            if hi.min(b) > lo.max(a) {
                out.push((lo.max(a), hi.min(b), h));
            }
        }
        out.sort_by(|x, y| x.0.total_cmp(&y.0));
        out
    }
}

/// `km_weight_1d`: validates the rule and builds the weight.
pub fn km_weight_1d(rule: KmRule) -> Result<Weight> {
    rule.validate(1)?;
    let holes = rule
        .hole_indices()
        .into_iter()
        .map(|k| {
            let l = rule.ell(k).expect("validated");
            (k, l, rule.height(k, l, 1).expect("validated"))
        })
        .collect();
    Ok(Weight::Km1d(Km1d { rule, power: 1.0, holes }))
}

/// n-dimensional Kahanpää–Mejlbro weight `1_A + Σ h_m 1_{P_m}` with
/// `A = ∪ R_m`, `R_m = [4m-3, 4m-1]^n`, `P_m` centered at `4m` of side `ℓ_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct KmNd {
    rule: KmRule,
    dim: usize,
    power: f64,
}

impl KmNd {
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn rule(&self) -> &KmRule {
        &self.rule
    }
    pub fn island(m: &[i64]) -> Cube {
        Cube::new(m.iter().map(|k| 4.0 * *k as f64 - 3.0).collect(), 2.0).expect("island")
    }
    /// `(P_m, h_m)` if the rule places a hole at m.
    pub fn hole(&self, m: &[i64]) -> Option<(Cube, f64)> {
        let k: i64 = m.iter().map(|v| v.abs()).sum();
        let l = self.rule.ell(k)?;
        let h = self.rule.height(k, l, self.dim)?.powf(self.power);
        let c: Vec<f64> = m.iter().map(|v| 4.0 * *v as f64).collect();
        Some((Cube::from_center(&c, l).expect("hole"), h))
    }
    pub fn eval(&self, x: &[f64]) -> f64 {
        let m: Vec<i64> = x.iter().map(|v| (v / 4.0).round() as i64).collect();
        if let Some((p, h)) = self.hole(&m) {
            if p.to_rect().lo.iter().zip(&p.to_rect().hi).zip(x).all(|((a, b), v)| a <= v && v <= b) {
                return h;
            }
        }
        if x.iter().all(|v| (v + 3.0).rem_euclid(4.0) <= 2.0) {
            1.0
        } else {
            0.0
        }
    }
    fn max_height(&self) -> f64 {
        let mut best = 1.0f64;
        for k in self.rule.hole_indices() {
            if let Some(l) = self.rule.ell(k) {
                best = best.max(self.rule.height(k, l, self.dim).unwrap_or(0.0).powf(self.power));
            }
        }
        best
    }
    /// Constant pieces meeting the bounded box r.
    pub fn pieces(&self, r: &Rect) -> Vec<(Rect, f64)> {
        let n = self.dim;
        let ranges: Vec<(i64, i64)> = (0..n)
            .map(|i| (((r.lo[i] - 1.0) / 4.0).floor() as i64, ((r.hi[i] + 3.0) / 4.0).ceil() as i64))
            .collect();
        let mut out = Vec::new();
        let mut m: Vec<i64> = ranges.iter().map(|x| x.0).collect();
        loop {
            let isl = KmNd::island(&m).to_rect().intersect(r);
            if !isl.is_empty() {
                out.push((isl, 1.0));
            }
            if let Some((p, h)) = self.hole(&m) {
                let ph = p.to_rect().intersect(r);
                if !ph.is_empty() {
                    out.push((ph, h));
                }
            }
            let mut i = 0;
            loop {
                if i == n {
                    return out;
                }
                m[i] += 1;
                if m[i] <= ranges[i].1 {
                    break;
                }
                m[i] = ranges[i].0;
                i += 1;
            }
        }
    }
    /// `w(r)` for a bounded box: islands factor over axes, holes are few.
    pub fn mass(&self, r: &Rect) -> f64 {
        let n = self.dim;
        let mut s: f64 = (0..n).map(|i| island_measure_1d(r.lo[i], r.hi[i])).product();
        let kmax = match &self.rule.ell {
            LengthRule::Table { values } => values.keys().map(|k| k.abs()).max().unwrap_or(0),
            _ => self.rule.k_max,
        };
        let ranges: Vec<(i64, i64)> = (0..n)
            .map(|i| {
                let lo = ((r.lo[i] - 1.0) / 4.0).floor().max(-(kmax as f64)) as i64;
                let hi = ((r.hi[i] + 1.0) / 4.0).ceil().min(kmax as f64) as i64;
                (lo, hi)
            })
            .collect();
        if ranges.iter().any(|(a, b)| a > b) {
            return s;
        }
        let mut m: Vec<i64> = ranges.iter().map(|x| x.0).collect();
        loop {
            if let Some((p, h)) = self.hole(&m) {
                s += h * p.to_rect().overlap(r);
            }
            let mut i = 0;
            loop {
                if i == n {
                    return s;
                }
                m[i] += 1;
                if m[i] <= ranges[i].1 {
                    break;
                }
                m[i] = ranges[i].0;
                i += 1;
            }
        }
    }
    /// `|A ∩ Q(x, r)|` for the cube of side `2r` centered at x.
    pub fn island_measure(&self, x: &[f64], r: f64) -> Result<f64> {
        let c = Cube::from_center(x, 2.0 * r)?.to_rect();
        Ok(pairwise_sum(self.pieces(&c).into_iter().filter(|(_, v)| *v == 1.0).map(|(b, _)| b.volume())))
    }
}

pub fn km_weight_nd(rule: KmRule, n: usize) -> Result<Weight> {
    if n == 0 {
        return domain("dimension must be positive");
    }
    rule.validate(n)?;
    Ok(Weight::KmNd(KmNd { rule, dim: n, power: 1.0 }))
}

/// Growth of the mass in dyadic shells `S_X = {X ≤ |x| < 2X}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailDescriptor {
    /// `w(S_X) ≥ c_low·X^{b_low}` for arbitrarily large X
    pub low: Option<(f64, f64)>,
    /// `w(S_X) ≤ c_up·X^{b_up}` for all `X ≥ x0`, as `(c_up, b_up, x0)`
    pub up: Option<(f64, f64, f64)>,
}

impl TailDescriptor {
    /// Against an integrand decaying like `|x|^{-nq}`: `Some(true)` when the
    /// integral diverges, `Some(false)` when it converges, None if undecided.
    pub fn diverges(&self, n: usize, q: f64) -> Option<bool> {
        let nq = n as f64 * q;
        if let Some((c, b)) = self.low {
            if c > 0.0 && b >= nq {
                return Some(true);
            }
        }
        if let Some((_, b, _)) = self.up {
            if b < nq {
                return Some(false);
            }
        }
        None
    }
}

/// Analytic 1D weight families.
#[derive(Clone)]
pub enum AnalyticKind {
    /// `|x|^a`, a > -1
    PowerLaw { a: f64 },
    /// `|x|^a·1_P` with `P = ∪_{k≥1} [10^k, 10^k + 2^{-k}]`
    SparsePower { a: f64 },
    Custom {
        label: String,
        eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        breakpoints: Vec<f64>,
        descriptor: TailDescriptor,
        bound_hint: Option<f64>,
    },
}

impl fmt::Debug for AnalyticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyticKind::PowerLaw { a } => write!(f, "PowerLaw({a})"),
            AnalyticKind::SparsePower { a } => write!(f, "SparsePower({a})"),
            AnalyticKind::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnalyticWeight {
    kind: AnalyticKind,
    /// pointwise exponent applied on top of the family
    power: f64,
}

impl AnalyticWeight {
    pub fn eval(&self, x: f64) -> f64 {
        let v = match &self.kind {
            AnalyticKind::PowerLaw { a } => x.abs().powf(*a),
            AnalyticKind::SparsePower { a } => {
                if sparse_support_contains(x) {
                    x.abs().powf(*a)
                } else {
                    0.0
                }
            }
            AnalyticKind::Custom { eval, .. } => eval(x),
        };
        if self.power == 1.0 {
            v
        } else {
            v.powf(self.power)
        }
    }

    /// Points where the evaluator is not smooth, inside `[a, b]`.
    pub fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        let mut pts = match &self.kind {
            AnalyticKind::PowerLaw { .. } => vec![0.0],
            AnalyticKind::SparsePower { .. } => {
                let mut v = Vec::new();
                for k in 1..=300 {
                    let s = 10f64.powi(k);
                    if s > b {
                        break;
                    }
                    v.push(s);
                    v.push(s + (-(k as f64)).exp2());
                }
                v
            }
            AnalyticKind::Custom { breakpoints, .. } => breakpoints.clone(),
        };
        pts.retain(|x| *x > a && *x < b);
        pts
    }

    pub fn descriptor(&self) -> TailDescriptor {
        let r = self.power;
        match &self.kind {
            AnalyticKind::PowerLaw { a } => {
                let e = a * r;
                let c = 2.0 * ((e + 1.0).exp2() - 1.0) / (e + 1.0);
                TailDescriptor { low: Some((c, e + 1.0)), up: Some((c, e + 1.0, 0.0)) }
            }
            AnalyticKind::SparsePower { a } => {
                let e = a * r;
                // the shell [10^k, 2·10^k) holds one interval of length 2^{-k}
                let b_low = e - 2f64.log10();
                TailDescriptor { low: Some((1.0, b_low)), up: Some((3f64.powf(e.max(0.0)), e.max(0.0), 1.0)) }
            }
            AnalyticKind::Custom { descriptor, .. } => {
                if r == 1.0 {
                    *descriptor
                } else {
                    TailDescriptor { low: None, up: None }
                }
            }
        }
    }

    pub fn bound_hint(&self) -> Option<f64> {
        match &self.kind {
            AnalyticKind::PowerLaw { a } if *a == 0.0 => Some(1.0),
            AnalyticKind::Custom { bound_hint, .. } => bound_hint.map(|b| b.powf(self.power)),
            _ => None,
        }
    }

    fn integral(&self, a: f64, b: f64) -> CertifiedValue {
        if b <= a {
            return CertifiedValue::exact(0.0);
        }
        let mut cuts = vec![a];
        cuts.extend(self.breakpoints(a, b));
        cuts.push(b);
        cuts.windows(2)
            .map(|w| {
                let r = quad::integrate(|x| self.eval(x), w[0], w[1], 1e-14, 1e-12);
                CertifiedValue::new(r.value, r.error)
            })
            .sum()
    }
}

/// `|∪_k [4k-3, 4k-1] ∩ (-∞, x]|` up to an additive constant.
fn island_cumulative(x: f64) -> f64 {
    let y = x + 3.0;
    let k = (y / 4.0).floor();
    2.0 * k + (y - 4.0 * k).min(2.0)
}

/// `|∪_k [4k-3, 4k-1] ∩ [a, b]|`.
pub(crate) fn island_measure_1d(a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if b - a < 1e6 {
        // direct differences keep full relative precision on short ranges
        let mut s = 0.0;
        let k0 = ((a + 1.0) / 4.0).floor() as i64;
        let k1 = ((b + 3.0) / 4.0).ceil() as i64;
        for k in k0..=k1 {
            let (lo, hi) = (4.0 * k as f64 - 3.0, 4.0 * k as f64 - 1.0);
            s += (hi.min(b) - lo.max(a)).max(0.0);
        }
        return s;
    }
    island_cumulative(b) - island_cumulative(a)
}

fn sparse_support_contains(x: f64) -> bool {
    if x < 10.0 {
        return false;
    }
    let k = x.log10().floor();
    let s = 10f64.powf(k);
    x >= s && x <= s + (-k).exp2()
}

/// A nonnegative locally integrable function.
#[derive(Debug, Clone)]
pub enum Weight {
    Step(StepFunction1D),
    Km1d(Km1d),
    KmNd(KmNd),
    Analytic(AnalyticWeight),
    Grid(GridFunctionND),
}

/// Behaviour of a 1D piecewise-constant weight beyond its irregular window.
#[derive(Debug, Clone, PartialEq)]
pub enum FarField {
    Zero,
    Constant(f64),
    /// pieces `[anchor + kP + offset, … + len]` with value v, for all k
    Periodic { period: f64, anchor: f64, pattern: Vec<(f64, f64, f64)> },
}

impl Weight {
    pub fn step(f: StepFunction1D) -> Weight {
        Weight::Step(f)
    }

    pub fn constant(c: f64) -> Weight {
        Weight::Step(StepFunction1D::constant(c))
    }

    /// `1_{[a, ∞)}`
    pub fn half_line(a: f64) -> Weight {
        Weight::Step(StepFunction1D::new(vec![a], vec![], 0.0, 1.0).expect("half line"))
    }

    pub fn power_law(a: f64) -> Result<Weight> {
        if !(a > -1.0) {
            return domain(format!("|x|^a is locally integrable only for a > -1, got {a}"));
        }
        Ok(Weight::Analytic(AnalyticWeight { kind: AnalyticKind::PowerLaw { a }, power: 1.0 }))
    }

    pub fn sparse_power(a: f64) -> Result<Weight> {
        if !(a >= 0.0) {
            return domain("sparse-support power needs a ≥ 0");
        }
        Ok(Weight::Analytic(AnalyticWeight { kind: AnalyticKind::SparsePower { a }, power: 1.0 }))
    }

    pub fn analytic(kind: AnalyticKind) -> Weight {
        Weight::Analytic(AnalyticWeight { kind, power: 1.0 })
    }

    pub fn dim(&self) -> usize {
        match self {
            Weight::KmNd(k) => k.dim,
            Weight::Grid(g) => g.dim(),
            _ => 1,
        }
    }

    /// Pointwise value.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Weight::Step(f) => f.eval(x[0]),
            Weight::Km1d(k) => k.eval(x[0]),
            Weight::KmNd(k) => k.eval(x),
            Weight::Analytic(a) => a.eval(x[0]),
            Weight::Grid(g) => g.eval(x),
        }
    }

    /// Supremum, when known.
    pub fn bound_hint(&self) -> Option<f64> {
        match self {
            Weight::Step(f) => Some(f.max_value()),
            Weight::Km1d(k) => Some(k.holes.iter().map(|h| h.2).fold(1.0, f64::max)),
            Weight::KmNd(k) => Some(k.max_height()),
            Weight::Analytic(a) => a.bound_hint(),
            Weight::Grid(g) => Some(g.max_value()),
        }
    }

    /// `w(r)`; `Err(Infinite)` for unbounded boxes of infinite mass.
    pub fn mass(&self, r: &Rect) -> Result<CertifiedValue> {
        if r.dim() != self.dim() {
            return domain("box and weight dimensions differ");
        }
        if r.is_empty() {
            return Ok(CertifiedValue::exact(0.0));
        }
        let bounded = r.lo.iter().chain(&r.hi).all(|v| v.is_finite());
        match self {
            Weight::Step(f) => Ok(CertifiedValue::exact(f.integral(r.lo[0], r.hi[0])?)),
            Weight::Grid(g) => Ok(CertifiedValue::exact(g.integral_power(1.0, r)?)),
            _ if !bounded => Err(Error::Infinite("weight mass over an unbounded box".into())),
            Weight::Km1d(k) => Ok(CertifiedValue::exact(k.mass(r.lo[0], r.hi[0]))),
            Weight::KmNd(k) => Ok(CertifiedValue::exact(k.mass(r))),
            Weight::Analytic(a) => Ok(a.integral(r.lo[0], r.hi[0])),
        }
    }

    /// Convenience for cubes.
    pub fn mass_of(&self, q: &Cube) -> Result<f64> {
        Ok(self.mass(&q.to_rect())?.value)
    }

    /// Exact constant pieces `(a, b, v)` with v > 0 covering `[a, b]` (1D
    /// piecewise-constant weights only).
    pub fn pieces_1d(&self, a: f64, b: f64) -> Result<Vec<(f64, f64, f64)>> {
        if !(a.is_finite() && b.is_finite()) {
            return domain("piece enumeration needs a bounded interval");
        }
        if b <= a {
            return Ok(Vec::new());
        }
        match self {
            Weight::Step(f) => Ok(f
                .pieces()
                .into_iter()
                .filter_map(|(x, y, v)| {
                    let (lo, hi) = (x.max(a), y.min(b));
                    (hi > lo && v > 0.0).then_some((lo, hi, v))
                })
                .collect()),
            Weight::Km1d(k) => Ok(k.pieces(a, b)),
            Weight::Grid(g) if g.dim() == 1 => {
                let mut out: Vec<(f64, f64, f64)> = Vec::new();
                let (lo, hi) = g.cube().endpoints();
                let ov = g.outside_value();
                if ov > 0.0 {
                    if a < lo {
                        out.push((a, lo.min(b), ov));
                    }
                    if b > hi {
                        out.push((hi.max(a), b, ov));
                    }
                }
                for (r, v) in g.cells() {
                    let (x, y) = (r.lo[0].max(a), r.hi[0].min(b));
                    if y > x && v > 0.0 {
                        out.push((x, y, v));
                    }
                }
                out.retain(|p| p.1 > p.0);
                out.sort_by(|x, y| x.0.total_cmp(&y.0));
                Ok(out)
            }
            _ => Err(Error::Unsupported("piece enumeration needs a 1D piecewise-constant weight".into())),
        }
    }

    /// `w·1_{[a,b]}` as a compactly supported step function.
    pub fn restrict_to_step(&self, a: f64, b: f64) -> Result<StepFunction1D> {
        StepFunction1D::from_pieces(&self.pieces_1d(a, b)?)
    }

    /// Interval outside of which the weight follows its far field, and the far
    /// field itself (1D piecewise-constant weights).
    pub fn layout_1d(&self) -> Result<((f64, f64), FarField, FarField)> {
        match self {
            Weight::Step(f) => {
                let bp = f.breakpoints();
                let (l, r) = f.tails();
                let win = if bp.is_empty() { (0.0, 0.0) } else { (bp[0], bp[bp.len() - 1]) };
                let ff = |v: f64| if v > 0.0 { FarField::Constant(v) } else { FarField::Zero };
                Ok((win, ff(l), ff(r)))
            }
            Weight::Km1d(k) => {
                let per = FarField::Periodic { period: 4.0, anchor: -3.0, pattern: vec![(0.0, 2.0, 1.0)] };
                Ok((k.hole_range(), per.clone(), per))
            }
            Weight::Grid(g) if g.dim() == 1 => {
                let ff = if g.outside_value() > 0.0 { FarField::Constant(g.outside_value()) } else { FarField::Zero };
                Ok((g.cube().endpoints(), ff.clone(), ff))
            }
            _ => Err(Error::Unsupported("layout needs a 1D piecewise-constant weight".into())),
        }
    }

    /// Shell-growth descriptor of analytic weights.
    pub fn descriptor_1d(&self) -> Option<TailDescriptor> {
        match self {
            Weight::Analytic(a) => Some(a.descriptor()),
            _ => None,
        }
    }

    pub fn is_piecewise_constant_1d(&self) -> bool {
        matches!(self, Weight::Step(_) | Weight::Km1d(_)) || matches!(self, Weight::Grid(g) if g.dim() == 1)
    }

    /// Pointwise power `w^r`.
    pub fn power_transform(&self, r: f64) -> Result<Weight> {
        if !(r > 1.0) {
            return domain(format!("power transform needs r > 1, got {r}"));
        }
        Ok(match self {
            Weight::Step(f) => Weight::Step(f.powf(r)),
            Weight::Km1d(k) => Weight::Km1d(Km1d {
                rule: k.rule.clone(),
                power: k.power * r,
                holes: k.holes.iter().map(|&(i, l, h)| (i, l, h.powf(r))).collect(),
            }),
            Weight::KmNd(k) => Weight::KmNd(KmNd { rule: k.rule.clone(), dim: k.dim, power: k.power * r }),
            Weight::Analytic(a) => Weight::Analytic(AnalyticWeight { kind: a.kind.clone(), power: a.power * r }),
            Weight::Grid(g) => Weight::Grid(GridFunctionND::new(
                g.cube().clone(),
                g.cells_per_axis(),
                g.cell_values().iter().map(|v| v.powf(r)).collect(),
                g.outside_value().powf(r),
            )?),
        })
    }

    /// Short human-readable label for reports.
    pub fn label(&self) -> String {
        match self {
            Weight::Step(f) if f.values().is_empty() => format!("constant {}", f.tails().0),
            Weight::Step(f) => format!("step[{} pieces]", f.values().len()),
            Weight::Km1d(k) => format!("km1d(power {})", k.power),
            Weight::KmNd(k) => format!("km{}d(power {})", k.dim, k.power),
            Weight::Analytic(a) => format!("{:?}^{}", a.kind, a.power),
            Weight::Grid(g) => format!("grid{}d", g.dim()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(p: f64) -> Weight {
        km_weight_1d(KmRule::preset("geometric", p).unwrap()).unwrap()
    }

    #[test]
    fn km_1d_examples() {
        let w = geometric(2.0);
        let Weight::Km1d(k) = &w else { panic!() };
        assert_eq!(w.mass_of(&k.hole(0).unwrap()).unwrap(), 0.25);
        assert_eq!(w.mass_of(&Km1d::island(5)).unwrap(), 2.0);
        assert_eq!(w.mass(&Rect::interval(0.0, 4.0)).unwrap().value, 2.15625);
    }

    #[test]
    fn km_mass_identity() {
        for p in [1.5, 2.0, 3.0] {
            let w = geometric(p);
            let Weight::Km1d(k) = &w else { panic!() };
            for &(i, l, h) in k.holes() {
                let m = w.mass_of(&k.hole(i).unwrap()).unwrap();
                assert!((m - h * l).abs() <= 1e-15 * h * l, "k={i}");
            }
        }
    }

    #[test]
    fn closed_form_mass_matches_enumeration() {
        let w = geometric(2.0);
        let Weight::Km1d(k) = &w else { panic!() };
        for (a, b) in [(-7.3, 11.9), (0.0, 4.0), (-1.0, 1.0), (2.5, 2.6), (-100.25, 37.0)] {
            let direct: f64 = k.pieces(a, b).iter().map(|(x, y, v)| v * (y - x)).sum();
            assert!((k.mass(a, b) - direct).abs() < 1e-12);
        }
        assert_eq!(island_measure_1d(-3.0, 4.0 * 1e7 - 3.0), 2e7);
        let nd = km_weight_nd(KmRule::preset("harmonic", 2.0).unwrap(), 2).unwrap();
        let Weight::KmNd(k2) = &nd else { panic!() };
        let r = Rect::new(vec![-5.5, -2.25], vec![9.0, 7.5]).unwrap();
        let direct: f64 = k2.pieces(&r).iter().map(|(b, v)| v * b.volume()).sum();
        assert!((k2.mass(&r) - direct).abs() < 1e-12);
    }

    #[test]
    fn km_rejects_bad_rules() {
        assert!(km_weight_1d(KmRule::new(LengthRule::Reciprocal { offset: 0.5 }, HeightRule::Constant { h: 1.0 })).is_err());
        assert!(km_weight_1d(KmRule::new(LengthRule::Geometric, HeightRule::Constant { h: 0.0 })).is_err());
        let mut t = BTreeMap::new();
        t.insert(0, 1.5);
        assert!(km_weight_1d(KmRule::new(LengthRule::Table { values: t }, HeightRule::Constant { h: 1.0 })).is_err());
        assert!(KmRule::preset("nope", 2.0).is_err());
    }

    #[test]
    fn km_nd_examples() {
        let rule = KmRule::new(LengthRule::Reciprocal { offset: 1.0 }, HeightRule::Cp { p: 2.0 });
        let w = km_weight_nd(rule, 2).unwrap();
        let Weight::KmNd(k) = &w else { panic!() };
        assert_eq!(w.mass_of(&KmNd::island(&[0, 0])).unwrap(), 4.0);
        let (p0, h0) = k.hole(&[0, 0]).unwrap();
        assert_eq!(p0.side(), 1.0);
        assert_eq!(w.mass_of(&p0).unwrap(), h0);
        let got = k.island_measure(&[-2.0, -2.0], 6.0).unwrap();
        assert!(got >= 4.0, "{got}");
    }

    #[test]
    fn km_nd_density_on_islands() {
        let rule = KmRule::preset("geometric", 2.0).unwrap();
        for n in [1usize, 2, 3] {
            let Weight::KmNd(k) = km_weight_nd(rule.clone(), n).unwrap() else { panic!() };
            for m in [-3i64, 0, 2] {
                let x: Vec<f64> = (0..n).map(|i| 4.0 * (m + i as i64) as f64 - 2.5).collect();
                for r in [2.0, 3.0, 5.5, 9.0] {
                    let got = k.island_measure(&x, r).unwrap();
                    assert!(got >= 3f64.powi(-(n as i32)) * (2.0 * r).powi(n as i32) / 2f64.powi(n as i32) - 1e-12);
                }
            }
        }
    }

    #[test]
    fn power_transform_examples() {
        let one = Weight::constant(1.0).power_transform(2.0).unwrap();
        assert_eq!(one.eval(&[3.0]), 1.0);
        let w = geometric(2.0);
        let t = w.power_transform(1.25).unwrap();
        let Weight::Km1d(k) = &t else { panic!() };
        let (_, l, h) = k.holes()[20];
        assert!((h - l.powf(1.25)).abs() < 1e-15);
        assert_eq!(t.eval(&[-2.0]), 1.0);
        assert!(w.power_transform(1.0).is_err());
    }

    #[test]
    fn eval_matches_pieces() {
        let w = geometric(2.0);
        assert_eq!(w.eval(&[0.0]), 0.5);
        assert_eq!(w.eval(&[0.3]), 0.0);
        assert_eq!(w.eval(&[1.5]), 1.0);
        assert_eq!(w.eval(&[4.0]), 0.25);
    }

    #[test]
    fn analytic_mass() {
        let w = Weight::power_law(2.0).unwrap();
        let m = w.mass(&Rect::interval(-1.0, 2.0)).unwrap();
        assert!((m.value - 3.0).abs() < 1e-12);
        assert!(Weight::power_law(-1.0).is_err());
        let s = Weight::sparse_power(4.0).unwrap();
        assert_eq!(s.eval(&[5.0]), 0.0);
        assert_eq!(s.eval(&[10.25]), 10.25f64.powi(4));
        assert_eq!(s.eval(&[10.75]), 0.0);
        assert_eq!(s.descriptor_1d().unwrap().diverges(1, 2.0), Some(true));
    }
}
