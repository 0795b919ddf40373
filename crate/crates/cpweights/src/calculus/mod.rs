//! Piecewise-constant functions, exact integration, power averages and
//! weighted L^p quasi-norms.

pub mod quad;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{Cube, OpenSet, Rect};
use crate::weights::Weight;

/// Pairwise summation in input order (deterministic, O(log n) error growth).
pub fn pairwise_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    fn rec(v: &[f64]) -> f64 {
        if v.len() <= 16 {
            return v.iter().sum();
        }
        let (a, b) = v.split_at(v.len() / 2);
        rec(a) + rec(b)
    }
    let v: Vec<f64> = it.into_iter().collect();
    rec(&v)
}

/// A value with a two-sided error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifiedValue {
    pub value: f64,
    pub error_bound: f64,
}

impl CertifiedValue {
    pub fn new(value: f64, error_bound: f64) -> CertifiedValue {
        CertifiedValue { value, error_bound: error_bound.abs() }
    }
    pub fn exact(value: f64) -> CertifiedValue {
        CertifiedValue { value, error_bound: 0.0 }
    }
    pub fn lower(&self) -> f64 {
        self.value - self.error_bound
    }
    pub fn upper(&self) -> f64 {
        self.value + self.error_bound
    }
    pub fn contains(&self, x: f64) -> bool {
        (x - self.value).abs() <= self.error_bound
    }
    pub fn add(self, other: CertifiedValue) -> CertifiedValue {
        CertifiedValue::new(self.value + other.value, self.error_bound + other.error_bound)
    }
    pub fn scale(self, c: f64) -> CertifiedValue {
        CertifiedValue::new(c * self.value, c.abs() * self.error_bound)
    }
    /// `x ↦ x^{1/p}` pushed through the interval endpoints.
    pub fn root(self, p: f64) -> CertifiedValue {
        let v = self.value.max(0.0).powf(1.0 / p);
        let lo = self.lower().max(0.0).powf(1.0 / p);
        let hi = self.upper().max(0.0).powf(1.0 / p);
        CertifiedValue::new(v, (v - lo).max(hi - v))
    }
}

impl std::iter::Sum for CertifiedValue {
    fn sum<I: Iterator<Item = CertifiedValue>>(iter: I) -> CertifiedValue {
        let items: Vec<CertifiedValue> = iter.collect();
        CertifiedValue::new(
            pairwise_sum(items.iter().map(|c| c.value)),
            pairwise_sum(items.iter().map(|c| c.error_bound)),
        )
    }
}

/// Nonnegative step function on ℝ with constant tails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepJson", into = "StepJson")]
pub struct StepFunction1D {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    left_tail: f64,
    right_tail: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepJson {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    #[serde(default)]
    tails: [f64; 2],
}

impl TryFrom<StepJson> for StepFunction1D {
    type Error = Error;
    fn try_from(j: StepJson) -> Result<Self> {
        StepFunction1D::new(j.breakpoints, j.values, j.tails[0], j.tails[1])
    }
}

impl From<StepFunction1D> for StepJson {
    fn from(f: StepFunction1D) -> StepJson {
        StepJson { breakpoints: f.breakpoints, values: f.values, tails: [f.left_tail, f.right_tail] }
    }
}

impl StepFunction1D {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, left_tail: f64, right_tail: f64) -> Result<Self> {
        if breakpoints.is_empty() {
            if !values.is_empty() || left_tail != right_tail {
                return domain("a step function without breakpoints must be constant");
            }
        } else if values.len() + 1 != breakpoints.len() {
            return domain(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                values.len()
            ));
        }
        if breakpoints.iter().any(|x| !x.is_finite()) {
            return domain("breakpoints must be finite");
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return domain("breakpoints must be strictly increasing");
        }
        if values.iter().chain([&left_tail, &right_tail]).any(|v| !v.is_finite() || *v < 0.0) {
            return domain("values must be finite and nonnegative");
        }
        Ok(StepFunction1D { breakpoints, values, left_tail, right_tail })
    }

    pub fn zero() -> Self {
        StepFunction1D::constant(0.0)
    }

    pub fn constant(c: f64) -> Self {
        StepFunction1D { breakpoints: Vec::new(), values: Vec::new(), left_tail: c, right_tail: c }
    }

    /// `height · 1_{[a,b]}`.
    pub fn indicator(a: f64, b: f64, height: f64) -> Result<Self> {
        if !(a < b) {
            return domain("indicator needs a < b");
        }
        StepFunction1D::new(vec![a, b], vec![height], 0.0, 0.0)
    }

    /// Sum of `v · 1_{[a,b]}` over the given (possibly overlapping) pieces.
    pub fn from_pieces(pieces: &[(f64, f64, f64)]) -> Result<Self> {
        let mut pts: Vec<f64> = pieces.iter().flat_map(|(a, b, _)| [*a, *b]).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        if pts.len() < 2 {
            return Ok(StepFunction1D::zero());
        }
        let values = pts
            .windows(2)
            .map(|w| {
                let m = 0.5 * (w[0] + w[1]);
                pieces.iter().filter(|(a, b, _)| *a <= m && m < *b).map(|p| p.2).sum()
            })
            .collect();
        StepFunction1D::new(pts, values, 0.0, 0.0).map(|f| f.simplified())
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn tails(&self) -> (f64, f64) {
        (self.left_tail, self.right_tail)
    }

    pub fn has_zero_tails(&self) -> bool {
        self.left_tail == 0.0 && self.right_tail == 0.0
    }

    /// Constant pieces `(a, b, v)` covering ℝ, tails included with infinite ends.
    pub fn pieces(&self) -> Vec<(f64, f64, f64)> {
        if self.breakpoints.is_empty() {
            return vec![(f64::NEG_INFINITY, f64::INFINITY, self.left_tail)];
        }
        let mut out = Vec::with_capacity(self.values.len() + 2);
        out.push((f64::NEG_INFINITY, self.breakpoints[0], self.left_tail));
        for (i, v) in self.values.iter().enumerate() {
            out.push((self.breakpoints[i], self.breakpoints[i + 1], *v));
        }
        out.push((*self.breakpoints.last().unwrap(), f64::INFINITY, self.right_tail));
        out
    }

    /// Finite pieces with nonzero value.
    pub fn support_pieces(&self) -> Vec<(f64, f64, f64)> {
        self.pieces()
            .into_iter()
            .filter(|(a, b, v)| *v > 0.0 && a.is_finite() && b.is_finite())
            .collect()
    }

    /// Value on the piece containing x (right-continuous at breakpoints).
    pub fn eval(&self, x: f64) -> f64 {
        if self.breakpoints.is_empty() {
            return self.left_tail;
        }
        match self.breakpoints.partition_point(|b| *b <= x) {
            0 => self.left_tail,
            i if i == self.breakpoints.len() => self.right_tail,
            i => self.values[i - 1],
        }
    }

    /// Left limit at x.
    pub fn eval_left(&self, x: f64) -> f64 {
        if self.breakpoints.is_empty() {
            return self.left_tail;
        }
        match self.breakpoints.partition_point(|b| *b < x) {
            0 => self.left_tail,
            i if i == self.breakpoints.len() => self.right_tail,
            i => self.values[i - 1],
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(self.left_tail.max(self.right_tail), |m, v| m.max(*v))
    }

    /// Smallest closed interval outside which f vanishes (None for f ≡ 0 or
    /// nonzero tails).
    pub fn support(&self) -> Option<(f64, f64)> {
        if !self.has_zero_tails() {
            return None;
        }
        let s = self.support_pieces();
        Some((s.first()?.0, s.last()?.1))
    }

    /// Pointwise map `v ↦ g(v)` (g must keep values finite and nonnegative).
    pub fn map(&self, g: impl Fn(f64) -> f64) -> Result<Self> {
        StepFunction1D::new(
            self.breakpoints.clone(),
            self.values.iter().map(|v| g(*v)).collect(),
            g(self.left_tail),
            g(self.right_tail),
        )
    }

    /// `|f|^t`.
    pub fn powf(&self, t: f64) -> Self {
        let g = |v: f64| if v == 0.0 { 0.0 } else { v.powf(t) };
        self.map(g).expect("powers of nonnegative finite values")
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    fn combine(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Self {
        let mut pts: Vec<f64> = self.breakpoints.iter().chain(&other.breakpoints).copied().collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        if pts.is_empty() {
            return StepFunction1D::constant(op(self.left_tail, other.left_tail));
        }
        let values = pts
            .windows(2)
            .map(|w| {
                let m = 0.5 * (w[0] + w[1]);
                op(self.eval(m), other.eval(m))
            })
            .collect();
        StepFunction1D {
            breakpoints: pts,
            values,
            left_tail: op(self.left_tail, other.left_tail),
            right_tail: op(self.right_tail, other.right_tail),
        }
        .simplified()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a * b)
    }

    pub fn max_with(&self, other: &Self) -> Self {
        self.combine(other, f64::max)
    }

    /// `f · 1_{[a,b]}`.
    pub fn restrict(&self, a: f64, b: f64) -> Self {
        match StepFunction1D::indicator(a, b, 1.0) {
            Ok(ind) => self.mul(&ind),
            Err(_) => StepFunction1D::zero(),
        }
    }

    /// `f · 1_{ℝ∖[a,b]}`.
    pub fn remove(&self, a: f64, b: f64) -> Self {
        let hole = StepFunction1D { breakpoints: vec![a, b], values: vec![0.0], left_tail: 1.0, right_tail: 1.0 };
        self.mul(&hole)
    }

    /// `x ↦ f(x - shift)`.
    pub fn translate(&self, shift: f64) -> Self {
        StepFunction1D { breakpoints: self.breakpoints.iter().map(|b| b + shift).collect(), ..self.clone() }
    }

    /// `x ↦ f(x / lambda)` for lambda > 0.
    pub fn dilate(&self, lambda: f64) -> Self {
        StepFunction1D { breakpoints: self.breakpoints.iter().map(|b| b * lambda).collect(), ..self.clone() }
    }

    /// Merges neighbouring pieces carrying equal values.
    pub fn simplified(&self) -> Self {
        let mut merged: Vec<(f64, f64, f64)> = Vec::new();
        for p in self.pieces() {
            if let Some(last) = merged.last_mut() {
                if last.2 == p.2 {
                    last.1 = p.1;
                    continue;
                }
            }
            merged.push(p);
        }
        if merged.len() == 1 {
            return StepFunction1D::constant(merged[0].2);
        }
        let k = merged.len() - 1;
        StepFunction1D {
            breakpoints: merged[1..].iter().map(|p| p.0).collect(),
            values: merged[1..k].iter().map(|p| p.2).collect(),
            left_tail: merged[0].2,
            right_tail: merged[k].2,
        }
    }

    /// ∫_a^b f^t (a may be -∞, b may be +∞).
    pub fn integral_power(&self, t: f64, a: f64, b: f64) -> Result<f64> {
        if !(a <= b) {
            return domain("integration bounds must satisfy a ≤ b");
        }
        let mut terms = Vec::new();
        for (x0, x1, v) in self.pieces() {
            let lo = x0.max(a);
            let hi = x1.min(b);
            if hi <= lo || v == 0.0 {
                continue;
            }
            if !(hi - lo).is_finite() {
                return Err(Error::Infinite("nonzero tail integrated over a half-line".into()));
            }
            terms.push(v.powf(t) * (hi - lo));
        }
        Ok(pairwise_sum(terms))
    }

    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        self.integral_power(1.0, a, b)
    }

    /// ∫_ℝ f.
    pub fn total_integral(&self) -> Result<f64> {
        self.integral(f64::NEG_INFINITY, f64::INFINITY)
    }
}

/// Piecewise-constant data on a uniform grid over a cube, constant outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunctionND {
    cube: Cube,
    cells_per_axis: usize,
    cell_values: Vec<f64>,
    outside_value: f64,
}

impl GridFunctionND {
    pub fn new(cube: Cube, cells_per_axis: usize, cell_values: Vec<f64>, outside_value: f64) -> Result<Self> {
        if cells_per_axis == 0 {
            return domain("grid needs at least one cell per axis");
        }
        let expected = cells_per_axis.pow(cube.dim() as u32);
        if cell_values.len() != expected {
            return domain(format!("grid needs {expected} values, got {}", cell_values.len()));
        }
        if cell_values.iter().chain([&outside_value]).any(|v| !v.is_finite() || *v < 0.0) {
            return domain("grid values must be finite and nonnegative");
        }
        Ok(GridFunctionND { cube, cells_per_axis, cell_values, outside_value })
    }

    /// Samples `g` at cell midpoints.
    pub fn sample(cube: Cube, cells_per_axis: usize, outside_value: f64, g: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let n = cube.dim();
        let h = cube.side() / cells_per_axis as f64;
        let total = cells_per_axis.pow(n as u32);
        let mut vals = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut x = vec![0.0; n];
            for (i, xi) in x.iter_mut().enumerate() {
                let k = rem % cells_per_axis;
                rem /= cells_per_axis;
                *xi = cube.lower()[i] + (k as f64 + 0.5) * h;
            }
            vals.push(g(&x));
        }
        GridFunctionND::new(cube, cells_per_axis, vals, outside_value)
    }

    pub fn dim(&self) -> usize {
        self.cube.dim()
    }
    pub fn cube(&self) -> &Cube {
        &self.cube
    }
    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }
    pub fn cell_values(&self) -> &[f64] {
        &self.cell_values
    }
    pub fn outside_value(&self) -> f64 {
        self.outside_value
    }
    pub fn max_value(&self) -> f64 {
        self.cell_values.iter().fold(self.outside_value, |m, v| m.max(*v))
    }

    fn cell_width(&self) -> f64 {
        self.cube.side() / self.cells_per_axis as f64
    }

    /// Cells as (box, value).
    pub fn cells(&self) -> Vec<(Rect, f64)> {
        let n = self.dim();
        let h = self.cell_width();
        self.cell_values
            .iter()
            .enumerate()
            .map(|(flat, v)| {
                let mut rem = flat;
                let mut lo = vec![0.0; n];
                for (i, l) in lo.iter_mut().enumerate() {
                    let k = rem % self.cells_per_axis;
                    rem /= self.cells_per_axis;
                    *l = self.cube.lower()[i] + k as f64 * h;
                }
                let hi = lo.iter().map(|l| l + h).collect();
                (Rect { lo, hi }, *v)
            })
            .collect()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        if !self.cube.contains_point(x) {
            return self.outside_value;
        }
        let h = self.cell_width();
        let mut flat = 0;
        let mut stride = 1;
        for (i, xi) in x.iter().enumerate() {
            let k = (((xi - self.cube.lower()[i]) / h).floor() as usize).min(self.cells_per_axis - 1);
            flat += k * stride;
            stride *= self.cells_per_axis;
        }
        self.cell_values[flat]
    }

    /// ∫_r f^t over a box r (unbounded r allowed when the outside value is 0).
    pub fn integral_power(&self, t: f64, r: &Rect) -> Result<f64> {
        let inside_box = self.cube.to_rect();
        let mut terms = Vec::new();
        for (cell, v) in self.cells() {
            if v > 0.0 {
                terms.push(v.powf(t) * cell.overlap(r));
            }
        }
        if self.outside_value > 0.0 {
            let outside = r.volume() - inside_box.overlap(r);
            if !outside.is_finite() {
                return Err(Error::Infinite("nonzero outside value over an unbounded region".into()));
            }
            terms.push(self.outside_value.powf(t) * outside);
        }
        Ok(pairwise_sum(terms))
    }
}

/// Piecewise-constant integrands usable by the exact integrals below.
pub trait PiecewiseConstant {
    fn dim(&self) -> usize;
    /// ∫_r |f|^t.
    fn integral_power(&self, t: f64, r: &Rect) -> Result<f64>;
    /// Constant pieces `(box, value)` covering the nonzero part, plus the
    /// constant taken on the rest of space.
    fn level_pieces(&self) -> (Vec<(Rect, f64)>, f64);
}

impl PiecewiseConstant for StepFunction1D {
    fn dim(&self) -> usize {
        1
    }
    fn integral_power(&self, t: f64, r: &Rect) -> Result<f64> {
        StepFunction1D::integral_power(self, t, r.lo[0], r.hi[0])
    }
    fn level_pieces(&self) -> (Vec<(Rect, f64)>, f64) {
        let mut rest = 0.0;
        let mut out = Vec::new();
        for (a, b, v) in self.pieces() {
            out.push((Rect::interval(a, b), v));
            if !a.is_finite() || !b.is_finite() {
                rest = f64::max(rest, v);
            }
        }
        (out, rest)
    }
}

impl PiecewiseConstant for GridFunctionND {
    fn dim(&self) -> usize {
        self.cube.dim()
    }
    fn integral_power(&self, t: f64, r: &Rect) -> Result<f64> {
        GridFunctionND::integral_power(self, t, r)
    }
    fn level_pieces(&self) -> (Vec<(Rect, f64)>, f64) {
        (self.cells(), self.outside_value)
    }
}

/// Integration domains: anything decomposable into disjoint boxes.
pub trait Region {
    fn rects(&self) -> Vec<Rect>;
}

impl Region for Cube {
    fn rects(&self) -> Vec<Rect> {
        vec![self.to_rect()]
    }
}
impl Region for OpenSet {
    fn rects(&self) -> Vec<Rect> {
        self.boxes().to_vec()
    }
}
impl Region for Rect {
    fn rects(&self) -> Vec<Rect> {
        vec![self.clone()]
    }
}

/// Exact ∫_E f.
pub fn integrate<F: PiecewiseConstant, E: Region>(f: &F, e: &E) -> Result<f64> {
    let parts: Vec<f64> = e.rects().iter().map(|r| f.integral_power(1.0, r)).collect::<Result<_>>()?;
    Ok(pairwise_sum(parts))
}

/// Power average `(|Q|^{-1} ∫_Q |f|^t)^{1/t}` for t ≥ 1.
pub fn average<F: PiecewiseConstant>(f: &F, q: &Cube, t: f64) -> Result<f64> {
    if !(t >= 1.0) {
        return domain(format!("power averages need t ≥ 1, got {t}"));
    }
    let s = f.integral_power(t, &q.to_rect())?;
    Ok((s / q.volume()).powf(1.0 / t))
}

/// `(∫ |f|^p w)^{1/p}` for p > 0.
pub fn lp_quasinorm<F: PiecewiseConstant>(f: &F, p: f64, w: &Weight) -> Result<CertifiedValue> {
    Ok(lp_power(f, p, w)?.root(p))
}

/// `∫ |f|^p w`.
pub fn lp_power<F: PiecewiseConstant>(f: &F, p: f64, w: &Weight) -> Result<CertifiedValue> {
    if !(p > 0.0) {
        return domain(format!("quasi-norm exponent must be positive, got {p}"));
    }
    if f.dim() != w.dim() {
        return domain("function and weight dimensions differ");
    }
    let (pieces, _) = f.level_pieces();
    let mut parts = Vec::new();
    for (r, v) in pieces {
        if v == 0.0 {
            continue;
        }
        parts.push(w.mass(&r)?.scale(v.powf(p)));
    }
    Ok(parts.into_iter().sum())
}

/// `p ∫_0^∞ t^{p-1} w({|f| > t}) dt`, evaluated level by level at the values of f.
pub fn layer_cake_norm<F: PiecewiseConstant>(f: &F, p: f64, w: &Weight) -> Result<CertifiedValue> {
    if !(p > 0.0) {
        return domain(format!("layer-cake exponent must be positive, got {p}"));
    }
    let (pieces, _) = f.level_pieces();
    let mut levels: Vec<f64> = pieces.iter().map(|(_, v)| *v).filter(|v| *v > 0.0).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut parts = Vec::new();
    let mut prev = 0.0;
    for lv in levels {
        // {f > t} for t in [prev, lv) is {f ≥ lv}
        let mut mass = CertifiedValue::exact(0.0);
        for (r, v) in &pieces {
            if *v >= lv {
                mass = mass.add(w.mass(r)?);
            }
        }
        parts.push(mass.scale(lv.powf(p) - f64::powf(prev, p)));
        prev = lv;
    }
    Ok(parts.into_iter().sum())
}
