//! Axis-aligned cubes, the dyadic lattice, finite unions of boxes and the
//! Whitney decomposition.

use crate::error::{domain, Error, Result};

/// Axis-aligned cube `lower + [0, side)^dim`; serializes as `[lower…, side]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(into = "Vec<f64>", try_from = "Vec<f64>")]
pub struct Cube {
    lower: Vec<f64>,
    side: f64,
}

impl From<Cube> for Vec<f64> {
    fn from(q: Cube) -> Vec<f64> {
        q.to_array()
    }
}

impl TryFrom<Vec<f64>> for Cube {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Cube> {
        Cube::from_array(&v)
    }
}

impl Cube {
    pub fn new(lower: Vec<f64>, side: f64) -> Result<Cube> {
        if lower.is_empty() {
            return domain("cube dimension must be positive");
        }
        if !(side > 0.0) || !side.is_finite() {
            return domain(format!("cube side must be positive and finite, got {side}"));
        }
        if lower.iter().any(|x| !x.is_finite()) {
            return domain("cube corner must be finite");
        }
        Ok(Cube { lower, side })
    }

    /// The interval [a, b) as a one-dimensional cube.
    pub fn interval(a: f64, b: f64) -> Result<Cube> {
        Cube::new(vec![a], b - a)
    }

    pub fn from_center(center: &[f64], side: f64) -> Result<Cube> {
        Cube::new(center.iter().map(|c| c - 0.5 * side).collect(), side)
    }

    /// Parses the `[lower…, side]` array form.
    pub fn from_array(values: &[f64]) -> Result<Cube> {
        if values.len() < 2 {
            return domain("cube array needs at least one coordinate and a side");
        }
        let (lower, side) = values.split_at(values.len() - 1);
        Cube::new(lower.to_vec(), side[0])
    }

    pub fn to_array(&self) -> Vec<f64> {
        let mut v = self.lower.clone();
        v.push(self.side);
        v
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }
    pub fn side(&self) -> f64 {
        self.side
    }
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }
    pub fn upper(&self, axis: usize) -> f64 {
        self.lower[axis] + self.side
    }
    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().map(|x| x + 0.5 * self.side).collect()
    }
    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim() as i32)
    }
    pub fn diam(&self) -> f64 {
        self.side * (self.dim() as f64).sqrt()
    }

    /// 1D endpoints (lo, hi).
    pub fn endpoints(&self) -> (f64, f64) {
        (self.lower[0], self.lower[0] + self.side)
    }

    pub fn to_rect(&self) -> Rect {
        Rect {
            lo: self.lower.clone(),
            hi: self.lower.iter().map(|x| x + self.side).collect(),
        }
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.lower)
            .all(|(xi, lo)| *xi >= *lo && *xi < lo + self.side)
    }

    /// Per-axis distance from `x` to the closed projection of the cube.
    pub fn axis_distances(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.lower)
            .map(|(xi, lo)| (lo - xi).max(xi - (lo + self.side)).max(0.0))
            .collect()
    }

    pub fn contains_cube(&self, other: &Cube) -> bool {
        self.to_rect().contains_rect(&other.to_rect())
    }

    /// Concentric dilation by `gamma`.
    pub fn dilate(&self, gamma: f64) -> Result<Cube> {
        dilate(self, gamma)
    }

    pub fn translate(&self, shift: &[f64]) -> Result<Cube> {
        Cube::new(self.lower.iter().zip(shift).map(|(a, b)| a + b).collect(), self.side)
    }
}

/// Concentric dilation: side `gamma·ℓ(Q)`, same center.
pub fn dilate(q: &Cube, gamma: f64) -> Result<Cube> {
    if !(gamma > 0.0) {
        return domain(format!("dilation factor must be positive, got {gamma}"));
    }
    if gamma == 1.0 {
        return Ok(q.clone());
    }
    let side = gamma * q.side;
    let shift = 0.5 * (side - q.side);
    Cube::new(q.lower.iter().map(|x| x - shift).collect(), side)
}

/// Half-open axis-aligned box `[lo, hi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rect {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Rect {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Rect> {
        if lo.len() != hi.len() || lo.is_empty() {
            return domain("box corners must have equal positive dimension");
        }
        if lo.iter().chain(&hi).any(|x| x.is_nan()) {
            return domain("box corners must not be NaN");
        }
        Ok(Rect { lo, hi })
    }

    pub fn interval(a: f64, b: f64) -> Rect {
        Rect { lo: vec![a], hi: vec![b] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(a, b)| b <= a)
    }

    pub fn volume(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn intersect(&self, other: &Rect) -> Rect {
        Rect {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect(),
        }
    }

    pub fn overlap(&self, other: &Rect) -> f64 {
        self.intersect(other).volume()
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.lo.iter().zip(&other.lo).all(|(a, b)| a <= b) && self.hi.iter().zip(&other.hi).all(|(a, b)| a >= b)
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (a, b))| *x >= *a && *x < *b)
    }

    /// Euclidean distance between the closures of two boxes.
    pub fn distance(&self, other: &Rect) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim() {
            let gap = (self.lo[i] - other.hi[i]).max(other.lo[i] - self.hi[i]).max(0.0);
            s += gap * gap;
        }
        s.sqrt()
    }
}

/// Dyadic cube `2^{-k}([0,1)^dim + z)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCube {
    pub generation: i32,
    pub index: Vec<i64>,
}

impl DyadicCube {
    pub fn new(generation: i32, index: Vec<i64>) -> DyadicCube {
        DyadicCube { generation, index }
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn side(&self) -> f64 {
        2f64.powi(-self.generation)
    }

    pub fn to_cube(&self) -> Cube {
        let s = self.side();
        Cube {
            lower: self.index.iter().map(|z| *z as f64 * s).collect(),
            side: s,
        }
    }

    pub fn parent(&self) -> DyadicCube {
        DyadicCube {
            generation: self.generation - 1,
            index: self.index.iter().map(|z| z.div_euclid(2)).collect(),
        }
    }

    pub fn children(&self) -> Vec<DyadicCube> {
        let n = self.dim();
        (0..(1usize << n))
            .map(|mask| DyadicCube {
                generation: self.generation + 1,
                index: (0..n).map(|i| 2 * self.index[i] + ((mask >> i) & 1) as i64).collect(),
            })
            .collect()
    }

    /// Ancestor at generation `g ≤ self.generation`.
    pub fn ancestor(&self, g: i32) -> DyadicCube {
        let shift = (self.generation - g) as u32;
        DyadicCube {
            generation: g,
            index: self.index.iter().map(|z| z.div_euclid(1i64 << shift)).collect(),
        }
    }

    pub fn contains(&self, other: &DyadicCube) -> bool {
        other.generation >= self.generation && other.ancestor(self.generation) == *self
    }

    /// The dyadic cube of generation `k` containing the point `x`.
    pub fn containing(x: &[f64], k: i32) -> DyadicCube {
        let s = 2f64.powi(-k);
        DyadicCube {
            generation: k,
            index: x.iter().map(|xi| (xi / s).floor() as i64).collect(),
        }
    }
}

/// Smallest generation whose cells have side at least `side`, i.e. the
/// exponent `k` with `2^{-k} ≥ side > 2^{-k-1}`.
pub fn generation_for_side(side: f64) -> i32 {
    let mut e = side.log2().ceil() as i32;
    while 2f64.powi(e) < side {
        e += 1;
    }
    while 2f64.powi(e - 1) >= side {
        e -= 1;
    }
    -e
}

/// Dyadic cells of the smallest generation with side ≥ ℓ(Q) meeting Q.
pub fn dyadic_cover(q: &Cube) -> Vec<DyadicCube> {
    let k = generation_for_side(q.side());
    let s = 2f64.powi(-k);
    let ranges: Vec<(i64, i64)> = (0..q.dim())
        .map(|i| {
            let lo = q.lower()[i];
            let i0 = (lo / s).floor() as i64;
            let i1 = ((lo + q.side()) / s).ceil() as i64 - 1;
            (i0, i1.max(i0))
        })
        .collect();
    let mut out = vec![Vec::new()];
    for (i0, i1) in ranges {
        let mut next = Vec::new();
        for prefix in &out {
            for z in i0..=i1 {
                let mut v: Vec<i64> = prefix.clone();
                v.push(z);
                next.push(v);
            }
        }
        out = next;
    }
    out.into_iter().map(|index| DyadicCube::new(k, index)).collect()
}

/// Smallest concentric dilation factor α with `∪ cells ⊆ αQ`.
pub fn cover_dilation(q: &Cube, cells: &[DyadicCube]) -> f64 {
    let c = q.center();
    let mut half: f64 = 0.5 * q.side();
    for cell in cells {
        let r = cell.to_cube().to_rect();
        for i in 0..q.dim() {
            half = half.max((r.hi[i] - c[i]).abs()).max((c[i] - r.lo[i]).abs());
        }
    }
    2.0 * half / q.side()
}

/// Finite union of half-open boxes, stored as pairwise-disjoint boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenSet {
    dim: usize,
    boxes: Vec<Rect>,
}

impl OpenSet {
    pub fn empty(dim: usize) -> OpenSet {
        OpenSet { dim, boxes: Vec::new() }
    }

    /// Builds the normalized union of `boxes` (empty boxes are dropped).
    pub fn new(dim: usize, boxes: Vec<Rect>) -> Result<OpenSet> {
        if dim == 0 {
            return domain("open set dimension must be positive");
        }
        for b in &boxes {
            if b.dim() != dim {
                return domain("box dimension mismatch");
            }
            if b.lo.iter().chain(&b.hi).any(|x| !x.is_finite()) {
                return domain("open sets must be bounded");
            }
        }
        let boxes: Vec<Rect> = boxes.into_iter().filter(|b| !b.is_empty()).collect();
        Ok(OpenSet { dim, boxes: normalize(dim, boxes) })
    }

    /// Union of open intervals (a_i, b_i).
    pub fn intervals(pairs: &[(f64, f64)]) -> Result<OpenSet> {
        OpenSet::new(1, pairs.iter().map(|(a, b)| Rect::interval(*a, *b)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn boxes(&self) -> &[Rect] {
        &self.boxes
    }
    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    /// 1D components as (a, b) pairs in increasing order.
    pub fn components_1d(&self) -> Vec<(f64, f64)> {
        self.boxes.iter().map(|b| (b.lo[0], b.hi[0])).collect()
    }

    pub fn measure(&self) -> f64 {
        crate::calculus::pairwise_sum(self.boxes.iter().map(Rect::volume))
    }

    pub fn overlap(&self, r: &Rect) -> f64 {
        crate::calculus::pairwise_sum(self.boxes.iter().map(|b| b.overlap(r)))
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.boxes.iter().any(|b| b.contains_point(x))
    }

    pub fn bounding_rect(&self) -> Option<Rect> {
        let first = self.boxes.first()?;
        let mut lo = first.lo.clone();
        let mut hi = first.hi.clone();
        for b in &self.boxes[1..] {
            for i in 0..self.dim {
                lo[i] = lo[i].min(b.lo[i]);
                hi[i] = hi[i].max(b.hi[i]);
            }
        }
        Some(Rect { lo, hi })
    }

    /// Euclidean distance from the closure of `r` to the complement of the set.
    /// Zero when `r` is not contained in the set.
    pub fn dist_to_complement(&self, r: &Rect) -> f64 {
        if self.dim == 1 {
            return self.dist_via(&[], r);
        }
        self.dist_via(&self.complement_cells(), r)
    }

    /// As [`OpenSet::dist_to_complement`] with precomputed complement cells.
    fn dist_via(&self, comp: &[Rect], r: &Rect) -> f64 {
        if self.dim == 1 {
            let (a, b) = (r.lo[0], r.hi[0]);
            for bx in &self.boxes {
                if bx.lo[0] <= a && b <= bx.hi[0] {
                    return (a - bx.lo[0]).min(bx.hi[0] - b).max(0.0);
                }
            }
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for cell in comp {
            best = best.min(cell.distance(r));
            if best == 0.0 {
                break;
            }
        }
        best
    }

    /// Boxes (possibly unbounded) whose union is the complement.
    fn complement_cells(&self) -> Vec<Rect> {
        let coords = axis_coordinates(self.dim, &self.boxes, true);
        let mut out = Vec::new();
        for_each_cell(&coords, &mut |cell: Rect| {
            let mid: Vec<f64> = cell
                .lo
                .iter()
                .zip(&cell.hi)
                .map(|(a, b)| cell_probe(*a, *b))
                .collect();
            if !self.boxes.iter().any(|b| b.contains_point(&mid)) {
                out.push(cell);
            }
        });
        out
    }

    /// Serializes as a list of `[lo…, hi…]` arrays.
    pub fn to_arrays(&self) -> Vec<Vec<f64>> {
        self.boxes
            .iter()
            .map(|b| b.lo.iter().chain(&b.hi).copied().collect())
            .collect()
    }

    pub fn from_arrays(dim: usize, arrays: &[Vec<f64>]) -> Result<OpenSet> {
        let mut boxes = Vec::new();
        for a in arrays {
            if a.len() != 2 * dim {
                return domain(format!("box array must have {} entries", 2 * dim));
            }
            boxes.push(Rect::new(a[..dim].to_vec(), a[dim..].to_vec())?);
        }
        OpenSet::new(dim, boxes)
    }
}

impl serde::Serialize for OpenSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_arrays().serialize(s)
    }
}

fn cell_probe(a: f64, b: f64) -> f64 {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => 0.5 * (a + b),
        (true, false) => a + 1.0,
        (false, true) => b - 1.0,
        (false, false) => 0.0,
    }
}

fn axis_coordinates(dim: usize, boxes: &[Rect], unbounded: bool) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|i| {
            let mut c: Vec<f64> = boxes.iter().flat_map(|b| [b.lo[i], b.hi[i]]).collect();
            if unbounded {
                c.push(f64::NEG_INFINITY);
                c.push(f64::INFINITY);
            }
            c.sort_by(f64::total_cmp);
            c.dedup();
            c
        })
        .collect()
}

fn for_each_cell(coords: &[Vec<f64>], f: &mut dyn FnMut(Rect)) {
    let dim = coords.len();
    let counts: Vec<usize> = coords.iter().map(|c| c.len().saturating_sub(1)).collect();
    if counts.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; dim];
    loop {
        let lo = (0..dim).map(|i| coords[i][idx[i]]).collect();
        let hi = (0..dim).map(|i| coords[i][idx[i] + 1]).collect();
        f(Rect { lo, hi });
        let mut axis = 0;
        loop {
            idx[axis] += 1;
            if idx[axis] < counts[axis] {
                break;
            }
            idx[axis] = 0;
            axis += 1;
            if axis == dim {
                return;
            }
        }
    }
}

fn normalize(dim: usize, boxes: Vec<Rect>) -> Vec<Rect> {
    if boxes.is_empty() {
        return boxes;
    }
    if dim == 1 {
        let mut iv: Vec<(f64, f64)> = boxes.iter().map(|b| (b.lo[0], b.hi[0])).collect();
        iv.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (a, b) in iv {
            match out.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        return out.into_iter().map(|(a, b)| Rect::interval(a, b)).collect();
    }
    // coordinate compression, then merge runs of covered cells along axis 0
    let coords = axis_coordinates(dim, &boxes, false);
    let mut cells: Vec<Rect> = Vec::new();
    for_each_cell(&coords, &mut |cell: Rect| {
        let mid: Vec<f64> = cell.lo.iter().zip(&cell.hi).map(|(a, b)| 0.5 * (a + b)).collect();
        if boxes.iter().any(|b| b.contains_point(&mid)) {
            cells.push(cell);
        }
    });
    let mut out: Vec<Rect> = Vec::new();
    for cell in cells {
        if let Some(last) = out.last_mut() {
            if last.hi[0] == cell.lo[0] && last.lo[1..] == cell.lo[1..] && last.hi[1..] == cell.hi[1..] {
                last.hi[0] = cell.hi[0];
                continue;
            }
        }
        out.push(cell);
    }
    out
}

/// Limits of the Whitney construction.
#[derive(Debug, Clone, Copy)]
pub struct WhitneyOptions {
    /// Cubes smaller than this side are not refined further.
    pub min_side: f64,
    /// Upper bound on the size of one refinement generation.
    pub max_frontier: usize,
}

impl Default for WhitneyOptions {
    fn default() -> Self {
        WhitneyOptions { min_side: 2f64.powi(-48), max_frontier: 200_000 }
    }
}

/// Whitney cubes of Ω: maximal dyadic cubes Q with `5R·diam(Q) ≤ dist(Q, Ω^c)`.
///
/// The family is infinite near ∂Ω; refinement stops at `opts.min_side`, and the
/// uncovered measure is reported by [`validate_whitney`].
pub fn whitney(omega: &OpenSet, r: f64) -> Result<Vec<Cube>> {
    whitney_with(omega, r, WhitneyOptions::default())
}

pub fn whitney_with(omega: &OpenSet, r: f64, opts: WhitneyOptions) -> Result<Vec<Cube>> {
    if !(r >= 1.0) {
        return domain(format!("Whitney parameter R must be at least 1, got {r}"));
    }
    let bbox = match omega.bounding_rect() {
        Some(b) => b,
        None => return Ok(Vec::new()),
    };
    let extent = bbox.lo.iter().zip(&bbox.hi).map(|(a, b)| b - a).fold(0.0, f64::max);
    let top = generation_for_side(extent);
    let s = 2f64.powi(-top);
    let n = omega.dim();
    // cells of generation `top` meeting the bounding box
    let mut frontier = Vec::new();
    let ranges: Vec<(i64, i64)> = (0..n)
        .map(|i| ((bbox.lo[i] / s).floor() as i64, (bbox.hi[i] / s).ceil() as i64 - 1))
        .collect();
    let mut idx: Vec<Vec<i64>> = vec![Vec::new()];
    for (a, b) in ranges {
        let mut next = Vec::new();
        for p in &idx {
            for z in a..=b {
                let mut v = p.clone();
                v.push(z);
                next.push(v);
            }
        }
        idx = next;
    }
    for z in idx {
        frontier.push(DyadicCube::new(top, z));
    }
    let comp = if n == 1 { Vec::new() } else { omega.complement_cells() };
    let mut out = Vec::new();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for d in frontier {
            let cube = d.to_cube();
            let rect = cube.to_rect();
            if omega.overlap(&rect) <= 0.0 {
                continue;
            }
            let dist = omega.dist_via(&comp, &rect);
            if 5.0 * r * cube.diam() <= dist {
                out.push(cube);
            } else if cube.side() * 0.5 >= opts.min_side {
                next.extend(d.children());
            }
        }
        if next.len() > opts.max_frontier {
            break;
        }
        frontier = next;
    }
    out.sort_by(|a, b| a.lower().partial_cmp(b.lower()).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}

/// Outcome of checking the three Whitney properties.
#[derive(Debug, Clone, serde::Serialize)]
pub struct WhitneyReport {
    pub cubes: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub ratio_ok: bool,
    pub disjoint: bool,
    pub coverage_error: f64,
    pub max_overlap: usize,
    pub dilates_inside: bool,
}

impl WhitneyReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.ratio_ok && self.disjoint && self.coverage_error <= tol && self.dilates_inside
    }
}

/// Checks the window `5R ≤ dist/diam ≤ 15R`, disjointness, coverage and the
/// overlap of the dilates `R·Q_j`.
pub fn validate_whitney(omega: &OpenSet, r: f64, cubes: &[Cube]) -> Result<WhitneyReport> {
    let comp = if omega.dim() == 1 { Vec::new() } else { omega.complement_cells() };
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio: f64 = 0.0;
    let mut ratio_ok = true;
    for q in cubes {
        let d = omega.dist_via(&comp, &q.to_rect());
        let diam = q.diam();
        min_ratio = min_ratio.min(d / diam);
        max_ratio = max_ratio.max(d / diam);
        if !(5.0 * r * diam <= d && d <= 15.0 * r * diam) {
            ratio_ok = false;
        }
    }
    let covered = crate::calculus::pairwise_sum(cubes.iter().map(Cube::volume));
    let disjoint = pairwise_disjoint(cubes);
    let coverage_error = (omega.measure() - covered).abs();
    let dilates: Vec<Rect> = cubes
        .iter()
        .map(|q| dilate(q, r).map(|c| c.to_rect()))
        .collect::<Result<_>>()?;
    let dilates_inside = dilates.iter().all(|b| omega.dist_via(&comp, b) > 0.0 || b.is_empty());
    let max_overlap = max_overlap(omega.dim(), &dilates);
    if cubes.is_empty() {
        min_ratio = 0.0;
    }
    Ok(WhitneyReport {
        cubes: cubes.len(),
        min_ratio,
        max_ratio,
        ratio_ok,
        disjoint,
        coverage_error,
        max_overlap,
        dilates_inside,
    })
}

fn pairwise_disjoint(cubes: &[Cube]) -> bool {
    if cubes.first().map(Cube::dim) == Some(1) {
        let mut iv: Vec<(f64, f64)> = cubes.iter().map(Cube::endpoints).collect();
        iv.sort_by(|a, b| a.0.total_cmp(&b.0));
        return iv.windows(2).all(|w| w[0].1 <= w[1].0);
    }
    let rects: Vec<Rect> = cubes.iter().map(Cube::to_rect).collect();
    let mut disjoint = true;
    overlapping_pairs(&rects, &mut |_, _| disjoint = false);
    disjoint
}

/// Calls `f(i, j)` for every pair of boxes with overlap of positive measure,
/// sweeping along the first axis.
fn overlapping_pairs(boxes: &[Rect], f: &mut dyn FnMut(usize, usize)) {
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by(|a, b| boxes[*a].lo[0].total_cmp(&boxes[*b].lo[0]));
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[pos + 1..] {
            if boxes[j].lo[0] >= boxes[i].hi[0] {
                break;
            }
            if boxes[i].overlap(&boxes[j]) > 0.0 {
                f(i, j);
            }
        }
    }
}

/// Maximum number of boxes covering a single point. Exact in 1D (sweep);
/// in higher dimensions evaluated at every lower corner and at the pairwise
/// corner maxima, which is exact for families whose cliques are generated by
/// pairs (the usual Whitney situation) and a lower bound in general.
pub fn max_overlap(dim: usize, boxes: &[Rect]) -> usize {
    if boxes.is_empty() {
        return 0;
    }
    if dim == 1 {
        let mut ev: Vec<(f64, i32)> = Vec::new();
        for b in boxes {
            if b.is_empty() {
                continue;
            }
            ev.push((b.lo[0], 1));
            ev.push((b.hi[0], -1));
        }
        // half-open boxes: process closings before openings at equal coordinates
        ev.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut cur = 0i32;
        let mut best = 0i32;
        for (_, d) in ev {
            cur += d;
            best = best.max(cur);
        }
        return best as usize;
    }
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by(|a, b| boxes[*a].lo[0].total_cmp(&boxes[*b].lo[0]));
    let los: Vec<f64> = order.iter().map(|i| boxes[*i].lo[0]).collect();
    let count = |p: &[f64]| {
        let end = los.partition_point(|x| *x <= p[0]);
        order[..end].iter().filter(|i| boxes[**i].contains_point(p)).count()
    };
    let mut best = 0;
    for a in boxes {
        best = best.max(count(&a.lo));
    }
    overlapping_pairs(boxes, &mut |i, j| {
        let p: Vec<f64> = boxes[i].lo.iter().zip(&boxes[j].lo).map(|(x, y)| x.max(*y)).collect();
        best = best.max(count(&p));
    });
    best
}

impl From<Cube> for Rect {
    fn from(c: Cube) -> Rect {
        c.to_rect()
    }
}

impl TryFrom<&Rect> for Cube {
    type Error = Error;
    fn try_from(r: &Rect) -> Result<Cube> {
        let side = r.hi[0] - r.lo[0];
        if r.lo.iter().zip(&r.hi).any(|(a, b)| ((b - a) - side).abs() > 1e-12 * side.abs().max(1.0)) {
            return domain("box is not a cube");
        }
        Cube::new(r.lo.clone(), side)
    }
}
