//! Brute-force references used to check the exact routines.

use crate::geometry::Cube;

/// `M1_{[a,b]}(x)` by enumerating intervals with endpoints in `{a, b, x}`.
pub fn m_indicator_candidates(a: f64, b: f64, x: f64) -> f64 {
    let pts = [a, b, x];
    let mut best: f64 = 0.0;
    for &u in &pts {
        for &v in &pts {
            if u < v && u <= x && x <= v {
                let ov = (v.min(b) - u.max(a)).max(0.0);
                best = best.max(ov / (v - u));
            }
        }
    }
    if a <= x && x <= b {
        best = 1.0;
    }
    best
}

/// `M1_Q(x)` by scanning cubes containing x: `sides` side lengths up to
/// `max_side`, and `offsets + 1` positions of x per axis.
pub fn m_indicator_grid(q: &Cube, x: &[f64], sides: usize, offsets: usize, max_side: f64) -> f64 {
    let n = q.dim();
    let total = (offsets + 1).pow(n as u32);
    let mut best: f64 = 0.0;
    for i in 1..=sides {
        let s = max_side * i as f64 / sides as f64;
        for code in 0..total {
            let mut c = code;
            let mut ov = 1.0;
            for a in 0..n {
                let j = c % (offsets + 1);
                c /= offsets + 1;
                let lo = x[a] - s * j as f64 / offsets as f64;
                ov *= (q.upper(a).min(lo + s) - q.lower()[a].max(lo)).max(0.0);
            }
            best = best.max(ov / s.powi(n as i32));
        }
    }
    best
}

/// `(1/π)·p.v.∫` reference for the Hilbert transform.
pub use crate::singular::hilbert_quadrature;

/// Sharp two-sided window for `p·Σ_k 2^{kp} w({h > 2^k})` relative to `‖h‖^p`.
pub fn dyadic_layer_cake_window(p: f64) -> (f64, f64) {
    let d = p.exp2() - 1.0;
    (p / d, p * p.exp2() / d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidates_examples() {
        assert_eq!(m_indicator_candidates(0.0, 1.0, 0.5), 1.0);
        assert!((m_indicator_candidates(0.0, 1.0, 3.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((m_indicator_candidates(0.0, 1.0, -1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn grid_anchor_2d() {
        let q = Cube::new(vec![0.0, 0.0], 1.0).unwrap();
        let v = m_indicator_grid(&q, &[2.0, 0.5], 40, 40, 4.0);
        assert!((v - 0.25).abs() < 1e-12, "{v}");
    }

    #[test]
    fn window_is_ordered() {
        for p in [0.5, 1.0, 2.0, 3.0] {
            let (a, b) = dyadic_layer_cake_window(p);
            assert!(a < b && (b / a - p.exp2()).abs() < 1e-12);
        }
    }
}
