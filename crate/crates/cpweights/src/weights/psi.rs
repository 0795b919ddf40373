//! Profiles ψ for the C_ψ condition, φ_p and the two limit functionals.

use std::fmt;
use std::sync::Arc;

use crate::calculus::{quad, CertifiedValue};
use crate::error::{domain, Result};

/// `φ_p(t) = t^p / log²(1 + 1/t)` on (0, 1], `φ_p(0) = 0`, `φ_p(1)` for t > 1.
pub fn phi_p(t: f64, p: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let t = t.min(1.0);
    let l = (1.0 / t).ln_1p();
    t.powf(p) / (l * l)
}

#[derive(Clone)]
pub enum PsiFunction {
    Power(f64),
    PhiP(f64),
    /// `ψ ≤ constant·t^exponent` on (0, 1] is part of the contract.
    Custom {
        label: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        exponent: f64,
        constant: f64,
    },
}

impl fmt::Debug for PsiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsiFunction::Power(p) => write!(f, "Power({p})"),
            PsiFunction::PhiP(p) => write!(f, "PhiP({p})"),
            PsiFunction::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

impl PsiFunction {
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match self {
            PsiFunction::Power(p) => t.powf(*p),
            PsiFunction::PhiP(p) => phi_p(t, *p),
            PsiFunction::Custom { f, .. } => f(t),
        }
    }

    /// q with `ψ(t) ≤ c·t^q` near 0.
    pub fn exponent(&self) -> f64 {
        match self {
            PsiFunction::Power(p) | PsiFunction::PhiP(p) => *p,
            PsiFunction::Custom { exponent, .. } => *exponent,
        }
    }

    /// c with `ψ(t) ≤ c·t^q` on (0, 1].
    pub fn constant(&self) -> f64 {
        match self {
            PsiFunction::Power(_) => 1.0,
            PsiFunction::PhiP(_) => 1.0 / (2f64.ln().powi(2)),
            PsiFunction::Custom { constant, .. } => *constant,
        }
    }

    /// Checks ψ ≥ 0, monotonicity on a grid, and the growth contract.
    pub fn validate(&self) -> Result<()> {
        let q = self.exponent();
        if !(q > 0.0) {
            return domain("ψ exponent must be positive");
        }
        if let PsiFunction::Custom { .. } = self {
            let mut prev = 0.0;
            for i in 1..=4096 {
                let t = i as f64 / 4096.0;
                let v = self.eval(t);
                if !(v >= prev) || v > self.constant() * t.powf(q) * (1.0 + 1e-12) {
                    return domain(format!("custom ψ violates monotonicity or its growth bound near t = {t}"));
                }
                prev = v;
            }
        }
        Ok(())
    }

    /// `∫_{d0}^{d1} ψ(ℓ/(ℓ+d)) dd` for `0 ≤ d0 ≤ d1 ≤ ∞`.
    pub fn distance_integral(&self, l: f64, d0: f64, d1: f64) -> CertifiedValue {
        if d1 <= d0 {
            return CertifiedValue::exact(0.0);
        }
        let q = self.exponent();
        if let PsiFunction::Power(p) = self {
            let p = *p;
            let v = if (p - 1.0).abs() < 1e-15 {
                l * ((l + d1) / (l + d0)).ln()
            } else {
                let tail = if d1.is_finite() { (l + d1).powf(1.0 - p) } else { 0.0 };
                l.powf(p) * ((l + d0).powf(1.0 - p) - tail) / (p - 1.0)
            };
            return CertifiedValue::exact(v);
        }
        if !(q > 1.0) {
            return CertifiedValue::new(f64::INFINITY, 0.0);
        }
        // t = ℓ/(ℓ+d), u = t^{q-1}: the integral becomes ℓ/(q-1) ∫ ψ(t)/t^q du
        let u = |d: f64| if d.is_finite() { (l / (l + d)).powf(q - 1.0) } else { 0.0 };
        let (u1, u0) = (u(d1), u(d0));
        let g = |uu: f64| {
            if uu <= 0.0 {
                return self.limit_ratio();
            }
            let t = uu.powf(1.0 / (q - 1.0));
            self.eval(t) / t.powf(q)
        };
        let r = quad::integrate(g, u1, u0, 1e-300, 1e-13);
        let k = l / (q - 1.0);
        CertifiedValue::new(k * r.value, k * r.error + 1e-15 * (k * r.value).abs())
    }

    /// `lim_{t→0} ψ(t)/t^q` where it exists in closed form.
    fn limit_ratio(&self) -> f64 {
        match self {
            PsiFunction::Power(_) => 1.0,
            PsiFunction::PhiP(_) => 0.0,
            PsiFunction::Custom { .. } => {
                let t = 1e-12;
                self.eval(t) / t.powf(self.exponent())
            }
        }
    }
}

/// `(∫_0^t φ_p(s) s^{-2} ds) / t^{p-1}`.
pub fn ratio_a(t: f64, p: f64) -> Result<CertifiedValue> {
    if !(t > 0.0 && t < 1.0) {
        return domain(format!("ratio_a needs t in (0, 1), got {t}"));
    }
    if !(p > 1.0) {
        return domain("ratio_a needs p > 1");
    }
    // u = s^{p-1}: ∫_0^{t^{p-1}} du / ((p-1) log²(1 + 1/s))
    let g = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let s = u.powf(1.0 / (p - 1.0));
        let l = (1.0 / s).ln_1p();
        1.0 / ((p - 1.0) * l * l)
    };
    let top = t.powf(p - 1.0);
    let r = quad::integrate(g, 0.0, top, 1e-300, 1e-13);
    Ok(CertifiedValue::new(r.value / top, r.error / top))
}

/// `t^ε log²(1 + 1/t)`.
pub fn ratio_b(t: f64, _p: f64, eps: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return domain(format!("ratio_b needs t in (0, 1), got {t}"));
    }
    if !(eps > 0.0) {
        return domain("ratio_b needs ε > 0");
    }
    let l = (1.0 / t).ln_1p();
    Ok(t.powf(eps) * l * l)
}

/// `sup_t φ_p(2t)/φ_p(t)` over the grid.
pub fn phi_doubling_sup(p: f64, grid: &[f64]) -> f64 {
    grid.iter().filter(|t| **t > 0.0).map(|t| phi_p(2.0 * t, p) / phi_p(*t, p)).fold(0.0, f64::max)
}

/// `∫_0^1 φ_p(t) t^{-(p+1)} dt` at quadrature tolerance `rel_tol`.
///
/// With `v = 1/log(1 + 1/t)` the integrand becomes `1 + t(v)`, bounded on
/// `[0, 1/log 2]`.
pub fn phi_moment_integral(rel_tol: f64) -> CertifiedValue {
    let g = |v: f64| {
        if v <= 0.0 {
            return 1.0;
        }
        1.0 + 1.0 / (1.0 / v).exp_m1()
    };
    let r = quad::integrate(g, 0.0, 1.0 / 2f64.ln(), 1e-300, rel_tol);
    CertifiedValue::new(r.value, r.error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_examples() {
        assert!((phi_p(1.0, 2.0) - 1.0 / 2f64.ln().powi(2)).abs() < 1e-15);
        assert!((phi_p(1.0, 2.0) - 2.0814).abs() < 1e-4);
        assert_eq!(phi_p(0.0, 2.0), 0.0);
        assert!((phi_p(0.5, 2.0) - 0.25 / 3f64.ln().powi(2)).abs() < 1e-15);
        assert!((phi_p(0.5, 2.0) - 0.2071).abs() < 1e-4);
        assert_eq!(phi_p(7.0, 2.0), phi_p(1.0, 2.0));
    }

    #[test]
    fn phi_continuity() {
        assert!(phi_p(1e-12, 1.5) < 1e-17);
        assert!((phi_p(1.0 - 1e-12, 2.0) - phi_p(1.0, 2.0)).abs() < 1e-10);
    }

    #[test]
    fn ratio_examples() {
        let b = ratio_b(1e-10, 2.0, 0.5).unwrap();
        assert!((b - 1e-5 * (1e10f64 + 1.0).ln().powi(2)).abs() < 1e-15);
        assert!((b - 5.3e-3).abs() < 1e-4);
        let a = ratio_a(1e-6, 2.0).unwrap();
        let approx = 1.0 / 1e6f64.ln().powi(2);
        assert!((a.value - approx).abs() < 0.2 * approx, "{} vs {approx}", a.value);
        assert!(ratio_a(1.0, 2.0).is_err());
        assert!(ratio_b(0.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn ratio_a_decreases() {
        let mut prev = f64::INFINITY;
        for j in 2..=8 {
            let v = ratio_a(10f64.powi(-j), 2.0).unwrap().value;
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn ratio_a_agrees_with_direct_quadrature() {
        let direct = quad::integrate(|s| phi_p(s, 2.0) / (s * s), 0.0, 0.01, 1e-300, 1e-12).value / 0.01;
        let v = ratio_a(0.01, 2.0).unwrap().value;
        assert!((v - direct).abs() < 1e-9 * direct);
    }

    #[test]
    fn distance_integral_power() {
        let psi = PsiFunction::Power(2.0);
        assert!((psi.distance_integral(1.0, 0.0, f64::INFINITY).value - 1.0).abs() < 1e-15);
        let phi = PsiFunction::PhiP(2.0);
        let v = phi.distance_integral(0.5, 0.25, 3.0).value;
        let direct = quad::integrate(|d| phi.eval(0.5 / (0.5 + d)), 0.25, 3.0, 1e-300, 1e-13).value;
        assert!((v - direct).abs() < 1e-11 * direct);
        let far = phi.distance_integral(0.5, 3.0, f64::INFINITY).value;
        let direct = quad::integrate_to_infinity(|d| phi.eval(0.5 / (0.5 + d)), 3.0, 1.0, 2.0, 1e-300, 1e-12).value;
        assert!((far - direct).abs() < 1e-9 * direct, "{far} vs {direct}");
    }

    #[test]
    fn moment_integral_converges() {
        let a = phi_moment_integral(1e-6).value;
        let b = phi_moment_integral(1e-12).value;
        assert!((a - b).abs() < 1e-8);
        let direct = quad::integrate(|t| phi_p(t, 2.0) / t.powi(3), 1e-9, 1.0, 1e-300, 1e-12).value;
        assert!(b > direct && b - direct < 0.1);
    }
}
