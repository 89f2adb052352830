//! Comparison functions and the closed-form volume and Laplacian bounds.

use crate::error::{Error, Result};
use crate::geometry::{CurvatureParams, Domain, ModelManifold};
use crate::quadrature::{integrate, Tolerance};
use crate::scalar::Real;

/// `s_K(t)`: `sin(√K t)/√K`, `t`, or `sinh(√-K t)/√-K`.
pub fn comparison_s<T: Real>(k: T, t: T) -> T {
    let x = k * t * t;
    if x.abs() < T::lit(1e-6) {
        // t (1 - x/6 + x²/120 - x³/5040)
        let six = T::lit(6.0);
        return t * (T::one() - x / six * (T::one() - x / T::lit(20.0) * (T::one() - x / T::lit(42.0))));
    }
    if k > T::zero() {
        let q = k.sqrt();
        (q * t).sin() / q
    } else {
        let q = (-k).sqrt();
        (q * t).sinh() / q
    }
}

/// `s_K'(t)`.
pub fn comparison_s_prime<T: Real>(k: T, t: T) -> T {
    if k > T::zero() {
        (k.sqrt() * t).cos()
    } else if k < T::zero() {
        ((-k).sqrt() * t).cosh()
    } else {
        T::one()
    }
}

/// The pair `(c, K)` entering `s_{cK}` together with the quadrature resolution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComparisonProfile {
    pub c: f64,
    pub k: f64,
    pub resolution: usize,
}

impl ComparisonProfile {
    pub fn new(c: f64, k: f64) -> Result<Self> {
        Self::with_resolution(c, k, 64)
    }

    pub fn with_resolution(c: f64, k: f64, resolution: usize) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidConstant(format!("c = {c} must be positive")));
        }
        if resolution < 64 {
            return Err(Error::Config(format!("quadrature resolution {resolution} below 64")));
        }
        if !k.is_finite() {
            return Err(Error::InvalidConstant(format!("K = {k} is not finite")));
        }
        Ok(Self { c, k, resolution })
    }

    pub fn from_params(p: &CurvatureParams) -> Result<Self> {
        Self::new(p.c, p.k)
    }

    /// `π/√(cK)` for `cK > 0`.
    pub fn clip(&self) -> Option<f64> {
        let ck = self.c * self.k;
        (ck > 0.0).then(|| std::f64::consts::PI / ck.sqrt())
    }

    pub fn s(&self, t: f64) -> f64 {
        comparison_s(self.c * self.k, t)
    }

    pub fn s_prime(&self, t: f64) -> f64 {
        comparison_s_prime(self.c * self.k, t)
    }

    /// `∫_0^{upper} s_{cK}(t)^{1/c} dt`, with `upper` clipped at `π/√(cK)`.
    pub fn bg_integral(&self, upper: f64) -> f64 {
        let upper = match self.clip() {
            Some(cap) => upper.min(cap),
            None => upper,
        };
        if upper <= 0.0 {
            return 0.0;
        }
        let ck = self.c * self.k;
        let inv_c = 1.0 / self.c;
        let tol = Tolerance { rel: 1e-10, abs: 1e-14, panels: self.resolution, max_depth: 40 };
        integrate(|t: f64| comparison_s(ck, t).max(0.0).powf(inv_c), 0.0, upper, tol)
    }
}

/// Volume comparison: `V(R)/V(r) ≤ b·I(min{R/a, π/√(cK)}) / (a·I(r/b))`.
pub fn volume_ratio_bound(p: &CurvatureParams, r: f64, big_r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= big_r) {
        return Err(Error::OutOfRange(format!("need 0 < r ≤ R, got r = {r}, R = {big_r}")));
    }
    if p.k > 0.0 {
        let cap = volume_cap(p).expect("K > 0");
        if big_r > cap * (1.0 + 1e-12) {
            return Err(Error::OutOfRange(format!("R = {big_r} exceeds the cap bπ/(c√K) = {cap}")));
        }
    }
    let prof = ComparisonProfile::from_params(p)?;
    let upper = match prof.clip() {
        Some(c) => (big_r / p.a).min(c),
        None => big_r / p.a,
    };
    Ok(p.b * prof.bg_integral(upper) / (p.a * prof.bg_integral(r / p.b)))
}

/// The stated validity cap `bπ/(c√K)` of the volume comparison for `K > 0`.
pub fn volume_cap(p: &CurvatureParams) -> Option<f64> {
    (p.k > 0.0).then(|| p.b * std::f64::consts::PI / (p.c * p.k.sqrt()))
}

/// `(b/a)^{(1+2c)/c} (r/s)^{(1+c)/c} exp(√(K₁/c) r/a)`.
pub fn same_center_ratio_bound(p: &CurvatureParams, s: f64, r: f64) -> Result<f64> {
    if !(s > 0.0 && s <= r) {
        return Err(Error::OutOfRange(format!("need 0 < s ≤ r, got s = {s}, r = {r}")));
    }
    let c = p.c;
    Ok((p.b / p.a).powf((1.0 + 2.0 * c) / c) * (r / s).powf((1.0 + c) / c) * ((p.k1() / c).sqrt() * r / p.a).exp())
}

/// Doubling constant for radius `R₁`.
pub fn doubling_bound(p: &CurvatureParams, r1: f64) -> Result<f64> {
    same_center_ratio_bound(p, r1, 2.0 * r1)
}

/// Ratio bound for two centers at distance `d`: the same-center bound at `r = s + d`.
pub fn cross_center_ratio_bound(p: &CurvatureParams, s: f64, d: f64) -> Result<f64> {
    if !(d >= 0.0) {
        return Err(Error::OutOfRange(format!("distance must be nonnegative, got {d}")));
    }
    same_center_ratio_bound(p, s, s + d)
}

/// `(Δ_φ r, (1/(cρ)) s'_{cK}(r/b) / s_{cK}(r/b))` at radius `r` from the pole.
pub fn laplacian_comparison_pair(m: &ModelManifold, p: &CurvatureParams, r: f64) -> Result<(f64, f64)> {
    let Domain::PoleCap { r_max } = m.domain() else {
        return Err(Error::Domain("Laplacian comparison needs a pole-cap model".into()));
    };
    if !(r > 0.0 && r < r_max) {
        return Err(Error::OutOfRange(format!("r = {r} is not interior to (0, {r_max})")));
    }
    let f = m.f(r);
    let lhs = (m.n() as f64 - 1.0) * f.d1 / f.v - m.phi(r).d1;
    let prof = ComparisonProfile::from_params(p)?;
    let x = r / p.b;
    if let Some(cap) = prof.clip() {
        if x >= cap {
            return Err(Error::OutOfRange(format!("r/b = {x} at or beyond the zero π/√(cK) = {cap}")));
        }
    }
    let sp = prof.s_prime(x);
    let rho = if sp >= 0.0 { p.a } else { p.b };
    Ok((lhs, sp / (prof.s(x) * p.c * rho)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{EffectiveDim, Warp};
    use crate::profile::Profile;
    use std::f64::consts::PI;

    fn params(c: f64, k: f64, a: f64, b: f64) -> CurvatureParams {
        // n = 2, N = n gives c = 1; other values of c are set directly.
        let mut p = CurvatureParams::from_parts(2, EffectiveDim::Finite(2.0), 0.0, k, a, b).unwrap();
        p.c = c;
        p
    }

    #[test]
    fn s_values() {
        assert_eq!(comparison_s(0.0, 2.5), 2.5);
        assert!((comparison_s(1.0, PI / 2.0) - 1.0).abs() < 1e-15);
        assert!((comparison_s(-1.0_f64, 1.0) - 1f64.sinh()).abs() < 1e-15);
        for k in [-3.0_f64, -1e-9, 0.0, 1e-9, 2.0] {
            assert!((comparison_s(k, 1e-6) / 1e-6 - 1.0).abs() < 1e-9);
        }
        // continuity across the series switch
        let a = comparison_s(1.0, 9.99e-4);
        let b = (9.99e-4f64).sin();
        assert!((a - b).abs() < 1e-18);
    }

    #[test]
    fn bg_integrals() {
        let p = ComparisonProfile::new(1.0, 0.0).unwrap();
        assert!((p.bg_integral(3.0) - 4.5).abs() < 1e-12);
        let p = ComparisonProfile::new(1.0, 1.0).unwrap();
        assert!((p.bg_integral(10.0) - 2.0).abs() < 1e-12);
        assert!(ComparisonProfile::with_resolution(1.0, 0.0, 10).is_err());
        assert!(ComparisonProfile::new(0.0, 0.0).is_err());
    }

    #[test]
    fn volume_bounds() {
        assert!((volume_ratio_bound(&params(1.0, 0.0, 1.0, 1.0), 1.0, 2.0).unwrap() - 4.0).abs() < 1e-12);
        assert!((volume_ratio_bound(&params(1.0, 1.0, 1.0, 1.0), PI / 2.0, PI).unwrap() - 2.0).abs() < 1e-12);
        assert!(volume_ratio_bound(&params(1.0, 1.0, 1.0, 1.0), 1.0, 3.5).is_err());
        assert!(volume_ratio_bound(&params(1.0, 0.0, 1.0, 1.0), 2.0, 1.0).is_err());
    }

    #[test]
    fn ratio_bounds() {
        let p = params(1.0, 0.0, 1.0, 1.0);
        assert!((same_center_ratio_bound(&p, 1.0, 2.0).unwrap() - 4.0).abs() < 1e-14);
        assert!((doubling_bound(&p, 1.0).unwrap() - 4.0).abs() < 1e-14);
        assert!((cross_center_ratio_bound(&p, 1.0, 1.0).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(cross_center_ratio_bound(&p, 1.0, 0.0).unwrap(), 1.0);
        let p = params(1.0, 0.0, 1.0, 2.0);
        assert!((same_center_ratio_bound(&p, 1.0, 2.0).unwrap() - 32.0).abs() < 1e-12);
        let p = params(1.0, -1.0, 1.0, 1.0);
        assert!((same_center_ratio_bound(&p, 1.0, 2.0).unwrap() - 4.0 * 2f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn laplacian_model_equality() {
        let s = ModelManifold::new(2, Domain::PoleCap { r_max: PI }, Warp::Sphere, Profile::constant(0.0)).unwrap();
        let p = params(1.0, 1.0, 1.0, 1.0);
        let (l, r) = laplacian_comparison_pair(&s, &p, 1.0).unwrap();
        assert!((l - r).abs() < 1e-14 && (l - 1f64.cos() / 1f64.sin()).abs() < 1e-14);
        let e = ModelManifold::new(2, Domain::PoleCap { r_max: 3.0 }, Warp::Euclidean, Profile::constant(0.0)).unwrap();
        let (l, r) = laplacian_comparison_pair(&e, &params(1.0, 0.0, 1.0, 1.0), 0.5).unwrap();
        assert_eq!((l, r), (2.0, 2.0));
        assert!(laplacian_comparison_pair(&s, &p, PI).is_err());
    }
}
