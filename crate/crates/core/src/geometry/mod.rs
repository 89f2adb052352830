//! Rotationally symmetric weighted model manifolds.
//!
//! A model is the warped product `dr² + f(r)² g_{S^{n-1}}` carrying the
//! measure `dμ = ω_{n-1} f^{n-1} e^{-φ} dr`. Interval and circle domains are
//! one-dimensional line models: `f ≡ 1`, `ω = 1`, and `n` only enters the
//! curvature formulas as a parameter.

mod curvature;

pub use curvature::{
    curvature_constant_c, curvature_scan, density_band, sobolev_exponent_nu, validate_eps_range,
    Band, CurvatureParams, CurvatureScan, EffectiveDim, EpsBound, EpsRange, RadialCurvature,
};

use crate::error::{Error, Result};
use crate::profile::{Profile, ProfileValue};
use crate::quadrature::{integrate, Tolerance};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    /// `[0, r_max]` with a smooth pole at `r = 0`. If `f(r_max) = 0` the far
    /// end is a second pole and the model is closed.
    PoleCap { r_max: f64 },
    Interval { r_min: f64, r_max: f64 },
    /// Periodic `[0, length)`.
    Circle { length: f64 },
}

/// The warp `f`. The three constant-curvature tags are kept symbolic so the
/// curvature terms `f''/f` and `(1 - f'^2)/f^2` are exact.
#[derive(Clone, Debug, PartialEq)]
pub enum Warp {
    Euclidean,
    Sphere,
    Hyperbolic,
    /// `f ≡ 1`, used by line models.
    Unit,
    Custom(Profile),
}

impl Warp {
    pub fn at<T: Real>(&self, r: T) -> ProfileValue<T> {
        let z = T::zero();
        match self {
            Warp::Euclidean => ProfileValue { v: r, d1: T::one(), d2: z, d3: z },
            Warp::Sphere => {
                let (s, c) = r.sin_cos();
                ProfileValue { v: s, d1: c, d2: -s, d3: -c }
            }
            Warp::Hyperbolic => {
                let (s, c) = (r.sinh(), r.cosh());
                ProfileValue { v: s, d1: c, d2: s, d3: c }
            }
            Warp::Unit => ProfileValue { v: T::one(), d1: z, d2: z, d3: z },
            Warp::Custom(p) => p.at(r),
        }
    }

    /// Sectional curvature `κ` of the constant-curvature tags.
    pub fn model_curvature(&self) -> Option<f64> {
        match self {
            Warp::Euclidean => Some(0.0),
            Warp::Sphere => Some(1.0),
            Warp::Hyperbolic => Some(-1.0),
            _ => None,
        }
    }

    pub fn to_profile(&self) -> Profile {
        match self {
            Warp::Euclidean => Profile::parse("r").expect("static"),
            Warp::Sphere => Profile::parse("sin(r)").expect("static"),
            Warp::Hyperbolic => Profile::parse("sinh(r)").expect("static"),
            Warp::Unit => Profile::constant(1.0),
            Warp::Custom(p) => p.clone(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Warp::Euclidean => "r".into(),
            Warp::Sphere => "sin(r)".into(),
            Warp::Hyperbolic => "sinh(r)".into(),
            Warp::Unit => "1".into(),
            Warp::Custom(p) => p.describe(),
        }
    }
}

/// Kind of the right end of the radial domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FarEnd {
    Pole,
    Boundary,
    Periodic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelManifold {
    n: usize,
    domain: Domain,
    warp: Warp,
    density: Profile,
    noncompact: bool,
}

const CHECK_SAMPLES: usize = 2000;

impl ModelManifold {
    pub fn new(n: usize, domain: Domain, warp: Warp, density: Profile) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidManifold(format!("dimension must be at least 2, got {n}")));
        }
        let m = Self { n, domain, warp, density, noncompact: false };
        m.check()?;
        Ok(m)
    }

    /// Marks the model as the truncation of a noncompact space.
    pub fn truncation_of_noncompact(mut self, yes: bool) -> Self {
        self.noncompact = yes;
        self
    }

    fn check(&self) -> Result<()> {
        let (lo, hi) = self.bounds();
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidManifold(format!("empty or unbounded domain [{lo}, {hi}]")));
        }
        match self.domain {
            Domain::PoleCap { r_max } => {
                if matches!(self.warp, Warp::Unit) {
                    return Err(Error::InvalidManifold("a pole cap needs a warp with f(0) = 0".into()));
                }
                let f0 = self.warp.at(0.0_f64);
                if f0.v.abs() > 1e-12 || (f0.d1 - 1.0).abs() > 1e-8 {
                    return Err(Error::InvalidManifold(format!(
                        "smooth pole needs f(0) = 0 and f'(0) = 1, got f(0) = {}, f'(0) = {}",
                        f0.v, f0.d1
                    )));
                }
                let p0 = self.density.at(0.0_f64);
                if p0.d1.abs() > 1e-8 {
                    return Err(Error::InvalidManifold(format!(
                        "density must satisfy φ'(0) = 0 at the pole, got {}",
                        p0.d1
                    )));
                }
                if self.far_end() == FarEnd::Pole {
                    let f1 = self.warp.at(r_max);
                    let p1 = self.density.at(r_max);
                    if (f1.d1 + 1.0).abs() > 1e-8 || p1.d1.abs() > 1e-8 {
                        return Err(Error::InvalidManifold(format!(
                            "closing pole at r = {r_max} needs f' = -1 and φ' = 0, got f' = {}, φ' = {}",
                            f1.d1, p1.d1
                        )));
                    }
                }
            }
            Domain::Interval { .. } | Domain::Circle { .. } => {
                if !matches!(self.warp, Warp::Unit) {
                    return Err(Error::InvalidManifold(
                        "interval and circle models are one-dimensional and take the unit warp".into(),
                    ));
                }
            }
        }
        if let Domain::Circle { length } = self.domain {
            let a = self.density.at(0.0_f64);
            let b = self.density.at(length);
            let scale = 1.0 + a.v.abs();
            if (a.v - b.v).abs() > 1e-9 * scale || (a.d1 - b.d1).abs() > 1e-8 * scale {
                return Err(Error::InvalidManifold("density is not periodic on the circle".into()));
            }
        }
        for i in 1..CHECK_SAMPLES {
            let r = lo + (hi - lo) * i as f64 / CHECK_SAMPLES as f64;
            let f = self.warp.at(r).v;
            if !(f > 0.0) || !f.is_finite() {
                return Err(Error::InvalidManifold(format!("warp must be positive inside the domain, f({r}) = {f}")));
            }
            let p = self.density.at(r);
            if !p.v.is_finite() || !p.d1.is_finite() || !p.d2.is_finite() {
                return Err(Error::InvalidManifold(format!("density not finite at r = {r}")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn warp(&self) -> &Warp {
        &self.warp
    }

    pub fn density(&self) -> &Profile {
        &self.density
    }

    pub fn is_noncompact_truncation(&self) -> bool {
        self.noncompact
    }

    pub fn is_line_model(&self) -> bool {
        !matches!(self.domain, Domain::PoleCap { .. })
    }

    pub fn bounds(&self) -> (f64, f64) {
        match self.domain {
            Domain::PoleCap { r_max } => (0.0, r_max),
            Domain::Interval { r_min, r_max } => (r_min, r_max),
            Domain::Circle { length } => (0.0, length),
        }
    }

    pub fn length(&self) -> f64 {
        let (a, b) = self.bounds();
        b - a
    }

    pub fn far_end(&self) -> FarEnd {
        match self.domain {
            Domain::PoleCap { r_max } => {
                if self.warp.at(r_max).v.abs() < 1e-9 {
                    FarEnd::Pole
                } else {
                    FarEnd::Boundary
                }
            }
            Domain::Interval { .. } => FarEnd::Boundary,
            Domain::Circle { .. } => FarEnd::Periodic,
        }
    }

    /// True for closed models (both ends poles, or a circle).
    pub fn is_closed(&self) -> bool {
        matches!(self.far_end(), FarEnd::Pole | FarEnd::Periodic)
    }

    /// Area of the unit sphere `S^{n-1}`, or 1 for line models.
    pub fn omega(&self) -> f64 {
        if self.is_line_model() {
            1.0
        } else {
            unit_sphere_area(self.n - 1)
        }
    }

    /// Density of `μ` with respect to `dr`.
    pub fn weight<T: Real>(&self, r: T) -> T {
        let f = self.warp.at(r).v;
        let phi = self.density.value(r);
        T::lit(self.omega()) * f.powi(self.n as i32 - 1) * (-phi).exp()
    }

    pub fn phi<T: Real>(&self, r: T) -> ProfileValue<T> {
        self.density.at(r)
    }

    pub fn f<T: Real>(&self, r: T) -> ProfileValue<T> {
        self.warp.at(r)
    }

    /// `μ` of the radial shell `[r0, r1]`.
    pub fn shell_volume(&self, r0: f64, r1: f64) -> f64 {
        integrate(|r: f64| self.weight(r), r0, r1, Tolerance { rel: 1e-12, abs: 1e-14, ..Default::default() })
    }

    pub fn total_volume(&self) -> f64 {
        let (a, b) = self.bounds();
        self.shell_volume(a, b)
    }

    /// Volume of the pole-centered ball `B(R)`, clipped to the domain.
    pub fn pole_ball_volume(&self, radius: f64) -> Result<f64> {
        match self.domain {
            Domain::PoleCap { r_max } => Ok(self.shell_volume(0.0, radius.clamp(0.0, r_max))),
            _ => Err(Error::Domain("pole-centered balls need a pole-cap domain".into())),
        }
    }

    /// Volume of the ball of radius `rho` around the point at coordinate `x`.
    /// On pole caps only the pole (`x = 0`) is supported.
    pub fn ball_volume(&self, x: f64, rho: f64) -> Result<f64> {
        match self.domain {
            Domain::PoleCap { .. } => {
                if x != 0.0 {
                    return Err(Error::Domain("off-pole balls are not supported on pole caps".into()));
                }
                self.pole_ball_volume(rho)
            }
            Domain::Interval { r_min, r_max } => {
                Ok(self.shell_volume((x - rho).max(r_min), (x + rho).min(r_max)))
            }
            Domain::Circle { length } => {
                if 2.0 * rho >= length {
                    return Ok(self.total_volume());
                }
                let tol = Tolerance { rel: 1e-12, abs: 1e-14, ..Default::default() };
                Ok(integrate(|s: f64| self.weight(s.rem_euclid(length)), x - rho, x + rho, tol))
            }
        }
    }

    /// Geodesic distance between two points on a common radial ray (or on the line model).
    pub fn distance(&self, x: f64, y: f64) -> f64 {
        let d = (x - y).abs();
        match self.domain {
            Domain::Circle { length } => d.min(length - d),
            _ => d,
        }
    }

    pub fn diameter(&self) -> f64 {
        match (self.domain, self.far_end()) {
            (Domain::PoleCap { r_max }, FarEnd::Pole) => r_max,
            (Domain::PoleCap { r_max }, _) => 2.0 * r_max,
            (Domain::Interval { r_min, r_max }, _) => r_max - r_min,
            (Domain::Circle { length }, _) => length / 2.0,
        }
    }

    /// Metric dilation by `s`: `r → s r`, `f → s f(r / s)`, `φ → φ(r / s)`.
    pub fn dilated(&self, s: f64) -> Result<Self> {
        let domain = match self.domain {
            Domain::PoleCap { r_max } => Domain::PoleCap { r_max: s * r_max },
            Domain::Interval { r_min, r_max } => Domain::Interval { r_min: s * r_min, r_max: s * r_max },
            Domain::Circle { length } => Domain::Circle { length: s * length },
        };
        let warp = match &self.warp {
            Warp::Euclidean => Warp::Euclidean,
            Warp::Unit => Warp::Unit,
            w => Warp::Custom(w.to_profile().dilated(s, s)),
        };
        let density = self.density.dilated(s, 1.0);
        Ok(Self::new(self.n, domain, warp, density)?.truncation_of_noncompact(self.noncompact))
    }

    /// Same geometry, different density.
    pub fn with_density(&self, density: Profile) -> Result<Self> {
        Ok(Self::new(self.n, self.domain, self.warp.clone(), density)?.truncation_of_noncompact(self.noncompact))
    }

    pub fn with_warp(&self, warp: Warp) -> Result<Self> {
        Ok(Self::new(self.n, self.domain, warp, self.density.clone())?.truncation_of_noncompact(self.noncompact))
    }

    /// Midpoint-rule `L^p(μ)` norm of `g` over `cells` equal cells.
    pub fn lp_norm(&self, g: impl Fn(f64) -> f64, p: f64, cells: usize) -> f64 {
        let (lo, hi) = self.bounds();
        let h = (hi - lo) / cells as f64;
        let mut s = 0.0;
        for i in 0..cells {
            let r = lo + (i as f64 + 0.5) * h;
            s += g(r).abs().powf(p) * self.weight(r) * h;
        }
        s.powf(1.0 / p)
    }

    /// `‖φ'‖_{L^p(μ)}`, or `‖|φ'|²‖_{L^p(μ)}` when `squared`.
    pub fn grad_phi_lp(&self, p: f64, squared: bool, cells: usize) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::OutOfRange(format!("L^p exponent must be at least 1, got {p}")));
        }
        Ok(if squared {
            self.lp_norm(|r| self.density.at(r).d1.powi(2), p, cells)
        } else {
            self.lp_norm(|r| self.density.at(r).d1, p, cells)
        })
    }
}

/// Area of the unit sphere `S^m`.
pub fn unit_sphere_area(m: usize) -> f64 {
    match m {
        0 => 2.0,
        1 => 2.0 * std::f64::consts::PI,
        2 => 4.0 * std::f64::consts::PI,
        _ => 2.0 * std::f64::consts::PI / (m as f64 - 1.0) * unit_sphere_area(m - 2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sphere(n: usize) -> ModelManifold {
        ModelManifold::new(n, Domain::PoleCap { r_max: PI }, Warp::Sphere, Profile::constant(0.0)).unwrap()
    }

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(2) - 4.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((unit_sphere_area(4) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
        assert!((sphere(2).total_volume() - 4.0 * PI).abs() < 1e-10);
        assert!((sphere(3).total_volume() - 2.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_models() {
        let zero = Profile::constant(0.0);
        assert!(ModelManifold::new(1, Domain::PoleCap { r_max: 1.0 }, Warp::Euclidean, zero.clone()).is_err());
        assert!(ModelManifold::new(2, Domain::PoleCap { r_max: 1.0 }, Warp::Unit, zero.clone()).is_err());
        assert!(ModelManifold::new(2, Domain::PoleCap { r_max: 4.0 }, Warp::Sphere, zero.clone()).is_err());
        let tilted = Profile::parse("r").unwrap();
        assert!(ModelManifold::new(2, Domain::PoleCap { r_max: 1.0 }, Warp::Euclidean, tilted).is_err());
        let aperiodic = Profile::parse("r").unwrap();
        assert!(ModelManifold::new(2, Domain::Circle { length: 1.0 }, Warp::Unit, aperiodic).is_err());
        assert!(ModelManifold::new(2, Domain::Interval { r_min: 0.0, r_max: 1.0 }, Warp::Sphere, zero).is_err());
    }

    #[test]
    fn sphere_is_closed_with_diameter_pi() {
        let s = sphere(2);
        assert_eq!(s.far_end(), FarEnd::Pole);
        assert!((s.diameter() - PI).abs() < 1e-15);
    }

    #[test]
    fn circle_balls_wrap() {
        let c = ModelManifold::new(2, Domain::Circle { length: 2.0 * PI }, Warp::Unit, Profile::constant(0.0)).unwrap();
        assert!((c.ball_volume(0.1, 0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!((c.ball_volume(0.0, 10.0).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!((c.distance(0.1, 6.0) - (2.0 * PI - 5.9)).abs() < 1e-12);
    }

    #[test]
    fn grad_phi_norm_matches_closed_form() {
        let m = ModelManifold::new(
            2,
            Domain::Interval { r_min: 0.0, r_max: 1.0 },
            Warp::Unit,
            Profile::parse("r").unwrap(),
        )
        .unwrap();
        let exact = (1.0 - (-1.0f64).exp()).sqrt();
        let e1 = (m.grad_phi_lp(2.0, false, 200).unwrap() - exact).abs();
        let e2 = (m.grad_phi_lp(2.0, false, 400).unwrap() - exact).abs();
        assert!(e1 < 1e-5);
        assert!((e1 / e2 - 4.0).abs() < 0.1);
        assert!(m.grad_phi_lp(0.5, false, 10).is_err());
    }

    #[test]
    fn dilation_scales_volume() {
        let e = ModelManifold::new(3, Domain::PoleCap { r_max: 2.0 }, Warp::Euclidean, Profile::constant(0.0)).unwrap();
        let d = e.dilated(1.5).unwrap();
        assert!((d.pole_ball_volume(3.0).unwrap() / e.pole_ball_volume(2.0).unwrap() - 1.5f64.powi(3)).abs() < 1e-10);
        let s = sphere(2).dilated(2.0).unwrap();
        assert_eq!(s.far_end(), FarEnd::Pole);
        assert!((s.total_volume() - 16.0 * PI).abs() < 1e-9);
    }
}
