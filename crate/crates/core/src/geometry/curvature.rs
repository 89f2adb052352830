//! ε-range bookkeeping and pointwise curvature of weighted models.

use std::fmt;

use super::{Domain, FarEnd, ModelManifold};
use crate::error::{Error, Result};

/// The effective dimension `N` of `Ric_φ^N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EffectiveDim {
    Finite(f64),
    Infinite,
}

impl EffectiveDim {
    pub fn from_f64(v: f64) -> Self {
        if v == f64::INFINITY {
            EffectiveDim::Infinite
        } else {
            EffectiveDim::Finite(v)
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            EffectiveDim::Finite(v) => v,
            EffectiveDim::Infinite => f64::INFINITY,
        }
    }

    fn is_n(self, n: usize) -> bool {
        matches!(self, EffectiveDim::Finite(v) if v == n as f64)
    }
}

impl fmt::Display for EffectiveDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EffectiveDim::Finite(v) => write!(f, "{v}"),
            EffectiveDim::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsBound {
    /// `N = n`: every ε is admissible.
    Unbounded,
    /// `N = 1`: only ε = 0.
    ZeroOnly,
    /// `|ε| < bound`.
    Below(f64),
}

impl fmt::Display for EpsBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsBound::Unbounded => write!(f, "any ε"),
            EpsBound::ZeroOnly => write!(f, "ε = 0"),
            EpsBound::Below(b) => write!(f, "|ε| < {b}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsRange {
    pub admissible: bool,
    pub bound: EpsBound,
}

/// Checks ε against the admissible range for `(N, n)`.
pub fn validate_eps_range(big_n: EffectiveDim, n: usize, eps: f64) -> Result<EpsRange> {
    if n < 2 {
        return Err(Error::RejectedParameter(format!("dimension n = {n} must be at least 2")));
    }
    if !eps.is_finite() {
        return Err(Error::RejectedParameter(format!("ε = {eps} is not finite")));
    }
    let nf = n as f64;
    let bound = match big_n {
        EffectiveDim::Infinite => EpsBound::Below(1.0),
        EffectiveDim::Finite(v) if v.is_nan() => {
            return Err(Error::RejectedParameter("N is NaN".into()));
        }
        EffectiveDim::Finite(v) if v == nf => EpsBound::Unbounded,
        EffectiveDim::Finite(v) if v == 1.0 => EpsBound::ZeroOnly,
        EffectiveDim::Finite(v) if v > 1.0 && v < nf => {
            return Err(Error::RejectedParameter(format!(
                "N = {v} lies in (1, n) = (1, {n}); admissible N are (-inf, 1] and [n, inf]"
            )));
        }
        EffectiveDim::Finite(v) => EpsBound::Below(((v - 1.0) / (v - nf)).sqrt()),
    };
    let admissible = match bound {
        EpsBound::Unbounded => true,
        EpsBound::ZeroOnly => eps == 0.0,
        EpsBound::Below(b) => eps.abs() < b,
    };
    Ok(EpsRange { admissible, bound })
}

fn require_admissible(big_n: EffectiveDim, n: usize, eps: f64) -> Result<()> {
    let r = validate_eps_range(big_n, n, eps)?;
    if !r.admissible {
        return Err(Error::RejectedParameter(format!(
            "ε = {eps} is outside the admissible range for N = {big_n}, n = {n}: need {}",
            r.bound
        )));
    }
    Ok(())
}

/// `c = (1/(n-1))(1 - ε²(N-n)/(N-1))` with the `N = ∞`, `N = 1` and `N = n` branches.
pub fn curvature_constant_c(big_n: EffectiveDim, n: usize, eps: f64) -> Result<f64> {
    require_admissible(big_n, n, eps)?;
    let inv = 1.0 / (n as f64 - 1.0);
    Ok(match big_n {
        EffectiveDim::Infinite => inv * (1.0 - eps * eps),
        _ if big_n.is_n(n) => inv,
        EffectiveDim::Finite(v) if v == 1.0 => inv,
        EffectiveDim::Finite(v) => inv * (1.0 - eps * eps * (v - n as f64) / (v - 1.0)),
    })
}

/// Local Sobolev exponent: 3 for `c = 1`, `1 + 1/c` for `c < 1`.
pub fn sobolev_exponent_nu(c: f64) -> Result<f64> {
    if !(c > 0.0) || c > 1.0 + 1e-12 {
        return Err(Error::InvalidConstant(format!("c = {c} must lie in (0, 1]")));
    }
    if (c - 1.0).abs() <= 1e-12 {
        Ok(3.0)
    } else {
        Ok(1.0 + 1.0 / c)
    }
}

/// Diagonal entries of `Ric_φ^N` in the radial/tangential frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialCurvature {
    pub radial: f64,
    /// Absent on line models.
    pub tangential: Option<f64>,
}

impl RadialCurvature {
    pub fn min(&self) -> f64 {
        match self.tangential {
            Some(t) => self.radial.min(t),
            None => self.radial,
        }
    }
}

/// Within this distance of a pole custom warps switch to the analytic limits.
const POLE_LIMIT_ZONE: f64 = 1e-4;

impl ModelManifold {
    /// `1/(N - n)`, zero on the `N = ∞` and `N = n` branches.
    fn inverse_gap(&self, big_n: EffectiveDim) -> Result<f64> {
        let n = self.n();
        match big_n {
            EffectiveDim::Infinite => Ok(0.0),
            _ if big_n.is_n(n) => {
                if !self.density().is_constant() {
                    return Err(Error::RejectedParameter(
                        "N = n requires a constant density".into(),
                    ));
                }
                Ok(0.0)
            }
            EffectiveDim::Finite(v) => {
                validate_eps_range(big_n, n, 0.0)?;
                Ok(1.0 / (v - n as f64))
            }
        }
    }

    /// `(f''/f, (1 - f'^2)/f^2, φ' f'/f)` with pole limits.
    fn warp_terms(&self, r: f64) -> (f64, f64, f64) {
        let (_, r_max) = self.bounds();
        let far_pole = self.far_end() == FarEnd::Pole;
        let at_pole = r <= 0.0 || (far_pole && r >= r_max);
        let phi = self.density().at(r);
        if let Some(kappa) = self.warp().model_curvature() {
            let drift = if at_pole {
                phi.d2
            } else {
                let f = self.warp().at(r);
                phi.d1 * f.d1 / f.v
            };
            return (-kappa, kappa, drift);
        }
        let near = if r < POLE_LIMIT_ZONE {
            Some((0.0, 1.0))
        } else if far_pole && r_max - r < POLE_LIMIT_ZONE {
            Some((r_max, -1.0))
        } else {
            None
        };
        if let Some((p, side)) = near {
            let f3 = self.warp().at(p).d3;
            let d2 = self.density().at(p).d2;
            return (side * f3, -side * f3, d2);
        }
        let f = self.warp().at(r);
        (f.d2 / f.v, (1.0 - f.d1 * f.d1) / (f.v * f.v), phi.d1 * f.d1 / f.v)
    }

    pub fn radial_curvatures(&self, big_n: EffectiveDim, r: f64) -> Result<RadialCurvature> {
        let (lo, hi) = self.bounds();
        if !(r >= lo && r <= hi) {
            return Err(Error::OutOfRange(format!("r = {r} outside [{lo}, {hi}]")));
        }
        let inv = self.inverse_gap(big_n)?;
        let phi = self.density().at(r);
        let n = self.n() as f64;
        let drift = phi.d2 - phi.d1 * phi.d1 * inv;
        if self.is_line_model() {
            return Ok(RadialCurvature { radial: drift, tangential: None });
        }
        let (fpp_f, q, phi_f) = self.warp_terms(r);
        let radial = -(n - 1.0) * fpp_f + drift;
        let tangential = -fpp_f + (n - 2.0) * q + phi_f;
        Ok(RadialCurvature { radial, tangential: Some(tangential) })
    }

    /// `e^{4(ε-1)φ(r)/(n-1)}`, the weight of `K` in the curvature hypothesis.
    pub fn curvature_weight(&self, eps: f64, r: f64) -> f64 {
        (4.0 * (eps - 1.0) * self.density().value(r) / (self.n() as f64 - 1.0)).exp()
    }

    /// `K_ε(r) = max{0, -min Ric_φ^N(r) · e^{-4(ε-1)φ/(n-1)}}`.
    pub fn k_epsilon(&self, big_n: EffectiveDim, eps: f64, r: f64) -> Result<f64> {
        let ric = self.radial_curvatures(big_n, r)?;
        Ok((-ric.min() / self.curvature_weight(eps, r)).max(0.0))
    }

    /// Maximum of `K_ε` over the pole and the nodes with `r ≤ radius`.
    pub fn k_epsilon_ball(&self, big_n: EffectiveDim, eps: f64, radius: f64, nodes: &[f64]) -> Result<f64> {
        let mut k = if let Domain::PoleCap { .. } = self.domain() { self.k_epsilon(big_n, eps, 0.0)? } else { 0.0 };
        for &r in nodes.iter().filter(|&&r| r <= radius) {
            k = k.max(self.k_epsilon(big_n, eps, r)?);
        }
        Ok(k)
    }
}

/// Band `a ≤ e^{2(1-ε)φ/(n-1)} ≤ b` over a node set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Band {
    pub a: f64,
    pub b: f64,
    /// Set when the band was taken over a truncation of a noncompact model
    /// whose density need not stay bounded outside it.
    pub truncated: bool,
}

pub fn density_band(m: &ModelManifold, eps: f64, nodes: &[f64]) -> Band {
    if eps == 1.0 || nodes.is_empty() {
        return Band { a: 1.0, b: 1.0, truncated: false };
    }
    let scale = 2.0 * (1.0 - eps) / (m.n() as f64 - 1.0);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &r in nodes {
        let v = (scale * m.density().value(r)).exp();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let truncated = m.is_noncompact_truncation() && !m.density().is_constant();
    Band { a: lo, b: hi, truncated }
}

/// Result of the pointwise curvature scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureScan {
    /// Largest `K` with `Ric_φ^N ≥ K e^{4(ε-1)φ/(n-1)}` at every scanned point.
    pub k_admissible: f64,
    pub argmin: f64,
    pub points: usize,
}

impl CurvatureScan {
    pub fn holds(&self, k: f64) -> bool {
        k <= self.k_admissible + 1e-9 * (1.0 + k.abs())
    }
}

/// Scans the nodes (and the poles) for the admissible curvature bound.
pub fn curvature_scan(m: &ModelManifold, big_n: EffectiveDim, eps: f64, nodes: &[f64]) -> Result<CurvatureScan> {
    let mut pts: Vec<f64> = nodes.to_vec();
    if let Domain::PoleCap { r_max } = m.domain() {
        pts.push(0.0);
        if m.far_end() == FarEnd::Pole {
            pts.push(r_max);
        }
    }
    let mut best = CurvatureScan { k_admissible: f64::INFINITY, argmin: f64::NAN, points: pts.len() };
    for r in pts {
        let v = m.radial_curvatures(big_n, r)?.min() / m.curvature_weight(eps, r);
        if v < best.k_admissible {
            best.k_admissible = v;
            best.argmin = r;
        }
    }
    Ok(best)
}

/// `(N, ε, K)` with the derived constants `c`, `ν` and the density band.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureParams {
    pub n: usize,
    pub big_n: EffectiveDim,
    pub eps: f64,
    pub k: f64,
    pub c: f64,
    pub nu: f64,
    pub a: f64,
    pub b: f64,
    pub band_truncated: bool,
}

impl CurvatureParams {
    pub fn new(m: &ModelManifold, big_n: EffectiveDim, eps: f64, k: f64, nodes: &[f64]) -> Result<Self> {
        if big_n.is_n(m.n()) && !m.density().is_constant() {
            return Err(Error::RejectedParameter("N = n requires a constant density".into()));
        }
        let band = density_band(m, eps, nodes);
        let mut p = Self::from_parts(m.n(), big_n, eps, k, band.a, band.b)?;
        p.band_truncated = band.truncated;
        Ok(p)
    }

    /// Parameters with an explicitly supplied band.
    pub fn from_parts(n: usize, big_n: EffectiveDim, eps: f64, k: f64, a: f64, b: f64) -> Result<Self> {
        let c = curvature_constant_c(big_n, n, eps)?;
        let nu = sobolev_exponent_nu(c)?;
        if !(a > 0.0 && a <= b && b.is_finite()) {
            return Err(Error::InvalidConstant(format!("density band needs 0 < a ≤ b, got a = {a}, b = {b}")));
        }
        Ok(Self { n, big_n, eps, k, c, nu, a, b, band_truncated: false })
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k = k;
        self
    }

    /// `K₁ = max{0, -K}`.
    pub fn k1(&self) -> f64 {
        (-self.k).max(0.0)
    }
}
