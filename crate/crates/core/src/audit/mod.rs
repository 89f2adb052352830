//! Machine-checkable audits of the comparison, functional and heat-kernel
//! inequalities.
//!
//! Two kinds of audit exist. Explicit audits compute both sides of an
//! inequality whose constants are known in closed form and assert
//! `lhs ≤ rhs·(1 + tol)` at every sample. Empirical audits compute the
//! smallest constant that makes an inequality with unspecified constants
//! true, at two resolutions, and require it to be finite and stable.
//!
//! Every inequality presumes the curvature hypothesis
//! `Ric_φ^N ≥ K e^{4(ε-1)φ/(n-1)}`; when the pointwise scan refutes it the
//! audit returns a vacuous report instead of asserting anything.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::discrete::{angular_eigenvalue, full_spectrum, RadialGrid};
use crate::error::{Error, Result};
use crate::geometry::{curvature_scan, CurvatureParams, CurvatureScan, Domain, EffectiveDim, ModelManifold};
use crate::heat::{SpectralKernel, TRUNCATION_EXPONENT};

pub mod eigen;
pub mod functional;
pub mod gaussian;
pub mod geometric;
pub mod liyau;
pub mod parabolic;

pub use eigen::audit_eigenvalue_lower;
pub use functional::{audit_poincare, audit_sobolev, SobolevFamily};
pub use gaussian::{
    audit_davies, audit_gaussian_lower, audit_gaussian_upper, audit_stochastic_completeness, GaussianPlan,
    LowerCandidates,
};
pub use geometric::{audit_cross_center, audit_doubling, audit_laplacian_comparison, audit_volume_comparison};
pub use liyau::{audit_j_function, audit_li_yau, j_lower_bound, solve_j_function, CHatSource, JSolution, LiYauParams};
pub use parabolic::{audit_harnack, audit_mean_value, harnack_growth, AuditCylinderSpec, Caloric};

/// Relative tolerance of explicit-constant audits.
pub const EXPLICIT_TOL: f64 = 1e-6;
/// Absolute slack added to explicit comparisons whose right side can vanish.
pub const ABS_FLOOR: f64 = 1e-12;
/// Allowed ratio between empirical constants at `h` and `h/2`.
pub const STABILITY_FACTOR: f64 = 1.25;
/// Relative tolerance of the Li-Yau audit (discretization of `|∇u|²`).
pub const LI_YAU_TOL: f64 = 5e-2;
/// Uniform points used for the curvature scan and the density band.
pub const SCAN_POINTS: usize = 4000;

/// One evaluated instance of an inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub inputs: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: Option<f64>,
}

impl Sample {
    pub fn new(inputs: &[(&str, f64)], lhs: f64, rhs: Option<f64>) -> Self {
        Self { inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(), lhs, rhs }
    }
}

/// A fitted exponent or slope with a 95% confidence interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeExponent {
    pub name: String,
    pub value: f64,
    pub ci: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_id: String,
    pub scenario: String,
    pub samples: Vec<Sample>,
    pub empirical_constant: Option<f64>,
    pub shape_exponents: Option<Vec<ShapeExponent>>,
    pub pass: bool,
    /// Explicit audits: smallest relative slack `(rhs - lhs)/|rhs|`.
    /// Empirical audits: `ln 1.25 - |ln(C_h / C_{h/2})|`.
    pub margin: f64,
    /// The curvature hypothesis failed; nothing was asserted.
    pub vacuous: bool,
    pub notes: Vec<String>,
}

impl BoundReport {
    fn blank(bound_id: &str, scenario: &str) -> Self {
        Self {
            bound_id: bound_id.to_string(),
            scenario: scenario.to_string(),
            samples: Vec::new(),
            empirical_constant: None,
            shape_exponents: None,
            pass: true,
            margin: 0.0,
            vacuous: false,
            notes: Vec::new(),
        }
    }

    /// `lhs ≤ rhs + tol·|rhs| + ABS_FLOOR` at every sample with a right side.
    pub fn explicit(bound_id: &str, scenario: &str, samples: Vec<Sample>, tol: f64) -> Self {
        let mut r = Self::blank(bound_id, scenario);
        let mut margin = f64::INFINITY;
        let mut failures = 0;
        for s in &samples {
            let Some(rhs) = s.rhs else { continue };
            if !(s.lhs <= rhs + tol * rhs.abs() + ABS_FLOOR) {
                failures += 1;
            }
            margin = margin.min((rhs - s.lhs) / rhs.abs().max(ABS_FLOOR));
        }
        if samples.is_empty() {
            r.pass = false;
            r.notes.push("no samples".into());
        }
        if failures > 0 {
            r.pass = false;
            r.notes.push(format!("{failures} of {} samples violate the bound", samples.len()));
        }
        r.margin = if margin.is_finite() { margin } else { 0.0 };
        r.samples = samples;
        r
    }

    /// Empirical constant computed at `h` (`coarse`) and `h/2` (`fine`).
    pub fn empirical(bound_id: &str, scenario: &str, samples: Vec<Sample>, coarse: f64, fine: f64) -> Self {
        let mut r = Self::blank(bound_id, scenario);
        r.samples = samples;
        r.empirical_constant = Some(fine);
        let (ok, margin) = stability(coarse, fine);
        r.margin = margin;
        if !(fine.is_finite() && fine > 0.0 && coarse.is_finite() && coarse > 0.0) {
            r.pass = false;
            r.margin = 0.0;
            r.notes.push(format!("empirical constant not finite and positive: {coarse:e} at h, {fine:e} at h/2"));
        } else if !ok {
            r.pass = false;
            r.notes.push(format!("resolution-unstable: {coarse:e} at h, {fine:e} at h/2"));
        }
        r
    }

    /// Report for a scenario whose curvature hypothesis fails.
    pub fn vacuous(bound_id: &str, scenario: &str, reason: impl Into<String>) -> Self {
        let mut r = Self::blank(bound_id, scenario);
        r.vacuous = true;
        r.notes.push(format!("vacuous hypothesis: {}", reason.into()));
        r
    }

    /// Failed report for an audit that could not be computed.
    pub fn errored(bound_id: &str, scenario: &str, reason: impl Into<String>) -> Self {
        Self::blank(bound_id, scenario).failed(format!("audit error: {}", reason.into()))
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn with_shape(mut self, shape: ShapeExponent) -> Self {
        self.shape_exponents.get_or_insert_with(Vec::new).push(shape);
        self
    }

    /// Marks the report failed with a reason.
    pub fn failed(mut self, reason: impl Into<String>) -> Self {
        self.pass = false;
        self.notes.push(reason.into());
        self
    }
}

/// `(|ln(a/b)| ≤ ln 1.25, ln 1.25 - |ln(a/b)|)`.
pub fn stability(coarse: f64, fine: f64) -> (bool, f64) {
    let d = (coarse / fine).ln().abs();
    let m = STABILITY_FACTOR.ln() - d;
    (m >= 0.0, if m.is_finite() { m } else { -f64::MAX })
}

/// Least-squares line `y = intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
}

impl LineFit {
    pub fn shape(&self, name: &str) -> ShapeExponent {
        let w = 1.96 * self.slope_se;
        ShapeExponent { name: name.to_string(), value: self.slope, ci: [self.slope - w, self.slope + w] }
    }
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::Degenerate(format!("line fit needs at least two paired points, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("line fit over a single abscissa".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_se = if n > 2 {
        let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        (rss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LineFit { slope, intercept, slope_se })
}

/// A scenario prepared for auditing: model, constants and the curvature scan.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditSetup {
    pub scenario: String,
    pub manifold: ModelManifold,
    pub params: CurvatureParams,
    pub scan: CurvatureScan,
    /// Cells of the coarse grid; refinement checks use twice as many.
    pub cells: usize,
}

impl AuditSetup {
    /// Scans the curvature and the density band on [`SCAN_POINTS`] points.
    /// Without an explicit `k` the admissible minimum from the scan is used.
    pub fn new(
        scenario: impl Into<String>,
        manifold: ModelManifold,
        big_n: EffectiveDim,
        eps: f64,
        k: Option<f64>,
        cells: usize,
    ) -> Result<Self> {
        if cells < 16 {
            return Err(Error::Config(format!("audits need at least 16 cells, got {cells}")));
        }
        let pts = scan_points(&manifold);
        let scan = curvature_scan(&manifold, big_n, eps, &pts)?;
        let k = k.unwrap_or(scan.k_admissible);
        if !k.is_finite() {
            return Err(Error::InvalidConstant(format!("curvature bound K = {k} is not finite")));
        }
        let params = CurvatureParams::new(&manifold, big_n, eps, k, &pts)?;
        Ok(Self { scenario: scenario.into(), manifold, params, scan, cells })
    }

    pub fn hypothesis_holds(&self) -> bool {
        self.scan.holds(self.params.k)
    }

    /// `None` when the hypothesis holds, else the vacuous report for `bound_id`.
    pub fn vacuous_report(&self, bound_id: &str) -> Option<BoundReport> {
        if self.hypothesis_holds() {
            return None;
        }
        Some(BoundReport::vacuous(
            bound_id,
            &self.scenario,
            format!(
                "K = {} exceeds the admissible {} (attained at r = {})",
                self.params.k, self.scan.k_admissible, self.scan.argmin
            ),
        ))
    }

    /// Spacing of the coarse grid.
    pub fn h(&self) -> f64 {
        self.manifold.length() / self.cells as f64
    }

    /// Default centre of balls and cylinders: the pole on pole caps, the
    /// midpoint on line models (so that centred sub-intervals never wrap).
    pub fn center(&self) -> f64 {
        match self.manifold.domain() {
            Domain::PoleCap { .. } => 0.0,
            _ => {
                let (a, b) = self.manifold.bounds();
                0.5 * (a + b)
            }
        }
    }

    /// Largest ball radius around [`Self::center`] that stays inside the domain.
    pub fn max_radius(&self) -> f64 {
        match self.manifold.domain() {
            Domain::PoleCap { r_max } => r_max,
            _ => 0.5 * self.manifold.length(),
        }
    }

    /// `K_ε(o, R)` over the scan points within distance `radius` of the centre.
    pub fn k_eps_ball(&self, radius: f64) -> Result<f64> {
        let c = self.center();
        let pts = scan_points(&self.manifold);
        let mut k: f64 = 0.0;
        for r in pts.into_iter().filter(|r| self.manifold.distance(c, *r) <= radius) {
            k = k.max(self.manifold.k_epsilon(self.params.big_n, self.params.eps, r)?);
        }
        Ok(k)
    }

    /// `K_ε` over the whole model.
    pub fn k_eps_global(&self) -> Result<f64> {
        self.k_eps_ball(f64::INFINITY)
    }

    fn describe_band(&self) -> Option<String> {
        self.params.band_truncated.then(|| {
            format!(
                "density band a = {}, b = {} measured on the truncation only",
                self.params.a, self.params.b
            )
        })
    }

    /// Adds setup-level caveats to a report.
    pub fn annotate(&self, mut r: BoundReport) -> BoundReport {
        if let Some(n) = self.describe_band() {
            r.notes.push(n);
        }
        r
    }
}

/// `SCAN_POINTS + 1` uniform points covering the closed domain.
pub fn scan_points(m: &ModelManifold) -> Vec<f64> {
    let (a, b) = m.bounds();
    (0..=SCAN_POINTS).map(|i| a + (b - a) * i as f64 / SCAN_POINTS as f64).collect()
}

/// Indices of grid nodes within distance `radius` of `center`.
pub fn ball_nodes(m: &ModelManifold, grid: &RadialGrid<f64>, center: f64, radius: f64) -> Vec<usize> {
    grid.nodes()
        .iter()
        .enumerate()
        .filter(|(_, r)| m.distance(center, **r) <= radius)
        .map(|(i, _)| i)
        .collect()
}

/// Largest angular degree [`spectral_kernel`] will try before giving up.
const KERNEL_L_LIMIT: usize = 512;

/// Spectral kernel on the whole domain, complete enough for every `t ≥ t_min`.
///
/// The eigenpairs per mode and (for full kernels on pole caps) the angular
/// degree are doubled until the truncation guard is met. A zonal kernel only
/// needs the `l = 0` mode.
pub fn spectral_kernel(
    m: &ModelManifold,
    cells: usize,
    t_min: f64,
    zonal: bool,
) -> Result<(RadialGrid<f64>, SpectralKernel<f64>)> {
    if !(t_min > 0.0) {
        return Err(Error::Domain(format!("kernel times must be positive, got {t_min}")));
    }
    let grid = RadialGrid::new(m, cells)?;
    let bcs = grid.natural_bcs();
    let single = zonal || grid.is_line();
    let fmax2 = grid.warp_at_nodes().iter().fold(0.0_f64, |a, f| a.max(f * f));
    let mut k = 32.min(cells);
    let mut l_max = if single { 0 } else { 8 };
    loop {
        let sp = full_spectrum(&grid, bcs, l_max, k)?;
        let lam0 = sp.entries().iter().filter(|e| single || e.l == 0).map(|e| e.lambda).fold(f64::INFINITY, f64::min);
        let needed = lam0 + TRUNCATION_EXPONENT / t_min;
        let modes_short = (0..=l_max).any(|l| sp.mode_complete_below(l) <= needed);
        let angles_short = !single && angular_eigenvalue(grid.dimension(), l_max + 1) / fmax2 <= needed;
        if !modes_short && !angles_short {
            let kernel = if zonal { SpectralKernel::zonal(sp) } else { SpectralKernel::new(sp) };
            return Ok((grid, kernel));
        }
        if modes_short && k < cells {
            k = (2 * k).min(cells);
        } else if angles_short && l_max < KERNEL_L_LIMIT {
            l_max = (2 * l_max).min(KERNEL_L_LIMIT);
        } else {
            return Err(Error::Incomplete { needed, complete_below: sp.complete_below() });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Warp;
    use crate::profile::Profile;

    #[test]
    fn explicit_report_applies_relative_tolerance() {
        let s = vec![Sample::new(&[("r", 1.0)], 1.0 + 5e-7, Some(1.0)), Sample::new(&[("r", 2.0)], 0.5, Some(1.0))];
        let r = BoundReport::explicit("x", "s", s, 1e-6);
        assert!(r.pass);
        assert!((r.margin + 5e-7).abs() < 1e-12);
        let s = vec![Sample::new(&[], 1.0 + 2e-6, Some(1.0))];
        assert!(!BoundReport::explicit("x", "s", s, 1e-6).pass);
    }

    #[test]
    fn empirical_report_checks_stability() {
        assert!(BoundReport::empirical("x", "s", vec![], 1.0, 1.2).pass);
        let r = BoundReport::empirical("x", "s", vec![], 1.0, 1.3);
        assert!(!r.pass && r.notes[0].starts_with("resolution-unstable"));
        assert!(!BoundReport::empirical("x", "s", vec![], f64::INFINITY, 1.0).pass);
    }

    #[test]
    fn vacuous_reports_pass_without_asserting() {
        let r = BoundReport::vacuous("x", "s", "K too large");
        assert!(r.pass && r.vacuous && r.samples.is_empty());
    }

    #[test]
    fn line_fit_recovers_slope() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.25 * v).collect();
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope + 0.25).abs() < 1e-14 && (f.intercept - 3.0).abs() < 1e-13);
        assert!(f.slope_se < 1e-12);
        assert!(fit_line(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn setup_flags_violated_hypothesis() {
        let m = ModelManifold::new(2, Domain::PoleCap { r_max: std::f64::consts::PI }, Warp::Sphere, Profile::constant(0.0)).unwrap();
        let ok = AuditSetup::new("s2", m.clone(), EffectiveDim::Finite(2.0), 0.0, Some(1.0), 64).unwrap();
        assert!(ok.hypothesis_holds());
        assert!((ok.scan.k_admissible - 1.0).abs() < 1e-12);
        let bad = AuditSetup::new("s2", m, EffectiveDim::Finite(2.0), 0.0, Some(1.5), 64).unwrap();
        assert!(bad.vacuous_report("volume-comparison").unwrap().vacuous);
    }
}
