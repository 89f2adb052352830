//! Mean-value and parabolic Harnack audits on space-time cylinders.
//!
//! Both inequalities have unspecified constants, so the audits compute the
//! smallest constant that works for a given positive solution and check it
//! under refinement.

use super::{fit_line, spectral_kernel, AuditSetup, BoundReport, Sample, ShapeExponent};
use crate::discrete::RadialGrid;
use crate::error::{Error, Result};

/// Time samples across each cylinder window.
const TIME_SAMPLES: usize = 64;
/// `inf_{Q+} u` below this is treated as zero.
const POSITIVITY_FLOOR: f64 = 1e-300;

/// Cylinder geometry: `Q = B(R)×(s - R², s)`, `Q_δ = B(δR)×(s - δR², s)`,
/// `Q+ = B(δR)×[s - εR², s]`, `Q- = B(δR)×[s - ςR², s - ρR²]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuditCylinderSpec {
    pub delta: f64,
    pub eps: f64,
    pub rho: f64,
    pub varsigma: f64,
    pub radius: f64,
    pub center: f64,
    /// Time origin `s` (the `t₀` of the Harnack cylinders).
    pub s: f64,
}

impl AuditCylinderSpec {
    /// `δ = 4/5`, `ε = (1+δ)/4`, `ρ = (3-δ)/4`, `ς = (3+δ)/4`, `s = 2R²`.
    pub fn standard(radius: f64, center: f64) -> Self {
        let delta = 0.8;
        Self {
            delta,
            eps: (1.0 + delta) / 4.0,
            rho: (3.0 - delta) / 4.0,
            varsigma: (3.0 + delta) / 4.0,
            radius,
            center,
            s: 2.0 * radius * radius,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.eps && self.eps < self.rho && self.rho < self.varsigma && self.varsigma <= 1.0;
        if !ok {
            return Err(Error::Config(format!(
                "cylinder fractions need 0 < ε < ρ < ς ≤ 1, got ε = {}, ρ = {}, ς = {}",
                self.eps, self.rho, self.varsigma
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("cylinder fraction δ = {} must lie in (0, 1)", self.delta)));
        }
        if !(self.radius > 0.0) || !(self.s >= self.radius * self.radius) {
            return Err(Error::Config(format!(
                "need R > 0 and R² ≤ s, got R = {}, s = {}",
                self.radius, self.s
            )));
        }
        Ok(())
    }

    fn window(&self, from: f64, to: f64) -> Vec<f64> {
        let r2 = self.radius * self.radius;
        let (a, b) = (self.s - from * r2, self.s - to * r2);
        (0..=TIME_SAMPLES).map(|k| a + (b - a) * k as f64 / TIME_SAMPLES as f64).collect()
    }
}

/// A positive solution of `∂_t u = Δ_φ u` to audit with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Caloric {
    Constant(f64),
    /// Zonal heat kernel column with its source at this radial coordinate.
    Kernel { source: f64 },
}

/// Values of the solution at the grid nodes for each requested time.
fn evaluate(setup: &AuditSetup, caloric: Caloric, cells: usize, times: &[f64]) -> Result<(RadialGrid<f64>, Vec<Vec<f64>>)> {
    match caloric {
        Caloric::Constant(c) => {
            if !(c > 0.0) {
                return Err(Error::NonPositive { node: 0, value: c });
            }
            let grid = RadialGrid::new(&setup.manifold, cells)?;
            let v = vec![vec![c; grid.len()]; times.len()];
            Ok((grid, v))
        }
        Caloric::Kernel { source } => {
            let t_min = times.iter().copied().fold(f64::INFINITY, f64::min);
            if !(t_min > 0.0) {
                return Err(Error::Domain(format!(
                    "kernel solutions need positive times, the cylinder starts at {t_min}"
                )));
            }
            let (grid, kernel) = spectral_kernel(&setup.manifold, cells, t_min, true)?;
            let j = grid.locate(source);
            let v = times.iter().map(|&t| kernel.column(j, t)).collect::<Result<_>>()?;
            Ok((grid, v))
        }
    }
}

fn nodes_within(setup: &AuditSetup, grid: &RadialGrid<f64>, center: f64, radius: f64) -> Result<Vec<usize>> {
    let idx = super::ball_nodes(&setup.manifold, grid, center, radius);
    if idx.is_empty() {
        return Err(Error::Degenerate(format!("no grid node within {radius} of {center}")));
    }
    Ok(idx)
}

fn check_center(setup: &AuditSetup, cyl: &AuditCylinderSpec) -> Result<()> {
    if !setup.manifold.is_line_model() && cyl.center != 0.0 {
        return Err(Error::Domain("cylinders on pole caps must be centred at the pole".into()));
    }
    Ok(())
}

/// `sup_{Q_δ} u^p · (1-δ)^{2+ν} R² V(R) / ∫_Q u^p dμ dt` for `p = 1, 2`.
fn mean_value_constants(setup: &AuditSetup, cyl: &AuditCylinderSpec, caloric: Caloric, cells: usize) -> Result<[f64; 2]> {
    let q_times = cyl.window(1.0, 0.0);
    let qd_times = cyl.window(cyl.delta, 0.0);
    let all: Vec<f64> = q_times.iter().chain(&qd_times).copied().collect();
    let (grid, values) = evaluate(setup, caloric, cells, &all)?;
    let (q_vals, qd_vals) = values.split_at(q_times.len());
    let big = nodes_within(setup, &grid, cyl.center, cyl.radius)?;
    let small = nodes_within(setup, &grid, cyl.center, cyl.delta * cyl.radius)?;
    let mu = grid.measures();
    let vol = setup.manifold.ball_volume(cyl.center, cyl.radius)?;
    let r2 = cyl.radius * cyl.radius;
    let factor = (1.0 - cyl.delta).powf(2.0 + setup.params.nu) * r2 * vol;
    let mut out = [0.0; 2];
    for (slot, p) in [1.0_f64, 2.0].into_iter().enumerate() {
        let sup = qd_vals
            .iter()
            .flat_map(|u| small.iter().map(move |&i| u[i].powf(p)))
            .fold(f64::NEG_INFINITY, f64::max);
        let slices: Vec<f64> = q_vals.iter().map(|u| big.iter().map(|&i| mu[i] * u[i].powf(p)).sum()).collect();
        let dt = r2 / TIME_SAMPLES as f64;
        let ends = 0.5 * (slices[0] + slices[TIME_SAMPLES]);
        let integral = dt * (slices.iter().sum::<f64>() - ends);
        if !(integral > 0.0) {
            return Err(Error::Degenerate(format!("∫_Q u^{p} vanishes")));
        }
        out[slot] = sup * factor / integral;
    }
    Ok(out)
}

pub fn audit_mean_value(setup: &AuditSetup, cyl: &AuditCylinderSpec, caloric: Caloric) -> Result<BoundReport> {
    const ID: &str = "mean-value";
    cyl.validate()?;
    check_center(setup, cyl)?;
    if let Some(r) = setup.vacuous_report(ID) {
        return Ok(r);
    }
    let coarse = mean_value_constants(setup, cyl, caloric, setup.cells)?;
    let fine = mean_value_constants(setup, cyl, caloric, 2 * setup.cells)?;
    let mut samples = Vec::new();
    for (cells, c) in [(setup.cells, coarse), (2 * setup.cells, fine)] {
        for (p, v) in [(1.0, c[0]), (2.0, c[1])] {
            samples.push(Sample::new(&[("p", p), ("cells", cells as f64), ("R", cyl.radius), ("s", cyl.s)], v, None));
        }
    }
    let mut r = BoundReport::empirical(ID, &setup.scenario, samples, coarse[0].max(coarse[1]), fine[0].max(fine[1]));
    for p in 0..2 {
        let (ok, _) = super::stability(coarse[p], fine[p]);
        if !ok && r.pass {
            r = r.failed(format!("resolution-unstable for p = {}: {:e} at h, {:e} at h/2", p + 1, coarse[p], fine[p]));
        }
    }
    Ok(setup.annotate(r.with_note(format!("delta = {}, nu = {}", cyl.delta, setup.params.nu))))
}

/// `sup_{Q-} u / inf_{Q+} u`.
fn harnack_constant(setup: &AuditSetup, cyl: &AuditCylinderSpec, caloric: Caloric, cells: usize) -> Result<f64> {
    let minus = cyl.window(cyl.varsigma, cyl.rho);
    let plus = cyl.window(cyl.eps, 0.0);
    let all: Vec<f64> = minus.iter().chain(&plus).copied().collect();
    let (grid, values) = evaluate(setup, caloric, cells, &all)?;
    let (m_vals, p_vals) = values.split_at(minus.len());
    let nodes = nodes_within(setup, &grid, cyl.center, cyl.delta * cyl.radius)?;
    let sup = m_vals.iter().flat_map(|u| nodes.iter().map(move |&i| u[i])).fold(f64::NEG_INFINITY, f64::max);
    let inf = p_vals.iter().flat_map(|u| nodes.iter().map(move |&i| u[i])).fold(f64::INFINITY, f64::min);
    if !(inf > POSITIVITY_FLOOR) {
        return Err(Error::Degenerate(format!("inf over Q+ is {inf:e}, below the positivity floor")));
    }
    Ok(sup / inf)
}

pub fn audit_harnack(setup: &AuditSetup, cyl: &AuditCylinderSpec, caloric: Caloric) -> Result<BoundReport> {
    const ID: &str = "parabolic-harnack";
    cyl.validate()?;
    check_center(setup, cyl)?;
    if let Some(r) = setup.vacuous_report(ID) {
        return Ok(r);
    }
    let coarse = harnack_constant(setup, cyl, caloric, setup.cells)?;
    let fine = harnack_constant(setup, cyl, caloric, 2 * setup.cells)?;
    let samples = vec![
        Sample::new(&[("cells", setup.cells as f64), ("R", cyl.radius), ("s", cyl.s)], coarse, None),
        Sample::new(&[("cells", (2 * setup.cells) as f64), ("R", cyl.radius), ("s", cyl.s)], fine, None),
    ];
    let r = BoundReport::empirical(ID, &setup.scenario, samples, coarse, fine).with_note(format!(
        "delta = {}, eps = {}, rho = {}, varsigma = {}",
        cyl.delta, cyl.eps, cyl.rho, cyl.varsigma
    ));
    Ok(setup.annotate(r))
}

/// Checks that `ln C_Harnack` grows at most linearly in `x = √K_ε·R`.
///
/// Fits `ln C = α + βx + γx²` and fails when `γ` is significantly positive
/// (its 95% interval lies above zero). Takes `(x, C)` pairs from a sweep.
pub fn harnack_growth(scenario: &str, points: &[(f64, f64)]) -> Result<BoundReport> {
    const ID: &str = "parabolic-harnack-growth";
    if points.len() < 4 {
        return Err(Error::Degenerate(format!("growth check needs at least 4 points, got {}", points.len())));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let lin = fit_line(&xs, &ys)?;
    let (gamma, se) = quadratic_coefficient(&xs, &ys)?;
    let samples = points.iter().map(|(x, c)| Sample::new(&[("sqrtK_R", *x)], c.ln(), None)).collect();
    let mut r = BoundReport::explicit(ID, scenario, vec![], 0.0);
    r.pass = gamma - 1.96 * se <= 1e-9 * (1.0 + gamma.abs());
    r.notes.clear();
    r.samples = samples;
    r.margin = -(gamma - 1.96 * se);
    let r = r
        .with_shape(lin.shape("log_harnack_slope"))
        .with_shape(ShapeExponent { name: "log_harnack_curvature".into(), value: gamma, ci: [gamma - 1.96 * se, gamma + 1.96 * se] });
    Ok(if r.pass { r } else { r.with_note("log Harnack constant grows faster than linearly") })
}

/// Least-squares `γ` of `y = α + βx + γx²` and its standard error.
fn quadratic_coefficient(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = x.len();
    let mut ata = [[0.0_f64; 3]; 3];
    let mut aty = [0.0_f64; 3];
    for (xi, yi) in x.iter().zip(y) {
        let row = [1.0, *xi, xi * xi];
        for a in 0..3 {
            aty[a] += row[a] * yi;
            for b in 0..3 {
                ata[a][b] += row[a] * row[b];
            }
        }
    }
    let inv = invert3(ata).ok_or_else(|| Error::Degenerate("quadratic fit needs three distinct abscissae".into()))?;
    let coef: Vec<f64> = (0..3).map(|a| (0..3).map(|b| inv[a][b] * aty[b]).sum()).collect();
    let rss: f64 = x.iter().zip(y).map(|(xi, yi)| (yi - coef[0] - coef[1] * xi - coef[2] * xi * xi).powi(2)).sum();
    let sigma2 = if n > 3 { rss / (n - 3) as f64 } else { 0.0 };
    Ok((coef[2], (sigma2 * inv[2][2]).max(0.0).sqrt()))
}

fn invert3(m: [[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let scale = m.iter().flatten().fold(0.0_f64, |a, v| a.max(v.abs()));
    if !(det.abs() > 1e-14 * scale.powi(3)) {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = ((j + 1) % 3, (j + 2) % 3);
            let (c, d) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (m[a][c] * m[b][d] - m[a][d] * m[b][c]) / det;
        }
    }
    Some(inv)
}
