//! Neumann–Poincaré and local Sobolev audits on balls around the default centre.

use super::{AuditSetup, BoundReport, Sample, EXPLICIT_TOL};
use crate::discrete::eigen::jacobi_eigen;
use crate::discrete::{assemble_mode_operator, mode_spectrum, Bc, RadialGrid};
use crate::error::{Error, Result};
use crate::geometry::{Domain, FarEnd, ModelManifold, Warp};

/// Eigenfunctions spanning the trial space of the Poincaré audit.
const POINCARE_BASIS: usize = 40;
/// Highest angular degree tried on pole caps.
const POINCARE_L_MAX: usize = 3;

/// Grid over `[c - radius, c + radius]` (or `[0, radius]` on pole caps) with
/// `cut` at every end that is not a pole.
fn ball_grid(setup: &AuditSetup, radius: f64, cells: usize, cut: Bc) -> Result<(RadialGrid<f64>, (Bc, Bc))> {
    let m = &setup.manifold;
    let c = setup.center();
    if radius > setup.max_radius() * (1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "ball of radius {radius} does not fit inside the domain (largest {})",
            setup.max_radius()
        )));
    }
    match m.domain() {
        Domain::PoleCap { r_max } => {
            let hi = radius.min(r_max);
            let whole = hi >= r_max * (1.0 - 1e-12);
            let right = if whole && m.far_end() == FarEnd::Pole { Bc::Pole } else { cut };
            Ok((RadialGrid::on_interval(m, 0.0, hi, cells)?, (Bc::Pole, right)))
        }
        Domain::Interval { r_min, r_max } => {
            let (a, b) = ((c - radius).max(r_min), (c + radius).min(r_max));
            Ok((RadialGrid::on_interval(m, a, b, cells)?, (cut, cut)))
        }
        Domain::Circle { length } => {
            if 2.0 * radius >= length * (1.0 - 1e-12) {
                return Err(Error::Config(format!("ball of radius {radius} wraps around the circle of length {length}")));
            }
            let line = ModelManifold::new(m.n(), Domain::Interval { r_min: 0.0, r_max: length }, Warp::Unit, m.density().clone())?;
            Ok((RadialGrid::on_interval(&line, c - radius, c + radius, cells)?, (cut, cut)))
        }
    }
}

/// Cells for a ball sub-grid of the given radius at the setup's spacing,
/// rounded up to a multiple of four and at least 64.
fn ball_cells(setup: &AuditSetup, width: f64) -> usize {
    let raw = (width / setup.h()).ceil() as usize;
    (raw.div_ceil(4) * 4).max(64)
}

/// Largest `∫_{B_R}|u - ū|²dμ / ∫_{B_{2R}}|∇u|²dμ` over the span of the first
/// 40 Neumann eigenfunctions of `B_{2R}` (per angular degree), against the
/// explicit constant `2^{n+3}(2b/a)^{1/c} exp(√(K_ε(2R)/c)·2R/a) R²`.
pub fn audit_poincare(setup: &AuditSetup, radii: &[f64]) -> Result<BoundReport> {
    const ID: &str = "neumann-poincare";
    if let Some(r) = setup.vacuous_report(ID) {
        return Ok(r);
    }
    let p = &setup.params;
    let n = setup.manifold.n() as f64;
    let mut out = Vec::new();
    for &radius in radii {
        if radius < 4.0 * setup.h() {
            return Err(Error::Config(format!(
                "Poincaré radius {radius} is below four grid spacings ({})",
                4.0 * setup.h()
            )));
        }
        let width = if setup.manifold.is_line_model() { 4.0 * radius } else { 2.0 * radius };
        let (lhs, l_best) = poincare_ratio(setup, radius, ball_cells(setup, width))?;
        let k = setup.k_eps_ball(2.0 * radius)?;
        let rhs = 2f64.powf(n + 3.0)
            * (2.0 * p.b / p.a).powf(1.0 / p.c)
            * ((k / p.c).sqrt() * 2.0 * radius / p.a).exp()
            * radius
            * radius;
        out.push(Sample::new(&[("R", radius), ("l", l_best as f64), ("K_eps", k)], lhs, Some(rhs)));
    }
    Ok(setup.annotate(BoundReport::explicit(ID, &setup.scenario, out, EXPLICIT_TOL)))
}

/// `(sup ratio, maximizing degree)` on a `cells`-cell grid of `B_{2R}`.
pub fn poincare_ratio(setup: &AuditSetup, radius: f64, cells: usize) -> Result<(f64, usize)> {
    let (grid, bcs) = ball_grid(setup, 2.0 * radius, cells, Bc::Neumann)?;
    let c = setup.center();
    let center = if setup.manifold.is_line_model() { c } else { 0.0 };
    let inner: Vec<usize> = (0..grid.len()).filter(|&i| (grid.nodes()[i] - center).abs() <= radius).collect();
    let mu = grid.measures();
    let l_max = if grid.is_line() { 0 } else { POINCARE_L_MAX };
    let mut best = (0.0_f64, 0);
    for l in 0..=l_max {
        let op = assemble_mode_operator(&grid, l, bcs)?;
        let pairs = mode_spectrum(&op, (POINCARE_BASIS + 1).min(grid.len()))?;
        // Drop the constant (the kernel of the Neumann problem) in the zonal mode.
        let basis: Vec<_> = pairs.into_iter().filter(|q| !(l == 0 && q.j == 0)).take(POINCARE_BASIS).collect();
        let vol: f64 = inner.iter().map(|&i| mu[i]).sum();
        let centred: Vec<Vec<f64>> = basis
            .iter()
            .map(|q| {
                let mean = if l == 0 { inner.iter().map(|&i| mu[i] * q.vector[i]).sum::<f64>() / vol } else { 0.0 };
                inner.iter().map(|&i| q.vector[i] - mean).collect()
            })
            .collect();
        let k = basis.len();
        let mut a = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in 0..=i {
                let mass: f64 = inner.iter().enumerate().map(|(s, &node)| mu[node] * centred[i][s] * centred[j][s]).sum();
                let v = mass / (basis[i].lambda * basis[j].lambda).sqrt();
                a[i][j] = v;
                a[j][i] = v;
            }
        }
        let (vals, _) = jacobi_eigen(a)?;
        let top = vals.last().copied().unwrap_or(0.0);
        if top > best.0 {
            best = (top, l);
        }
    }
    Ok(best)
}

/// Trial functions of the Sobolev audit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SobolevFamily {
    /// Include compactly supported `(1 - x²)²` bumps.
    pub bumps: bool,
    /// Number of zonal Dirichlet eigenfunctions of the ball.
    pub dirichlet_modes: usize,
}

impl Default for SobolevFamily {
    fn default() -> Self {
        Self { bumps: true, dirichlet_modes: 20 }
    }
}

fn bump(r: f64, s: f64, w: f64) -> f64 {
    let x = (r - s) / w;
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - x * x).powi(2)
    }
}

/// Empirical constant of the local Sobolev inequality on `B(R)`:
/// the largest `‖u‖²_q / (R² V(R)^{-2/ν} ∫(|∇u|² + R^{-2}u²)dμ)` with
/// `q = 2ν/(ν-2)`, at the setup's spacing and at half of it.
pub fn audit_sobolev(setup: &AuditSetup, radius: f64, family: SobolevFamily) -> Result<BoundReport> {
    const ID: &str = "local-sobolev";
    if let Some(r) = setup.vacuous_report(ID) {
        return Ok(r);
    }
    let width = if setup.manifold.is_line_model() { 2.0 * radius } else { radius };
    let cells = ball_cells(setup, width);
    let (coarse, _) = sobolev_constant(setup, radius, cells, family)?;
    let (fine, per_fn) = sobolev_constant(setup, radius, 2 * cells, family)?;
    let samples = per_fn
        .into_iter()
        .enumerate()
        .map(|(i, v)| Sample::new(&[("R", radius), ("trial", i as f64), ("cells", (2 * cells) as f64)], v, None))
        .collect();
    let nu = setup.params.nu;
    let r = BoundReport::empirical(ID, &setup.scenario, samples, coarse, fine)
        .with_note(format!("nu = {nu}, q = {}", 2.0 * nu / (nu - 2.0)));
    Ok(setup.annotate(r))
}

/// `(max ratio, ratio per trial function)` on a `cells`-cell ball grid.
pub fn sobolev_constant(setup: &AuditSetup, radius: f64, cells: usize, family: SobolevFamily) -> Result<(f64, Vec<f64>)> {
    let nu = setup.params.nu;
    if !(nu > 2.0) {
        return Err(Error::InvalidConstant(format!("Sobolev exponent needs ν > 2, got {nu}")));
    }
    let q = 2.0 * nu / (nu - 2.0);
    let (grid, bcs) = ball_grid(setup, radius, cells, Bc::Dirichlet)?;
    let op = assemble_mode_operator(&grid, 0, bcs)?;
    let mu = grid.measures();
    let vol = setup.manifold.ball_volume(setup.center(), radius)?;
    let mut trials: Vec<Vec<f64>> = Vec::new();
    if family.bumps {
        let shapes: Vec<(f64, f64)> = if grid.is_line() {
            let c = setup.center();
            vec![(c, radius), (c, radius / 2.0), (c, radius / 4.0), (c + radius / 2.0, radius / 2.0), (c - radius / 2.0, radius / 2.0), (c + radius / 4.0, radius / 4.0)]
        } else {
            vec![(0.0, radius), (0.0, radius / 2.0), (0.0, radius / 4.0), (radius / 4.0, radius / 4.0), (radius / 2.0, radius / 4.0), (0.6 * radius, 0.3 * radius)]
        };
        for (s, w) in shapes {
            trials.push(grid.nodes().iter().map(|&r| bump(r, s, w)).collect());
        }
    }
    if family.dirichlet_modes > 0 {
        for p in mode_spectrum(&op, family.dirichlet_modes.min(grid.len()))? {
            trials.push(p.vector);
        }
    }
    if trials.is_empty() {
        return Err(Error::Config("empty Sobolev test family".into()));
    }
    let r2 = radius * radius;
    let ratios: Vec<f64> = trials
        .iter()
        .map(|u| {
            let lq: f64 = u.iter().zip(mu).map(|(v, m)| v.abs().powf(q) * m).sum::<f64>().powf(2.0 / q);
            let l2: f64 = u.iter().zip(mu).map(|(v, m)| v * v * m).sum();
            let energy = op.energy(u) + l2 / r2;
            lq / (r2 * vol.powf(-2.0 / nu) * energy)
        })
        .collect();
    Ok((ratios.iter().copied().fold(0.0, f64::max), ratios))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::EffectiveDim;
    use crate::profile::Profile;

    fn euclid(n: usize, cells: usize) -> AuditSetup {
        let m = ModelManifold::new(n, Domain::PoleCap { r_max: 8.0 }, Warp::Euclidean, Profile::constant(0.0))
            .unwrap()
            .truncation_of_noncompact(true);
        AuditSetup::new("euclidean", m, EffectiveDim::Finite(n as f64), 0.0, Some(0.0), cells).unwrap()
    }

    #[test]
    fn poincare_on_euclidean_has_a_wide_margin() {
        let r = audit_poincare(&euclid(2, 400), &[1.0, 2.0]).unwrap();
        assert!(r.pass);
        for s in &r.samples {
            assert!(s.rhs.unwrap() / s.lhs >= 10.0, "{s:?}");
        }
    }

    #[test]
    fn poincare_rejects_tiny_balls() {
        assert!(matches!(audit_poincare(&euclid(2, 64), &[0.2]), Err(Error::Config(_))));
    }

    #[test]
    fn sobolev_constant_is_stable_on_euclidean_three_space() {
        let r = audit_sobolev(&euclid(3, 200), 2.0, SobolevFamily::default()).unwrap();
        assert!(r.pass, "{:?}", r.notes);
        assert!(r.empirical_constant.unwrap() > 0.0);
    }
}
