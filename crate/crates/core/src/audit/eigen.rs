//! Lower bound on the growth of the eigenvalues of a compact model.

use super::{fit_line, AuditSetup, BoundReport, Sample};
use crate::discrete::{full_spectrum, RadialGrid};
use crate::error::{Error, Result};
use crate::geometry::ModelManifold;

/// Largest angular degree tried when collecting eigenvalues.
const L_LIMIT: usize = 512;

/// The first `count` eigenvalues (multiplicities expanded) of the natural
/// operator on a `cells`-cell grid, growing the per-mode depth and the
/// angular degree until the complete part is long enough.
pub fn first_eigenvalues(m: &ModelManifold, cells: usize, count: usize) -> Result<Vec<f64>> {
    let grid = RadialGrid::new(m, cells)?;
    let bcs = grid.natural_bcs();
    let mut k = 16.min(cells);
    let mut l_max = if grid.is_line() { 0 } else { 8 };
    loop {
        let sp = full_spectrum(&grid, bcs, l_max, k)?;
        let ex = sp.expanded();
        if ex.len() >= count {
            return Ok(ex.into_iter().take(count).map(|e| e.0).collect());
        }
        // The complete part ends at the first truncated mode; grow whichever ran out.
        let short_mode = (0..=l_max).any(|l| sp.mode_complete_below(l) <= sp.complete_below() * (1.0 + 1e-12));
        if short_mode && k < cells {
            k = (2 * k).min(cells);
        } else if !grid.is_line() && l_max < L_LIMIT {
            l_max = (2 * l_max).min(L_LIMIT);
        } else {
            return Err(Error::Incomplete { needed: count as f64, complete_below: ex.len() as f64 });
        }
    }
}

/// `min_{1≤k≤k_max} λ_k d²/(k+1)^{2c/(c+1)}`.
pub fn eigenvalue_constant(lambdas: &[f64], c: f64, d: f64) -> f64 {
    let e = 2.0 * c / (c + 1.0);
    lambdas
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, l)| l * d * d / ((k + 1) as f64).powf(e))
        .fold(f64::INFINITY, f64::min)
}

/// Empirical constant of `λ_k ≥ C (k+1)^{2c/(c+1)}/d²` over `1 ≤ k ≤ k_max`
/// with `d` the diameter, at `h` and `h/2`, plus a regression of `ln λ_k`
/// against `ln(k+1)` over the top decade of `k`.
///
/// With `K ≠ 0` the extra factor `exp(C√(K_ε) d)` does not depend on `k`,
/// so it is absorbed into the empirical constant.
pub fn audit_eigenvalue_lower(setup: &AuditSetup, k_max: usize) -> Result<BoundReport> {
    const ID: &str = "eigenvalue-lower";
    let m = &setup.manifold;
    if m.is_noncompact_truncation() {
        return Err(Error::Domain("eigenvalue growth needs a compact model".into()));
    }
    if k_max < 10 {
        return Err(Error::Config(format!("need at least 10 eigenvalues for the growth fit, got {k_max}")));
    }
    if let Some(r) = setup.vacuous_report(ID) {
        return Ok(r);
    }
    let c = setup.params.c;
    let d = m.diameter();
    let coarse_l = first_eigenvalues(m, setup.cells, k_max + 1)?;
    let fine_l = first_eigenvalues(m, 2 * setup.cells, k_max + 1)?;
    let coarse = eigenvalue_constant(&coarse_l, c, d);
    let fine = eigenvalue_constant(&fine_l, c, d);
    let lo = (k_max / 10).max(1);
    let (xs, ys): (Vec<f64>, Vec<f64>) = (lo..=k_max).map(|k| (((k + 1) as f64).ln(), fine_l[k].ln())).unzip();
    let fit = fit_line(&xs, &ys)?;
    let floor = 2.0 * c / (c + 1.0) - 0.05;
    let samples = fine_l
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, l)| Sample::new(&[("k", k as f64), ("d", d)], *l, None))
        .collect();
    let mut r = BoundReport::empirical(ID, &setup.scenario, samples, coarse, fine)
        .with_shape(fit.shape("growth_exponent"))
        .with_note(format!("d = diameter = {d}; growth exponent floor {floor}"));
    if setup.params.k != 0.0 {
        r = r.with_note("K ≠ 0: the k-independent exponential factor is absorbed into the constant");
    }
    if fit.slope < floor {
        r = r.failed(format!("growth exponent {} below {floor}", fit.slope));
    }
    Ok(setup.annotate(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, EffectiveDim, Warp};
    use crate::profile::Profile;
    use std::f64::consts::PI;

    #[test]
    fn circle_constant_from_the_fourier_spectrum() {
        // λ_k = ⌈k/2⌉², d = π, c = 1.
        let l: Vec<f64> = (0..40).map(|k: usize| (k.div_ceil(2) as f64).powi(2)).collect();
        let c = eigenvalue_constant(&l, 1.0, PI);
        let oracle = (1..40).map(|k: usize| (k.div_ceil(2) as f64).powi(2) * PI * PI / (k + 1) as f64).fold(f64::INFINITY, f64::min);
        assert!((c - oracle).abs() < 1e-14);
    }

    #[test]
    fn sphere_growth_is_linear_and_stable() {
        let m = ModelManifold::new(2, Domain::PoleCap { r_max: PI }, Warp::Sphere, Profile::constant(0.0)).unwrap();
        let s = AuditSetup::new("sphere2", m, EffectiveDim::Finite(2.0), 0.0, None, 256).unwrap();
        let r = audit_eigenvalue_lower(&s, 60).unwrap();
        assert!(r.pass, "{:?}", r.notes);
        assert!(r.shape_exponents.unwrap()[0].value >= 0.95);
    }
}
