//! Laplacian comparison, volume comparison, doubling and cross-centre ratios.

use super::{AuditSetup, BoundReport, Sample, EXPLICIT_TOL};
use crate::comparison::{
    cross_center_ratio_bound, doubling_bound, laplacian_comparison_pair, volume_cap, volume_ratio_bound,
    ComparisonProfile,
};
use crate::error::{Error, Result};
use crate::geometry::Domain;

/// `Δ_φ r` against the comparison bound at `samples` interior radii.
/// Pole caps only: the distance from the pole is the radial coordinate.
pub fn audit_laplacian_comparison(setup: &AuditSetup, samples: usize) -> Result<BoundReport> {
    const ID: &str = "laplacian-comparison";
    let Domain::PoleCap { r_max } = setup.manifold.domain() else {
        return Err(Error::Domain("Laplacian comparison needs a pole-cap model".into()));
    };
    if let Some(r) = setup.vacuous_report(ID) {
        return Ok(r);
    }
    let p = &setup.params;
    let prof = ComparisonProfile::from_params(p)?;
    let hi = match prof.clip() {
        Some(cap) => r_max.min(p.b * cap),
        None => r_max,
    };
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples.max(1) {
        let r = hi * (i as f64 + 0.5) / samples.max(1) as f64;
        let (lhs, rhs) = laplacian_comparison_pair(&setup.manifold, p, r)?;
        out.push(Sample::new(&[("r", r)], lhs, Some(rhs)));
    }
    Ok(setup.annotate(BoundReport::explicit(ID, &setup.scenario, out, EXPLICIT_TOL)))
}

/// Radii `ext·k/count`, `k = 1..=count`, with `ext` limited by the domain
/// and by the comparison cap `bπ/(c√K)`.
fn radii(setup: &AuditSetup, count: usize, share: f64) -> Vec<f64> {
    let ext = match volume_cap(&setup.params) {
        Some(cap) => setup.max_radius().min(cap),
        None => setup.max_radius(),
    } * share;
    (1..=count).map(|k| ext * k as f64 / count as f64).collect()
}

/// Measured `V(R)/V(r)` against the Bishop–Gromov-type bound on a grid of
/// radius pairs around the default centre.
pub fn audit_volume_comparison(setup: &AuditSetup, count: usize) -> Result<BoundReport> {
    const ID: &str = "volume-comparison";
    if let Some(r) = setup.vacuous_report(ID) {
        return Ok(r);
    }
    let m = &setup.manifold;
    let x = setup.center();
    let rs = radii(setup, count, 1.0);
    let vols: Vec<f64> = rs.iter().map(|r| m.ball_volume(x, *r)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for i in 0..rs.len() {
        for j in i..rs.len() {
            let rhs = volume_ratio_bound(&setup.params, rs[i], rs[j])?;
            out.push(Sample::new(&[("r", rs[i]), ("R", rs[j])], vols[j] / vols[i], Some(rhs)));
        }
    }
    Ok(setup.annotate(BoundReport::explicit(ID, &setup.scenario, out, EXPLICIT_TOL)))
}

/// `V(2R₁)/V(R₁)` against the doubling bound.
pub fn audit_doubling(setup: &AuditSetup, count: usize) -> Result<BoundReport> {
    const ID: &str = "volume-doubling";
    if let Some(r) = setup.vacuous_report(ID) {
        return Ok(r);
    }
    let m = &setup.manifold;
    let x = setup.center();
    let mut out = Vec::new();
    for r1 in radii(setup, count, 0.5) {
        let lhs = m.ball_volume(x, 2.0 * r1)? / m.ball_volume(x, r1)?;
        out.push(Sample::new(&[("R1", r1)], lhs, Some(doubling_bound(&setup.params, r1)?)));
    }
    Ok(setup.annotate(BoundReport::explicit(ID, &setup.scenario, out, EXPLICIT_TOL)))
}

/// `V_x(s)/V_y(s)` against the `(s + d)/s` bound.
///
/// Line models measure both balls exactly. On pole caps only pole-centred
/// balls are computable, so the audit takes `y` at the pole and `x` at
/// distance `d` on a ray, and uses the enclosure `B_x(s) ⊂ B_pole(s + d)`:
/// the left side recorded is the upper estimate `V_pole(s + d)/V_pole(s)`.
pub fn audit_cross_center(setup: &AuditSetup, count: usize) -> Result<BoundReport> {
    const ID: &str = "cross-center-ratio";
    if let Some(r) = setup.vacuous_report(ID) {
        return Ok(r);
    }
    let m = &setup.manifold;
    let c = setup.center();
    let ext = setup.max_radius();
    let ss = radii(setup, count, 0.5);
    let mut out = Vec::new();
    let pole = matches!(m.domain(), Domain::PoleCap { .. });
    for &s in &ss {
        for k in 0..=4 {
            let d = 0.5 * ext * k as f64 / 4.0;
            let rhs = cross_center_ratio_bound(&setup.params, s, d)?;
            if pole {
                let big = (s + d).min(ext);
                let lhs = m.pole_ball_volume(big)? / m.pole_ball_volume(s)?;
                out.push(Sample::new(&[("s", s), ("d", d)], lhs, Some(rhs)));
            } else {
                let (vx, vy) = (m.ball_volume(c + d, s)?, m.ball_volume(c, s)?);
                out.push(Sample::new(&[("s", s), ("d", d), ("order", 0.0)], vx / vy, Some(rhs)));
                out.push(Sample::new(&[("s", s), ("d", d), ("order", 1.0)], vy / vx, Some(rhs)));
            }
        }
    }
    let r = BoundReport::explicit(ID, &setup.scenario, out, EXPLICIT_TOL);
    let r = if pole { r.with_note("pole cap: off-pole ball bounded by the enclosing pole-centred ball") } else { r };
    Ok(setup.annotate(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{EffectiveDim, ModelManifold, Warp};
    use crate::profile::Profile;
    use std::f64::consts::PI;

    fn sphere(k: Option<f64>) -> AuditSetup {
        let m = ModelManifold::new(2, Domain::PoleCap { r_max: PI }, Warp::Sphere, Profile::constant(0.0)).unwrap();
        AuditSetup::new("sphere2", m, EffectiveDim::Finite(2.0), 0.0, k, 64).unwrap()
    }

    #[test]
    fn model_sphere_is_an_equality_case() {
        let r = audit_laplacian_comparison(&sphere(None), 100).unwrap();
        assert!(r.pass && !r.vacuous);
        for s in &r.samples {
            assert!((s.lhs - s.rhs.unwrap()).abs() < 1e-9);
        }
        let v = audit_volume_comparison(&sphere(None), 8).unwrap();
        assert!(v.pass);
        for s in &v.samples {
            assert!((s.lhs / s.rhs.unwrap() - 1.0).abs() < 1e-6, "{s:?}");
        }
    }

    #[test]
    fn too_large_k_is_vacuous() {
        for r in [
            audit_laplacian_comparison(&sphere(Some(1.2)), 10).unwrap(),
            audit_volume_comparison(&sphere(Some(1.2)), 4).unwrap(),
            audit_doubling(&sphere(Some(1.2)), 4).unwrap(),
            audit_cross_center(&sphere(Some(1.2)), 4).unwrap(),
        ] {
            assert!(r.vacuous && r.pass && r.samples.is_empty());
        }
    }

    #[test]
    fn doubling_and_cross_center_hold_on_line_models() {
        let m = ModelManifold::new(2, Domain::Interval { r_min: 0.0, r_max: 4.0 }, Warp::Unit, Profile::parse("0.3*sin(r)").unwrap())
            .unwrap();
        let s = AuditSetup::new("interval", m, EffectiveDim::Infinite, 0.5, None, 64).unwrap();
        assert!(audit_doubling(&s, 8).unwrap().pass);
        let c = audit_cross_center(&s, 4).unwrap();
        assert!(c.pass, "{:?}", c.notes);
        assert!(audit_laplacian_comparison(&s, 4).is_err());
    }
}
