use std::f64::consts::PI;
use std::time::Instant;

use approx::assert_relative_eq;
use heatlab::comparison::{comparison_s, laplacian_comparison_pair, same_center_ratio_bound, volume_ratio_bound};
use heatlab::geometry::{curvature_constant_c, validate_eps_range, CurvatureParams, Domain, EffectiveDim, Warp};
use heatlab::profile::Profile;
use heatlab::ModelManifold;
use proptest::prelude::*;

struct Model {
    warp: Warp,
    r_max: f64,
    /// Ricci lower bound of the round metric, `(n-1)κ`.
    kappa: f64,
}

fn models() -> Vec<Model> {
    vec![
        Model { warp: Warp::Euclidean, r_max: 10.0, kappa: 0.0 },
        Model { warp: Warp::Sphere, r_max: PI, kappa: 1.0 },
        Model { warp: Warp::Hyperbolic, r_max: 10.0, kappa: -1.0 },
    ]
}

// Mean curvature of geodesic spheres in the space form of curvature κ.
fn mean_curvature(n: usize, kappa: f64, r: f64) -> f64 {
    let m = (n - 1) as f64;
    if kappa > 0.0 {
        m / r.tan()
    } else if kappa < 0.0 {
        m / r.tanh()
    } else {
        m / r
    }
}

// Ball volume up to the sphere-area factor, integrated by hand.
fn ball_volume(n: usize, kappa: f64, r: f64) -> f64 {
    match (n, kappa > 0.0, kappa < 0.0) {
        (2, true, _) => 1.0 - r.cos(),
        (3, true, _) => 0.5 * (r - r.sin() * r.cos()),
        (2, _, true) => r.cosh() - 1.0,
        (3, _, true) => 0.5 * (r.sinh() * r.cosh() - r),
        (n, _, _) => r.powi(n as i32) / n as f64,
    }
}

#[test]
fn space_forms_are_equality_cases() {
    let start = Instant::now();
    for n in [2usize, 3] {
        for m in models() {
            let man = ModelManifold::new(n, Domain::PoleCap { r_max: m.r_max }, m.warp.clone(), Profile::constant(0.0)).unwrap();
            let k = (n - 1) as f64 * m.kappa;
            let p = CurvatureParams::from_parts(n, EffectiveDim::Finite(n as f64), 0.0, k, 1.0, 1.0).unwrap();
            for i in 1..=100 {
                let r = m.r_max * i as f64 / 101.0;
                let (lhs, rhs) = laplacian_comparison_pair(&man, &p, r).unwrap();
                let exact = mean_curvature(n, m.kappa, r);
                assert!((lhs - exact).abs() <= 1e-9 * exact.abs().max(1.0), "{n} {:?} r = {r}", m.warp);
                assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0), "{n} {:?} r = {r}: {lhs} vs {rhs}", m.warp);
            }
            let radii = [0.1, 0.5, 1.0, 2.0, 3.0];
            for (a, &r) in radii.iter().enumerate() {
                for &big_r in &radii[a..] {
                    if big_r >= m.r_max {
                        continue;
                    }
                    let bound = volume_ratio_bound(&p, r, big_r).unwrap();
                    let measured = ball_volume(n, m.kappa, big_r) / ball_volume(n, m.kappa, r);
                    assert_relative_eq!(bound, measured, max_relative = 1e-6);
                    let lib = man.pole_ball_volume(big_r).unwrap() / man.pole_ball_volume(r).unwrap();
                    assert_relative_eq!(lib, measured, max_relative = 1e-6);
                }
            }
        }
    }
    assert!(start.elapsed().as_secs_f64() < 1.0, "took {:?}", start.elapsed());
}

#[test]
fn dimension_below_n_is_rejected() {
    assert!(validate_eps_range(EffectiveDim::Finite(1.5), 3, 0.0).is_err());
    assert!(curvature_constant_c(EffectiveDim::Finite(1.0), 3, 0.1).is_err());
    assert_eq!(curvature_constant_c(EffectiveDim::Finite(3.0), 3, 7.0).unwrap(), 0.5);
}

proptest! {
    #[test]
    fn eps_range_matches_the_closed_form(n in 2usize..6, extra in 0.01f64..40.0, frac in 0.0f64..0.999) {
        let big_n = n as f64 + extra;
        let bound = ((big_n - 1.0) / (big_n - n as f64)).sqrt();
        let eps = frac * bound;
        let c = curvature_constant_c(EffectiveDim::Finite(big_n), n, eps).unwrap();
        let expect = (1.0 - eps * eps * (big_n - n as f64) / (big_n - 1.0)) / (n as f64 - 1.0);
        prop_assert!((c - expect).abs() < 1e-12);
        prop_assert!(c > 0.0);
        prop_assert!(!validate_eps_range(EffectiveDim::Finite(big_n), n, bound * 1.001).unwrap().admissible);
    }

    #[test]
    fn infinite_dimension_is_the_limit(n in 2usize..6, eps in -0.999f64..0.999) {
        let inf = curvature_constant_c(EffectiveDim::Infinite, n, eps).unwrap();
        let far = curvature_constant_c(EffectiveDim::Finite(1e9), n, eps).unwrap();
        prop_assert!((inf - far).abs() < 1e-8);
    }

    #[test]
    fn comparison_function_solves_its_ode(k in -4.0f64..4.0, t in 0.01f64..1.2) {
        // s'' + K s = 0, s(0) = 0, s'(0) = 1, checked by central differences.
        let h = 1e-4;
        let s = |x: f64| comparison_s(k, x);
        let second = (s(t + h) - 2.0 * s(t) + s(t - h)) / (h * h);
        prop_assert!((second + k * s(t)).abs() < 1e-5 * (1.0 + s(t).abs()));
        prop_assert!(((s(h) - s(-h)) / (2.0 * h) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn volume_bound_grows_with_the_outer_radius(c in 0.2f64..1.0, k in -2.0f64..0.0, r in 0.05f64..2.0, g1 in 1.0f64..3.0, g2 in 1.0f64..3.0) {
        let n = 2;
        // c = 1/(n-1)(1 - ε²) at N = ∞ with n = 2.
        let eps = (1.0 - c).sqrt();
        let p = CurvatureParams::from_parts(n, EffectiveDim::Infinite, eps, k, 1.0, 1.0).unwrap();
        let a = volume_ratio_bound(&p, r, r * g1).unwrap();
        let b = volume_ratio_bound(&p, r, r * g1 * g2).unwrap();
        prop_assert!(a >= 1.0 - 1e-9);
        prop_assert!(b >= a * (1.0 - 1e-9));
    }

    #[test]
    fn same_center_bound_dominates_the_flat_power(c in 0.2f64..1.0, k in -2.0f64..2.0, s in 0.05f64..2.0, g in 1.0f64..4.0, ratio in 1.0f64..3.0) {
        let eps = (1.0 - c).sqrt();
        let p = CurvatureParams::from_parts(2, EffectiveDim::Infinite, eps, k, 1.0, ratio).unwrap();
        let bound = same_center_ratio_bound(&p, s, s * g).unwrap();
        prop_assert!(bound >= g.powf((1.0 + p.c) / p.c) * (1.0 - 1e-12));
    }
}
