use std::f64::consts::PI;

use heatlab::audit::spectral_kernel;
use heatlab::discrete::assemble_mode_operator;
use heatlab::geometry::{Domain, Warp};
use heatlab::heat::{mass, solve_heat, stepped_column, Scheme};
use heatlab::profile::Profile;
use heatlab::{Grid, ModelManifold};
use proptest::prelude::*;

fn perturbed_sphere() -> ModelManifold {
    ModelManifold::new(2, Domain::PoleCap { r_max: PI }, Warp::Sphere, Profile::parse("0.05*cos(r)").unwrap()).unwrap()
}

fn circle(phi: &str) -> ModelManifold {
    ModelManifold::new(2, Domain::Circle { length: 2.0 * PI }, Warp::Unit, Profile::parse(phi).unwrap()).unwrap()
}

fn wrapped_gaussian(d: f64, t: f64) -> f64 {
    (-20i32..=20)
        .map(|k| {
            let x = d + 2.0 * PI * k as f64;
            (-x * x / (4.0 * t)).exp()
        })
        .sum::<f64>()
        / (4.0 * PI * t).sqrt()
}

#[test]
fn kernel_is_symmetric() {
    for (m, zonal) in [(perturbed_sphere(), false), (circle("0.3*sin(r)"), false)] {
        let (grid, k) = spectral_kernel(&m, 96, 0.05, zonal).unwrap();
        for t in [0.05, 0.3, 1.0] {
            for i in (0..grid.len()).step_by(7) {
                for j in (0..grid.len()).step_by(5) {
                    let (a, b) = (k.eval(i, j, t).unwrap(), k.eval(j, i, t).unwrap());
                    assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{i} {j} {t}: {a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn kernel_has_the_semigroup_property() {
    let m = circle("0.3*sin(r) + 0.1*cos(2*r)");
    let (grid, k) = spectral_kernel(&m, 128, 0.05, false).unwrap();
    let mu = grid.measures();
    for (s, t) in [(0.05, 0.1), (0.2, 0.3), (0.5, 1.0)] {
        let top = k.column(0, s + t).unwrap().iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        for i in [0usize, 17, 64] {
            for j in [0usize, 40, 100] {
                let composed: f64 = (0..grid.len()).map(|q| k.eval(i, q, s).unwrap() * k.eval(q, j, t).unwrap() * mu[q]).sum();
                let direct = k.eval(i, j, s + t).unwrap();
                assert!((composed - direct).abs() <= 1e-8 * top, "({i}, {j}) s = {s} t = {t}");
            }
        }
    }
}

#[test]
fn neumann_mass_is_conserved_per_step() {
    let cases = [
        ModelManifold::new(2, Domain::Interval { r_min: 0.0, r_max: 3.0 }, Warp::Unit, Profile::parse("r^2 - r").unwrap()).unwrap(),
        perturbed_sphere(),
        circle("0.2*cos(r)"),
    ];
    for m in &cases {
        let grid = Grid::new(m, 200).unwrap();
        let op = assemble_mode_operator(&grid, 0, grid.natural_bcs()).unwrap();
        let u0: Vec<f64> = grid.nodes().iter().map(|r| 1.0 + (3.0 * r).sin().powi(2) + r).collect();
        for scheme in [Scheme::BackwardEuler, Scheme::CrankNicolson, Scheme::Rannacher] {
            let sol = solve_heat(&op, &u0, 0.5, 0.01, scheme).unwrap();
            let m0 = mass(&u0, &grid);
            for w in sol.values.windows(2) {
                let drift = (mass(&w[1], &grid) - mass(&w[0], &grid)).abs();
                assert!(drift <= 1e-12 * m0, "{:?} {scheme:?}: drift {drift}", m.domain());
            }
        }
    }
}

#[test]
fn flat_circle_matches_the_wrapped_gaussian() {
    let m = circle("0");
    let (grid, k) = spectral_kernel(&m, 16384, 0.05, false).unwrap();
    for t in [0.05, 0.1, 0.3, 1.0, 2.0] {
        let col = k.column(0, t).unwrap();
        let x0 = grid.nodes()[0];
        for (r, h) in grid.nodes().iter().zip(&col).step_by(97) {
            let exact = wrapped_gaussian(r - x0, t);
            assert!((h - exact).abs() <= 1e-6, "t = {t}, r = {r}: {h} vs {exact}");
        }
    }
}

#[test]
fn time_stepping_approaches_the_spectral_kernel() {
    let m = perturbed_sphere();
    let (grid, k) = spectral_kernel(&m, 128, 0.1, true).unwrap();
    let op = assemble_mode_operator(&grid, 0, grid.natural_bcs()).unwrap();
    let exact = k.column(0, 0.2).unwrap();
    let top = exact.iter().fold(0.0_f64, |a, v| a.max(*v));
    let err = |dt: f64| {
        let u = stepped_column(&op, 0, 0.2, dt, Scheme::Rannacher).unwrap();
        u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / top
    };
    let (coarse, fine) = (err(0.004), err(0.002));
    assert!(fine < 1e-3, "{fine}");
    // Second order in time.
    assert!(coarse / fine > 3.0, "{coarse} / {fine}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn backward_euler_is_positive_and_contractive(
        u0 in prop::collection::vec(0.0f64..5.0, 60),
        a in -0.5f64..0.5,
        dt in 0.001f64..0.2,
    ) {
        let m = ModelManifold::new(2, Domain::Interval { r_min: 0.0, r_max: 2.0 }, Warp::Unit, Profile::parse(&format!("{a}*r^2")).unwrap()).unwrap();
        let grid = Grid::new(&m, 60).unwrap();
        let op = assemble_mode_operator(&grid, 0, grid.natural_bcs()).unwrap();
        let sol = solve_heat(&op, &u0, 5.0 * dt, dt, Scheme::BackwardEuler).unwrap();
        let (lo, hi) = u0.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
        for u in &sol.values {
            prop_assert!(u.iter().all(|v| *v >= lo - 1e-12 && *v <= hi + 1e-12));
        }
        let m0 = mass(&u0, &grid);
        prop_assert!((mass(sol.last(), &grid) - m0).abs() <= 1e-11 * (1.0 + m0));
    }

    #[test]
    fn kernel_columns_are_positive_with_unit_mass(t in 0.05f64..2.0, j in 0usize..64) {
        let m = circle("0.4*cos(r)");
        let (grid, k) = spectral_kernel(&m, 64, 0.05, false).unwrap();
        let col = k.column(j, t).unwrap();
        prop_assert!(col.iter().all(|v| *v > 0.0));
        prop_assert!((mass(&col, &grid) - 1.0).abs() < 1e-10);
    }
}
