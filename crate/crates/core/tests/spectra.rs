use std::f64::consts::PI;

use heatlab::discrete::{assemble_mode_operator, full_spectrum, mode_spectrum, RadialGrid};
use heatlab::geometry::{Domain, Warp};
use heatlab::profile::Profile;
use heatlab::ModelManifold;
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

fn line(domain: Domain, phi: &str) -> ModelManifold {
    ModelManifold::new(2, domain, Warp::Unit, Profile::parse(phi).unwrap()).unwrap()
}

fn dense_eigenvalues(grid: &heatlab::Grid, l: usize) -> Vec<f64> {
    let op = assemble_mode_operator(grid, l, grid.natural_bcs()).unwrap();
    let t = op.symmetric_negative();
    let m = t.dim();
    let mut a = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        a[(i, i)] = t.diag[i];
    }
    for (i, e) in t.off.iter().enumerate() {
        a[(i, i + 1)] += *e;
        a[(i + 1, i)] += *e;
    }
    if let Some(w) = t.wrap {
        a[(0, m - 1)] += w;
        a[(m - 1, 0)] += w;
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

#[test]
fn bisection_agrees_with_a_dense_solver() {
    let cases = [
        line(Domain::Interval { r_min: 0.0, r_max: 3.0 }, "0.4*sin(r) + 0.1*r^2"),
        line(Domain::Circle { length: 2.0 * PI }, "0.3*cos(r) + 0.1*sin(2*r)"),
        ModelManifold::new(3, Domain::PoleCap { r_max: PI }, Warp::Sphere, Profile::parse("0.2*cos(r)").unwrap()).unwrap(),
        ModelManifold::new(2, Domain::PoleCap { r_max: 4.0 }, Warp::Hyperbolic, Profile::constant(0.0)).unwrap(),
    ];
    for m in &cases {
        let grid = heatlab::Grid::new(m, 120).unwrap();
        for l in [0usize, 1, 3] {
            if grid.is_line() && l > 0 {
                continue;
            }
            let dense = dense_eigenvalues(&grid, l);
            let op = assemble_mode_operator(&grid, l, grid.natural_bcs()).unwrap();
            let ours = mode_spectrum(&op, 25).unwrap();
            let scale = dense.last().unwrap().abs();
            for (p, d) in ours.iter().zip(&dense) {
                assert!((p.lambda - d).abs() <= 1e-10 * scale, "{:?} l = {l}: {} vs {d}", m.domain(), p.lambda);
            }
        }
    }
}

#[test]
fn eigenvectors_are_orthonormal_in_the_weighted_inner_product() {
    let m = line(Domain::Interval { r_min: -2.0, r_max: 2.0 }, "r^2");
    let grid = heatlab::Grid::new(&m, 200).unwrap();
    let op = assemble_mode_operator(&grid, 0, grid.natural_bcs()).unwrap();
    let pairs = mode_spectrum(&op, 12).unwrap();
    for a in &pairs {
        let lu = op.apply(&a.vector);
        for (x, u) in lu.iter().zip(&a.vector) {
            assert!((x + a.lambda * u).abs() < 1e-8 * (1.0 + a.lambda));
        }
        for b in &pairs {
            let ip = grid.inner(&a.vector, &b.vector);
            let expect = if a.j == b.j { 1.0 } else { 0.0 };
            assert!((ip - expect).abs() < 1e-10, "({}, {}) = {ip}", a.j, b.j);
        }
    }
}

#[test]
fn neumann_interval_converges_at_second_order() {
    let m = line(Domain::Interval { r_min: 0.0, r_max: PI }, "0");
    let errors: Vec<Vec<f64>> = [64usize, 128, 256]
        .iter()
        .map(|&cells| {
            let grid = heatlab::Grid::new(&m, cells).unwrap();
            let op = assemble_mode_operator(&grid, 0, grid.natural_bcs()).unwrap();
            let pairs = mode_spectrum(&op, 6).unwrap();
            (1..6).map(|k| (pairs[k].lambda - (k * k) as f64).abs()).collect()
        })
        .collect();
    for k in 0..5 {
        for w in errors.windows(2) {
            let order = (w[0][k] / w[1][k]).log2();
            assert!((order - 2.0).abs() <= 0.25, "mode {}: order {order}", k + 1);
        }
    }
}

#[test]
fn round_sphere_spectrum_with_multiplicities() {
    let m = ModelManifold::new(2, Domain::PoleCap { r_max: PI }, Warp::Sphere, Profile::constant(0.0)).unwrap();
    let grid = heatlab::Grid::new(&m, 2048).unwrap();
    let sp = full_spectrum(&grid, grid.natural_bcs(), 10, 12).unwrap();
    let ours = sp.expanded();
    assert!(ours.len() >= 50);
    let exact: Vec<f64> = (0..10usize).flat_map(|j| std::iter::repeat((j * (j + 1)) as f64).take(2 * j + 1)).collect();
    for (k, ((lam, l, jr), e)) in ours.iter().zip(&exact).take(50).enumerate() {
        // Degree j = l + radial index; the ordering must follow j(j+1).
        assert_eq!(((l + jr) * (l + jr + 1)) as f64, *e, "entry {k}");
        assert!((lam - e).abs() <= 0.01 * e.max(1.0), "entry {k}: {lam} vs {e}");
    }
}

#[test]
fn ornstein_uhlenbeck_spectrum() {
    // Δ_φ = d²/dr² - 2r d/dr has the Hermite spectrum {2k}.
    let m = line(Domain::Interval { r_min: -8.0, r_max: 8.0 }, "r^2");
    let grid = heatlab::Grid::new(&m, 4096).unwrap();
    let op = assemble_mode_operator(&grid, 0, grid.natural_bcs()).unwrap();
    let pairs = mode_spectrum(&op, 11).unwrap();
    for (k, p) in pairs.iter().enumerate() {
        assert!((p.lambda - 2.0 * k as f64).abs() < 1e-3, "k = {k}: {}", p.lambda);
    }
}

#[test]
fn f32_and_f64_spectra_agree() {
    let m = line(Domain::Circle { length: 2.0 * PI }, "0.2*cos(r)");
    let g64 = RadialGrid::<f64>::new(&m, 64).unwrap();
    let g32 = RadialGrid::<f32>::new(&m, 64).unwrap();
    let a = mode_spectrum(&assemble_mode_operator(&g64, 0, g64.natural_bcs()).unwrap(), 8).unwrap();
    let b = mode_spectrum(&assemble_mode_operator(&g32, 0, g32.natural_bcs()).unwrap(), 8).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x.lambda - y.lambda as f64).abs() < 1e-3 * (1.0 + x.lambda));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operator_is_self_adjoint_and_dissipative(
        a1 in -0.5f64..0.5, a2 in -0.3f64..0.3,
        u in prop::collection::vec(-1.0f64..1.0, 40),
        v in prop::collection::vec(-1.0f64..1.0, 40),
        l in 0usize..4,
    ) {
        let m = ModelManifold::new(
            3,
            Domain::PoleCap { r_max: PI },
            Warp::Sphere,
            Profile::parse(&format!("{a1}*cos(r) + {a2}*cos(2*r)")).unwrap(),
        ).unwrap();
        let grid = heatlab::Grid::new(&m, 40).unwrap();
        let op = assemble_mode_operator(&grid, l, grid.natural_bcs()).unwrap();
        let (lu, lv) = (op.apply(&u), op.apply(&v));
        let uv = op.inner(&lu, &v);
        let vu = op.inner(&u, &lv);
        prop_assert!((uv - vu).abs() <= 1e-9 * (1.0 + uv.abs()));
        prop_assert!(op.inner(&lu, &u) <= 1e-12);
    }

    #[test]
    fn spectrum_is_sorted_and_nonnegative(a in -0.6f64..0.6, cells in 24usize..80) {
        let m = line(Domain::Interval { r_min: 0.0, r_max: 2.0 }, &format!("{a}*r^2"));
        let grid = heatlab::Grid::new(&m, cells).unwrap();
        let op = assemble_mode_operator(&grid, 0, grid.natural_bcs()).unwrap();
        let pairs = mode_spectrum(&op, 10).unwrap();
        prop_assert!(pairs[0].lambda.abs() < 1e-9);
        prop_assert!(pairs.windows(2).all(|w| w[0].lambda <= w[1].lambda));
    }
}
