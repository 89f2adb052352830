//! Named models with default curvature parameters.

use std::f64::consts::PI;

use heatlab::geometry::{Domain, EffectiveDim, ModelManifold, Warp};
use heatlab::profile::Profile;

use crate::error::{RunError, RunResult};

/// Catalog tags, in listing order.
pub const TAGS: &[&str] = &[
    "euclidean2",
    "euclidean3",
    "sphere2",
    "sphere2-constdensity",
    "sphere2-perturbed",
    "sphere3",
    "hyperbolic2",
    "circle",
    "interval",
    "gaussian-density-interval",
];

/// Radius at which the noncompact models are truncated.
pub const TRUNCATION_RADIUS: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub manifold: ModelManifold,
    pub big_n: EffectiveDim,
    pub eps: f64,
    /// `None`: take the admissible value from the curvature scan.
    pub k: Option<f64>,
}

fn model(n: usize, domain: Domain, warp: Warp, density: &str) -> ModelManifold {
    ModelManifold::new(n, domain, warp, Profile::parse(density).expect("catalog density parses"))
        .expect("catalog models are valid")
}

pub fn entry(tag: &str) -> RunResult<CatalogEntry> {
    let flat = |n: usize| EffectiveDim::Finite(n as f64);
    let cap = Domain::PoleCap { r_max: TRUNCATION_RADIUS };
    let sphere = Domain::PoleCap { r_max: PI };
    let e = match tag {
        "euclidean2" | "euclidean3" => {
            let n = if tag == "euclidean2" { 2 } else { 3 };
            CatalogEntry {
                manifold: model(n, cap, Warp::Euclidean, "0").truncation_of_noncompact(true),
                big_n: flat(n),
                eps: 0.0,
                k: Some(0.0),
            }
        }
        "sphere2" | "sphere2-constdensity" => {
            CatalogEntry { manifold: model(2, sphere, Warp::Sphere, "0"), big_n: flat(2), eps: 0.0, k: Some(1.0) }
        }
        "sphere2-perturbed" => CatalogEntry {
            manifold: model(2, sphere, Warp::Sphere, "0.05*cos(r)"),
            big_n: EffectiveDim::Finite(10.0),
            eps: 1.0,
            k: None,
        },
        "sphere3" => CatalogEntry { manifold: model(3, sphere, Warp::Sphere, "0"), big_n: flat(3), eps: 0.0, k: Some(2.0) },
        "hyperbolic2" => CatalogEntry {
            manifold: model(2, cap, Warp::Hyperbolic, "0").truncation_of_noncompact(true),
            big_n: flat(2),
            eps: 0.0,
            k: Some(-1.0),
        },
        "circle" => CatalogEntry {
            manifold: model(2, Domain::Circle { length: 2.0 * PI }, Warp::Unit, "0"),
            big_n: flat(2),
            eps: 0.0,
            k: Some(0.0),
        },
        "interval" => CatalogEntry {
            manifold: model(2, Domain::Interval { r_min: 0.0, r_max: PI }, Warp::Unit, "0"),
            big_n: flat(2),
            eps: 0.0,
            k: Some(0.0),
        },
        "gaussian-density-interval" => CatalogEntry {
            manifold: model(2, Domain::Interval { r_min: -6.0, r_max: 6.0 }, Warp::Unit, "r^2"),
            big_n: EffectiveDim::Infinite,
            eps: 0.0,
            k: None,
        },
        other => {
            return Err(RunError::Config(format!(
                "manifold.catalog: unknown tag {other:?}; known: {}",
                TAGS.join(", ")
            )))
        }
    };
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_tag_resolves() {
        for t in TAGS {
            entry(t).unwrap();
        }
        assert!(entry("torus").is_err());
    }
}
