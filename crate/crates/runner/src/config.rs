//! JSON scenario configuration.
//!
//! A configuration names a catalog model or spells out a custom one, and
//! optionally overrides the curvature constants, the grid, the audit list
//! and the per-audit options. Every optional field has a default:
//!
//! | field | default |
//! |---|---|
//! | `curvature` | the catalog entry's `N`, `ε`; `K` from the curvature scan |
//! | `grid.cells` | 256 |
//! | `audits` | every audit that applies to the model |
//! | `seed` | 0 |
//! | `output.dir` / `output.format` | `out` / `both` |

use std::path::{Path, PathBuf};

use heatlab::geometry::{Domain, EffectiveDim, ModelManifold, Warp};
use heatlab::profile::ProfileSpec;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::catalog;
use crate::error::{RunError, RunResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    /// Scenario id used in reports; defaults to the catalog tag.
    #[serde(default)]
    pub name: Option<String>,
    pub manifold: ManifoldSpec,
    #[serde(default)]
    pub curvature: CurvatureSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub audits: Option<Vec<String>>,
    #[serde(default)]
    pub options: AuditOptions,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub fuzz: FuzzSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ManifoldSpec {
    Catalog { catalog: String },
    Custom(CustomManifold),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomManifold {
    pub n: usize,
    pub domain: DomainSpec,
    pub warp: WarpSpec,
    #[serde(default = "zero_density")]
    pub density: ProfileSpec,
    /// The model is a truncation of a noncompact space.
    #[serde(default)]
    pub noncompact: bool,
}

fn zero_density() -> ProfileSpec {
    ProfileSpec::Expr("0".into())
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    PoleCap { r_max: f64 },
    Interval { r_min: f64, r_max: f64 },
    Circle { length: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarpSpec {
    Euclidean,
    Sphere,
    Hyperbolic,
    Unit,
    Custom(ProfileSpec),
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureSpec {
    /// Effective dimension; a number or `"inf"`.
    #[serde(rename = "N", default, serialize_with = "ser_dim", deserialize_with = "de_dim")]
    pub big_n: Option<EffectiveDim>,
    #[serde(default)]
    pub eps: Option<f64>,
    /// Curvature lower bound; the scan's admissible value when absent.
    #[serde(rename = "K", default)]
    pub k: Option<f64>,
}

fn ser_dim<S: Serializer>(v: &Option<EffectiveDim>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        None => s.serialize_none(),
        Some(EffectiveDim::Infinite) => s.serialize_str("inf"),
        Some(EffectiveDim::Finite(x)) => s.serialize_f64(*x),
    }
}

fn de_dim<'de, D: Deserializer<'de>>(d: D) -> Result<Option<EffectiveDim>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }
    match Option::<Raw>::deserialize(d)? {
        None => Ok(None),
        Some(Raw::Num(x)) => Ok(Some(EffectiveDim::Finite(x))),
        Some(Raw::Str(s)) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => Ok(Some(EffectiveDim::Infinite)),
        Some(Raw::Str(s)) => Err(serde::de::Error::custom(format!("N must be a number or \"inf\", got {s:?}"))),
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_cells")]
    pub cells: usize,
}

fn default_cells() -> usize {
    256
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { cells: default_cells() }
    }
}

/// Per-audit options. Lengths default to fractions of the largest ball
/// radius around the audit centre, times to multiples of its square.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditOptions {
    /// Sample count of the comparison audits.
    pub samples: usize,
    pub poincare_radii: Option<Vec<f64>>,
    pub sobolev_radius: Option<f64>,
    pub cylinder_radius: Option<f64>,
    pub gaussian_times: Option<Vec<f64>>,
    pub eps_har: f64,
    pub eigen_k_max: usize,
    pub mass_radii: Option<Vec<f64>>,
    pub mass_time: f64,
    pub alphas: Vec<f64>,
    /// Exponent `p > n` of the Li-Yau constants; `n + 1` when absent.
    pub p: Option<f64>,
    /// User-supplied `Ĉ`; the Gaussian-envelope constant when absent.
    pub c_hat: Option<f64>,
    pub li_yau_times: Vec<f64>,
    pub j_dt: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            samples: 12,
            poincare_radii: None,
            sobolev_radius: None,
            cylinder_radius: None,
            gaussian_times: None,
            eps_har: 0.5,
            eigen_k_max: 200,
            mass_radii: None,
            mass_time: 1.0,
            alphas: vec![1.1, 2.0],
            p: None,
            c_hat: None,
            li_yau_times: vec![0.01, 0.03, 0.1, 0.3, 1.0],
            j_dt: 1e-3,
        }
    }
}

/// Random perturbations generated by the fuzz campaign.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FuzzSpec {
    pub count: usize,
    /// Cap on `‖a‖₁` of the density coefficients.
    pub amplitude: f64,
    /// Cap on `β` in the warp perturbation `f₀(1 + β sin²(πr/L))`.
    pub warp_perturbation: f64,
    /// Largest allowed `b/a` of the density band.
    pub max_band_ratio: f64,
    /// Audits run on each sample; the scenario's list when absent.
    pub audits: Option<Vec<String>>,
}

impl Default for FuzzSpec {
    fn default() -> Self {
        Self { count: 50, amplitude: 0.3, warp_perturbation: 0.05, max_band_ratio: 10.0, audits: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_format")]
    pub format: Format,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_format() -> Format {
    Format::Both
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: default_dir(), format: default_format() }
    }
}

/// A configuration resolved against the catalog.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub name: String,
    pub manifold: ModelManifold,
    pub big_n: EffectiveDim,
    pub eps: f64,
    pub k: Option<f64>,
}

impl ScenarioConfig {
    pub fn from_json(src: &str) -> RunResult<Self> {
        let cfg: Self = serde_json::from_str(src).map_err(|e| RunError::Config(format!("config: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(RunError::Config(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                cfg.schema_version
            )));
        }
        if cfg.grid.cells < 16 {
            return Err(RunError::Config(format!("grid.cells: need at least 16, got {}", cfg.grid.cells)));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> RunResult<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&src)
    }

    /// A configuration for a catalog tag with every default.
    pub fn catalog(tag: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name: None,
            manifold: ManifoldSpec::Catalog { catalog: tag.into() },
            curvature: CurvatureSpec::default(),
            grid: GridSpec::default(),
            audits: None,
            options: AuditOptions::default(),
            seed: 0,
            fuzz: FuzzSpec::default(),
            output: OutputSpec::default(),
        }
    }

    pub fn resolve(&self) -> RunResult<Resolved> {
        let (name, manifold, big_n, eps, k) = match &self.manifold {
            ManifoldSpec::Catalog { catalog: tag } => {
                let e = catalog::entry(tag)?;
                (tag.clone(), e.manifold, e.big_n, e.eps, e.k)
            }
            ManifoldSpec::Custom(c) => {
                let domain = match c.domain {
                    DomainSpec::PoleCap { r_max } => Domain::PoleCap { r_max },
                    DomainSpec::Interval { r_min, r_max } => Domain::Interval { r_min, r_max },
                    DomainSpec::Circle { length } => Domain::Circle { length },
                };
                let warp = match &c.warp {
                    WarpSpec::Euclidean => Warp::Euclidean,
                    WarpSpec::Sphere => Warp::Sphere,
                    WarpSpec::Hyperbolic => Warp::Hyperbolic,
                    WarpSpec::Unit => Warp::Unit,
                    WarpSpec::Custom(p) => Warp::Custom(p.build().map_err(|e| RunError::Config(format!("manifold.warp: {e}")))?),
                };
                let density = c.density.build().map_err(|e| RunError::Config(format!("manifold.density: {e}")))?;
                let m = ModelManifold::new(c.n, domain, warp, density)
                    .map_err(|e| RunError::Config(format!("manifold: {e}")))?
                    .truncation_of_noncompact(c.noncompact);
                ("custom".to_string(), m, EffectiveDim::Finite(c.n as f64), 0.0, None)
            }
        };
        Ok(Resolved {
            name: self.name.clone().unwrap_or(name),
            manifold,
            big_n: self.curvature.big_n.unwrap_or(big_n),
            eps: self.curvature.eps.unwrap_or(eps),
            k: self.curvature.k.or(k),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_catalog_config_parses() {
        let c = ScenarioConfig::from_json(r#"{"schema_version": 1, "manifold": {"catalog": "sphere2"}}"#).unwrap();
        assert_eq!(c.grid.cells, 256);
        assert_eq!(c.resolve().unwrap().name, "sphere2");
    }

    #[test]
    fn infinite_dimension_parses() {
        let c = ScenarioConfig::from_json(
            r#"{"schema_version": 1, "manifold": {"catalog": "interval"}, "curvature": {"N": "inf", "eps": 0.5}}"#,
        )
        .unwrap();
        assert_eq!(c.curvature.big_n, Some(EffectiveDim::Infinite));
    }

    #[test]
    fn errors_name_the_location() {
        let e = ScenarioConfig::from_json("{\"schema_version\": 1,\n \"manifold\": {\"catalog\": \"sphere2\"},\n \"grid\": {\"cels\": 3}}")
            .unwrap_err()
            .to_string();
        assert!(e.contains("cels") && e.contains("line 3"), "{e}");
    }

    #[test]
    fn custom_manifold_resolves() {
        let c = ScenarioConfig::from_json(
            r#"{"schema_version": 1, "manifold": {"n": 2, "domain": {"kind": "pole_cap", "r_max": 3.141592653589793},
                "warp": "sphere", "density": "0.05*cos(r)"}, "curvature": {"N": "inf", "eps": 0.5}}"#,
        )
        .unwrap();
        let r = c.resolve().unwrap();
        assert_eq!(r.big_n, EffectiveDim::Infinite);
        assert!(!r.manifold.density().is_constant());
    }
}
