//! Running the audit list of one scenario.

use std::time::Instant;

use heatlab::audit::{self, AuditCylinderSpec, AuditSetup, BoundReport, Caloric, CHatSource, GaussianPlan, LiYauParams};
use heatlab::discrete::RadialGrid;
use heatlab::geometry::{Domain, EffectiveDim, ModelManifold};
use serde::{Deserialize, Serialize};

use crate::config::{AuditOptions, Resolved, ScenarioConfig, SCHEMA_VERSION};
use crate::error::{RunError, RunResult};

/// Every audit the runner knows, in report order.
pub const AUDITS: &[&str] = &[
    "laplacian-comparison",
    "volume-comparison",
    "volume-doubling",
    "cross-center-ratio",
    "neumann-poincare",
    "local-sobolev",
    "mean-value",
    "parabolic-harnack",
    "gaussian-upper",
    "gaussian-upper-single-center",
    "gaussian-lower",
    "davies-double-integral",
    "stochastic-completeness",
    "eigenvalue-lower",
    "j-function",
    "li-yau",
];

/// Audits whose constants are explicit, so a failure is a counterexample
/// rather than an unstable estimate.
pub const LITERAL: &[&str] = &[
    "laplacian-comparison",
    "volume-comparison",
    "volume-doubling",
    "cross-center-ratio",
    "neumann-poincare",
    "davies-double-integral",
    "j-function",
    "li-yau",
];

/// Audits that make sense on `m`.
pub fn applicable(m: &ModelManifold) -> Vec<&'static str> {
    let pole = matches!(m.domain(), Domain::PoleCap { .. });
    let compact = !m.is_noncompact_truncation();
    AUDITS
        .iter()
        .copied()
        .filter(|a| match *a {
            "laplacian-comparison" => pole,
            // On pole caps the main upper-bound audit already uses the single-centre form.
            "gaussian-upper-single-center" => !pole,
            "eigenvalue-lower" | "j-function" | "li-yau" => compact,
            _ => true,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub version: String,
    pub cells: usize,
    pub seed: u64,
    pub model: String,
    #[serde(rename = "N")]
    pub big_n: String,
    pub eps: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub hypothesis_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub schema_version: u32,
    pub scenario: String,
    pub fingerprint: Fingerprint,
    pub reports: Vec<BoundReport>,
    /// Wall time; the only field that differs between identical runs.
    pub timing_ms: f64,
}

impl ReportBundle {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

fn describe(m: &ModelManifold) -> String {
    let dom = match m.domain() {
        Domain::PoleCap { r_max } => format!("pole cap [0, {r_max}]"),
        Domain::Interval { r_min, r_max } => format!("interval [{r_min}, {r_max}]"),
        Domain::Circle { length } => format!("circle of length {length}"),
    };
    format!("n = {}, {dom}, f = {}, phi = {}", m.n(), m.warp().describe(), m.density().describe())
}

/// Validates the parameters and runs the curvature scan.
pub fn prepare(r: &Resolved, cells: usize) -> RunResult<AuditSetup> {
    AuditSetup::new(&r.name, r.manifold.clone(), r.big_n, r.eps, r.k, cells).map_err(|e| RunError::Config(format!("curvature: {e}")))
}

/// Runs the configured audits. Configuration and parameter errors are
/// returned as errors; an audit that cannot be computed becomes a failed report.
pub fn run_scenario(cfg: &ScenarioConfig) -> RunResult<ReportBundle> {
    let resolved = cfg.resolve()?;
    let audits: Vec<String> = match &cfg.audits {
        Some(list) => list.clone(),
        None => applicable(&resolved.manifold).into_iter().map(String::from).collect(),
    };
    run_resolved(&resolved, &audits, &cfg.options, cfg.grid.cells, cfg.seed)
}

pub fn run_resolved(r: &Resolved, audits: &[String], opts: &AuditOptions, cells: usize, seed: u64) -> RunResult<ReportBundle> {
    for a in audits {
        if !AUDITS.contains(&a.as_str()) {
            return Err(RunError::Config(format!("audits: unknown audit {a:?}; known: {}", AUDITS.join(", "))));
        }
    }
    let start = Instant::now();
    let setup = prepare(r, cells)?;
    let mut ctx = Context { setup: &setup, opts, c_hat: None };
    let mut reports = Vec::new();
    for a in audits {
        match ctx.run(a) {
            Ok(mut rs) => reports.append(&mut rs),
            Err(e) => reports.push(BoundReport::errored(a, &r.name, e.to_string())),
        }
    }
    Ok(ReportBundle {
        schema_version: SCHEMA_VERSION,
        scenario: r.name.clone(),
        fingerprint: Fingerprint {
            version: env!("CARGO_PKG_VERSION").into(),
            cells,
            seed,
            model: describe(&r.manifold),
            big_n: match r.big_n {
                EffectiveDim::Infinite => "inf".into(),
                EffectiveDim::Finite(x) => x.to_string(),
            },
            eps: r.eps,
            k: setup.params.k,
            hypothesis_holds: setup.hypothesis_holds(),
        },
        reports,
        timing_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

struct Context<'a> {
    setup: &'a AuditSetup,
    opts: &'a AuditOptions,
    c_hat: Option<CHatSource>,
}

impl Context<'_> {
    fn ext(&self) -> f64 {
        self.setup.max_radius()
    }

    fn gaussian_plan(&self) -> GaussianPlan {
        let times = self.opts.gaussian_times.clone().unwrap_or_else(|| {
            let e2 = self.ext() * self.ext();
            [0.005, 0.01, 0.02, 0.04].iter().map(|f| f * e2).collect()
        });
        GaussianPlan { times, ..GaussianPlan::default() }
    }

    fn cylinder(&self) -> AuditCylinderSpec {
        AuditCylinderSpec::standard(self.opts.cylinder_radius.unwrap_or(self.ext() / 4.0), self.setup.center())
    }

    fn mass_radii(&self) -> Vec<f64> {
        self.opts.mass_radii.clone().unwrap_or_else(|| {
            let e = self.ext();
            if self.setup.manifold.is_noncompact_truncation() {
                [1.0, 2.0, 4.0, 8.0].into_iter().filter(|r| *r <= e).collect()
            } else {
                vec![e / 8.0, e / 4.0, e / 2.0, e]
            }
        })
    }

    /// `Ĉ` from the options, else the Gaussian envelope with `ε = 1`.
    fn c_hat(&mut self) -> heatlab::Result<CHatSource> {
        if let Some(c) = self.c_hat {
            return Ok(c);
        }
        let c = match self.opts.c_hat {
            Some(v) => CHatSource::User(v),
            None => {
                let r = audit::audit_gaussian_upper(self.setup, &self.gaussian_plan(), 1.0)?;
                let v = r.empirical_constant.filter(|v| v.is_finite() && *v > 0.0).ok_or_else(|| {
                    heatlab::Error::InvalidConstant("the Gaussian envelope gave no usable Ĉ".into())
                })?;
                CHatSource::Empirical(v)
            }
        };
        self.c_hat = Some(c);
        Ok(c)
    }

    fn li_yau_params(&mut self, grid: &RadialGrid<f64>, alpha: f64) -> heatlab::Result<LiYauParams> {
        let p = self.opts.p.unwrap_or(self.setup.manifold.n() as f64 + 1.0);
        let c = self.c_hat()?;
        LiYauParams::new(self.setup, grid, alpha, p, c)
    }

    fn run(&mut self, name: &str) -> heatlab::Result<Vec<BoundReport>> {
        let s = self.setup;
        let o = self.opts;
        let one = |r: heatlab::Result<BoundReport>| r.map(|r| vec![r]);
        match name {
            "laplacian-comparison" => one(audit::audit_laplacian_comparison(s, o.samples)),
            "volume-comparison" => one(audit::audit_volume_comparison(s, o.samples)),
            "volume-doubling" => one(audit::audit_doubling(s, o.samples)),
            "cross-center-ratio" => one(audit::audit_cross_center(s, o.samples)),
            "neumann-poincare" => {
                let radii = o.poincare_radii.clone().unwrap_or_else(|| vec![self.ext() / 8.0, self.ext() / 4.0]);
                one(audit::audit_poincare(s, &radii))
            }
            "local-sobolev" => one(audit::audit_sobolev(
                s,
                o.sobolev_radius.unwrap_or(self.ext() / 2.0),
                audit::SobolevFamily::default(),
            )),
            "mean-value" => one(audit::audit_mean_value(s, &self.cylinder(), Caloric::Kernel { source: s.center() })),
            "parabolic-harnack" => one(audit::audit_harnack(s, &self.cylinder(), Caloric::Kernel { source: s.center() })),
            "gaussian-upper" => one(audit::audit_gaussian_upper(s, &self.gaussian_plan(), o.eps_har)),
            "gaussian-upper-single-center" => {
                one(audit::gaussian::audit_gaussian_upper_single_center(s, &self.gaussian_plan(), o.eps_har))
            }
            "gaussian-lower" => one(audit::audit_gaussian_lower(s, &self.gaussian_plan(), &audit::LowerCandidates::default())),
            "davies-double-integral" => one(audit::audit_davies(s, &self.gaussian_plan())),
            "stochastic-completeness" => one(audit::audit_stochastic_completeness(s, &self.mass_radii(), o.mass_time)),
            "eigenvalue-lower" => one(audit::audit_eigenvalue_lower(s, o.eigen_k_max)),
            "j-function" => {
                let grid = RadialGrid::new(&s.manifold, s.cells)?;
                let alpha = o.alphas.first().copied().unwrap_or(2.0);
                let params = self.li_yau_params(&grid, alpha)?;
                let t_end = o.li_yau_times.iter().copied().fold(0.0, f64::max);
                let sol = audit::solve_j_function(&grid, &params, t_end, o.j_dt)?;
                one(audit::audit_j_function(s, &params, &sol))
            }
            "li-yau" => {
                let t_min = o.li_yau_times.iter().copied().fold(f64::INFINITY, f64::min);
                let (grid, kernel) = audit::spectral_kernel(&s.manifold, s.cells, t_min, true)?;
                let j = grid.locate(s.center());
                let snaps = o.li_yau_times.iter().map(|&t| Ok((t, kernel.column(j, t)?))).collect::<heatlab::Result<Vec<_>>>()?;
                let mut out = Vec::new();
                for &alpha in &o.alphas {
                    let params = self.li_yau_params(&grid, alpha)?;
                    out.push(audit::audit_li_yau(s, &grid, &params, &snaps)?);
                }
                Ok(out)
            }
            other => Err(heatlab::Error::Config(format!("unknown audit {other:?}"))),
        }
    }
}
