//! Seeded random perturbations of a base model.
//!
//! Each sample adds `Σ_{j≤6} a_j sin(jπr/L + θ_j)` to the density, with
//! `a_j` drawn with a `1/j²` envelope (keeping `φ` bounded in `C²`) and
//! `‖a‖₁` capped, and multiplies pole-cap warps by `1 + β sin²(πr/L)`.
//! Pole caps use cosine phases so that `φ'` vanishes at the poles; circles
//! use the periodic frequencies `2jπ/L`. A draw whose density band ratio
//! `b/a` exceeds the cap is rejected and redrawn, up to 100 times.

use std::f64::consts::PI;

use heatlab::geometry::{Domain, EffectiveDim, ModelManifold, Warp};
use heatlab::profile::Profile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{FuzzSpec, Resolved, ScenarioConfig};
use crate::error::{RunError, RunResult};
use crate::scenario::{applicable, prepare, run_resolved, ReportBundle, LITERAL};

const MODES: usize = 6;
const MAX_REJECTIONS: usize = 100;

/// Audits run by default on each fuzz sample.
pub const DEFAULT_AUDITS: &[&str] = &[
    "laplacian-comparison",
    "volume-comparison",
    "volume-doubling",
    "cross-center-ratio",
    "neumann-poincare",
    "davies-double-integral",
    "mean-value",
    "parabolic-harnack",
];

/// Draws `count` perturbed copies of `base`.
pub fn generate(base: &Resolved, spec: &FuzzSpec, seed: u64, count: usize, cells: usize) -> RunResult<Vec<Resolved>> {
    if spec.amplitude > 0.0 && base.big_n == EffectiveDim::Finite(base.manifold.n() as f64) {
        return Err(RunError::Config(
            "fuzz.amplitude > 0 perturbs the density, which N = n forbids; raise curvature.N or set fuzz.amplitude to 0".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for index in 0..count {
        let mut last = String::new();
        let mut found = None;
        for _ in 0..MAX_REJECTIONS {
            match draw(base, spec, &mut rng, index) {
                Ok(cand) => match prepare(&cand, cells) {
                    Ok(setup) if setup.params.b / setup.params.a <= spec.max_band_ratio => {
                        found = Some(cand);
                        break;
                    }
                    Ok(setup) => last = format!("band ratio {} exceeds {}", setup.params.b / setup.params.a, spec.max_band_ratio),
                    Err(e) => last = e.to_string(),
                },
                Err(e) => last = e.to_string(),
            }
        }
        match found {
            Some(c) => out.push(c),
            None => {
                return Err(RunError::Generation {
                    seed,
                    index,
                    reason: format!("{MAX_REJECTIONS} rejections, last: {last}"),
                })
            }
        }
    }
    Ok(out)
}

fn draw(base: &Resolved, spec: &FuzzSpec, rng: &mut ChaCha8Rng, index: usize) -> RunResult<Resolved> {
    let m = &base.manifold;
    let (lo, hi) = m.bounds();
    let len = hi - lo;
    let pole = matches!(m.domain(), Domain::PoleCap { .. });
    let circle = matches!(m.domain(), Domain::Circle { .. });
    let mut a: Vec<f64> = (1..=MODES).map(|j| rng.gen_range(-1.0..1.0) / (j * j) as f64).collect();
    let norm: f64 = a.iter().map(|v| v.abs()).sum();
    let target = spec.amplitude * rng.gen_range(0.0..1.0);
    for v in &mut a {
        *v *= if norm > 0.0 { target / norm } else { 0.0 };
    }
    let beta = if pole { spec.warp_perturbation * rng.gen_range(0.0..1.0) } else { 0.0 };
    let mut terms = Vec::new();
    for (j, aj) in a.iter().enumerate() {
        let j = (j + 1) as f64;
        let (freq, theta) = if pole {
            (j * PI / len, if rng.gen_bool(0.5) { PI / 2.0 } else { 3.0 * PI / 2.0 })
        } else if circle {
            (2.0 * j * PI / len, rng.gen_range(0.0..2.0 * PI))
        } else {
            (j * PI / len, rng.gen_range(0.0..2.0 * PI))
        };
        if *aj != 0.0 {
            terms.push(format!("{aj:e}*sin({freq:e}*(r - {lo:e}) + {theta:e})"));
        }
    }
    if terms.is_empty() && beta == 0.0 {
        return Ok(Resolved { name: format!("{}-fuzz{index}", base.name), ..base.clone() });
    }
    let density = if terms.is_empty() {
        m.density().clone()
    } else {
        m.density().plus(&Profile::parse(&terms.join(" + "))?)
    };
    let warp = if beta > 0.0 {
        let f0 = m.warp().describe();
        Warp::Custom(Profile::parse(&format!("({f0})*(1 + {beta:e}*sin({:e}*r)^2)", PI / len))?)
    } else {
        m.warp().clone()
    };
    let manifold = ModelManifold::new(m.n(), m.domain(), warp, density)?.truncation_of_noncompact(m.is_noncompact_truncation());
    Ok(Resolved { name: format!("{}-fuzz{index}", base.name), manifold, k: None, ..base.clone() })
}

/// Summary of a fuzz campaign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzOutcome {
    pub seed: u64,
    pub bundles: Vec<ReportBundle>,
    /// Failed reports of explicit-constant audits, as `(scenario, bound_id)`.
    pub literal_failures: Vec<(String, String)>,
    /// Reports whose vacuous flag disagrees with the curvature scan.
    pub misclassified: Vec<(String, String)>,
}

impl FuzzOutcome {
    pub fn clean(&self) -> bool {
        self.literal_failures.is_empty() && self.misclassified.is_empty()
    }
}

/// Generates and audits `count` samples around the configured base model,
/// in parallel, merging the bundles in sample order.
pub fn fuzz(cfg: &ScenarioConfig, count: usize, seed: u64) -> RunResult<FuzzOutcome> {
    if count == 0 {
        return Err(RunError::Config("fuzz.count: need at least one sample".into()));
    }
    let base = cfg.resolve()?;
    let samples = generate(&base, &cfg.fuzz, seed, count, cfg.grid.cells)?;
    let applicable = applicable(&base.manifold);
    let audits: Vec<String> = match &cfg.fuzz.audits {
        Some(list) => list.clone(),
        None => DEFAULT_AUDITS.iter().filter(|a| applicable.contains(a)).map(|a| a.to_string()).collect(),
    };
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(samples.len());
    let mut slots: Vec<Option<RunResult<ReportBundle>>> = (0..samples.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunks: Vec<_> = slots.chunks_mut(samples.len().div_ceil(workers)).collect();
        let mut start = 0;
        for chunk in chunks {
            let first = start;
            start += chunk.len();
            let (samples, audits) = (&samples, &audits);
            scope.spawn(move || {
                for (k, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(run_resolved(&samples[first + k], audits, &cfg.options, cfg.grid.cells, seed));
                }
            });
        }
    });
    let bundles = slots.into_iter().map(|s| s.expect("every slot is filled")).collect::<RunResult<Vec<_>>>()?;
    let mut literal_failures = Vec::new();
    let mut misclassified = Vec::new();
    for b in &bundles {
        for r in &b.reports {
            if LITERAL.contains(&r.bound_id.as_str()) && !r.pass {
                literal_failures.push((b.scenario.clone(), r.bound_id.clone()));
            }
            if r.vacuous == b.fingerprint.hypothesis_holds {
                misclassified.push((b.scenario.clone(), r.bound_id.clone()));
            }
        }
    }
    Ok(FuzzOutcome { seed, bundles, literal_failures, misclassified })
}
