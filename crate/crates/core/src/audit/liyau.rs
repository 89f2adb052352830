//! The `J` function of the Li-Yau estimate, its closed-form lower bound
//! `J̲(t)` and the gradient estimate itself.

use super::{AuditSetup, BoundReport, Sample, EXPLICIT_TOL, LI_YAU_TOL};
use crate::discrete::{assemble_mode_operator, Bc, ModeOperator, RadialGrid};
use crate::error::{Error, Result};
use crate::geometry::EffectiveDim;

/// Relative level below which a solution is not resolved: the spectral
/// sum carries absolute roundoff near `1e-16 · max u`, and where the
/// grid cannot follow the Gaussian tail, centred differences overstate
/// `|∇u|²/u²` exponentially. The Li-Yau supremum skips those nodes.
pub const RESOLVED_FLOOR: f64 = 1e-6;

/// Cells of the midpoint rule behind the `L^p` norms in `C29`.
const NORM_CELLS: usize = 20_000;

/// Where the heat-kernel constant `Ĉ` in `J̲` comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CHatSource {
    /// Gaussian-envelope constant measured with `ε = 1`.
    Empirical(f64),
    User(f64),
}

impl CHatSource {
    pub fn value(&self) -> f64 {
        match *self {
            CHatSource::Empirical(v) | CHatSource::User(v) => v,
        }
    }

    fn scaled(&self, s: f64) -> Self {
        match *self {
            CHatSource::Empirical(v) => CHatSource::Empirical(v * s),
            CHatSource::User(v) => CHatSource::User(v * s),
        }
    }

    fn describe(&self) -> String {
        match self {
            CHatSource::Empirical(v) => format!("Ĉ = {v} from the Gaussian envelope with ε = 1"),
            CHatSource::User(v) => format!("Ĉ = {v} supplied by the user"),
        }
    }
}

/// Constants of the Li-Yau estimate for one scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct LiYauParams {
    pub alpha: f64,
    pub p: f64,
    pub n: usize,
    pub big_n: EffectiveDim,
    pub delta: f64,
    pub tau: f64,
    pub c28: f64,
    pub c29: f64,
    pub c_hat: CHatSource,
    /// Potential `V = max{K e^{4(ε-1)φ/(n-1)} + C28 φ'², 0}` at the grid nodes.
    pub v: Vec<f64>,
}

/// `C28 = (2n + (2-δ)(N-n)) / (2n(N-n))`, its limit `(2-δ)/(2n)` at `N = ∞`,
/// and `0` at `N = n` (constant density).
pub fn c28(n: usize, big_n: EffectiveDim, delta: f64) -> f64 {
    let nf = n as f64;
    match big_n {
        EffectiveDim::Infinite => (2.0 - delta) / (2.0 * nf),
        EffectiveDim::Finite(bn) if bn > nf => (2.0 * nf + (2.0 - delta) * (bn - nf)) / (2.0 * nf * (bn - nf)),
        EffectiveDim::Finite(_) => 0.0,
    }
}

impl LiYauParams {
    /// Builds the constants for `setup` on `grid`, with `δ = 2/(2n+1)` and
    /// `τ = 5/δ`. `C29` uses `max(K, 0)` so the base of the fractional
    /// power in `J̲` stays nonnegative.
    pub fn new(setup: &AuditSetup, grid: &RadialGrid<f64>, alpha: f64, p: f64, c_hat: CHatSource) -> Result<Self> {
        let m = &setup.manifold;
        let n = m.n();
        if !(alpha > 1.0) {
            return Err(Error::RejectedParameter(format!("Li-Yau needs α > 1, got {alpha}")));
        }
        if !(p > n as f64) {
            return Err(Error::RejectedParameter(format!("Li-Yau needs p > n = {n}, got {p}")));
        }
        if !(c_hat.value() > 0.0 && c_hat.value().is_finite()) {
            return Err(Error::InvalidConstant(format!("Ĉ must be finite and positive, got {}", c_hat.value())));
        }
        let pr = &setup.params;
        let delta = 2.0 / (2.0 * n as f64 + 1.0);
        let tau = 5.0 / delta;
        let c28 = c28(n, pr.big_n, delta);
        let v = grid
            .nodes()
            .iter()
            .map(|&r| (pr.k * m.curvature_weight(pr.eps, r) + c28 * m.phi(r).d1.powi(2)).max(0.0))
            .collect();
        let weight_norm = m.lp_norm(|r| m.curvature_weight(pr.eps, r), p, NORM_CELLS);
        let c29 = pr.k.max(0.0) * weight_norm + c28 * m.grad_phi_lp(p, true, NORM_CELLS)?;
        Ok(Self { alpha, p, n, big_n: pr.big_n, delta, tau, c28, c29, c_hat, v })
    }
}

/// `J̲(t) = 2^{-1/(τ-1)} exp(-(τ-1)^{n/(2p-n)} (4 C29 Ĉ^{1/p})^{2p/(2p-n)} t)`.
pub fn j_lower_bound(params: &LiYauParams, t: f64) -> Result<f64> {
    let (n, p, tau) = (params.n as f64, params.p, params.tau);
    if !(p > n) {
        return Err(Error::RejectedParameter(format!("J̲ needs p > n = {n}, got {p}")));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("J̲ needs t ≥ 0, got {t}")));
    }
    let rate = (tau - 1.0).powf(n / (2.0 * p - n))
        * (4.0 * params.c29 * params.c_hat.value().powf(1.0 / p)).powf(2.0 * p / (2.0 * p - n));
    Ok(2f64.powf(-1.0 / (tau - 1.0)) * (-rate * t).exp())
}

/// Solution of `w_t = Δ_φ w + 2(τ-1)V w`, `w(0) = 1`, and `J = w^{-1/(τ-1)}`.
///
/// `w` grows like `e^{2(τ-1)Vt}` and overflows quickly for large `V`, so it
/// is kept as `ln w`. When the spread of `w` across the grid exceeds the
/// range of `f64` the solve stops and `truncated_at` records the time.
#[derive(Clone, Debug, PartialEq)]
pub struct JSolution {
    pub times: Vec<f64>,
    pub log_w: Vec<Vec<f64>>,
    pub j: Vec<Vec<f64>>,
    pub truncated_at: Option<f64>,
}

impl JSolution {
    /// Index of the recorded time closest to `t`.
    pub fn time_index(&self, t: f64) -> usize {
        let mut best = 0;
        for (k, s) in self.times.iter().enumerate() {
            if (s - t).abs() < (self.times[best] - t).abs() {
                best = k;
            }
        }
        best
    }
}

/// Smallest normalized `w` kept before the solve is declared out of range.
const SPREAD_FLOOR: f64 = 1e-280;

/// Backward Euler to `t_end` with steps no longer than `dt`, further split
/// so that `dt·2(τ-1) max V < 1/2`; the system matrix stays an M-matrix.
/// Each step rescales `w` by its maximum and carries the logarithm.
pub fn solve_j_function(grid: &RadialGrid<f64>, params: &LiYauParams, t_end: f64, dt: f64) -> Result<JSolution> {
    if params.v.len() != grid.len() {
        return Err(Error::Config(format!("potential has {} values, grid has {}", params.v.len(), grid.len())));
    }
    if !(t_end > 0.0) || !(dt > 0.0) {
        return Err(Error::Domain(format!("need t_end > 0 and dt > 0, got {t_end}, {dt}")));
    }
    let op: ModeOperator<f64> = assemble_mode_operator(grid, 0, grid.natural_bcs())?;
    let gain = 2.0 * (params.tau - 1.0);
    let v_max = params.v.iter().copied().fold(0.0, f64::max);
    let mut steps = (t_end / dt).ceil() as usize;
    if gain * v_max * t_end / steps as f64 >= 0.5 {
        steps = (2.0 * gain * v_max * t_end).ceil() as usize + 1;
    }
    let h = t_end / steps as f64;
    let alpha: Vec<f64> = params.v.iter().map(|v| 1.0 - h * gain * v).collect();
    let lu = op.factor_diag_shifted(&alpha, -h)?;
    let expo = -1.0 / (params.tau - 1.0);
    let mut w = vec![1.0; grid.len()];
    let mut scale = 0.0;
    let zeros = vec![0.0; grid.len()];
    let mut out = JSolution { times: vec![0.0], log_w: vec![zeros], j: vec![w.clone()], truncated_at: None };
    for k in 1..=steps {
        w = lu.solve(&w);
        if let Some((i, v)) = w.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::NonPositive { node: i, value: *v });
        }
        let top = w.iter().copied().fold(0.0, f64::max);
        for v in &mut w {
            *v /= top;
        }
        scale += top.ln();
        let t = h * k as f64;
        if w.iter().any(|v| *v < SPREAD_FLOOR) {
            out.truncated_at = Some(t);
            break;
        }
        let log_w: Vec<f64> = w.iter().map(|v| v.ln() + scale).collect();
        let j: Vec<f64> = log_w.iter().map(|l| (expo * l).exp()).collect();
        if let Some(bad) = j.iter().find(|v| **v > 1.0 + 1e-10) {
            return Err(Error::Degenerate(format!("J = {bad} exceeds 1 although V ≥ 0")));
        }
        out.times.push(t);
        out.log_w.push(log_w);
        out.j.push(j);
    }
    Ok(out)
}

/// `J̲(t) ≤ min_x J(x, t)` at every recorded `t > 0`, with `J̲` also
/// reported at half and twice `Ĉ`.
pub fn audit_j_function(setup: &AuditSetup, params: &LiYauParams, sol: &JSolution) -> Result<BoundReport> {
    const ID: &str = "j-function";
    if let Some(r) = setup.vacuous_report(ID) {
        return Ok(r);
    }
    let half = LiYauParams { c_hat: params.c_hat.scaled(0.5), ..params.clone() };
    let double = LiYauParams { c_hat: params.c_hat.scaled(2.0), ..params.clone() };
    let mut samples = Vec::new();
    for (t, j) in sol.times.iter().zip(&sol.j).skip(1) {
        let min_j = j.iter().copied().fold(f64::INFINITY, f64::min);
        samples.push(Sample::new(
            &[("t", *t), ("J_low_half_C", j_lower_bound(&half, *t)?), ("J_low_double_C", j_lower_bound(&double, *t)?)],
            j_lower_bound(params, *t)?,
            Some(min_j),
        ));
    }
    let t_end = *sol.times.last().unwrap_or(&0.0);
    let r = BoundReport::explicit(ID, &setup.scenario, samples, EXPLICIT_TOL)
        .with_note(params.c_hat.describe())
        .with_note(format!(
            "J̲({t_end}) = {:e} at Ĉ, {:e} at Ĉ/2, {:e} at 2Ĉ",
            j_lower_bound(params, t_end)?,
            j_lower_bound(&half, t_end)?,
            j_lower_bound(&double, t_end)?
        ))
        .with_note(format!("C28 = {}, C29 = {}, τ = {}", params.c28, params.c29, params.tau));
    let r = match sol.truncated_at {
        Some(t) => r.with_note(format!("w spans more than the f64 range from t = {t}; later times not audited")),
        None => r,
    };
    Ok(setup.annotate(r))
}

/// Centred differences of `u`, mirrored at pole and Neumann ends and
/// wrapped on periodic grids.
pub fn centered_gradient(grid: &RadialGrid<f64>, u: &[f64]) -> Vec<f64> {
    let m = u.len();
    let h = grid.h();
    let (left, right) = grid.natural_bcs();
    let ghost = |bc: Bc, inside: usize, other: usize| match bc {
        Bc::Periodic => u[other],
        _ => u[inside],
    };
    (0..m)
        .map(|i| {
            let lo = if i == 0 { ghost(left, 0, m - 1) } else { u[i - 1] };
            let hi = if i + 1 == m { ghost(right, m - 1, 0) } else { u[i + 1] };
            (hi - lo) / (2.0 * h)
        })
        .collect()
}

/// `sup_x [j |∇u|²/u² - α Δ_φu/u]` for one snapshot, over the nodes where
/// `u ≥ RESOLVED_FLOOR · max u`.
fn li_yau_lhs(grid: &RadialGrid<f64>, op: &ModeOperator<f64>, u: &[f64], j: f64, alpha: f64) -> Result<f64> {
    let top = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(top > 0.0) {
        return Err(Error::NonPositive { node: 0, value: top });
    }
    let grad = centered_gradient(grid, u);
    let lap = op.apply(u);
    Ok(u.iter()
        .zip(&grad)
        .zip(&lap)
        .filter(|((u, _), _)| **u >= RESOLVED_FLOOR * top)
        .map(|((u, g), l)| j * g * g / (u * u) - alpha * l / u)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// `J̲(t)|∇u|²/u² - α ∂_t u/u ≤ (2n+1)/(2t J̲(t))` for snapshots `(t, u)` of
/// a positive solution, with `∂_t u = Δ_φ u`. The classical form with
/// `J̲ = 1` is recorded as a note only.
pub fn audit_li_yau(
    setup: &AuditSetup,
    grid: &RadialGrid<f64>,
    params: &LiYauParams,
    snapshots: &[(f64, Vec<f64>)],
) -> Result<BoundReport> {
    const ID: &str = "li-yau";
    if let Some(r) = setup.vacuous_report(ID) {
        return Ok(r);
    }
    let op = assemble_mode_operator(grid, 0, grid.natural_bcs())?;
    let n = params.n as f64;
    let mut samples = Vec::new();
    let mut classical = f64::NEG_INFINITY;
    for (t, u) in snapshots {
        if u.len() != grid.len() {
            return Err(Error::Config(format!("snapshot has {} values, grid has {}", u.len(), grid.len())));
        }
        if !(*t > 0.0) {
            return Err(Error::Domain(format!("Li-Yau needs t > 0, got {t}")));
        }
        let jl = j_lower_bound(params, *t)?;
        let lhs = li_yau_lhs(grid, &op, u, jl, params.alpha)?;
        let rhs = (2.0 * n + 1.0) / (2.0 * t * jl);
        samples.push(Sample::new(&[("t", *t), ("alpha", params.alpha), ("J_low", jl)], lhs, Some(rhs)));
        let c = li_yau_lhs(grid, &op, u, 1.0, params.alpha)? * 2.0 * t / (2.0 * n + 1.0);
        classical = classical.max(c);
    }
    let r = BoundReport::explicit(ID, &setup.scenario, samples, LI_YAU_TOL)
        .with_note(params.c_hat.describe())
        .with_note(format!("control with J̲ = 1: largest lhs/rhs = {classical}"))
        .with_note(format!("supremum over nodes with u ≥ {RESOLVED_FLOOR:e} max u"));
    Ok(setup.annotate(r))
}
