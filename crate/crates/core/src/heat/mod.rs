//! φ-heat kernels and solutions of `∂_t u = Δ_φ u`.
//!
//! The spectral kernel between two points on a common radial ray is
//! `H(x, y, t) = Σ_l m_l Σ_j e^{-λ_{lj} t} u_{lj}(r_x) u_{lj}(r_y)` with
//! `μ`-normalized radial eigenfunctions; the angular factor of degree `l` at
//! angle zero contributes exactly the multiplicity `m_l`.

use std::ops::Range;

use crate::discrete::{
    assemble_mode_operator, mode_spectrum, Bc, ModeOperator, RadialGrid, SpectralEntry, Spectrum,
};
use crate::error::{Error, Result};
use crate::geometry::{Domain, FarEnd, ModelManifold, Warp};
use crate::scalar::Real;

/// `ln(1e14)`: terms with `e^{-(λ - λ_0) t}` below `1e-14` are dropped.
pub const TRUNCATION_EXPONENT: f64 = 32.236_191_301_916_64;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralKernel<T> {
    spectrum: Spectrum<T>,
    zonal: bool,
}

impl<T: Real> SpectralKernel<T> {
    /// Kernel on a common radial ray, using every computed mode.
    pub fn new(spectrum: Spectrum<T>) -> Self {
        Self { spectrum, zonal: false }
    }

    /// Spherical average of the kernel in the first argument (mode `l = 0` only).
    pub fn zonal(spectrum: Spectrum<T>) -> Self {
        Self { spectrum, zonal: true }
    }

    pub fn spectrum(&self) -> &Spectrum<T> {
        &self.spectrum
    }

    pub fn is_zonal(&self) -> bool {
        self.zonal
    }

    fn terms(&self) -> impl Iterator<Item = &SpectralEntry<T>> {
        let zonal = self.zonal;
        self.spectrum.entries().iter().filter(move |e| !zonal || e.l == 0)
    }

    /// Errors unless every omitted term is below `1e-14` of the leading one.
    pub fn check_truncation(&self, t: T) -> Result<()> {
        if !(t > T::zero()) {
            return Err(Error::Domain(format!("heat kernel needs t > 0, got {t}")));
        }
        let lam0 = self.terms().next().map(|e| e.lambda).unwrap_or(T::zero());
        let needed = lam0 + T::lit(TRUNCATION_EXPONENT) / t;
        if self.zonal {
            self.spectrum.require_mode_complete(0, needed)
        } else {
            self.spectrum.require_complete(needed)
        }
    }

    pub fn eval(&self, i: usize, j: usize, t: T) -> Result<T> {
        self.check_truncation(t)?;
        Ok(self
            .terms()
            .map(|e| T::from_usize_lossy(e.multiplicity) * (-e.lambda * t).exp() * e.vector[i] * e.vector[j])
            .sum())
    }

    /// `H(·, y_j, t)` at every node.
    pub fn column(&self, j: usize, t: T) -> Result<Vec<T>> {
        self.check_truncation(t)?;
        let m = self.spectrum.measures().len();
        let mut out = vec![T::zero(); m];
        for e in self.terms() {
            let c = T::from_usize_lossy(e.multiplicity) * (-e.lambda * t).exp() * e.vector[j];
            for (o, v) in out.iter_mut().zip(&e.vector) {
                *o += c * *v;
            }
        }
        Ok(out)
    }

    /// `∫ H(x, y_j, t) dμ(x)`; only the zonal mode integrates to a nonzero value.
    pub fn mass_from(&self, j: usize, t: T) -> Result<T> {
        self.check_truncation(t)?;
        let mu = self.spectrum.measures();
        Ok(self
            .spectrum
            .entries()
            .iter()
            .filter(|e| e.l == 0)
            .map(|e| {
                let avg: T = e.vector.iter().zip(mu).map(|(v, m)| *v * *m).sum();
                (-e.lambda * t).exp() * e.vector[j] * avg
            })
            .sum())
    }
}

/// One-off evaluation of the spectral kernel on a common radial ray.
pub fn heat_kernel_spectral<T: Real>(spectrum: &Spectrum<T>, i: usize, j: usize, t: T) -> Result<T> {
    SpectralKernel::new(spectrum.clone()).eval(i, j, t)
}

/// Implicit time integrators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    BackwardEuler,
    CrankNicolson,
    /// Crank–Nicolson with the first two steps replaced by four
    /// backward-Euler half steps, which damps rough initial data.
    Rannacher,
}

/// Discrete solution `u(t_k)` of one mode.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatSolution<T> {
    pub l: usize,
    pub times: Vec<T>,
    pub values: Vec<Vec<T>>,
}

impl<T: Real> HeatSolution<T> {
    pub fn at(&self, k: usize) -> &[T] {
        &self.values[k]
    }

    pub fn last(&self) -> &[T] {
        self.values.last().expect("solution has at least the initial state")
    }

    /// Index of the recorded time closest to `t`.
    pub fn time_index(&self, t: T) -> usize {
        let mut best = 0;
        for (k, s) in self.times.iter().enumerate() {
            if (*s - t).abs() < (self.times[best] - t).abs() {
                best = k;
            }
        }
        best
    }
}

struct Stepper<T> {
    op: ModeOperator<T>,
    be_full: Option<crate::discrete::band::ShiftedLu<T>>,
    be_half: Option<crate::discrete::band::ShiftedLu<T>>,
    cn: Option<crate::discrete::band::ShiftedLu<T>>,
    dt: T,
}

impl<T: Real> Stepper<T> {
    fn new(op: &ModeOperator<T>, dt: T, scheme: Scheme) -> Result<Self> {
        if !(dt > T::zero()) {
            return Err(Error::Domain(format!("time step must be positive, got {dt}")));
        }
        let be_full = match scheme {
            Scheme::BackwardEuler => Some(op.factor_shifted(T::one(), -dt)?),
            _ => None,
        };
        let (be_half, cn) = match scheme {
            Scheme::BackwardEuler => (None, None),
            Scheme::CrankNicolson => (None, Some(op.factor_shifted(T::one(), -dt * T::half())?)),
            Scheme::Rannacher => {
                let lu = op.factor_shifted(T::one(), -dt * T::half())?;
                (Some(lu.clone()), Some(lu))
            }
        };
        Ok(Self { op: op.clone(), be_full, be_half, cn, dt })
    }

    fn step(&self, u: &[T], k: usize) -> Vec<T> {
        if let Some(lu) = &self.be_full {
            return lu.solve(u);
        }
        if k < 2 {
            if let Some(lu) = &self.be_half {
                return lu.solve(&lu.solve(u));
            }
        }
        let lu = self.cn.as_ref().expect("scheme has a Crank–Nicolson factor");
        let lu_u = self.op.apply(u);
        let half = self.dt * T::half();
        let rhs: Vec<T> = u.iter().zip(&lu_u).map(|(a, b)| *a + half * *b).collect();
        lu.solve(&rhs)
    }
}

/// One implicit step.
pub fn heat_step<T: Real>(op: &ModeOperator<T>, u: &[T], dt: T, scheme: Scheme) -> Result<Vec<T>> {
    let s = Stepper::new(op, dt, scheme)?;
    Ok(s.step(u, 0))
}

/// Integrates to `t_end` with steps no longer than `dt`, recording every step.
pub fn solve_heat<T: Real>(op: &ModeOperator<T>, u0: &[T], t_end: T, dt: T, scheme: Scheme) -> Result<HeatSolution<T>> {
    if u0.len() != op.len() {
        return Err(Error::Config(format!("initial field has {} values, operator has {}", u0.len(), op.len())));
    }
    if !(t_end > T::zero()) || !(dt > T::zero()) {
        return Err(Error::Domain("need t_end > 0 and dt > 0".into()));
    }
    let steps = (t_end / dt).ceil().to_f64_lossy().max(1.0) as usize;
    let dt = t_end / T::from_usize_lossy(steps);
    let stepper = Stepper::new(op, dt, scheme)?;
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    times.push(T::zero());
    values.push(u0.to_vec());
    for k in 0..steps {
        let next = stepper.step(values.last().expect("nonempty"), k);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular(k));
        }
        values.push(next);
        times.push(dt * T::from_usize_lossy(k + 1));
    }
    Ok(HeatSolution { l: op.l, times, values })
}

/// `μ`-normalized indicator of node `j`: the discrete delta.
pub fn delta<T: Real>(mu: &[T], j: usize) -> Vec<T> {
    let mut u = vec![T::zero(); mu.len()];
    u[j] = T::one() / mu[j];
    u
}

/// Kernel column `H(·, y_j, t)` by time stepping from the discrete delta.
pub fn stepped_column<T: Real>(op: &ModeOperator<T>, j: usize, t: T, dt: T, scheme: Scheme) -> Result<Vec<T>> {
    let sol = solve_heat(op, &delta(op.measures(), j), t, dt, scheme)?;
    Ok(sol.last().to_vec())
}

/// `Σ μ_i u_i`.
pub fn mass<T: Real>(field: &[T], grid: &RadialGrid<T>) -> T {
    grid.integrate(field)
}

/// `ln(u(x_i, t_s) / u(y_j, t_t))` for recorded time indices `s ≤ t`.
pub fn harnack_quotient<T: Real>(sol: &HeatSolution<T>, (i, s): (usize, usize), (j, t): (usize, usize)) -> Result<T> {
    if s > t {
        return Err(Error::Domain(format!("need s ≤ t, got time indices {s} > {t}")));
    }
    let a = sol.values[s][i];
    let b = sol.values[t][j];
    if !(a > T::zero()) {
        return Err(Error::NonPositive { node: i, value: a.to_f64_lossy() });
    }
    if !(b > T::zero()) {
        return Err(Error::NonPositive { node: j, value: b.to_f64_lossy() });
    }
    Ok((a / b).ln())
}

/// Both sides of the Davies double-integral estimate for two node sets of a
/// zonal kernel: `∬_{B1×B2} H dμ dμ` and `√(V(B1) V(B2)) e^{-d²/(4t) - μ₁ t}`.
pub fn davies_double_integral<T: Real>(
    kernel: &SpectralKernel<T>,
    b1: Range<usize>,
    b2: Range<usize>,
    t: T,
    d: T,
    mu1: T,
) -> Result<(T, T)> {
    kernel.check_truncation(t)?;
    let mu = kernel.spectrum().measures();
    let part = |v: &[T], r: &Range<usize>| -> T { r.clone().map(|i| v[i] * mu[i]).sum() };
    let lhs: T = kernel
        .spectrum()
        .entries()
        .iter()
        .filter(|e| e.l == 0)
        .map(|e| (-e.lambda * t).exp() * part(&e.vector, &b1) * part(&e.vector, &b2))
        .sum();
    let v1: T = b1.map(|i| mu[i]).sum();
    let v2: T = b2.map(|i| mu[i]).sum();
    let rhs = (v1 * v2).sqrt() * (-d * d / (T::lit(4.0) * t) - mu1 * t).exp();
    Ok((lhs, rhs))
}

/// Mass at time `t` of the Dirichlet heat kernel of the ball of radius `R`
/// around the source (the pole on pole caps, the midpoint of an interval,
/// `r = 0` on a circle), for each radius in `radii`. Every truncation uses
/// spacing close to `h`.
pub fn dirichlet_mass_profile(m: &ModelManifold, radii: &[f64], t: f64, h: f64) -> Result<Vec<f64>> {
    if !(t > 0.0) || !(h > 0.0) {
        return Err(Error::Domain("need t > 0 and h > 0".into()));
    }
    let (lo, hi) = m.bounds();
    let cut = |inside: bool| if inside || m.is_noncompact_truncation() { Bc::Dirichlet } else { Bc::Neumann };
    let mut out = Vec::with_capacity(radii.len());
    for &radius in radii {
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("truncation radius must be positive, got {radius}")));
        }
        let (man, a, b, src_at, bcs) = match m.domain() {
            Domain::PoleCap { .. } => {
                let b = radius.min(hi);
                let right = if b >= hi && m.far_end() == FarEnd::Pole { Bc::Pole } else { cut(b < hi) };
                (m.clone(), 0.0, b, 0.0, (Bc::Pole, right))
            }
            Domain::Interval { .. } => {
                let c = 0.5 * (lo + hi);
                let (a, b) = ((c - radius).max(lo), (c + radius).min(hi));
                (m.clone(), a, b, c, (cut(a > lo), cut(b < hi)))
            }
            Domain::Circle { length } => {
                if 2.0 * radius >= length {
                    out.push(1.0);
                    continue;
                }
                let arc = ModelManifold::new(
                    m.n(),
                    Domain::Interval { r_min: -radius, r_max: radius },
                    Warp::Unit,
                    m.density().clone(),
                )?;
                (arc, -radius, radius, 0.0, (Bc::Dirichlet, Bc::Dirichlet))
            }
        };
        let cells = (((b - a) / h).round() as usize).max(4);
        let grid = RadialGrid::<f64>::on_interval(&man, a, b, cells)?;
        let op = assemble_mode_operator(&grid, 0, bcs)?;
        let src = grid.locate(src_at);
        let mut k = 32.min(cells);
        let pairs = loop {
            let pairs = mode_spectrum(&op, k)?;
            let lam0 = pairs[0].lambda;
            if k == cells || pairs.last().expect("k ≥ 1").lambda >= lam0 + TRUNCATION_EXPONENT / t {
                break pairs;
            }
            k = (2 * k).min(cells);
        };
        let mu = grid.measures();
        let total: f64 = pairs
            .iter()
            .map(|p| {
                let avg: f64 = p.vector.iter().zip(mu).map(|(v, w)| v * w).sum();
                (-p.lambda * t).exp() * p.vector[src] * avg
            })
            .sum();
        out.push(total);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::full_spectrum;
    use crate::profile::Profile;
    use std::f64::consts::PI;

    fn interval_op(m: usize) -> (RadialGrid<f64>, ModeOperator<f64>) {
        let man = ModelManifold::new(2, Domain::Interval { r_min: 0.0, r_max: PI }, Warp::Unit, Profile::parse("0.2*cos(r)").unwrap()).unwrap();
        let g = RadialGrid::new(&man, m).unwrap();
        let op = assemble_mode_operator(&g, 0, g.natural_bcs()).unwrap();
        (g, op)
    }

    #[test]
    fn eigenvector_decays_exponentially() {
        let (_, op) = interval_op(200);
        let sp = mode_spectrum(&op, 3).unwrap();
        let u0 = &sp[2].vector;
        let sol = solve_heat(&op, u0, 0.5, 1e-3, Scheme::CrankNicolson).unwrap();
        let decay = (-sp[2].lambda * 0.5).exp();
        let err = sol.last().iter().zip(u0).map(|(a, b)| (a - decay * b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn backward_euler_keeps_sign_and_mass() {
        let (g, op) = interval_op(100);
        let u0 = delta(g.measures(), 17);
        let m0 = mass(&u0, &g);
        let sol = solve_heat(&op, &u0, 0.2, 0.01, Scheme::BackwardEuler).unwrap();
        let mut prev = m0;
        for u in &sol.values {
            assert!(u.iter().all(|v| *v >= 0.0));
            let m = mass(u, &g);
            assert!((m - prev).abs() < 1e-12);
            prev = m;
        }
    }

    #[test]
    fn kernel_is_symmetric_and_tends_to_inverse_volume() {
        let (g, op) = interval_op(120);
        let _ = op;
        let sp = full_spectrum(&g, g.natural_bcs(), 0, 120).unwrap();
        let k = SpectralKernel::new(sp);
        let a = k.eval(3, 90, 0.1).unwrap();
        let b = k.eval(90, 3, 0.1).unwrap();
        assert!((a - b).abs() < 1e-12);
        let inv = 1.0 / g.total_measure();
        assert!((k.eval(3, 90, 60.0).unwrap() - inv).abs() < 1e-10);
        assert!(k.eval(3, 90, 0.0).is_err());
    }

    #[test]
    fn harnack_quotient_basics() {
        let sol = HeatSolution { l: 0, times: vec![0.0, 1.0], values: vec![vec![1.0, 2.0], vec![0.5, -1.0]] };
        assert_eq!(harnack_quotient(&sol, (0, 0), (0, 0)).unwrap(), 0.0);
        assert!((harnack_quotient(&sol, (1, 0), (0, 1)).unwrap() - 4f64.ln()).abs() < 1e-15);
        assert!(harnack_quotient(&sol, (0, 0), (1, 1)).is_err());
        assert!(harnack_quotient(&sol, (0, 1), (0, 0)).is_err());
    }
}
