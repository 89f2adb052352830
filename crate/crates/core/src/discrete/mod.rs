//! Finite-volume discretization of `Δ_φ` per angular mode.
//!
//! Nodes are cell centers `r_i = r_lo + (i - 1/2) h`, so no node sits on a pole.
//! With node measures `μ_i` and face weights `w_{i±1/2}` the mode-`l` operator is
//!
//! `(L u)_i = (1/μ_i)[w_{i+1/2}(u_{i+1} - u_i)/h - w_{i-1/2}(u_i - u_{i-1})/h] - γ_l u_i / f(r_i)²`
//!
//! which is symmetric in the `μ`-weighted inner product by construction.

pub mod band;
pub mod eigen;
mod spectrum;

pub use band::SymTridiagonal;
pub use spectrum::{full_spectrum, mode_spectrum, ModePair, SpectralEntry, Spectrum};

use crate::error::{Error, Result};
use crate::geometry::{Domain, FarEnd, ModelManifold};
use crate::scalar::Real;

/// One value per grid node.
pub type RadialField<T> = Vec<T>;

#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid<T> {
    lo: T,
    hi: T,
    h: T,
    nodes: Vec<T>,
    mu: Vec<T>,
    /// Face weights `ω f^{n-1} e^{-φ}` at the `M + 1` faces.
    face_w: Vec<T>,
    f: Vec<T>,
    periodic: bool,
    /// `f` vanishes at the left / right face.
    pole: (bool, bool),
    line: bool,
    n: usize,
}

impl<T: Real> RadialGrid<T> {
    /// Grid over the whole domain.
    pub fn new(m: &ModelManifold, cells: usize) -> Result<Self> {
        let (lo, hi) = m.bounds();
        Self::build(m, lo, hi, cells)
    }

    /// Grid over the pole-centered ball `[0, radius]` (or a sub-interval of a line model).
    pub fn on_interval(m: &ModelManifold, lo: f64, hi: f64, cells: usize) -> Result<Self> {
        let (a, b) = m.bounds();
        if lo < a - 1e-12 || hi > b + 1e-12 || !(hi > lo) {
            return Err(Error::Config(format!("sub-grid [{lo}, {hi}] not inside the domain [{a}, {b}]")));
        }
        if matches!(m.domain(), Domain::Circle { .. }) && (lo != a || hi != b) {
            return Err(Error::Config("circle grids must cover the whole period".into()));
        }
        Self::build(m, lo.max(a), hi.min(b), cells)
    }

    fn build(m: &ModelManifold, lo: f64, hi: f64, cells: usize) -> Result<Self> {
        if cells < 3 {
            return Err(Error::Config(format!("need at least 3 cells, got {cells}")));
        }
        let (lo_t, hi_t) = (T::lit(lo), T::lit(hi));
        let h = (hi_t - lo_t) / T::from_usize_lossy(cells);
        let nodes: Vec<T> = (0..cells).map(|i| lo_t + (T::from_usize_lossy(i) + T::half()) * h).collect();
        let mu: Vec<T> = nodes.iter().map(|&r| m.weight(r) * h).collect();
        let face_w: Vec<T> = (0..=cells).map(|i| m.weight(lo_t + T::from_usize_lossy(i) * h)).collect();
        let f: Vec<T> = nodes.iter().map(|&r| m.f(r).v).collect();
        if let Some((i, v)) = mu.iter().enumerate().find(|(_, v)| !(**v > T::zero()) || !v.is_finite()) {
            return Err(Error::NonPositive { node: i, value: v.to_f64_lossy() });
        }
        let (a, b) = m.bounds();
        let left_pole = matches!(m.domain(), Domain::PoleCap { .. }) && lo == a;
        let right_pole = m.far_end() == FarEnd::Pole && hi == b;
        let periodic = matches!(m.domain(), Domain::Circle { .. });
        Ok(Self {
            lo: lo_t,
            hi: hi_t,
            h,
            nodes,
            mu,
            face_w,
            f,
            periodic,
            pole: (left_pole, right_pole),
            line: m.is_line_model(),
            n: m.n(),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn bounds(&self) -> (T, T) {
        (self.lo, self.hi)
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn measures(&self) -> &[T] {
        &self.mu
    }

    pub fn face_weights(&self) -> &[T] {
        &self.face_w
    }

    pub fn warp_at_nodes(&self) -> &[T] {
        &self.f
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn is_line(&self) -> bool {
        self.line
    }

    pub fn total_measure(&self) -> T {
        self.mu.iter().copied().sum()
    }

    /// Index of the node closest to `r`.
    pub fn locate(&self, r: T) -> usize {
        let x = ((r - self.lo) / self.h - T::half()).round();
        let i = x.to_f64_lossy().max(0.0) as usize;
        i.min(self.len() - 1)
    }

    /// `Σ μ_i u_i v_i`.
    pub fn inner(&self, u: &[T], v: &[T]) -> T {
        self.mu.iter().zip(u).zip(v).map(|((m, a), b)| *m * *a * *b).sum()
    }

    /// `Σ μ_i u_i`.
    pub fn integrate(&self, u: &[T]) -> T {
        self.mu.iter().zip(u).map(|(m, a)| *m * *a).sum()
    }

    /// Default boundary conditions: poles where `f` vanishes, periodic on
    /// circles, Neumann elsewhere.
    pub fn natural_bcs(&self) -> (Bc, Bc) {
        if self.periodic {
            return (Bc::Periodic, Bc::Periodic);
        }
        let left = if self.pole.0 { Bc::Pole } else { Bc::Neumann };
        let right = if self.pole.1 { Bc::Pole } else { Bc::Neumann };
        (left, right)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bc {
    Neumann,
    Dirichlet,
    Pole,
    Periodic,
}

/// `γ_l = l(l + n - 2)`.
pub fn angular_eigenvalue(n: usize, l: usize) -> f64 {
    (l * (l + n - 2)) as f64
}

/// Multiplicity of spherical harmonics of degree `l` on `S^{n-1}`.
pub fn angular_multiplicity(n: usize, l: usize) -> usize {
    if l == 0 {
        return 1;
    }
    if n == 2 {
        return 2;
    }
    // (2l+n-2)/(n-2) · C(l+n-3, n-3)
    let mut binom: u128 = 1;
    for i in 1..=(n - 3) as u128 {
        binom = binom * (l as u128 + i) / i;
    }
    ((2 * l + n - 2) as u128 * binom / (n - 2) as u128) as usize
}

/// Discretized mode-`l` operator.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeOperator<T> {
    pub l: usize,
    pub gamma: T,
    pub multiplicity: usize,
    pub bcs: (Bc, Bc),
    mu: Vec<T>,
    /// `w_{i+1/2}/h` on the interior faces.
    coupling: Vec<T>,
    /// Coupling across the periodic seam.
    wrap: Option<T>,
    diag: Vec<T>,
}

pub fn assemble_mode_operator<T: Real>(grid: &RadialGrid<T>, l: usize, bcs: (Bc, Bc)) -> Result<ModeOperator<T>> {
    let m = grid.len();
    let (left, right) = bcs;
    if (left == Bc::Periodic) != grid.periodic || (right == Bc::Periodic) != grid.periodic {
        return Err(Error::Config("periodic boundary conditions need a circle grid on both ends".into()));
    }
    for (bc, pole, side) in [(left, grid.pole.0, "left"), (right, grid.pole.1, "right")] {
        if (bc == Bc::Pole) != pole && bc != Bc::Periodic {
            return Err(Error::Config(format!(
                "{side} boundary condition {bc:?} does not match the domain (pole = {pole})"
            )));
        }
    }
    if grid.line && l > 0 {
        return Err(Error::Config("line models only carry the l = 0 mode".into()));
    }
    let h = grid.h;
    let coupling: Vec<T> = (1..m).map(|i| grid.face_w[i] / h).collect();
    let wrap = grid.periodic.then(|| grid.face_w[0] / h);
    let gamma = if grid.line { T::zero() } else { T::lit(angular_eigenvalue(grid.n, l)) };
    let mut diag = vec![T::zero(); m];
    for i in 0..m {
        let mut flux = T::zero();
        if i > 0 {
            flux += coupling[i - 1];
        }
        if i + 1 < m {
            flux += coupling[i];
        }
        if let Some(w) = wrap {
            if i == 0 || i + 1 == m {
                flux += w;
            }
        }
        if i == 0 && left == Bc::Dirichlet {
            flux += T::two() * grid.face_w[0] / h;
        }
        if i + 1 == m && right == Bc::Dirichlet {
            flux += T::two() * grid.face_w[m] / h;
        }
        diag[i] = -flux / grid.mu[i] - gamma / (grid.f[i] * grid.f[i]);
    }
    Ok(ModeOperator {
        l,
        gamma,
        multiplicity: if grid.line { 1 } else { angular_multiplicity(grid.n, l) },
        bcs,
        mu: grid.mu.clone(),
        coupling,
        wrap,
        diag,
    })
}

impl<T: Real> ModeOperator<T> {
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn measures(&self) -> &[T] {
        &self.mu
    }

    pub fn apply(&self, u: &[T]) -> Vec<T> {
        let m = self.len();
        let mut out: Vec<T> = (0..m).map(|i| self.diag[i] * u[i]).collect();
        for i in 0..m - 1 {
            let c = self.coupling[i];
            out[i] += c * u[i + 1] / self.mu[i];
            out[i + 1] += c * u[i] / self.mu[i + 1];
        }
        if let Some(w) = self.wrap {
            out[0] += w * u[m - 1] / self.mu[0];
            out[m - 1] += w * u[0] / self.mu[m - 1];
        }
        out
    }

    /// `μ`-weighted form `K = diag(μ) L` (symmetric).
    pub fn stiffness(&self) -> SymTridiagonal<T> {
        SymTridiagonal {
            diag: self.diag.iter().zip(&self.mu).map(|(d, m)| *d * *m).collect(),
            off: self.coupling.clone(),
            wrap: self.wrap,
        }
    }

    /// `-D^{1/2} L D^{-1/2}` with `D = diag(μ)`: symmetric positive semidefinite.
    pub fn symmetric_negative(&self) -> SymTridiagonal<T> {
        let m = self.len();
        SymTridiagonal {
            diag: self.diag.iter().map(|d| -*d).collect(),
            off: (0..m - 1).map(|i| -self.coupling[i] / (self.mu[i] * self.mu[i + 1]).sqrt()).collect(),
            wrap: self.wrap.map(|w| -w / (self.mu[0] * self.mu[m - 1]).sqrt()),
        }
    }

    pub fn inner(&self, u: &[T], v: &[T]) -> T {
        self.mu.iter().zip(u).zip(v).map(|((m, a), b)| *m * *a * *b).sum()
    }

    /// LU factorization of `alpha·I + beta·L`.
    pub fn factor_shifted(&self, alpha: T, beta: T) -> Result<band::ShiftedLu<T>> {
        self.factor_diag_shifted(&vec![alpha; self.len()], beta)
    }

    /// LU factorization of `diag(alpha) + beta·L`.
    pub fn factor_diag_shifted(&self, alpha: &[T], beta: T) -> Result<band::ShiftedLu<T>> {
        let m = self.len();
        if alpha.len() != m {
            return Err(Error::Config(format!("shift has {} values, operator has {m}", alpha.len())));
        }
        let diag: Vec<T> = self.diag.iter().zip(alpha).map(|(d, a)| *a + beta * *d).collect();
        let upper: Vec<T> = (0..m - 1).map(|i| beta * self.coupling[i] / self.mu[i]).collect();
        let lower: Vec<T> = (0..m - 1).map(|i| beta * self.coupling[i] / self.mu[i + 1]).collect();
        let wrap = self.wrap.map(|w| (beta * w / self.mu[0], beta * w / self.mu[m - 1]));
        band::factor_tridiagonal(&diag, &upper, &lower, wrap, false)
    }

    /// `⟨-L u, u⟩_μ / ⟨u, u⟩_μ`.
    pub fn rayleigh_quotient(&self, u: &[T]) -> Result<T> {
        if u.len() != self.len() {
            return Err(Error::Config(format!("field has {} values, grid has {}", u.len(), self.len())));
        }
        let uu = self.inner(u, u);
        if !(uu > T::zero()) {
            return Err(Error::Degenerate("Rayleigh quotient of the zero field".into()));
        }
        let lu = self.apply(u);
        Ok(-self.inner(&lu, u) / uu)
    }

    /// Dirichlet energy `⟨-L u, u⟩_μ`.
    pub fn energy(&self, u: &[T]) -> T {
        -self.inner(&self.apply(u), u)
    }
}
