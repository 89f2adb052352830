use super::{assemble_mode_operator, angular_eigenvalue, Bc, ModeOperator, RadialGrid};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// One radial eigenpair of a mode operator; the vector is `μ`-normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct ModePair<T> {
    pub lambda: T,
    pub j: usize,
    pub vector: Vec<T>,
}

/// The `k_max` smallest eigenpairs of `-L`, computed on the symmetrized form
/// and mapped back with `u = D^{-1/2} v`.
pub fn mode_spectrum<T: Real>(op: &ModeOperator<T>, k_max: usize) -> Result<Vec<ModePair<T>>> {
    if k_max > op.len() {
        return Err(Error::Config(format!("requested {k_max} eigenpairs from a {}-node operator", op.len())));
    }
    let a = op.symmetric_negative();
    let pairs = a.smallest_eigenpairs(k_max)?;
    Ok(pairs
        .into_iter()
        .enumerate()
        .map(|(j, (lambda, v))| ModePair {
            lambda,
            j,
            vector: v.iter().zip(op.measures()).map(|(x, m)| *x / m.sqrt()).collect(),
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralEntry<T> {
    pub lambda: T,
    pub l: usize,
    pub j: usize,
    pub multiplicity: usize,
    pub vector: Vec<T>,
}

/// Merged multi-mode spectrum, sorted by `(λ, l, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<T> {
    entries: Vec<SpectralEntry<T>>,
    complete_below: T,
    /// Per mode: the last computed eigenvalue when the mode was truncated.
    mode_complete: Vec<T>,
    mu: Vec<T>,
}

impl<T: Real> Spectrum<T> {
    pub fn entries(&self) -> &[SpectralEntry<T>] {
        &self.entries
    }

    pub fn measures(&self) -> &[T] {
        &self.mu
    }

    /// Every eigenvalue strictly below this value is present.
    pub fn complete_below(&self) -> T {
        self.complete_below
    }

    pub fn require_complete(&self, needed: T) -> Result<()> {
        Self::check(needed, self.complete_below)
    }

    /// Every eigenvalue of mode `l` strictly below this value is present.
    pub fn mode_complete_below(&self, l: usize) -> T {
        self.mode_complete.get(l).copied().unwrap_or(T::zero())
    }

    pub fn require_mode_complete(&self, l: usize, needed: T) -> Result<()> {
        Self::check(needed, self.mode_complete_below(l))
    }

    fn check(needed: T, have: T) -> Result<()> {
        if needed >= have {
            return Err(Error::Incomplete { needed: needed.to_f64_lossy(), complete_below: have.to_f64_lossy() });
        }
        Ok(())
    }

    /// Eigenvalues with multiplicities expanded: `(λ, l, j)` in rank order,
    /// restricted to the complete part.
    pub fn expanded(&self) -> Vec<(T, usize, usize)> {
        self.entries
            .iter()
            .filter(|e| e.lambda < self.complete_below)
            .flat_map(|e| std::iter::repeat((e.lambda, e.l, e.j)).take(e.multiplicity))
            .collect()
    }

    /// Entries of mode `l` in increasing order.
    pub fn mode(&self, l: usize) -> impl Iterator<Item = &SpectralEntry<T>> {
        self.entries.iter().filter(move |e| e.l == l)
    }

    /// Smallest nonzero eigenvalue (above `threshold`).
    pub fn first_above(&self, threshold: T) -> Option<T> {
        self.entries.iter().map(|e| e.lambda).find(|l| *l > threshold)
    }
}

/// Assembles and solves modes `0..=l_max` and merges them.
///
/// Line models only have the zonal mode, so `l_max` is ignored there.
pub fn full_spectrum<T: Real>(grid: &RadialGrid<T>, bcs: (Bc, Bc), l_max: usize, k_per_mode: usize) -> Result<Spectrum<T>> {
    let l_max = if grid.is_line() { 0 } else { l_max };
    let k = k_per_mode.min(grid.len());
    let mut entries = Vec::new();
    let fmax2 = grid.warp_at_nodes().iter().fold(T::zero(), |m, f| m.max(*f * *f));
    let mut complete = if grid.is_line() {
        T::infinity()
    } else {
        T::lit(angular_eigenvalue(grid.dimension(), l_max + 1)) / fmax2
    };
    let mut mode_complete = Vec::with_capacity(l_max + 1);
    for l in 0..=l_max {
        let op = assemble_mode_operator(grid, l, bcs)?;
        let pairs = mode_spectrum(&op, k)?;
        let mut mc = T::infinity();
        if k < grid.len() {
            if let Some(last) = pairs.last() {
                mc = last.lambda;
                complete = complete.min(last.lambda);
            }
        }
        mode_complete.push(mc);
        entries.extend(pairs.into_iter().map(|p| SpectralEntry {
            lambda: p.lambda,
            l,
            j: p.j,
            multiplicity: op.multiplicity,
            vector: p.vector,
        }));
    }
    entries.sort_by(|a, b| {
        a.lambda
            .partial_cmp(&b.lambda)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.l.cmp(&b.l))
            .then(a.j.cmp(&b.j))
    });
    Ok(Spectrum { entries, complete_below: complete, mode_complete, mu: grid.measures().to_vec() })
}
