//! Banded LU with partial pivoting, and the folding permutation that turns a
//! cyclic tridiagonal matrix into a pentadiagonal one.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// General band matrix with `kl` sub- and `ku` super-diagonals, stored with
/// room for the `kl` extra super-diagonals created by row interchanges.
#[derive(Clone, Debug)]
pub struct BandMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Real> BandMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![T::zero(); n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if j + self.kl < i || j > i + self.ku + self.kl {
            T::zero()
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Adds `v` to entry `(i, j)`, which must lie inside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            for j in lo..=hi {
                *yi += self.data[self.idx(i, j)] * x[j];
            }
        }
        y
    }

    /// Factorizes in place. With `perturb_zero_pivots`, exactly singular
    /// pivots are replaced by a tiny multiple of the matrix scale, which is
    /// what inverse iteration wants; otherwise they are an error.
    pub fn factor(mut self, perturb_zero_pivots: bool) -> Result<BandLu<T>> {
        let n = self.n;
        let scale = self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let tiny = T::epsilon() * scale.max(T::min_positive_value());
        let mut piv = vec![0usize; n];
        let mut mult = vec![T::zero(); n * self.kl.max(1)];
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for r in k + 1..=last_row {
                let v = self.data[self.idx(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            piv[k] = p;
            let last_col = (k + self.ku + self.kl).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (self.idx(k, j), self.idx(p, j));
                    self.data.swap(a, b);
                }
            }
            let pk = self.idx(k, k);
            if self.data[pk] == T::zero() || !self.data[pk].is_finite() {
                if perturb_zero_pivots && self.data[pk] == T::zero() {
                    self.data[pk] = tiny;
                } else {
                    return Err(Error::Singular(k));
                }
            }
            let pivot = self.data[pk];
            for r in k + 1..=last_row {
                let rk = self.idx(r, k);
                let m = self.data[rk] / pivot;
                self.data[rk] = T::zero();
                mult[k * self.kl.max(1) + (r - k - 1)] = m;
                if m != T::zero() {
                    for j in k + 1..=last_col {
                        let kj = self.idx(k, j);
                        let rj = self.idx(r, j);
                        let v = self.data[kj];
                        self.data[rj] -= m * v;
                    }
                }
            }
        }
        Ok(BandLu { a: self, piv, mult })
    }
}

#[derive(Clone, Debug)]
pub struct BandLu<T> {
    a: BandMatrix<T>,
    piv: Vec<usize>,
    mult: Vec<T>,
}

impl<T: Real> BandLu<T> {
    pub fn solve_in_place(&self, b: &mut [T]) {
        let a = &self.a;
        let n = a.n;
        let kl = a.kl;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let last_row = (k + kl).min(n - 1);
            let bk = b[k];
            for r in k + 1..=last_row {
                b[r] -= self.mult[k * kl.max(1) + (r - k - 1)] * bk;
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + a.ku + kl).min(n - 1);
            let mut s = b[k];
            for j in k + 1..=last_col {
                s -= a.data[a.idx(k, j)] * b[j];
            }
            b[k] = s / a.data[a.idx(k, k)];
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Ordering `0, M-1, 1, M-2, 2, …`: cycle neighbours end up at most two
/// positions apart.
pub fn fold_order(m: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(m);
    let (mut lo, mut hi) = (0usize, m);
    while lo < hi {
        order.push(lo);
        lo += 1;
        if lo < hi {
            hi -= 1;
            order.push(hi);
        }
    }
    order
}

/// Symmetric tridiagonal matrix with an optional cyclic corner entry.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
    /// Entry `(0, M-1)` for periodic problems.
    pub wrap: Option<T>,
}

impl<T: Real> SymTridiagonal<T> {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let m = self.dim();
        let mut y: Vec<T> = (0..m).map(|i| self.diag[i] * x[i]).collect();
        for i in 0..m.saturating_sub(1) {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        if let Some(w) = self.wrap {
            y[0] += w * x[m - 1];
            y[m - 1] += w * x[0];
        }
        y
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> T {
        let m = self.dim();
        let mut best = T::zero();
        for i in 0..m {
            let mut s = self.diag[i].abs();
            if i > 0 {
                s += self.off[i - 1].abs();
            }
            if i + 1 < m {
                s += self.off[i].abs();
            }
            if let Some(w) = self.wrap {
                if i == 0 || i + 1 == m {
                    s += w.abs();
                }
            }
            best = best.max(s);
        }
        best
    }

    /// Factorization of `alpha·I + beta·self`; periodic matrices are folded into a band.
    pub fn shifted_lu(&self, alpha: T, beta: T, perturb_zero_pivots: bool) -> Result<ShiftedLu<T>> {
        let diag: Vec<T> = self.diag.iter().map(|d| alpha + beta * *d).collect();
        let off: Vec<T> = self.off.iter().map(|e| beta * *e).collect();
        let wrap = self.wrap.map(|w| (beta * w, beta * w));
        factor_tridiagonal(&diag, &off, &off, wrap, perturb_zero_pivots)
    }
}

/// LU of the (possibly cyclic) tridiagonal matrix with the given diagonal,
/// super-diagonal `upper[i] = (i, i+1)`, sub-diagonal `lower[i] = (i+1, i)`
/// and corner entries `wrap = ((0, M-1), (M-1, 0))`.
pub fn factor_tridiagonal<T: Real>(
    diag: &[T],
    upper: &[T],
    lower: &[T],
    wrap: Option<(T, T)>,
    perturb_zero_pivots: bool,
) -> Result<ShiftedLu<T>> {
    let m = diag.len();
    match wrap {
        None => {
            let mut b = BandMatrix::zeros(m, 1, 1);
            for i in 0..m {
                b.add(i, i, diag[i]);
                if i + 1 < m {
                    b.add(i, i + 1, upper[i]);
                    b.add(i + 1, i, lower[i]);
                }
            }
            Ok(ShiftedLu { lu: b.factor(perturb_zero_pivots)?, order: None })
        }
        Some((top_right, bottom_left)) => {
            let order = fold_order(m);
            let mut pos = vec![0usize; m];
            for (p, &o) in order.iter().enumerate() {
                pos[o] = p;
            }
            let mut b = BandMatrix::zeros(m, 2, 2);
            for i in 0..m {
                b.add(pos[i], pos[i], diag[i]);
            }
            for i in 0..m - 1 {
                b.add(pos[i], pos[i + 1], upper[i]);
                b.add(pos[i + 1], pos[i], lower[i]);
            }
            // With two nodes the seam couples the same pair again.
            b.add(pos[0], pos[m - 1], top_right);
            b.add(pos[m - 1], pos[0], bottom_left);
            Ok(ShiftedLu { lu: b.factor(perturb_zero_pivots)?, order: Some(order) })
        }
    }
}

#[derive(Clone, Debug)]
pub struct ShiftedLu<T> {
    lu: BandLu<T>,
    order: Option<Vec<usize>>,
}

impl<T: Real> ShiftedLu<T> {
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        match &self.order {
            None => self.lu.solve(b),
            Some(order) => {
                let mut y: Vec<T> = order.iter().map(|&o| b[o]).collect();
                self.lu.solve_in_place(&mut y);
                let mut x = vec![T::zero(); b.len()];
                for (p, &o) in order.iter().enumerate() {
                    x[o] = y[p];
                }
                x
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(t: &SymTridiagonal<f64>, alpha: f64, beta: f64, x: &[f64], b: &[f64]) -> f64 {
        let tx = t.mul_vec(x);
        tx.iter().zip(x).zip(b).map(|((a, xi), bi)| (alpha * xi + beta * a - bi).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn fold_order_keeps_neighbours_close() {
        for m in 3..12 {
            let order = fold_order(m);
            let mut pos = vec![0; m];
            for (p, &o) in order.iter().enumerate() {
                pos[o] = p;
            }
            for i in 0..m {
                let j = (i + 1) % m;
                assert!((pos[i] as i64 - pos[j] as i64).abs() <= 2, "m = {m}, i = {i}");
            }
        }
    }

    #[test]
    fn solves_tridiagonal_and_cyclic() {
        let m = 9;
        let diag: Vec<f64> = (0..m).map(|i| 0.3 + (i as f64).sin()).collect();
        let off: Vec<f64> = (0..m - 1).map(|i| 1.0 + 0.1 * i as f64).collect();
        let b: Vec<f64> = (0..m).map(|i| (i as f64 * 0.7).cos()).collect();
        for wrap in [None, Some(0.8)] {
            let t = SymTridiagonal { diag: diag.clone(), off: off.clone(), wrap };
            let lu = t.shifted_lu(0.25, -1.5, false).unwrap();
            let x = lu.solve(&b);
            assert!(residual(&t, 0.25, -1.5, &x, &b) < 1e-12);
        }
    }

    #[test]
    fn singular_pivot_is_reported() {
        let t = SymTridiagonal { diag: vec![1.0, 1.0], off: vec![1.0], wrap: None };
        assert!(matches!(t.shifted_lu(0.0, 1.0, false), Err(Error::Singular(_))));
        assert!(t.shifted_lu(0.0, 1.0, true).is_ok());
    }
}
