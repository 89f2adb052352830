//! Symmetric tridiagonal (optionally cyclic) eigensolver: inertia counts,
//! bisection, inverse iteration. Also a small dense Jacobi solver.

use super::band::SymTridiagonal;
use crate::error::{Error, Result};
use crate::scalar::Real;

impl<T: Real> SymTridiagonal<T> {
    fn pivmin(&self) -> T {
        let emax = self.off.iter().chain(self.wrap.iter()).fold(T::one(), |m, e| m.max(*e * *e));
        T::min_positive_value() * emax
    }

    /// Number of eigenvalues strictly below `x` (Sylvester inertia of `A - xI`).
    pub fn count_below(&self, x: T) -> usize {
        let m = self.dim();
        let pivmin = self.pivmin();
        let guard = |q: T| if q.abs() < pivmin { -pivmin } else { q };
        match self.wrap {
            Some(w) if m >= 3 => {
                // Symmetric elimination of rows 0..M-2 keeping the last row as a border.
                let mut neg = 0;
                let mut p = guard(self.diag[0] - x);
                let mut g = w;
                let mut s = self.diag[m - 1] - x;
                for i in 0..m - 2 {
                    if p < T::zero() {
                        neg += 1;
                    }
                    let l = self.off[i] / p;
                    s -= g * g / p;
                    let next_g = if i + 1 == m - 2 { self.off[m - 2] } else { T::zero() } - l * g;
                    p = guard(self.diag[i + 1] - x - l * self.off[i]);
                    g = next_g;
                }
                if p < T::zero() {
                    neg += 1;
                }
                s -= g * g / p;
                if guard(s) < T::zero() {
                    neg += 1;
                }
                neg
            }
            _ => {
                let off = |i: usize| match (self.wrap, m) {
                    (Some(w), 2) => self.off[i] + w,
                    _ => self.off[i],
                };
                let mut neg = 0;
                let mut q = guard(self.diag[0] - x);
                if q < T::zero() {
                    neg += 1;
                }
                for i in 1..m {
                    let e = off(i - 1);
                    q = guard(self.diag[i] - x - e * e / q);
                    if q < T::zero() {
                        neg += 1;
                    }
                }
                neg
            }
        }
    }

    fn gershgorin(&self) -> (T, T) {
        let m = self.dim();
        let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
        for i in 0..m {
            let mut r = T::zero();
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < m {
                r += self.off[i].abs();
            }
            if let Some(w) = self.wrap {
                if i == 0 || i + 1 == m {
                    r += w.abs();
                }
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k` smallest eigenvalues by bisection on inertia counts.
    pub fn smallest_eigenvalues(&self, k: usize) -> Vec<T> {
        let m = self.dim();
        let k = k.min(m);
        let (glo, ghi) = self.gershgorin();
        let norm = glo.abs().max(ghi.abs()).max(T::min_positive_value());
        let abs_tol = T::epsilon() * norm;
        let mut out = Vec::with_capacity(k);
        let mut lo_start = glo;
        for j in 0..k {
            let (mut lo, mut hi) = (lo_start, ghi);
            for _ in 0..400 {
                let tol = abs_tol.max(T::lit(4.0) * T::epsilon() * lo.abs().max(hi.abs()));
                if hi - lo <= tol {
                    break;
                }
                let mid = (lo + hi) * T::half();
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.count_below(mid) > j {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            out.push((lo + hi) * T::half());
            lo_start = lo;
        }
        out
    }

    /// Eigenpairs for the `k` smallest eigenvalues, eigenvectors orthonormal.
    pub fn smallest_eigenpairs(&self, k: usize) -> Result<Vec<(T, Vec<T>)>> {
        let m = self.dim();
        let values = self.smallest_eigenvalues(k);
        let norm = self.norm_inf().max(T::min_positive_value());
        let cluster_gap = T::lit(1e-7).max(T::lit(1000.0) * T::epsilon()) * norm;
        let res_tol = T::lit(64.0) * T::epsilon() * norm * T::from_usize_lossy(m).sqrt().max(T::one());
        let mut pairs: Vec<(T, Vec<T>)> = Vec::with_capacity(values.len());
        let mut cluster_start = 0;
        for (j, &lam) in values.iter().enumerate() {
            if j > 0 && lam - values[j - 1] > cluster_gap {
                cluster_start = j;
            }
            let lu = self.shifted_lu(-lam, T::one(), true)?;
            let mut x = start_vector::<T>(m, j as u64);
            let mut converged = false;
            let mut theta = lam;
            let mut residual = T::infinity();
            for it in 0..8 {
                x = lu.solve(&x);
                for (_, v) in &pairs[cluster_start..j] {
                    let d = dot(&x, v);
                    for (xi, vi) in x.iter_mut().zip(v) {
                        *xi -= d * *vi;
                    }
                }
                let nx = dot(&x, &x).sqrt();
                if !(nx > T::zero()) || !nx.is_finite() {
                    return Err(Error::Convergence { iterations: it + 1, residual: f64::INFINITY });
                }
                for xi in x.iter_mut() {
                    *xi /= nx;
                }
                let ax = self.mul_vec(&x);
                theta = dot(&ax, &x);
                residual = ax.iter().zip(&x).map(|(a, b)| (*a - theta * *b) * (*a - theta * *b)).sum::<T>().sqrt();
                if it >= 1 && residual <= res_tol {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::Convergence { iterations: 8, residual: residual.to_f64_lossy() });
            }
            orient(&mut x);
            pairs.push((theta, x));
        }
        Ok(pairs)
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// Makes the first non-negligible component positive.
fn orient<T: Real>(x: &mut [T]) {
    let big = x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if let Some(first) = x.iter().find(|v| v.abs() > T::lit(1e-3) * big) {
        if *first < T::zero() {
            for v in x.iter_mut() {
                *v = -*v;
            }
        }
    }
}

/// Deterministic pseudo-random start vector (splitmix64).
fn start_vector<T: Real>(m: usize, seed: u64) -> Vec<T> {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0xD1B5_4A32_D192_ED03;
    (0..m)
        .map(|_| {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            T::lit((z >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
        })
        .collect()
}

/// Cyclic Jacobi for a small dense symmetric matrix. Returns eigenvalues in
/// ascending order with eigenvectors as columns (`vectors[k]` is the k-th).
pub fn jacobi_eigen<T: Real>(mut a: Vec<Vec<T>>) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let n = a.len();
    let mut v: Vec<Vec<T>> = (0..n).map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect();
    let total: T = a.iter().flatten().map(|x| *x * *x).sum::<T>().sqrt();
    let mut off = T::zero();
    for _ in 0..100 {
        off = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                off += a[i][j] * a[i][j];
            }
        }
        off = off.sqrt();
        if off <= T::epsilon() * total * T::lit(n as f64) || off == T::zero() {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&x, &y| a[x][x].partial_cmp(&a[y][y]).unwrap_or(std::cmp::Ordering::Equal));
            let values = idx.iter().map(|&k| a[k][k]).collect();
            let vectors = idx.iter().map(|&k| (0..n).map(|r| v[r][k]).collect()).collect();
            return Ok((values, vectors));
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::two() * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    Err(Error::Convergence { iterations: 100, residual: off.to_f64_lossy() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(m: usize, wrap: bool) -> SymTridiagonal<f64> {
        SymTridiagonal { diag: vec![2.0; m], off: vec![-1.0; m - 1], wrap: wrap.then_some(-1.0) }
    }

    #[test]
    fn dirichlet_path_graph() {
        let m = 50;
        let t = laplacian_1d(m, false);
        let ev = t.smallest_eigenvalues(5);
        for (k, v) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (m + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13, "{k}: {v} vs {exact}");
        }
    }

    #[test]
    fn cycle_graph_has_double_eigenvalues() {
        let m = 40;
        let t = laplacian_1d(m, true);
        let pairs = t.smallest_eigenpairs(7).unwrap();
        let exact = |k: usize| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * k as f64 / m as f64).cos();
        let expect = [exact(0), exact(1), exact(1), exact(2), exact(2), exact(3), exact(3)];
        for ((l, _), e) in pairs.iter().zip(expect) {
            assert!((l - e).abs() < 1e-12);
        }
        for i in 0..pairs.len() {
            for j in 0..pairs.len() {
                let d = dot(&pairs[i].1, &pairs[j].1);
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10, "({i},{j}) = {d}");
            }
        }
    }

    #[test]
    fn jacobi_small_matrix() {
        let a = vec![vec![4.0, 1.0, 0.5], vec![1.0, 3.0, 0.2], vec![0.5, 0.2, 1.0]];
        let (vals, vecs) = jacobi_eigen(a.clone()).unwrap();
        for (lam, v) in vals.iter().zip(&vecs) {
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| a[i][j] * v[j]).sum();
                assert!((av - lam * v[i]).abs() < 1e-12);
            }
        }
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }
}
