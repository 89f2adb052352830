//! Adaptive Gauss–Kronrod (7/15) quadrature.

use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    /// Number of equal panels the interval is split into before adapting.
    pub panels: usize,
    pub max_depth: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rel: 1e-8, abs: 1e-10, panels: 64, max_depth: 40 }
    }
}

fn kronrod<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let c = (a + b) * T::half();
    let h = (b - a) * T::half();
    let fc = f(c);
    let mut k = fc * T::lit(WGK[7]);
    let mut g = fc * T::lit(WG[3]);
    for i in 0..7 {
        let dx = h * T::lit(XGK[i]);
        let s = f(c - dx) + f(c + dx);
        k += s * T::lit(WGK[i]);
        if i % 2 == 1 {
            g += s * T::lit(WG[i / 2]);
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Integrates `f` over `[a, b]`.
///
/// Each of the initial panels is bisected until its Kronrod/Gauss difference
/// falls below `max(abs, rel·|panel estimate|)` scaled to the panel length.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: Tolerance) -> T {
    if a == b {
        return T::zero();
    }
    if b < a {
        return -integrate(f, b, a, tol);
    }
    let panels = tol.panels.max(1);
    let width = (b - a) / T::from_usize_lossy(panels);
    let total_len = b - a;
    let mut sum = T::zero();
    for p in 0..panels {
        let lo = a + width * T::from_usize_lossy(p);
        let hi = if p + 1 == panels { b } else { lo + width };
        sum += adapt(&f, lo, hi, total_len, tol, 0);
    }
    sum
}

fn adapt<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, total_len: T, tol: Tolerance, depth: usize) -> T {
    let (v, err) = kronrod(f, a, b);
    let share = (b - a) / total_len;
    let allowed = (T::lit(tol.rel) * v.abs()).max(T::lit(tol.abs) * share);
    if err <= allowed || depth >= tol.max_depth || !err.is_finite() {
        return v;
    }
    let m = (a + b) * T::half();
    adapt(f, a, m, total_len, tol, depth + 1) + adapt(f, m, b, total_len, tol, depth + 1)
}

/// Composite trapezoid rule with `n` subintervals.
pub fn trapezoid<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, n: usize) -> T {
    let h = (b - a) / T::from_usize_lossy(n);
    let mut s = (f(a) + f(b)) * T::half();
    for i in 1..n {
        s += f(a + h * T::from_usize_lossy(i));
    }
    s * h
}
